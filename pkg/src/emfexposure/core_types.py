"""Shared parameter and result types, validation and unit handling.

Everything inside the package is SI: metres, watts, hertz, linear gains.
Conversions from dB, dBi, per-km^2 and mW happen once, when a config file
is read.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised when parameters are missing, malformed or out of range.

    ``problems`` is a list of ``(field_name, message)`` pairs.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        text = "; ".join(f"{name}: {msg}" for name, msg in self.problems)
        super().__init__(text or "invalid configuration")


class UserModel(enum.Enum):
    PPP = "ppp"
    MCP1 = "mcp1"  # cluster centres form their own PPP
    MCP2 = "mcp2"  # clusters centred at base stations

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigError([("model", f"unknown user model {text!r}")]) from None

    @property
    def clustered(self):
        return self is not UserModel.PPP


class ObserverKind(enum.Enum):
    PASSIVE = "passive"
    ACTIVE = "active"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigError([("observer", f"unknown observer kind {text!r}")]) from None


@dataclass(frozen=True)
class NetworkParams:
    """Physical and model parameters, SI units throughout.

    ``window_radius=None`` means "use 30/sqrt(lambda_b)"; :func:`validate`
    fills it in.
    """

    lambda_b: float = 1e-6
    lambda_u: float = 1e-4
    lambda_c: float = 1e-6
    lambda_cu: float = 1e-4
    r_c: float = 100.0
    p_a: float = 1.0
    rho_b: float = 10.0
    rho_u: float = 8e-6
    p_max: float = 0.2
    G_b: float = 10.0
    alpha: float = 4.0
    beta: float = 2.5
    eta: float = 0.4
    sar_dl: float = 0.0042
    sar_ul: float = 0.0053
    sigma_prime_sq: float = 1e-12
    f_u: float = 2.6e9
    gamma: float = 100.0
    d_min: float = 1.0
    window_radius: float | None = None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def user_density_ratio(self):
        return self.lambda_u / self.lambda_b

    @property
    def mean_cluster_size(self):
        """Expected number of active users per cluster."""
        return self.p_a * self.lambda_cu * math.pi * self.r_c**2

    def to_config(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {float(value)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExposureBreakdown:
    ei_bs: float
    ei_ul_u: float
    ei_ul_tr: float = 0.0
    total: float = field(init=False)

    def __post_init__(self):
        for name in ("ei_bs", "ei_ul_u", "ei_ul_tr"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        object.__setattr__(self, "total", self.ei_bs + self.ei_ul_u + self.ei_ul_tr)


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical control for the transform and inversion integrals.

    ``t_min`` and ``truncation_t_max`` are relative to the decay scale of
    the characteristic function being inverted.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200_000
    truncation_t_max: float = 1e8
    t_min: float = 1e-12

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.truncation_t_max > self.t_min > 0):
            raise ValueError("need truncation_t_max > t_min > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_QUAD = QuadratureSpec()
# Inversion targets an absolute CDF error, not a relative one.
CDF_QUAD = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-7)


def validate(params: NetworkParams, model: UserModel = UserModel.PPP) -> NetworkParams:
    """Check invariants and return a fully resolved copy.

    MCP2 places one cluster on every base station, so ``lambda_c`` is tied
    to ``lambda_b``.
    """
    model = UserModel.parse(model)
    p = params
    problems = []

    def bad(name, msg):
        problems.append((name, msg))

    for name in fields(p):
        value = getattr(p, name.name)
        if value is None:
            continue
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            bad(name.name, f"must be a finite number, got {value!r}")
    if problems:
        raise ConfigError(problems)

    if p.lambda_b <= 0:
        bad("lambda_b", "density must be positive")
    if p.lambda_u < 0:
        bad("lambda_u", "density must be nonnegative")
    if p.lambda_c <= 0:
        bad("lambda_c", "density must be positive")
    if p.lambda_cu < 0:
        bad("lambda_cu", "density must be nonnegative")
    if not 0 <= p.p_a <= 1:
        bad("p_a", "must lie in [0, 1]")
    if p.rho_b < 0:
        bad("rho_b", "must be nonnegative")
    if p.rho_u <= 0:
        bad("rho_u", "must be positive")
    if p.p_max < p.rho_u:
        bad("p_max", "must be at least rho_u")
    if p.G_b <= 0:
        bad("G_b", "must be positive")
    if p.beta <= 2:
        bad("beta", "beta must exceed 2 for the exposure integrals to converge")
    if p.alpha <= 2:
        bad("alpha", "alpha must exceed 2")
    if p.eta < 0:
        bad("eta", "must be nonnegative")
    if p.r_c <= 0:
        bad("r_c", "must be positive")
    if p.d_min <= 0:
        bad("d_min", "must be positive")
    if p.sar_dl < 0 or p.sar_ul < 0:
        bad("sar_dl" if p.sar_dl < 0 else "sar_ul", "must be nonnegative")
    if p.sigma_prime_sq < 0:
        bad("sigma_prime_sq", "must be nonnegative")
    if p.f_u <= 0:
        bad("f_u", "must be positive")
    if p.gamma <= 0:
        bad("gamma", "must be positive")
    if p.window_radius is not None and p.window_radius <= 0:
        bad("window_radius", "must be positive")
    if problems:
        raise ConfigError(problems)

    changes = {}
    if p.window_radius is None:
        changes["window_radius"] = 30.0 / math.sqrt(p.lambda_b)
    if model is UserModel.MCP2 and p.lambda_c != p.lambda_b:
        changes["lambda_c"] = p.lambda_b
    # normalise ints to floats so round trips are exact
    for f in fields(p):
        v = changes.get(f.name, getattr(p, f.name))
        if isinstance(v, int):
            changes[f.name] = float(v)
    return dataclasses.replace(p, **changes) if changes else p


def with_density_ratio(params: NetworkParams, model: UserModel, ratio: float) -> NetworkParams:
    """Set the user density to ``ratio`` times lambda_b.

    For clustered users the ratio applies to the in-cluster density
    lambda_cu.
    """
    if not ratio >= 0:
        raise ConfigError([("user_density_ratio", "must be nonnegative")])
    value = ratio * params.lambda_b
    if UserModel.parse(model).clustered:
        return params.replace(lambda_cu=value)
    return params.replace(lambda_u=value)


def path_loss_at_reference(f_u: float, d0: float = 1.0) -> float:
    """Free-space gain (lambda / (4 pi d0))^2 at the reference distance."""
    wavelength = SPEED_OF_LIGHT / f_u
    return (wavelength / (4.0 * math.pi * d0)) ** 2


def normalized_noise(params: NetworkParams) -> float:
    """Noise power referred to the 1 m reference path loss."""
    if params.f_u <= 0:
        raise ConfigError([("f_u", "must be positive")])
    return params.sigma_prime_sq / path_loss_at_reference(params.f_u)


def cutoff_radius(params: NetworkParams) -> float:
    """Distance at which the power-control law reaches p_max.

    Returns ``math.inf`` when eta = 0: every user then transmits rho_u.
    """
    if params.eta == 0:
        return math.inf
    log_r0 = math.log(params.p_max / params.rho_u) / (params.alpha * params.eta)
    # beyond e^300 the cap is never reached in double precision
    return math.exp(log_r0) if log_r0 < 300 else math.inf


# --- config files ----------------------------------------------------------

_DENSITY_FIELDS = {"lambda_b", "lambda_u", "lambda_c", "lambda_cu"}
_POWER_FIELDS = {"rho_b", "rho_u", "p_max", "sigma_prime_sq"}
_GAIN_FIELDS = {"G_b", "gamma"}

_UNITS = {
    "dBi": (_GAIN_FIELDS, lambda v: 10.0 ** (v / 10.0)),
    "dB": (_GAIN_FIELDS, lambda v: 10.0 ** (v / 10.0)),
    "per_km2": (_DENSITY_FIELDS, lambda v: v * 1e-6),
    "mW": (_POWER_FIELDS, lambda v: v * 1e-3),
}


def parse_config_text(text: str, base: NetworkParams | None = None) -> NetworkParams:
    """Read ``key = value [unit]`` lines into a NetworkParams.

    Blank lines and ``#`` comments are ignored.  Keys must be NetworkParams
    field names.  Missing keys keep the value from ``base`` (defaults if
    not given).
    """
    known = {f.name for f in fields(NetworkParams)}
    values = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}"))
            continue
        key, rhs = (part.strip() for part in line.split("=", 1))
        if key not in known:
            problems.append((key, "unknown parameter"))
            continue
        if key in values:
            problems.append((key, "given more than once"))
            continue
        tokens = rhs.split()
        if len(tokens) not in (1, 2):
            problems.append((key, f"cannot parse value {rhs!r}"))
            continue
        try:
            number = float(tokens[0])
        except ValueError:
            problems.append((key, f"not a number: {tokens[0]!r}"))
            continue
        if len(tokens) == 2:
            unit = tokens[1]
            if unit not in _UNITS:
                problems.append((key, f"unknown unit {unit!r}"))
                continue
            allowed, convert = _UNITS[unit]
            if key not in allowed:
                problems.append((key, f"unit {unit!r} does not apply"))
                continue
            number = convert(number)
        values[key] = number
    if problems:
        raise ConfigError(problems)
    base = base if base is not None else NetworkParams()
    return dataclasses.replace(base, **values)


def load_config(path, model: UserModel = UserModel.PPP) -> NetworkParams:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([("config", str(exc))]) from exc
    return validate(parse_config_text(text), model)
