"""Uplink coverage against eta, analytic and simulated.

    python3 scripts/coverage_vs_eta.py --model mcp2 --gamma-db 20 --mc-trials 10000 > coverage.csv
"""

import argparse
import csv
import sys

from emfexposure import NetworkParams, validate
from emfexposure.coverage import eta_sweep_coverage
from emfexposure.monte_carlo import coverage_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="ppp", choices=["ppp", "mcp1", "mcp2"])
    ap.add_argument("--gamma-db", type=float, default=20.0)
    ap.add_argument("--etas", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    ap.add_argument("--mc-trials", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = validate(NetworkParams(gamma=10 ** (args.gamma_db / 10)), args.model)
    etas = [float(e) for e in args.etas.split(",")]
    sweep = eta_sweep_coverage(p, args.model, etas)
    est = coverage_mc(p, args.model, etas, args.mc_trials, args.seed) if args.mc_trials else None
    out = csv.writer(sys.stdout)
    out.writerow(["eta", "coverage"] + (["mc_coverage", "mc_ci"] if est else []))
    for k, (eta, c) in enumerate(sweep.points):
        row = [eta, repr(c)]
        if est:
            row += [repr(float(est.coverage[k])), repr(float(est.ci[k]))]
        out.writerow(row)
    print(f"# argmax eta {sweep.argmax}, interior {sweep.interior_argmax}", file=sys.stderr)


if __name__ == "__main__":
    main()
