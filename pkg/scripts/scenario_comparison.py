"""Mean passive EI of the two cluster scenarios against the density ratio.

    python3 scripts/scenario_comparison.py --mc-trials 2000 > scenarios.csv
"""

import argparse
import csv
import sys

from emfexposure import NetworkParams, validate, with_density_ratio
from emfexposure.exposure_moments import mean_ei
from emfexposure.monte_carlo import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratios", default="10,100,1000,10000")
    ap.add_argument("--mc-trials", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    cols = ["ratio", "mcp1", "mcp2"]
    out.writerow(cols + (["mc_mcp1", "mc_mcp2"] if args.mc_trials else []))
    for i, ratio in enumerate(float(r) for r in args.ratios.split(",")):
        row, sims = [ratio], []
        for model in ("mcp1", "mcp2"):
            p = validate(with_density_ratio(NetworkParams(), model, ratio), model)
            row.append(repr(mean_ei(p, model).total))
            if args.mc_trials:
                sims.append(repr(run(p, model, "passive", args.mc_trials, master_seed=args.seed + i).means.total))
        out.writerow(row + sims)


if __name__ == "__main__":
    main()
