"""Mean EI components against the user-to-BS density ratio.

    python3 scripts/mean_vs_density.py --model ppp --observer active --mc-trials 2000 > mean_ppp_active.csv
"""

import argparse
import csv
import sys

from emfexposure import NetworkParams, validate, with_density_ratio
from emfexposure.exposure_moments import mean_ei
from emfexposure.monte_carlo import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="ppp", choices=["ppp", "mcp1", "mcp2"])
    ap.add_argument("--observer", default="passive", choices=["passive", "active"])
    ap.add_argument("--eta", type=float, default=0.4)
    ap.add_argument("--ratios", default="1,10,100,1000,10000,100000,1000000")
    ap.add_argument("--mc-trials", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = NetworkParams(eta=args.eta)
    out = csv.writer(sys.stdout)
    cols = ["ratio", "ei_bs", "ei_ul_u", "ei_ul_tr", "ei_total", "percent_ul_u"]
    out.writerow(cols + (["mc_ei_total", "mc_ci"] if args.mc_trials else []))
    for i, ratio in enumerate(float(r) for r in args.ratios.split(",")):
        p = validate(with_density_ratio(base, args.model, ratio), args.model)
        rep = mean_ei(p, args.model, args.observer)
        row = [ratio, rep.ei_bs, rep.ei_ul_u, rep.ei_ul_tr, rep.total, rep.percent_ul_u]
        if args.mc_trials:
            m = run(p, args.model, args.observer, args.mc_trials, master_seed=args.seed + i).means
            row += [m.total, m.ci["ei_total"]]
        out.writerow([repr(float(x)) for x in row])

if __name__ == "__main__":
    main()
