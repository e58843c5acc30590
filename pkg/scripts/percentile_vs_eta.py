"""95th percentile of EI for passive and active users against eta.

    python3 scripts/percentile_vs_eta.py --model ppp > p95.csv
"""

import argparse
import csv
import sys

from emfexposure import NetworkParams, validate
from emfexposure.ei_distribution import ei_quantile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="ppp", choices=["ppp", "mcp1", "mcp2"])
    ap.add_argument("--etas", default="0.2,0.4,0.6,0.8,1.0")
    ap.add_argument("--q", type=float, default=0.95)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["eta", "q_passive", "q_active"])
    for eta in (float(e) for e in args.etas.split(",")):
        p = validate(NetworkParams(eta=eta), args.model)
        qp = ei_quantile(args.q, p, args.model, "passive")
        qa = ei_quantile(args.q, p, args.model, "active")
        out.writerow([eta, repr(qp), repr(qa)])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
