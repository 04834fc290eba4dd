"""Harmonic-section residuals of a perturbed structure as epsilon grows.

    python scripts/perturbation_sweep.py [entry] [--seed 42] [--points 20]
"""

import argparse

from harmsec.catalog import contact_structure_of, get_entry, perturb
from harmsec.chart import DEFAULT_FD
from harmsec.harmonicity import harmonic_report, kappa_mu_fit


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("entry", nargs="?", default="sasakian_R3")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--eps", default="0,1e-3,3e-3,1e-2,3e-2,5e-2")
    args = ap.parse_args()

    base = contact_structure_of(get_entry(args.entry))
    pts = base.chart.sample_points(args.points, args.seed, DEFAULT_FD)
    print(f"{'epsilon':>9}  {'eq1':>10}  {'eq2':>10}  {'fit resid':>10}  harmonic")
    for eps in (float(e) for e in args.eps.split(",")):
        s = perturb(base, eps, args.seed)
        rep = harmonic_report(s, pts)
        fit = kappa_mu_fit(s, pts)
        print(f"{eps:>9.1e}  {rep.first_eq_residual:>10.3e}  {rep.second_eq_residual:>10.3e}  "
              f"{fit.residual:>10.3e}  {rep.harmonic}")


if __name__ == "__main__":
    main()
