"""Step-halving study of one check on a few entries, at both stencil orders.

    python scripts/convergence_study.py [--check 2.16]
"""

import argparse

from harmsec.cli import RunSpec, convergence

TARGETS = [("sasakian_R3", {}), ("unit_tangent_surface", {"c": "4"}), ("unit_tangent_surface", {"c": "-1"})]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", default="2.16")
    ap.add_argument("--steps", default="2e-3,1e-3,5e-4,2.5e-4")
    args = ap.parse_args()
    steps = [float(h) for h in args.steps.split(",")]
    for order in (2, 4):
        for key, params in TARGETS:
            study = convergence(RunSpec(key, params, order=order), args.check, steps)
            print(study.as_text())


if __name__ == "__main__":
    main()
