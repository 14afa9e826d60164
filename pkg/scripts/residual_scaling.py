#!/usr/bin/env python3
"""Measure how fast Q(y) = g(x) dx/dy - sum varpi_k y^k vanishes at 0.

The truncation theory says Q(y) = O(|y|^(2n+1)).  The values dive below
double precision within a few halvings, so the whole pipeline runs in mpmath
here; the printed slope should track 2n+1.

Usage:
    python scripts/residual_scaling.py [--n 2]
"""

import argparse
import pathlib
import sys

import mpmath
import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from oscphase.coefficients import make_problem, mp_coefficients, residual_Q
from oscphase.expansion import hypothesis_audit


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--dps", type=int, default=60)
    args = parser.parse_args()

    p = make_problem("x^2 + x^3", "1", -0.25, 0.5, n=args.n, T=0.89)
    audit = hypothesis_audit(p)
    cs = mp_coefficients(p, dps=args.dps)
    print(f"f = x^2 + x^3 on [-0.25, 0.5], n = {args.n}, r = {audit.r:.4g}")
    print(f"{'y':>14} {'|Q(y)|':>14}")
    pts = []
    with mpmath.workdps(args.dps):
        for k in range(4, 13):
            y = mpmath.mpf(audit.r) * mpmath.mpf(2) ** (-k)
            q = abs(residual_Q(p, cs, y))
            print(f"{float(y):14.6e} {float(q):14.6e}")
            if q > 0:
                pts.append((float(mpmath.log(y)), float(mpmath.log(q))))
    slope = np.polyfit(*zip(*pts), 1)[0]
    print(f"fitted log|Q| vs log|y| slope: {slope:.4f}  "
          f"(truncation order 2n+1 = {2 * args.n + 1})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
