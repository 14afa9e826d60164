#!/usr/bin/env python3
"""Reproduce the two convergence studies against the quadrature oracle.

Writes study_stationary.csv and study_fdt.csv next to this script and prints
the fitted log2-error slopes.  The stationary family has its single interior
stationary point at 0; the monotone family exercises the boundary-only test.

Usage:
    python scripts/convergence_study.py [--tmax 262144]
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from oscphase.coefficients import make_problem
from oscphase.study import fitted_slopes, rows_to_csv, run_study

HERE = pathlib.Path(__file__).resolve().parent


def geometric_grid(t_min: float, t_max: float, factor: float) -> list[float]:
    out = [t_min]
    while out[-1] * factor <= t_max * 1.000001:
        out.append(out[-1] * factor)
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tmin", type=float, default=float(2 ** 10))
    parser.add_argument("--tmax", type=float, default=float(2 ** 18))
    parser.add_argument("--factor", type=float, default=4.0)
    args = parser.parse_args()
    grid = geometric_grid(args.tmin, args.tmax, args.factor)

    stationary = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5,
                              n=2, T=grid[0])
    rows = run_study(stationary, grid, [1, 2, 3])
    (HERE / "study_stationary.csv").write_text(rows_to_csv(rows))
    print("stationary family  f = T*(x^2 + x^3/3), g = 1/(1+x^2):")
    for n, slope in fitted_slopes(rows).items():
        print(f"  n={n}: slope {slope:+.3f}  (theorem predicts <= -(n+1))")

    monotone = make_problem("T*(x + x^2/10)", "1/x", 1.0, 2.0, n=3, T=grid[0])
    rows = run_study(monotone, grid, [3])
    (HERE / "study_fdt.csv").write_text(rows_to_csv(rows))
    print("monotone family    f = T*(x + x^2/10), g = 1/x:")
    for n, slope in fitted_slopes(rows).items():
        print(f"  n={n}: slope {slope:+.3f}  (theorem predicts <= -(n+1))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
