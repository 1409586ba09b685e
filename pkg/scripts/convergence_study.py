"""Manufactured-solution error of the decomposable solver against the node count.

On coarse grids the discrete compatibility residual of exact data is still
above the solve tolerance and the solver reports the data as unsolvable;
those rows carry the residual and no field error.
"""

import argparse
import csv
import logging
import sys

import numpy as np

from poincare_sie.decomposable import solve_poincare
from poincare_sie.errors import Unsolvable
from poincare_sie.geometry import CurveParametrization, EllipticCoefficients
from poincare_sie.verification import diagonal_dominant_tables, guarded_points, make_manufactured

logger = logging.getLogger("convergence_study")

CURVES = {
    "circle": CurveParametrization.unit_circle,
    "ellipse": lambda: CurveParametrization.ellipse(2.0, 1.0),
}


def study(curve_name: str, nodes, seed: int = 0, points: int = 50):
    rng = np.random.default_rng(seed)
    curve = CURVES[curve_name]()
    coeffs = EllipticCoefficients([1.0, 1.0], [0.0, 1.0], [1.0, 2.0])
    P, Q = diagonal_dominant_tables(2, rng)
    case = make_manufactured(coeffs, P, Q, [[0.0, 1.0, 0.5]] * 2, curve=curve)
    z = guarded_points(curve, points, rng)
    exact = case.u(z)
    rows = []
    for N in nodes:
        try:
            sol = solve_poincare(case.problem(), N)
        except Unsolvable as exc:
            compat = float(np.max(np.abs(exc.residuals)))
            rows.append((N, compat, float("nan"), float("nan")))
            logger.info("%s N=%d unsolvable at tolerance, compatibility residual %.3e", curve_name, N, compat)
            continue
        compat = float(np.max(np.abs(sol.diagnostics.solvability_residuals), initial=0.0))
        err = float(np.max(np.abs(sol.evaluate(z) - exact)) / np.max(np.abs(exact)))
        bc = float(np.max(sol.boundary_residual()))
        rows.append((N, compat, err, bc))
        logger.info("%s N=%d field error %.3e boundary residual %.3e", curve_name, N, err, bc)
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--curve", choices=sorted(CURVES), default="circle")
    parser.add_argument("--nodes", type=int, nargs="+", default=[16, 32, 64, 128, 256])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    writer = csv.writer(sys.stdout)
    writer.writerow(["N", "compatibility_residual", "relative_field_error", "boundary_residual"])
    for row in study(args.curve, args.nodes, args.seed):
        writer.writerow([row[0]] + [f"{v:.3e}" for v in row[1:]])
    return 0


if __name__ == "__main__":
    sys.exit(main())
