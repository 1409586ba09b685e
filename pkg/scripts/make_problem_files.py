"""Write the bundled problem files (presets, fixtures and a manufactured case)."""

import argparse
import logging
from pathlib import Path

import numpy as np

from poincare_sie.geometry import EllipticCoefficients, TrigSeries
from poincare_sie.problem_file import ProblemFile, normal_derivative_tables, save
from poincare_sie.verification import diagonal_dominant_tables, make_manufactured, manufactured_problem_file

logger = logging.getLogger("make_problem_files")


def scalar(cos, sin=None):
    cos = np.asarray(cos, dtype=float)
    return TrigSeries(cos, np.zeros_like(cos) if sin is None else np.asarray(sin, dtype=float))


def bundled(seed: int = 0) -> dict:
    files = {}
    cos_f1 = TrigSeries([[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]])
    for name in ("dirichlet", "neumann", "special_neumann", "problem6"):
        files[f"bitsadze_{name}"] = ProblemFile("bitsadze", 2, cos_f1, preset=name)
    files["problem6_unsolvable"] = ProblemFile(
        "bitsadze", 2, TrigSeries([[1.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]), preset="problem6"
    )
    laplace = EllipticCoefficients.laplace(1)
    P, Q = normal_derivative_tables(1)
    # d/dnu of Re(1/z) on the unit circle is -cos(theta)
    files["laplace_neumann"] = ProblemFile("poincare", 1, scalar([[0.0, -1.0]]), coefficients=laplace, P=P, Q=Q)
    files["laplace_neumann_mean"] = ProblemFile("poincare", 1, scalar([[0.5, -1.0]]), coefficients=laplace, P=P, Q=Q)
    files["synthetic_kappa2"] = ProblemFile(
        "singular_system", 1, scalar([[0.0]]),
        alpha=scalar([[[0.0, 1.0]]]), beta=TrigSeries([[[0.0, 0.0]]], [[[0.0, 1.0 / np.pi]]]),
    )
    files["alpha_zero"] = ProblemFile(
        "singular_system", 1, scalar([[1.0]]), alpha=scalar([[[0.0]]]), beta=scalar([[[0.0]]]),
    )
    rng = np.random.default_rng(seed)
    coeffs = EllipticCoefficients([1.0, 1.0], [0.0, 1.0], [1.0, 2.0])
    Pm, Qm = diagonal_dominant_tables(2, rng)
    case = make_manufactured(coeffs, Pm, Qm, [[0.0, 1.0, 0.5]] * 2)
    pf, fit = manufactured_problem_file(case)
    logger.info("manufactured data table fit error %.2e", fit)
    files["manufactured"] = pf
    return files


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "problems"))
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, pf in bundled(args.seed).items():
        save(pf, out / f"{name}.json")
        logger.info("wrote %s", out / f"{name}.json")


if __name__ == "__main__":
    main()
