"""Numerical certificates shared by the ``verify`` and ``example`` commands."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import bitsadze, sie_engine
from .decomposable import PoincareProblem, assemble, solve_poincare
from .errors import SolvabilityViolated
from .geometry import CurveParametrization, EllipticCoefficients, TrigSeries, sample_curve
from .quadrature import PeriodicGrid, pv_cauchy_matrix
from .verification import (
    diagonal_dominant_tables,
    fd_directional,
    fd_pde_residual,
    guarded_points,
    make_manufactured,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Certificate:
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def dirichlet_null_family(K: int = 20, N: int = 512) -> list[Certificate]:
    """Boundary values and far-field size of the Dirichlet null elements ``1..K``."""
    t = np.exp(1j * PeriodicGrid(N).nodes)
    out = []
    for k in range(1, K + 1):
        w = bitsadze.dirichlet_null_element(k)
        out.append(Certificate(f"dirichlet-null-{k}", float(np.max(np.abs(w(t)))), 1e-12))
        out.append(Certificate(f"dirichlet-bounded-{k}", float(abs(w(1e6))), 2.0))
    return out


def neumann_null_family(K: int = 10, N: int = 512, h: float = 1e-5) -> list[Certificate]:
    """Finite-difference normal derivatives of the Neumann null elements ``0..K``."""
    theta = PeriodicGrid(N).nodes
    out = []
    for k in range(0, K + 1):
        w = bitsadze.neumann_null_element(k)
        worst = 0.0
        for th in theta:
            d = fd_directional(w.components, np.exp(1j * th), (np.cos(th), np.sin(th)), h)
            worst = max(worst, float(np.max(np.abs(d))))
        out.append(Certificate(f"neumann-null-{k}", worst, 1e-6))
    return out


def preset_determinants() -> list[Certificate]:
    theta = np.linspace(0.0, 2.0 * np.pi, 97)
    d = {name: bitsadze.det_P_plus_iQ(name, theta) for name in bitsadze.PRESETS}
    return [
        Certificate("det-dirichlet", float(np.max(np.abs(d["dirichlet"]))), 1e-14),
        Certificate("det-neumann", float(np.max(np.abs(d["neumann"] - np.exp(2j * theta)))), 1e-14),
        Certificate("det-special-neumann", float(np.max(np.abs(d["special_neumann"]))), 1e-14),
        Certificate("det-problem6", float(np.max(np.abs(d["problem6"] - 2.0))), 1e-14),
    ]


def problem6_roundtrip(f1=np.cos, f2=np.sin, N: int = 256) -> list[Certificate]:
    grid = PeriodicGrid(N)
    try:
        sol = bitsadze.solve_problem6(f1, f2, grid=grid)
    except SolvabilityViolated as exc:
        return [Certificate(f"problem6-{exc.condition}", abs(exc.residual), 1e-10, str(exc))]
    preset = bitsadze.get_preset("problem6")
    f = np.stack([f1(grid.nodes), f2(grid.nodes)], -1)
    res = bitsadze.boundary_residual(sol, preset.P, preset.Q, preset.R, f, grid)
    return [
        Certificate("problem6-real-part", float(res[0]), 1e-8),
        Certificate("problem6-derivative", float(res[1]), 1e-8),
    ]


def special_neumann_roundtrip(f1=np.cos, f2=None, N: int = 256) -> list[Certificate]:
    grid = PeriodicGrid(N)
    f2 = (lambda th: np.zeros_like(th)) if f2 is None else f2
    sol = bitsadze.solve_special_neumann(f1, f2, grid=grid)
    res = sol.info["boundary_residual"]
    return [
        Certificate("special-neumann-value", float(res[0]), 1e-8, sol.fixture_status),
        Certificate("special-neumann-derivative", float(res[1]), 1e-8, sol.fixture_status),
    ]


def pv_identity(N: int = 128) -> list[Certificate]:
    out = []
    for name, curve, tol in [
        ("pv-circle", CurveParametrization.unit_circle(), 1e-10),
        ("pv-ellipse", CurveParametrization.ellipse(2.0, 1.0), 1e-8),
    ]:
        C = pv_cauchy_matrix(sample_curve(curve, PeriodicGrid(N).nodes))
        out.append(Certificate(name, float(np.max(np.abs(C.sum(axis=1) - np.pi * 1j))), tol))
    return out


def laplace_neumann_symbol(N: int = 64) -> list[Certificate]:
    P = TrigSeries(np.array([[[0.0, 1.0]]]), np.zeros((1, 1, 2)))
    Q = TrigSeries(np.zeros((1, 1, 2)), np.array([[[0.0, 1.0]]]))
    f = TrigSeries(np.zeros((1, 1)), np.zeros((1, 1)))
    sys = assemble(PoincareProblem(CurveParametrization.unit_circle(), EllipticCoefficients.laplace(1), P, Q, f), N)
    theta = sys.grid.nodes
    return [
        Certificate("symbol-alpha", float(np.max(np.abs(sys.alpha(theta) - np.pi))), 1e-12),
        Certificate("symbol-beta", float(np.max(np.abs(sys.beta(theta)))), 1e-12),
        Certificate("symbol-index", float(abs(sie_engine.index(sys))), 0.0),
    ]


def manufactured_decomposable(N: int = 256, seed: int = 0) -> list[Certificate]:
    rng = np.random.default_rng(seed)
    coeffs = EllipticCoefficients([1.0, 1.0], [0.0, 1.0], [1.0, 2.0])
    P, Q = diagonal_dominant_tables(2, rng)
    case = make_manufactured(coeffs, P, Q, [[0.0, 1.0, 0.5]] * 2)
    z = guarded_points(case.curve, 50, rng)
    sol = solve_poincare(case.problem(), N)
    exact = case.u(z)
    err = float(np.max(np.abs(sol.evaluate(z) - exact)) / np.max(np.abs(exact)))
    pde = max(float(np.max(np.abs(fd_pde_residual(sol.evaluate, coeffs, p)))) for p in z[:10])
    return [
        Certificate("manufactured-field", err, 1e-6, f"N={N}"),
        Certificate("manufactured-pde", pde, 1e-5),
        Certificate("manufactured-boundary", float(np.max(sol.boundary_residual())), 1e-7),
    ]


def full_suite() -> list[Certificate]:
    out = []
    for build in (
        dirichlet_null_family,
        neumann_null_family,
        preset_determinants,
        problem6_roundtrip,
        special_neumann_roundtrip,
        pv_identity,
        laplace_neumann_symbol,
        manufactured_decomposable,
    ):
        certs = build()
        logger.info("%s: %d certificates", build.__name__, len(certs))
        out.extend(certs)
    return out
