"""Independent oracles: finite differences, dense least squares, manufactured fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .decomposable import PoincareProblem
from .errors import DimensionMismatch, StencilCrossesBoundary
from .geometry import CurveParametrization, EllipticCoefficients, TrigSeries, sample_curve

FD_STEP = 1e-4
RICHARDSON_BAND = (1e-6, 1e-4)


def _field_values(field: Callable, z) -> np.ndarray:
    out = np.asarray(field(np.atleast_1d(np.asarray(z, dtype=complex))))
    return out.reshape(np.atleast_1d(z).size, -1)


def _check_stencil(curve: Optional[CurveParametrization], point: complex, h: float):
    if curve is None:
        return
    s = sample_curve(curve, np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False))
    d = float(np.min(np.abs(s.points - point)))
    if d <= 4.0 * h:
        raise StencilCrossesBoundary(f"point at distance {d:.3g} needs > {4 * h:.3g} from the curve")


def _second_differences(field, coeffs: EllipticCoefficients, point: complex, h: float) -> np.ndarray:
    offsets = np.array([0, h, -h, 1j * h, -1j * h, h + 1j * h, h - 1j * h, -h + 1j * h, -h - 1j * h])
    u = _field_values(field, point + offsets)
    if u.shape[1] != coeffs.n:
        raise DimensionMismatch(f"field has {u.shape[1]} components, coefficients have {coeffs.n}")
    uxx = (u[1] - 2 * u[0] + u[2]) / h**2
    uyy = (u[3] - 2 * u[0] + u[4]) / h**2
    uxy = (u[5] - u[6] - u[7] + u[8]) / (4 * h**2)
    return coeffs.a * uxx + 2 * coeffs.b * uxy + coeffs.c * uyy


def fd_pde_residual(
    field: Callable,
    coeffs: EllipticCoefficients,
    point: complex,
    h: float = FD_STEP,
    curve: Optional[CurveParametrization] = None,
) -> np.ndarray:
    """``a_j u_xx + 2 b_j u_xy + c_j u_yy`` per component by central differences.

    ``field`` maps an array of complex points to values of shape ``(m, n)``
    (or ``(m,)`` for one component).  Residuals falling in the ambiguous band
    ``[1e-6, 1e-4]`` are Richardson-extrapolated with ``h/2`` to separate
    truncation error from a genuine violation.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError(f"step {h} outside [1e-6, 1e-3]")
    point = complex(point)
    _check_stencil(curve, point, h)
    r = _second_differences(field, coeffs, point, h)
    lo, hi = RICHARDSON_BAND
    if np.any((np.abs(r) >= lo) & (np.abs(r) <= hi)):
        r_half = _second_differences(field, coeffs, point, h / 2)
        r = (4.0 * r_half - r) / 3.0
    return r


def fd_directional(field: Callable, point: complex, direction, h: float = 1e-5) -> np.ndarray:
    """Central first difference of ``field`` along the unit vector ``direction``."""
    d = complex(direction) if np.isscalar(direction) else complex(direction[0], direction[1])
    d /= abs(d)
    u = _field_values(field, np.array([complex(point) + h * d, complex(point) - h * d]))
    out = (u[0] - u[1]) / (2 * h)
    return out[0] if out.size == 1 else out


def brute_solve(matrix, rhs, rcond: float = 1e-8) -> np.ndarray:
    """Minimum-norm least-squares solution from a complete orthogonal factorization.

    Directions with relative singular value below ``rcond`` are treated as
    exact null directions, matching the rank cutoff of the engine solver.
    """
    sol, *_ = scipy.linalg.lstsq(np.asarray(matrix), np.asarray(rhs), cond=rcond, lapack_driver="gelsy")
    return sol


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------
def _laurent(coeffs: np.ndarray, z: np.ndarray):
    """``sum_m c_m z^{-m}`` and its derivative."""
    val = np.zeros_like(z, dtype=complex)
    der = np.zeros_like(z, dtype=complex)
    for m, c in enumerate(coeffs):
        if c == 0:
            continue
        val += c * z ** (-m)
        if m:
            der += -m * c * z ** (-m - 1)
    return val, der


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact fields ``u_j = Re phi_j(z_j)`` with ``phi_j = sum_m seeds[j][m] z_j^{-m}``.

    The seeds start at ``m = 0``; a zero constant term keeps ``u_j(inf) = 0``,
    which is the gauge used by :class:`FieldSolution.evaluate`.
    """

    curve: CurveParametrization
    coeffs: EllipticCoefficients
    P: TrigSeries
    Q: TrigSeries
    seeds: tuple

    def phi(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.stack([_laurent(self.seeds[j], m.forward(z))[0] for j, m in enumerate(self.coeffs.maps())], -1)

    def u(self, z) -> np.ndarray:
        return np.real(self.phi(z))

    def gradient(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ux, uy = [], []
        for j, m in enumerate(self.coeffs.maps()):
            d = _laurent(self.seeds[j], m.forward(z))[1]
            ux.append(np.real(d * m.dz_dx))
            uy.append(np.real(d * m.dz_dy))
        return np.stack(ux, -1), np.stack(uy, -1)

    def f(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        ux, uy = self.gradient(self.curve.point(theta))
        return np.einsum("mkj,mj->mk", self.P(theta), ux) + np.einsum("mkj,mj->mk", self.Q(theta), uy)

    def problem(self, data_degree: Optional[int] = None) -> PoincareProblem:
        """Problem with exact data, or data fitted to a Fourier table of ``data_degree``."""
        f = self.f
        if data_degree is not None:
            N = 2 * data_degree + 2
            f = TrigSeries.from_samples(self.f(2.0 * np.pi * np.arange(N) / N), data_degree)
        return PoincareProblem(self.curve, self.coeffs, self.P, self.Q, f)


def make_manufactured(
    coeffs: EllipticCoefficients,
    P: TrigSeries,
    Q: TrigSeries,
    seeds: Sequence[Sequence[complex]],
    curve: Optional[CurveParametrization] = None,
) -> ManufacturedCase:
    """Manufactured case from Laurent seeds, one sequence per component."""
    if len(seeds) != coeffs.n:
        raise DimensionMismatch(f"{len(seeds)} seed sequences for {coeffs.n} components")
    seeds = tuple(np.asarray(s, dtype=complex) for s in seeds)
    curve = CurveParametrization.unit_circle() if curve is None else curve
    return ManufacturedCase(curve, coeffs, P, Q, seeds)


def diagonal_dominant_tables(n: int, rng: np.random.Generator, degree: int = 2, scale: float = 0.1):
    """``P = cos(theta) I + E_P``, ``Q = sin(theta) I + E_Q`` with small random tables ``E``.

    The diagonal part is the outward normal derivative on the unit circle, so
    the perturbed problem stays normal with index zero for small ``scale``.
    """
    deg = max(degree, 1)
    Pc = scale * rng.uniform(-1, 1, (n, n, deg + 1))
    Ps = scale * rng.uniform(-1, 1, (n, n, deg + 1))
    Qc = scale * rng.uniform(-1, 1, (n, n, deg + 1))
    Qs = scale * rng.uniform(-1, 1, (n, n, deg + 1))
    Ps[..., 0] = Qs[..., 0] = 0.0
    idx = np.arange(n)
    Pc[idx, idx, 1] += 1.0
    Qs[idx, idx, 1] += 1.0
    return TrigSeries(Pc, Ps), TrigSeries(Qc, Qs)


def guarded_points(curve: CurveParametrization, count: int, rng: np.random.Generator, rmin=2.5, rmax=5.0):
    """Random points on rays from the origin, scaled radially by a factor in ``[rmin, rmax]``."""
    theta = rng.uniform(0, 2 * np.pi, count)
    r = rng.uniform(rmin, rmax, count)
    return curve.point(theta) * r


def manufactured_problem_file(case: ManufacturedCase, degree: int = 96, nodes: int = 256):
    """Problem file whose ``f`` is the Fourier table of the exact data.

    Returns the file and the max fitting error of the table on a fine grid;
    this error bounds how well the file can reproduce the exact field.
    """
    from .problem_file import ProblemFile, SolverOptions

    problem = case.problem(data_degree=degree)
    theta = np.linspace(0.0, 2.0 * np.pi, 4 * degree + 3)
    fit_error = float(np.max(np.abs(problem.f(theta) - case.f(theta))))
    seeds = [[[float(c.real), float(c.imag)] for c in seq] for seq in case.seeds]
    pf = ProblemFile(
        "poincare", case.coeffs.n, problem.f, case.curve, case.coeffs, case.P, case.Q,
        manufactured=seeds, solver=SolverOptions(nodes=nodes),
    )
    return pf, fit_error
