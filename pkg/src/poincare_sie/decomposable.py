"""Exterior Poincare problem for decomposable elliptic systems.

Component ``j`` solves ``a_j u_xx + 2 b_j u_xy + c_j u_yy = 0`` and is
written ``u_j = Re phi_j(z_j)`` with ``z_j`` the characteristic variable.
The analytic function is a logarithmic potential of a real density on the
boundary ``S``::

    phi_j(z_j) = int_S ln(1 - z_j / tau_j) mu_j(tau) ds_tau,

where ``tau_j`` is the image of ``tau`` in the plane of ``z_j`` and ``ds``
is arc length on ``S`` itself.  Bounded fields need ``int_S mu_j ds = 0``.

With ``g_kj = (P_kj dz_j/dx + Q_kj dz_j/dy) |t'| / t_j'`` the boundary
condition ``P u_x + Q u_y = f`` becomes the real singular system

    alpha mu - beta PV int_S mu / (tau - t) dtau + int_S K mu dtau = f,
    alpha = -pi Im g,   beta = Re g,

whose smooth kernel collects what is left of the plane-``j`` Cauchy kernel
after its leading singularity is moved onto ``S``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import sie_engine
from .errors import DimensionMismatch, MomentViolation, NotNormal, Unsolvable
from .geometry import (
    CharacteristicMap,
    CurveParametrization,
    EllipticCoefficients,
    TrigSeries,
    image_curve,
    sample_curve,
)
from .quadrature import BoundarySamples, PeriodicGrid, check_guard, pv_cauchy_matrix, trig_interpolate
from .sie_engine import NoetherDiagnostics, SingularSystem

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-8

MatrixData = Union[TrigSeries, Callable]


def _evaluator(data, shape):
    if isinstance(data, TrigSeries):
        if data.value_shape != shape:
            raise DimensionMismatch(f"table shape {data.value_shape} != {shape}")
        return data
    if callable(data):
        return lambda theta: np.asarray(data(np.atleast_1d(theta)), dtype=float).reshape(
            (np.atleast_1d(theta).size,) + shape
        )
    arr = np.asarray(data, dtype=float)
    if arr.shape != shape:
        raise DimensionMismatch(f"constant shape {arr.shape} != {shape}")
    return TrigSeries.constant(arr)


@dataclass(frozen=True)
class PoincareProblem:
    """Curve, coefficients, boundary matrices ``P, Q`` and data ``f``.

    ``P`` and ``Q`` are ``(n, n)`` tables or callables of ``theta``;
    ``f`` is an ``(n,)`` table or callable.  ``R`` is accepted for
    completeness but must vanish identically.
    """

    curve: CurveParametrization
    coeffs: EllipticCoefficients
    P: MatrixData
    Q: MatrixData
    f: MatrixData
    R: Optional[MatrixData] = None

    def __post_init__(self):
        n = self.coeffs.n
        object.__setattr__(self, "P", _evaluator(self.P, (n, n)))
        object.__setattr__(self, "Q", _evaluator(self.Q, (n, n)))
        object.__setattr__(self, "f", _evaluator(self.f, (n,)))
        if self.R is not None:
            R = _evaluator(self.R, (n, n))
            theta = np.linspace(0.0, 2.0 * np.pi, 257)
            if np.any(np.abs(R(theta)) > 0.0):
                raise NotImplementedError("boundary term R w is not supported; R must vanish")
            object.__setattr__(self, "R", R)

    @property
    def n(self) -> int:
        return self.coeffs.n

    def with_data(self, f) -> "PoincareProblem":
        return PoincareProblem(self.curve, self.coeffs, self.P, self.Q, f, self.R)


# ---------------------------------------------------------------------------
# Symbols and assembly
# ---------------------------------------------------------------------------
def direction_factors(problem: PoincareProblem, theta) -> np.ndarray:
    """``c_kj = P_kj dz_j/dx + Q_kj dz_j/dy`` as an ``(m, n, n)`` array."""
    maps = problem.coeffs.maps()
    zx = np.array([m.dz_dx for m in maps])
    zy = np.array([m.dz_dy for m in maps])
    return problem.P(theta) * zx[None, None, :] + problem.Q(theta) * zy[None, None, :]


def symbol_g(problem: PoincareProblem, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    tp = problem.curve.derivative(theta)
    e = np.stack([np.abs(tp) / m.forward(tp) for m in problem.coeffs.maps()], axis=-1)
    return direction_factors(problem, theta) * e[:, None, :]


def symbol_alpha(problem: PoincareProblem):
    return lambda theta: (-np.pi * np.imag(symbol_g(problem, theta))).astype(complex)


def symbol_beta(problem: PoincareProblem):
    return lambda theta: np.real(symbol_g(problem, theta)).astype(complex)


def _conjugate_kernel(s) -> np.ndarray:
    """``conj(tau') / conj(tau - t) - tau' / (tau - t)`` with its diagonal limit."""
    t, tp, tpp = s.points, s.tangents, s.second
    diff = t[None, :] - t[:, None]
    np.fill_diagonal(diff, 1.0)
    D = np.conj(tp)[None, :] / np.conj(diff) - tp[None, :] / diff
    np.fill_diagonal(D, -1j * np.imag(tpp / tp))
    return D


def _image_remainder(s, sj) -> np.ndarray:
    """``|tau'| / (tau_j - t_j) - e_j(t) tau' / (tau - t)``, smooth through ``tau = t``."""
    t, tp, tpp = s.points, s.tangents, s.second
    tj, tjp, tjpp = sj.points, sj.tangents, sj.second
    speed = np.abs(tp)
    dspeed = np.real(np.conj(tp) * tpp) / speed
    e = speed / tjp
    diff = t[None, :] - t[:, None]
    diffj = tj[None, :] - tj[:, None]
    np.fill_diagonal(diff, 1.0)
    np.fill_diagonal(diffj, 1.0)
    R = speed[None, :] / diffj - e[:, None] * tp[None, :] / diff
    np.fill_diagonal(R, dspeed / tjp - speed * tjpp / (2 * tjp**2) - e * tpp / (2 * tp))
    return R


def assemble(problem: PoincareProblem, N: int) -> SingularSystem:
    """Singular integral system equivalent to the Poincare problem on ``N`` nodes."""
    grid = PeriodicGrid(N)
    theta = grid.nodes
    s = sample_curve(problem.curve, theta)
    n = problem.n
    c = direction_factors(problem, theta)
    g = symbol_g(problem, theta)
    D = _conjugate_kernel(s)
    kernel = np.zeros((n, n, N, N), dtype=complex)
    for j, cmap in enumerate(problem.coeffs.maps()):
        Rj = _image_remainder(s, image_curve(problem.curve, cmap, theta))
        for k in range(n):
            Kth = -0.5 * np.conj(g[:, k, j])[:, None] * D - np.real(c[:, k, j][:, None] * Rj)
            kernel[k, j] = Kth / s.tangents[None, :]
    rhs = problem.f(theta).T
    return SingularSystem(
        problem.curve, grid, n, symbol_alpha(problem), symbol_beta(problem), kernel, rhs, real=True
    )


# ---------------------------------------------------------------------------
# Field reconstruction
# ---------------------------------------------------------------------------
def _density(mu, n):
    values = np.asarray(mu.values if isinstance(mu, BoundarySamples) else mu, dtype=float)
    if values.ndim == 1:
        values = values.reshape(n, -1) if values.size % n == 0 and n > 1 else values[None, :]
    elif values.shape[0] != n:
        values = values.T
    return values


def density_moments(curve: CurveParametrization, mu) -> np.ndarray:
    mu = np.atleast_2d(mu)
    N = mu.shape[1]
    s = sample_curve(curve, 2.0 * np.pi * np.arange(N) / N)
    return (2.0 * np.pi / N) * mu @ s.arc_element


def _check_moments(curve, mu):
    moments = density_moments(curve, mu)
    scale = max(1.0, float(np.max(np.abs(mu))))
    if np.any(np.abs(moments) > MOMENT_TOL * scale):
        raise MomentViolation(f"density moments {moments} are not zero; the field would grow like log|z|")
    return moments


def _plane_data(problem, N, j):
    theta = 2.0 * np.pi * np.arange(N) / N
    cmap = problem.coeffs.maps()[j]
    s = sample_curve(problem.curve, theta)
    sj = image_curve(problem.curve, cmap, theta)
    return cmap, s, sj


def vekua_phi(problem: PoincareProblem, mu, z, check_moment: bool = True) -> np.ndarray:
    """``phi_j(z_j)`` for every component, shape ``(len(z), n)``.

    Uses the branch ``int Log(1 - tau_j / z_j) mu ds - int ln|tau_j| mu ds``,
    which equals the logarithmic potential when the moments vanish, is
    analytic outside the star-shaped ``S_j`` and has ``Im phi_j(inf) = 0``.
    """
    n = problem.n
    mu = _density(mu, n)
    if check_moment:
        _check_moments(problem.curve, mu)
    N = mu.shape[1]
    w = 2.0 * np.pi / N
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros((z.size, n), dtype=complex)
    for j in range(n):
        cmap, s, sj = _plane_data(problem, N, j)
        zj = cmap.forward(z)
        check_guard(sj, zj)
        ds = w * s.arc_element * mu[j]
        out[:, j] = np.log(1.0 - sj.points[None, :] / zj[:, None]) @ ds - np.log(np.abs(sj.points)) @ ds
    return out


def vekua_reconstruct(problem: PoincareProblem, mu, z, check_moment: bool = True) -> np.ndarray:
    """``u_j = Re phi_j(z_j) = int_S ln|1 - z_j/tau_j| mu_j ds`` at points ``z``."""
    n = problem.n
    mu = _density(mu, n)
    if check_moment:
        _check_moments(problem.curve, mu)
    N = mu.shape[1]
    w = 2.0 * np.pi / N
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros((z.size, n))
    for j in range(n):
        cmap, s, sj = _plane_data(problem, N, j)
        zj = cmap.forward(z)
        check_guard(sj, zj)
        out[:, j] = np.log(np.abs(1.0 - zj[:, None] / sj.points[None, :])) @ (w * s.arc_element * mu[j])
    return out


def vekua_gradient(problem: PoincareProblem, mu, z) -> tuple[np.ndarray, np.ndarray]:
    """``(u_x, u_y)`` from ``phi_j'(z_j) = -int mu_j / (tau_j - z_j) ds``."""
    n = problem.n
    mu = _density(mu, n)
    N = mu.shape[1]
    w = 2.0 * np.pi / N
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    ux = np.zeros((z.size, n))
    uy = np.zeros((z.size, n))
    for j in range(n):
        cmap, s, sj = _plane_data(problem, N, j)
        zj = cmap.forward(z)
        check_guard(sj, zj)
        dphi = -(1.0 / (sj.points[None, :] - zj[:, None])) @ (w * s.arc_element * mu[j])
        ux[:, j] = np.real(dphi * cmap.dz_dx)
        uy[:, j] = np.real(dphi * cmap.dz_dy)
    return ux, uy


def boundary_derivatives(problem: PoincareProblem, mu, M: Optional[int] = None):
    """Exterior boundary values of ``phi_j'`` on ``M`` nodes, shape ``(n, M)``.

    Each plane is treated on its own: with ``rho_j = mu_j |t'| / t_j'`` the
    Plemelj limit from outside is ``pi i rho_j - PV int_{S_j} rho_j / (tau_j - t_j) dtau_j``.
    The density is trigonometrically interpolated when ``M`` exceeds its
    grid.  This route does not pass through the assembled system.
    """
    n = problem.n
    mu = _density(mu, n)
    N = mu.shape[1]
    M = N if M is None else M
    mu_M = trig_interpolate(mu.T, M).T
    out = np.zeros((n, M), dtype=complex)
    for j in range(n):
        cmap, s, sj = _plane_data(problem, M, j)
        rho = mu_M[j] * s.arc_element / sj.tangents
        out[j] = np.pi * 1j * rho - pv_cauchy_matrix(sj) @ rho
    return out


def boundary_condition_residual(problem: PoincareProblem, mu, M: Optional[int] = None) -> np.ndarray:
    """Max-norm per row of ``P u_x + Q u_y - f`` on ``M`` boundary nodes."""
    n = problem.n
    dphi = boundary_derivatives(problem, mu, M)
    M = dphi.shape[1]
    theta = 2.0 * np.pi * np.arange(M) / M
    maps = problem.coeffs.maps()
    ux = np.stack([np.real(dphi[j] * maps[j].dz_dx) for j in range(n)], axis=-1)
    uy = np.stack([np.real(dphi[j] * maps[j].dz_dy) for j in range(n)], axis=-1)
    r = (
        np.einsum("mkj,mj->mk", problem.P(theta), ux)
        + np.einsum("mkj,mj->mk", problem.Q(theta), uy)
        - problem.f(theta)
    )
    return np.max(np.abs(r), axis=0)


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------
@dataclass
class FieldSolution:
    """Densities, field evaluators and diagnostics of one solve.

    ``evaluate`` uses the gauge ``u_j(inf) = 0`` by default; the boundary
    condition only involves derivatives, so each component is determined
    up to a constant.  ``gauge="representation"`` returns the raw values
    ``Re phi_j(z_j)`` of the logarithmic representation.
    """

    problem: PoincareProblem
    grid: PeriodicGrid
    mu: np.ndarray  # (n, N)
    diagnostics: NoetherDiagnostics
    kernel_basis: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    moments: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ls_residual: float = 0.0

    @property
    def densities(self) -> BoundarySamples:
        return BoundarySamples(self.grid, self.mu.T)

    def infinity_offsets(self) -> np.ndarray:
        """``int ln|tau_j| mu_j ds``: the value of ``-u_j(inf)`` in the raw gauge."""
        N = self.grid.N
        out = np.zeros(self.problem.n)
        for j in range(self.problem.n):
            cmap, s, sj = _plane_data(self.problem, N, j)
            out[j] = np.sum(np.log(np.abs(sj.points)) * s.arc_element * self.mu[j]) * self.grid.weight
        return out

    def evaluate(self, z, gauge: str = "infinity") -> np.ndarray:
        u = vekua_reconstruct(self.problem, self.mu, z, check_moment=False)
        if gauge == "infinity":
            u = u + self.infinity_offsets()[None, :]
        elif gauge != "representation":
            raise ValueError(f"unknown gauge {gauge!r}")
        return u

    def gradient(self, z):
        return vekua_gradient(self.problem, self.mu, z)

    def boundary_residual(self, refine: int = 2) -> np.ndarray:
        return boundary_condition_residual(self.problem, self.mu, refine * self.grid.N)


def bordered_system(sys: SingularSystem, A, rhs):
    """Append one zero-moment row per component to the Nystrom system."""
    N, n = sys.grid.N, sys.n
    w = sys.node_weights()
    rows = np.zeros((n, n * N))
    for j in range(n):
        rows[j, j * N:(j + 1) * N] = w[j * N:(j + 1) * N]
    return np.vstack([A, rows]), np.concatenate([rhs, np.zeros(n)]), np.concatenate([w, np.ones(n)])


def solve_poincare(problem: PoincareProblem, N: int = 256, tol: float = sie_engine.RANK_TOL) -> FieldSolution:
    """assemble -> symbol check -> index -> Nystrom + moment rows -> null spaces -> solve.

    Raises :class:`NotNormal` (with diagnostics) when the symbol degenerates
    and :class:`Unsolvable` when the data fail the adjoint orthogonality
    conditions, including the zero-moment (boundedness) constraints.
    """
    sys = assemble(problem, N)
    diag, discrete, nulls_T = sie_engine.diagnose(sys, tol)
    if not diag.normal:
        raise NotNormal("symbol determinant vanishes on the curve", diag)
    A, rhs = discrete
    Ab, rb, row_w = bordered_system(sys, A, rhs)
    nulls = sie_engine.nullspaces(
        Ab, sys.node_weights(), tol, row_weights=row_w, block_size=N, n_blocks=problem.n
    )
    result = sie_engine.solve(Ab, rb, nulls, tol)
    diag.solvability_residuals = list(result.residuals)
    if result.status != "Solvable":
        raise Unsolvable(
            "data violate the adjoint orthogonality conditions",
            result.residuals, diag,
        )
    mu = result.mu.real.reshape(problem.n, N)
    moments = density_moments(problem.curve, mu)
    logger.info("solved N=%d kappa=%s l=%s l'=%s", N, diag.kappa, diag.l, diag.l_prime)
    return FieldSolution(problem, sys.grid, mu, diag, result.kernel_basis, moments, result.ls_residual)
