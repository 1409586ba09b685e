"""Exterior problems for the Bitsadze system on the unit circle.

The system ``u1_xx - 2 u2_xy - u1_yy = 0``, ``u2_xx + 2 u1_xy - u2_yy = 0``
is ``d^2 w / d zbar^2 = 0`` for ``w = u1 + i u2``, so every regular
solution in ``|z| > 1`` has the form ``w = zbar phi(z) + psi(z)`` with
``phi`` and ``psi`` analytic there.  This module builds such solutions in
closed form: the infinite null families of the homogeneous Dirichlet and
Neumann problems, and the explicit solutions of two solvable boundary
problems.

All boundary data live on ``t = exp(i theta)``.  Integrals carrying a
kernel in ``t`` and ``z`` are contour integrals (``dt = i t dtheta``);
bare moment conditions are ``dtheta`` integrals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidOrder, SolvabilityViolated
from .geometry import CurveParametrization
from .quadrature import BoundarySamples, PeriodicGrid, cauchy_offboundary, integrate_periodic

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-10
LOG_TERM_TOL = 1e-8
FIXTURE_TOL = 1e-8


@dataclass(frozen=True)
class ExteriorAnalyticFunction:
    """``f(z) = log_coeff * log z + sum_m laurent[m] z**(-m)`` on ``|z| >= 1``.

    A nonzero ``log_coeff`` makes the function multivalued; derivatives
    stay single-valued.  When the function was produced from a boundary
    integral, ``density``/``kernel``/``prefactor`` keep that representation
    so it can be evaluated independently by quadrature.
    """

    laurent: np.ndarray
    log_coeff: complex = 0.0
    density: Optional[BoundarySamples] = None
    kernel: Optional[str] = None
    prefactor: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "laurent", np.atleast_1d(np.asarray(self.laurent, dtype=complex)))

    @classmethod
    def zero(cls) -> "ExteriorAnalyticFunction":
        return cls(np.zeros(1))

    @classmethod
    def monomial(cls, power: int, coeff: complex = 1.0) -> "ExteriorAnalyticFunction":
        """``coeff * z**(-power)`` for ``power >= 0``."""
        c = np.zeros(power + 1, dtype=complex)
        c[power] = coeff
        return cls(c)

    @classmethod
    def from_boundary_integral(
        cls, density: BoundarySamples, kernel: str, prefactor: complex = 1.0
    ) -> "ExteriorAnalyticFunction":
        """``prefactor * int_{|t|=1} density(t) k(t, z) dt`` as a Laurent tail.

        With ``density = sum_m d_m t**m`` the residue theorem gives, for
        ``|z| > 1``::

            cauchy  1/(t - z)            -> -2 pi i sum_{m>=1} d_{-m} z**(-m)
            schwarz (t + z)/(t (t - z))  -> -2 pi i d_0 - 4 pi i sum_{m>=1} d_{-m} z**(-m)
            inverse 1/t                  ->  2 pi i d_0
        """
        values = np.asarray(density.values)
        N = values.shape[0]
        d = np.fft.fft(values) / N
        M = N // 2 - 1
        neg = np.array([d[N - m] for m in range(1, M + 1)])
        c = np.zeros(M + 1, dtype=complex)
        if kernel == "cauchy":
            c[1:] = -2j * np.pi * neg
        elif kernel == "schwarz":
            c[0] = -2j * np.pi * d[0]
            c[1:] = -4j * np.pi * neg
        elif kernel == "inverse":
            c[0] = 2j * np.pi * d[0]
        else:
            raise ValueError(f"unknown kernel {kernel!r}")
        return cls(prefactor * c, 0.0, density, kernel, prefactor)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.polynomial.polynomial.polyval(1.0 / z, self.laurent)
        if self.log_coeff:
            out = out + self.log_coeff * np.log(z)
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        m = np.arange(self.laurent.size)
        # d/dz z^-m = -m z^-(m+1)
        dc = np.concatenate([[0.0], -m * self.laurent])
        out = np.polynomial.polynomial.polyval(1.0 / z, dc)
        return out + self.log_coeff / z

    def quadrature_value(self, z, grid: Optional[PeriodicGrid] = None):
        """Evaluate the stored boundary integral by trapezoidal quadrature."""
        if self.density is None:
            raise ValueError("no boundary-integral representation stored")
        grid = grid or self.density.grid
        return self.prefactor * cauchy_offboundary(
            CurveParametrization.unit_circle(), grid, self.density, z, kernel=self.kernel
        )

    def plus(self, other: "ExteriorAnalyticFunction", scale: complex = 1.0):
        n = max(self.laurent.size, other.laurent.size)
        c = np.zeros(n, dtype=complex)
        c[: self.laurent.size] += self.laurent
        c[: other.laurent.size] += scale * other.laurent
        return ExteriorAnalyticFunction(c, self.log_coeff + scale * other.log_coeff)

    def divided_by_z(self) -> "ExteriorAnalyticFunction":
        if self.log_coeff:
            raise ValueError("log term cannot be divided by z within a Laurent tail")
        return ExteriorAnalyticFunction(np.concatenate([[0.0], self.laurent]))

    def derivative_function(self) -> "ExteriorAnalyticFunction":
        m = np.arange(self.laurent.size)
        d = np.concatenate([[0.0], -m * self.laurent])
        d[1] += self.log_coeff
        return ExteriorAnalyticFunction(d)

    def antiderivative(self, constant: complex = 0.0) -> "ExteriorAnalyticFunction":
        """Term-wise primitive; a ``z**-1`` coefficient becomes ``log_coeff``."""
        c = self.laurent
        if abs(c[0]) > LOG_TERM_TOL:
            raise ValueError("primitive of a nonzero constant is unbounded")
        out = np.zeros(max(c.size - 1, 1), dtype=complex)
        out[0] = constant
        for m in range(2, c.size):
            out[m - 1] = -c[m] / (m - 1)
        log_coeff = c[1] if c.size > 1 else 0.0
        return ExteriorAnalyticFunction(out, log_coeff)


@dataclass(frozen=True)
class BitsadzeSolution:
    """``w(z) = zbar phi(z) + psi(z) = u1 + i u2``."""

    phi: ExteriorAnalyticFunction
    psi: ExteriorAnalyticFunction
    fixture_status: str = "exact"
    info: dict = field(default_factory=dict)

    @property
    def single_valued(self) -> bool:
        return abs(self.psi.log_coeff) <= LOG_TERM_TOL and abs(self.phi.log_coeff) <= LOG_TERM_TOL

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z) * self.phi(z) + self.psi(z)

    def w_z(self, z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z) * self.phi.derivative(z) + self.psi.derivative(z)

    def w_zbar(self, z):
        return self.phi(np.asarray(z, dtype=complex))

    def gradient(self, z):
        """Complex ``(w_x, w_y)``; real and imaginary parts give u1 and u2."""
        wz, wzb = self.w_z(z), self.w_zbar(z)
        return wz + wzb, 1j * (wz - wzb)

    def components(self, z) -> np.ndarray:
        w = self(z)
        return np.stack([w.real, w.imag], axis=-1)


# ---------------------------------------------------------------------------
# Boundary matrices of the examples
# ---------------------------------------------------------------------------
def _const(M):
    M = np.asarray(M, dtype=float)
    return lambda theta: np.broadcast_to(M, np.shape(np.atleast_1d(theta)) + M.shape).copy()


def _normal_diag(trig):
    def f(theta):
        theta = np.atleast_1d(theta)
        out = np.zeros(theta.shape + (2, 2))
        out[..., 0, 0] = out[..., 1, 1] = trig(theta)
        return out

    return f


@dataclass(frozen=True)
class BoundaryMatrixPreset:
    """Boundary matrices ``P, Q, R`` as functions of ``theta``."""

    name: str
    P: Callable
    Q: Callable
    R: Callable


PRESETS = {
    "dirichlet": BoundaryMatrixPreset(
        "dirichlet", _const(np.zeros((2, 2))), _const(np.zeros((2, 2))), _const(np.eye(2))
    ),
    # nu = (cos theta, sin theta) is the normal pointing into |z| > 1
    "neumann": BoundaryMatrixPreset(
        "neumann", _normal_diag(np.cos), _normal_diag(np.sin), _const(np.zeros((2, 2)))
    ),
    "special_neumann": BoundaryMatrixPreset(
        "special_neumann",
        _const([[0.0, 0.0], [1.0, 0.0]]),
        _const([[0.0, 0.0], [0.0, -1.0]]),
        _const([[1.0, 0.0], [0.0, 0.0]]),
    ),
    "problem6": BoundaryMatrixPreset(
        "problem6", _const(np.eye(2)), _const([[0.0, -1.0], [-1.0, 0.0]]), _const(np.zeros((2, 2)))
    ),
}


def get_preset(name: str) -> BoundaryMatrixPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def det_P_plus_iQ(preset, theta):
    """``det(P(theta) + i Q(theta))`` for a preset (name or object) or a ``(P, Q)`` pair."""
    if isinstance(preset, str):
        preset = get_preset(preset)
    if isinstance(preset, BoundaryMatrixPreset):
        P, Q = preset.P(theta), preset.Q(theta)
    else:
        P, Q = (np.asarray(M, dtype=float) for M in preset)
    det = np.linalg.det(P + 1j * Q)
    return det[0] if np.ndim(theta) == 0 and np.ndim(det) else det


# ---------------------------------------------------------------------------
# Null families
# ---------------------------------------------------------------------------
def dirichlet_null_element(k: int) -> BitsadzeSolution:
    """``omega_k = zbar z**-k - z**-(k+1)``, zero on ``|z| = 1``."""
    if k < 1:
        raise InvalidOrder(f"Dirichlet null family starts at k = 1, got {k}")
    return BitsadzeSolution(
        ExteriorAnalyticFunction.monomial(k), ExteriorAnalyticFunction.monomial(k + 1, -1.0)
    )


def neumann_null_element(k: int) -> BitsadzeSolution:
    """``omega_0 = 1``; ``omega_k = zbar z**-k - (k-1)/(k+1) z**-(k+1)``."""
    if k < 0:
        raise InvalidOrder(f"Neumann null family starts at k = 0, got {k}")
    if k == 0:
        return BitsadzeSolution(ExteriorAnalyticFunction.zero(), ExteriorAnalyticFunction.monomial(0))
    return BitsadzeSolution(
        ExteriorAnalyticFunction.monomial(k),
        ExteriorAnalyticFunction.monomial(k + 1, -(k - 1) / (k + 1)),
    )


# ---------------------------------------------------------------------------
# Solvable problems
# ---------------------------------------------------------------------------
def _samples(f, grid=None):
    if isinstance(f, BoundarySamples):
        return f
    if callable(f):
        return BoundarySamples.from_function(grid, f)
    return BoundarySamples(grid or PeriodicGrid(len(f)), np.asarray(f, dtype=float))


def _check_moment(f: BoundarySamples, condition: str):
    moment = float(np.real(integrate_periodic(f)))
    if abs(moment) > MOMENT_TOL:
        raise SolvabilityViolated(condition, moment)
    return moment


def solve_special_neumann(f1, f2, K: float = 0.0, grid: Optional[PeriodicGrid] = None):
    """Solution of ``u1 = f1``, ``u1_x - u2_y = f2`` on ``|t| = 1``.

    Assembled from the four boundary integrals::

        phi = -1/(4 pi i) int (t+z)/(t(t-z)) f2 dt
        psi = -phi/z - 1/(pi i) int f1/(t-z) dt + 1/(2 pi i) int f1/t dt + i K

    Requires ``int f2 dtheta = 0`` (otherwise ``zbar phi`` grows).  The
    boundary conditions are re-checked on the grid; ``fixture_status`` is
    ``"certified"`` when both residuals are below 1e-8 and
    ``"formula_mismatch"`` otherwise.
    """
    f1 = _samples(f1, grid)
    f2 = _samples(f2, f1.grid)
    _check_moment(f2, "f2-moment")
    phi = ExteriorAnalyticFunction.from_boundary_integral(f2, "schwarz", -1.0 / (4j * np.pi))
    cauchy = ExteriorAnalyticFunction.from_boundary_integral(f1, "cauchy", -1.0 / (1j * np.pi))
    inverse = ExteriorAnalyticFunction.from_boundary_integral(f1, "inverse", 1.0 / (2j * np.pi))
    psi = ExteriorAnalyticFunction.monomial(0, 1j * K).plus(phi.divided_by_z(), -1.0)
    psi = psi.plus(cauchy).plus(inverse)
    sol = BitsadzeSolution(phi, psi, "pending", {"K": K})
    preset = get_preset("special_neumann")
    res = boundary_residual(sol, preset.P, preset.Q, preset.R, np.stack([f1.values, f2.values], -1), f1.grid)
    status = "certified" if np.max(res) <= FIXTURE_TOL else "formula_mismatch"
    if status != "certified":
        logger.warning("special Neumann formula residual %s exceeds %g", res, FIXTURE_TOL)
    return BitsadzeSolution(phi, psi, status, {"K": K, "boundary_residual": res})


def solve_problem6(f1, f2, constant: complex = 0.0, grid: Optional[PeriodicGrid] = None):
    """Solve ``2 Re phi = f1``, ``2 Im[tbar phi' + psi'] = f2`` on ``|t| = 1``.

    ``phi = -1/(4 pi i) int (t+z)/(t(t-z)) f1 dt`` and
    ``psi' = -phi'/z - 1/(4 pi) int (t+z)/(t(t-z)) f2 dt``; ``psi`` is the
    term-wise primitive with ``psi(inf) = constant``.  Both ``f1`` and
    ``f2`` must have zero mean.  The frequency-one content of ``f2`` shows
    up as a ``z**-1`` term in ``psi'``; its primitive is logarithmic, so the
    returned ``psi`` is then multivalued (``single_valued`` is False) while
    ``w_z``, ``w_zbar`` and every boundary condition remain exact.
    """
    f1 = _samples(f1, grid)
    f2 = _samples(f2, f1.grid)
    _check_moment(f1, "f1-moment")
    _check_moment(f2, "f2-moment")
    phi = ExteriorAnalyticFunction.from_boundary_integral(f1, "schwarz", -1.0 / (4j * np.pi))
    schwarz_f2 = ExteriorAnalyticFunction.from_boundary_integral(f2, "schwarz", -1.0 / (4.0 * np.pi))
    psi_prime = schwarz_f2.plus(phi.derivative_function().divided_by_z(), -1.0)
    psi = psi_prime.antiderivative(constant)
    if abs(psi.log_coeff) > LOG_TERM_TOL:
        logger.warning(
            "f2 has frequency-one content: psi carries %.3g log z and is multivalued",
            abs(psi.log_coeff),
        )
    return BitsadzeSolution(phi, psi, "exact", {"constant": constant, "psi_prime": psi_prime})


def boundary_residual(sol: BitsadzeSolution, P, Q, R, f, grid: PeriodicGrid) -> np.ndarray:
    """Max-norm of ``P u_x + Q u_y + R u - f`` per component on ``|t| = 1``.

    ``P, Q, R`` are callables of ``theta`` returning ``(N, 2, 2)`` arrays or
    constant 2x2 matrices; ``f`` is ``(N, 2)`` samples, a callable or None.
    """
    theta = grid.nodes
    t = np.exp(1j * theta)

    def mat(M):
        return M(theta) if callable(M) else np.broadcast_to(np.asarray(M, float), (grid.N, 2, 2))

    wx, wy = sol.gradient(t)
    ux = np.stack([wx.real, wx.imag], -1)
    uy = np.stack([wy.real, wy.imag], -1)
    Rm = mat(R)
    r = np.einsum("nij,nj->ni", mat(P), ux) + np.einsum("nij,nj->ni", mat(Q), uy)
    if np.any(Rm):
        r = r + np.einsum("nij,nj->ni", Rm, sol.components(t))
    if f is not None:
        fv = f(theta) if callable(f) else np.asarray(f.values if isinstance(f, BoundarySamples) else f)
        r = r - fv
    return np.max(np.abs(r), axis=0)
