"""Nystrom solver and Noether diagnostics for singular integral systems.

Systems have the form

    alpha(t) mu(t) - beta(t) PV int_S mu(tau)/(tau - t) dtau
                   + int_S K(t, tau) mu(tau) dtau = f(t)

with ``n x n`` matrix coefficients.  Unknowns are stored component-major:
entry ``j * N + i`` is component ``j`` at node ``i``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NotNormal, PhaseResolutionExceeded
from .geometry import CurveParametrization, sample_curve
from .quadrature import PeriodicGrid, fourier_wavenumbers, pv_cauchy_matrix, trig_interpolate

logger = logging.getLogger(__name__)

SYMBOL_TOL = 1e-10
RANK_TOL = 1e-8
GAP_RELIABLE = 10.0
MAX_REFINE = 8
RESOLUTION_CUTOFF = 0.1


def _as_symbol(value, n: int) -> Callable:
    """Wrap a callable, constant matrix or per-node samples as ``theta -> (m, n, n)``."""
    if callable(value):
        def f(theta):
            theta = np.atleast_1d(np.asarray(theta, dtype=float))
            out = np.asarray(value(theta), dtype=complex)
            return out.reshape(theta.size, n, n)
        return f
    arr = np.asarray(value, dtype=complex)
    if arr.ndim <= 2 and arr.size == n * n:
        M = arr.reshape(n, n)
        return lambda theta: np.broadcast_to(M, (np.atleast_1d(theta).size, n, n)).copy()
    samples = arr.reshape(arr.shape[0], n, n)

    def interp(theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        N = samples.shape[0]
        M = theta.size
        grid = 2.0 * np.pi * np.arange(M) / M
        if M % N == 0 and np.allclose(theta, grid):
            return trig_interpolate(samples, M)
        raise ValueError("sampled symbols can only be refined onto finer equispaced grids")

    return interp


@dataclass(frozen=True)
class SingularSystem:
    """Coefficients of one singular integral system on a fixed grid.

    ``alpha`` and ``beta`` map angles to ``(m, n, n)`` arrays (constants and
    per-node samples are wrapped).  ``kernel`` holds ``K(t_i, tau_l)`` as an
    ``(n, n, N, N)`` array with its diagonal limit filled in.  ``real``
    marks systems whose exact operator maps real densities to real data;
    their discretisation keeps the real part.
    """

    curve: CurveParametrization
    grid: PeriodicGrid
    n: int
    alpha: Callable
    beta: Callable
    kernel: Optional[np.ndarray] = None
    rhs: Optional[np.ndarray] = None
    real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_symbol(self.alpha, self.n))
        object.__setattr__(self, "beta", _as_symbol(self.beta, self.n))
        N = self.grid.N
        if self.kernel is not None and np.shape(self.kernel) != (self.n, self.n, N, N):
            raise DimensionMismatch(f"kernel shape {np.shape(self.kernel)} != {(self.n, self.n, N, N)}")
        if self.rhs is not None:
            rhs = np.asarray(self.rhs).reshape(self.n, N)
            object.__setattr__(self, "rhs", rhs)

    def with_rhs(self, rhs) -> "SingularSystem":
        return SingularSystem(
            self.curve, self.grid, self.n, self.alpha, self.beta, self.kernel, rhs, self.real
        )

    def node_weights(self) -> np.ndarray:
        """Arc-length quadrature weights ``w |t'|``, repeated per component."""
        s = sample_curve(self.curve, self.grid.nodes)
        return np.tile(self.grid.weight * s.arc_element, self.n)


@dataclass
class NoetherDiagnostics:
    min_det_minus: float
    min_det_plus: float
    normal: bool
    kappa: Optional[int] = None
    l: Optional[int] = None
    l_prime: Optional[int] = None
    spectral_gap: Optional[float] = None
    count_reliable: Optional[bool] = None
    solvability_residuals: list = field(default_factory=list)

    @property
    def noether_consistent(self) -> Optional[bool]:
        if self.kappa is None or self.l is None:
            return None
        return self.l - self.l_prime == self.kappa

    def to_dict(self) -> dict:
        gap = self.spectral_gap
        return {
            "normal": bool(self.normal),
            "kappa": self.kappa,
            "l": self.l,
            "l_prime": self.l_prime,
            "min_det_minus": float(self.min_det_minus),
            "min_det_plus": float(self.min_det_plus),
            "spectral_gap": None if gap is None or not np.isfinite(gap) else float(gap),
            "count_reliable": self.count_reliable,
            "noether_consistent": self.noether_consistent,
            "solvability_residuals": [float(abs(r)) for r in self.solvability_residuals],
        }


# ---------------------------------------------------------------------------
# Discretisation
# ---------------------------------------------------------------------------
def discretize(sys: SingularSystem):
    """Dense Nystrom matrix ``(nN, nN)`` and right-hand side vector."""
    N, n = sys.grid.N, sys.n
    theta = sys.grid.nodes
    s = sample_curve(sys.curve, theta)
    C = pv_cauchy_matrix(s)
    alpha, beta = sys.alpha(theta), sys.beta(theta)
    A = np.zeros((n * N, n * N), dtype=complex)
    eye = np.eye(N)
    for k in range(n):
        for j in range(n):
            block = alpha[:, k, j][:, None] * eye - beta[:, k, j][:, None] * C
            if sys.kernel is not None:
                block = block + sys.grid.weight * sys.kernel[k, j] * s.tangents[None, :]
            A[k * N:(k + 1) * N, j * N:(j + 1) * N] = block
    rhs = np.zeros(n * N, dtype=complex) if sys.rhs is None else sys.rhs.reshape(-1).astype(complex)
    if sys.real:
        return A.real, rhs.real
    return A, rhs


# ---------------------------------------------------------------------------
# Symbol and index
# ---------------------------------------------------------------------------
def symbol_determinants(sys: SingularSystem, theta):
    a, b = sys.alpha(theta), sys.beta(theta)
    return np.linalg.det(a - np.pi * 1j * b), np.linalg.det(a + np.pi * 1j * b)


def symbol_check(sys: SingularSystem):
    """``(min |det(alpha - pi i beta)|, min |det(alpha + pi i beta)|, normal)`` over the nodes."""
    minus, plus = symbol_determinants(sys, sys.grid.nodes)
    m_minus, m_plus = float(np.min(np.abs(minus))), float(np.min(np.abs(plus)))
    return m_minus, m_plus, bool(m_minus > SYMBOL_TOL and m_plus > SYMBOL_TOL)


def winding_increments(values: np.ndarray) -> np.ndarray:
    """Principal phase steps of a closed sampled loop (last step wraps around)."""
    return np.angle(np.roll(values, -1) / values)


def _winding(sys: SingularSystem, N: int) -> Optional[float]:
    """Winding in turns on ``N`` nodes, or ``None`` when a phase step reaches ``pi / 2``."""
    theta = 2.0 * np.pi * np.arange(N) / N
    minus, plus = symbol_determinants(sys, theta)
    steps = winding_increments(plus / minus)
    if np.max(np.abs(steps)) >= np.pi / 2:
        return None
    return float(np.sum(steps) / (2.0 * np.pi))


def index(sys: SingularSystem) -> int:
    """Winding number of ``det(alpha + i pi beta) / det(alpha - i pi beta)``.

    A winding is accepted once it is resolved on ``N`` and ``2N`` nodes and
    both levels agree; a coarse grid can alias a fast phase into a small
    step.  ``N`` is doubled up to 8 times the system grid.
    """
    if not symbol_check(sys)[2]:
        raise NotNormal("symbol determinant vanishes on the curve")
    N = sys.grid.N
    coarse = _winding(sys, N)
    while N <= MAX_REFINE * sys.grid.N:
        fine = _winding(sys, 2 * N)
        if coarse is not None and fine is not None and abs(coarse - fine) < 0.5:
            kappa = int(round(fine))
            if abs(fine - kappa) > 1e-6:
                raise PhaseResolutionExceeded(f"non-integer winding {fine}")
            return kappa
        coarse = fine
        N *= 2
    raise PhaseResolutionExceeded(f"winding not confirmed up to {N} nodes")


# ---------------------------------------------------------------------------
# Null spaces
# ---------------------------------------------------------------------------
@dataclass
class NullspaceResult:
    kernel: np.ndarray  # (cols, l) right null vectors of A
    adjoint: np.ndarray  # (rows, l') null functions of the weighted adjoint
    l: int
    l_prime: int
    singular_values: np.ndarray
    spectral_gap: float
    reliable: bool
    row_weights: np.ndarray
    col_weights: np.ndarray
    discarded: tuple = (0, 0)


def _resolved_subspace(V: np.ndarray, N: int, n_blocks: int) -> tuple[np.ndarray, int]:
    """Split off directions of ``span(V)`` that the grid does not resolve.

    Only the first ``n_blocks * N`` entries (the sampled functions) are
    inspected.  A direction is kept when less than ``RESOLUTION_CUTOFF`` of
    its norm lives in wavenumbers ``|k| > N / 4``.
    """
    if V.shape[1] == 0:
        return V, 0
    Q, _ = np.linalg.qr(V)
    F = np.fft.fft(Q[: n_blocks * N].reshape(n_blocks, N, -1), axis=1) / np.sqrt(N)
    high = np.abs(fourier_wavenumbers(N)) > N / 4
    H = F[:, high, :].reshape(-1, Q.shape[1])
    _, s, Wh = np.linalg.svd(H, full_matrices=True)
    s_full = np.zeros(Q.shape[1])
    s_full[: s.size] = s
    keep = s_full < RESOLUTION_CUTOFF
    return Q @ Wh.conj().T[:, keep], int(np.sum(~keep))


def nullspaces(
    A,
    weights=None,
    tol: float = RANK_TOL,
    row_weights=None,
    block_size: Optional[int] = None,
    n_blocks: int = 1,
) -> NullspaceResult:
    """Kernels of ``A`` and of its adjoint in weighted inner products.

    Columns carry the inner product ``sum_j weights_j u_j conj(v_j)`` and
    rows ``row_weights`` (default: ``weights`` for square ``A``).  Singular
    values below ``tol`` times the largest are treated as zero.  With
    ``block_size`` set, null vectors whose energy sits in the top Fourier
    modes of each ``block_size``-long block are discarded as grid artefacts.
    """
    A = np.asarray(A)
    rows, cols = A.shape
    cw = np.ones(cols) if weights is None else np.asarray(weights, dtype=float)
    if row_weights is None:
        rw = cw if rows == cols else np.ones(rows)
    else:
        rw = np.asarray(row_weights, dtype=float)
    sr, sc = np.sqrt(rw), np.sqrt(cw)
    B = sr[:, None] * A / sc[None, :]
    U, s, Vh = np.linalg.svd(B)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    accepted = s[rank - 1] if rank > 0 else np.inf
    rejected = s[rank] if rank < s.size else 0.0
    gap = np.inf if rejected == 0.0 else accepted / rejected
    kernel = (Vh[rank:].conj().T) / sc[:, None]
    adjoint = U[:, rank:] / sr[:, None]
    dropped = (0, 0)
    if block_size is not None:
        kernel, d1 = _resolved_subspace(kernel, block_size, n_blocks)
        adjoint, d2 = _resolved_subspace(adjoint, block_size, n_blocks)
        dropped = (d1, d2)
        if d1 or d2:
            logger.info("discarded %d kernel and %d adjoint directions as unresolved", d1, d2)
    # sup-norm normalisation over the sampled-function rows only
    data = adjoint.shape[0] if block_size is None else block_size * n_blocks
    for k in range(adjoint.shape[1]):
        adjoint[:, k] /= adjoint[np.argmax(np.abs(adjoint[:data, k])), k]
    return NullspaceResult(
        kernel, adjoint, kernel.shape[1], adjoint.shape[1], s, float(gap),
        bool(gap >= GAP_RELIABLE), rw, cw, dropped,
    )


# ---------------------------------------------------------------------------
# Solve
# ---------------------------------------------------------------------------
@dataclass
class SolveResult:
    mu: Optional[np.ndarray]
    status: str  # "Solvable" | "Unsolvable"
    residuals: np.ndarray
    kernel_basis: np.ndarray
    ls_residual: float


def solvability_residuals(rhs, nulls: NullspaceResult) -> np.ndarray:
    """``<f, mu_*^(k)>`` in the row inner product for every adjoint null function."""
    rhs = np.asarray(rhs)
    return np.array([np.sum(nulls.row_weights * rhs * np.conj(v)) for v in nulls.adjoint.T])


def solve(A, rhs, nulls: NullspaceResult, tol: float = RANK_TOL) -> SolveResult:
    """Minimum-norm particular solution plus kernel basis.

    The orthogonality residuals against the adjoint null functions decide
    solvability; they are compared with ``tol`` scaled by the size of the
    data.
    """
    A = np.asarray(A)
    rhs = np.asarray(rhs)
    residuals = solvability_residuals(rhs, nulls)
    scale = max(1.0, float(np.sqrt(np.sum(nulls.row_weights * np.abs(rhs) ** 2))))
    ok = bool(np.all(np.abs(residuals) <= tol * scale))
    sr, sc = np.sqrt(nulls.row_weights), np.sqrt(nulls.col_weights)
    B = sr[:, None] * A / sc[None, :]
    y = np.linalg.lstsq(B, sr * rhs, rcond=tol)[0]
    mu = y / sc
    ls = float(np.linalg.norm(A @ mu - rhs))
    return SolveResult(mu, "Solvable" if ok else "Unsolvable", residuals, nulls.kernel, ls)


def diagnose(sys: SingularSystem, tol: float = RANK_TOL, filter_unresolved: bool = True):
    """Symbol check, index and discrete null-space counts of ``sys``."""
    m_minus, m_plus, normal = symbol_check(sys)
    diag = NoetherDiagnostics(m_minus, m_plus, normal)
    if not normal:
        return diag, None, None
    diag.kappa = index(sys)
    A, rhs = discretize(sys)
    nulls = nullspaces(
        A, sys.node_weights(), tol,
        block_size=sys.grid.N if filter_unresolved else None, n_blocks=sys.n,
    )
    diag.l, diag.l_prime = nulls.l, nulls.l_prime
    diag.spectral_gap, diag.count_reliable = nulls.spectral_gap, nulls.reliable
    if diag.l - diag.l_prime != diag.kappa:
        logger.warning("discrete count l - l' = %d differs from index %d", diag.l - diag.l_prime, diag.kappa)
    return diag, (A, rhs), nulls
