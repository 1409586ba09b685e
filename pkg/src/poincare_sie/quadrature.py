"""Trapezoidal and Cauchy principal-value quadrature on closed curves."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, TooCloseToBoundary
from .geometry import CurveParametrization, SampledCurve, sample_curve

GUARD_FACTOR = 5.0


@dataclass(frozen=True)
class PeriodicGrid:
    """Equispaced nodes ``theta_i = 2 pi i / N`` with weights ``2 pi / N``."""

    N: int

    def __post_init__(self):
        if self.N < 8 or self.N % 2:
            raise ValueError(f"grid size must be even and >= 8, got {self.N}")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.N) / self.N

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.N

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.N, self.weight)

    def refined(self, factor: int = 2) -> "PeriodicGrid":
        return PeriodicGrid(self.N * factor)


@dataclass(frozen=True)
class BoundarySamples:
    """Values on a periodic grid; ``values`` has shape ``(N,)`` or ``(N, n)``."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape[0] != self.grid.N:
            raise DimensionMismatch(f"{values.shape[0]} samples for a grid of {self.grid.N}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func) -> "BoundarySamples":
        return cls(grid, np.asarray(func(grid.nodes)))

    @property
    def n(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]


def integrate_periodic(samples: BoundarySamples):
    """Trapezoidal rule over one period (per component for vector data)."""
    return samples.grid.weight * np.sum(samples.values, axis=0)


def fourier_wavenumbers(N: int) -> np.ndarray:
    """Signed integer wavenumbers in FFT order, Nyquist reported as ``N/2``."""
    k = np.fft.fftfreq(N, 1.0 / N)
    k[N // 2] = N // 2
    return k


@lru_cache(maxsize=16)
def _diff_matrix(N: int) -> np.ndarray:
    k = np.fft.fftfreq(N, 1.0 / N)
    k[N // 2] = 0.0  # Nyquist mode has no consistent real derivative
    D = np.fft.ifft(1j * k[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0).real
    D.setflags(write=False)
    return D


def spectral_derivative_matrix(N: int) -> np.ndarray:
    """Matrix of Fourier differentiation on ``N`` equispaced nodes."""
    return _diff_matrix(N)


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """d/dtheta of periodic samples along axis 0."""
    N = values.shape[0]
    k = np.fft.fftfreq(N, 1.0 / N)
    k[N // 2] = 0.0
    shape = (N,) + (1,) * (values.ndim - 1)
    d = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=0), axis=0)
    return d if np.iscomplexobj(values) else d.real


def trig_interpolate(values: np.ndarray, M: int) -> np.ndarray:
    """Resample periodic samples (axis 0) from ``N`` to ``M >= N`` nodes."""
    N = values.shape[0]
    if M == N:
        return values.copy()
    F = np.fft.fft(values, axis=0)
    G = np.zeros((M,) + values.shape[1:], dtype=complex)
    h = N // 2
    G[:h] = F[:h]
    G[M - h + 1:] = F[h + 1:]
    # split the Nyquist coefficient symmetrically
    G[h] = 0.5 * F[h]
    G[M - h] = 0.5 * F[h]
    out = np.fft.ifft(G, axis=0) * (M / N)
    return out if np.iscomplexobj(values) else out.real


def pv_cauchy_matrix(samples: SampledCurve) -> np.ndarray:
    """Matrix ``C`` with ``(C mu)_i ~ PV int_S mu(tau) / (tau - t_i) dtau``.

    Singularity subtraction: ``int (mu(tau) - mu(t_i)) / (tau - t_i) dtau``
    by the trapezoidal rule, whose diagonal limit is ``mu'(theta_i)``
    (spectral differentiation), plus ``pi i mu(t_i)``.
    """
    N = samples.theta.size
    w = 2.0 * np.pi / N
    t, tp = samples.points, samples.tangents
    diff = t[None, :] - t[:, None]
    np.fill_diagonal(diff, 1.0)
    C = w * tp[None, :] / diff
    np.fill_diagonal(C, 0.0)
    C[np.diag_indices(N)] = -C.sum(axis=1) + np.pi * 1j
    return C + w * spectral_derivative_matrix(N)


def pv_cauchy_apply(curve: CurveParametrization, grid: PeriodicGrid, density, target: int):
    """PV integral of ``density / (tau - t_target)`` over the curve."""
    mu = np.asarray(density.values if isinstance(density, BoundarySamples) else density)
    if not np.any(mu):
        return 0.0j
    s = sample_curve(curve, grid.nodes)
    t, tp = s.points, s.tangents
    i = target
    dmu = spectral_derivative(mu)
    others = np.arange(grid.N) != i
    reg = np.sum((mu[others] - mu[i]) * tp[others] / (t[others] - t[i])) + dmu[i]
    return grid.weight * reg + np.pi * 1j * mu[i]


def distance_to_curve(samples: SampledCurve, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.min(np.abs(z[:, None] - samples.points[None, :]), axis=1)


def guard_distance(samples: SampledCurve) -> float:
    N = samples.theta.size
    return GUARD_FACTOR * (2.0 * np.pi / N) * float(np.max(np.abs(samples.tangents)))


def check_guard(samples: SampledCurve, z) -> None:
    d = distance_to_curve(samples, z)
    g = guard_distance(samples)
    if np.any(d < g):
        raise TooCloseToBoundary(
            f"evaluation point at distance {np.min(d):.3g} < guard {g:.3g} from the curve"
        )


KERNELS = {
    "cauchy": lambda tau, z: 1.0 / (tau - z),
    "schwarz": lambda tau, z: (tau + z) / (tau * (tau - z)),
    "inverse": lambda tau, z: 1.0 / tau + 0.0 * z,
}


def cauchy_offboundary(curve, grid: PeriodicGrid, density, z, kernel: str = "cauchy"):
    """Trapezoidal ``int_S mu(tau) k(tau, z) dtau`` for ``z`` away from the curve.

    ``kernel`` is ``"cauchy"`` (``1/(tau - z)``), ``"schwarz"``
    (``(tau + z)/(tau (tau - z))``) or ``"inverse"`` (``1/tau``).
    Points inside the guard band raise :class:`TooCloseToBoundary`; no
    near-boundary correction is attempted.
    """
    mu = np.asarray(density.values if isinstance(density, BoundarySamples) else density)
    s = sample_curve(curve, grid.nodes)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if kernel != "inverse":
        check_guard(s, zz)
    K = KERNELS[kernel](s.points[None, :], zz[:, None])
    out = grid.weight * (K * (mu * s.tangents)[None, :]).sum(axis=1)
    return out[0] if np.ndim(z) == 0 else out.reshape(np.shape(z))
