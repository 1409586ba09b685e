"""Boundary curves, elliptic coefficients and characteristic maps.

Curves are closed, 2*pi-periodic and described by finite trigonometric
tables, so every derivative is available in closed form.  The orientation
is counterclockwise: walking along the curve the unbounded exterior lies
to the right and the normal ``nu`` returned by :func:`curve_frame` points
into it.

Each scalar equation ``a u_xx + 2 b u_xy + c u_yy = 0`` is carried to the
Laplace equation by the linear map

    z_j = x / sqrt(a) + i (sqrt(a)/delta y - b/(delta sqrt(a)) x),
    delta**2 = a c - b**2,

implemented by :class:`CharacteristicMap`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateCurve, DimensionMismatch, NotElliptic

TWO_PI = 2.0 * np.pi
DEGENERACY_TOL = 1e-12
ROOT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Trigonometric tables
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TrigSeries:
    """Finite Fourier table ``sum_k cos[..., k] cos(k t) + sin[..., k] sin(k t)``.

    ``cos`` and ``sin`` share a shape ``value_shape + (K + 1,)``; ``sin[..., 0]``
    is ignored.  Evaluation at an array of angles of length ``m`` returns an
    array of shape ``(m,) + value_shape``.
    """

    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.cos, dtype=float))
        s = np.atleast_1d(np.asarray(self.sin, dtype=float))
        if c.shape != s.shape:
            raise DimensionMismatch(f"cos table {c.shape} and sin table {s.shape} differ")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @classmethod
    def constant(cls, value) -> "TrigSeries":
        value = np.asarray(value, dtype=float)
        c = value[..., None]
        return cls(c, np.zeros_like(c))

    @classmethod
    def from_samples(cls, samples, degree: Optional[int] = None) -> "TrigSeries":
        """Fit a table to values on the equispaced grid ``2 pi i / N``.

        ``samples`` has shape ``(N,) + value_shape``.  The Nyquist mode is
        dropped, so the default degree is ``N // 2 - 1``.
        """
        samples = np.asarray(samples, dtype=float)
        N = samples.shape[0]
        K = N // 2 - 1 if degree is None else min(degree, N // 2 - 1)
        F = np.fft.fft(samples, axis=0) / N
        F = np.moveaxis(F, 0, -1)
        c = np.zeros(samples.shape[1:] + (K + 1,))
        s = np.zeros_like(c)
        c[..., 0] = F[..., 0].real
        for k in range(1, K + 1):
            c[..., k] = 2.0 * F[..., k].real
            s[..., k] = -2.0 * F[..., k].imag
        return cls(c, s)

    @property
    def degree(self) -> int:
        return self.cos.shape[-1] - 1

    @property
    def value_shape(self) -> tuple:
        return self.cos.shape[:-1]

    def __call__(self, theta, order: int = 0) -> np.ndarray:
        """Evaluate the table (or its ``order``-th derivative) at ``theta``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = np.arange(self.degree + 1, dtype=float)
        kt = np.outer(theta, k)
        # d^r/dt^r of (cos, sin) rotates by r quarter turns and scales by k^r
        scale = k**order
        c_part = np.cos(kt + order * np.pi / 2) * scale
        s_part = np.sin(kt + order * np.pi / 2) * scale
        flat_c = self.cos.reshape(-1, self.degree + 1)
        flat_s = self.sin.reshape(-1, self.degree + 1)
        out = c_part @ flat_c.T + s_part @ flat_s.T
        return out.reshape((theta.size,) + self.value_shape)

    def to_dict(self) -> dict:
        return {"cos": self.cos.tolist(), "sin": self.sin.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "TrigSeries":
        unknown = set(data) - {"cos", "sin"}
        if unknown:
            raise ValueError(f"unknown Fourier table fields: {sorted(unknown)}")
        return cls(np.asarray(data["cos"], dtype=float), np.asarray(data["sin"], dtype=float))


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CurveParametrization:
    """Closed boundary curve ``t(theta) = x(theta) + i y(theta)``.

    ``kind`` is ``"unit_circle"`` or ``"trigonometric"``; the latter needs
    scalar tables ``x`` and ``y``.  Construction checks that the curve is
    non-degenerate, counterclockwise and star-shaped with respect to the
    origin (``Im(conj(t) t') > 0``), which the logarithmic representation
    relies on.
    """

    kind: str = "unit_circle"
    x: Optional[TrigSeries] = None
    y: Optional[TrigSeries] = None
    period: float = field(default=TWO_PI, init=False)

    def __post_init__(self):
        if self.kind not in ("unit_circle", "trigonometric"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "trigonometric":
            if self.x is None or self.y is None:
                raise ValueError("trigonometric curve needs x and y tables")
            if self.x.value_shape != () or self.y.value_shape != ():
                raise DimensionMismatch("curve tables must be scalar")
            theta = np.linspace(0.0, TWO_PI, 1024, endpoint=False)
            tp = self.derivative(theta)
            if np.min(np.abs(tp)) < DEGENERACY_TOL:
                raise DegenerateCurve("|t'(theta)| vanishes on the sampling grid")
            if np.min(np.imag(np.conj(self.point(theta)) * tp)) <= 0.0:
                raise DegenerateCurve(
                    "curve must be counterclockwise and star-shaped about the origin"
                )

    @classmethod
    def unit_circle(cls) -> "CurveParametrization":
        return cls("unit_circle")

    @classmethod
    def ellipse(cls, semi_x: float, semi_y: float) -> "CurveParametrization":
        return cls(
            "trigonometric",
            TrigSeries([0.0, semi_x], [0.0, 0.0]),
            TrigSeries([0.0, 0.0], [0.0, semi_y]),
        )

    def _eval(self, theta, order):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "unit_circle":
            return (1j**order) * np.exp(1j * theta)
        flat = np.atleast_1d(theta)
        z = self.x(flat, order) + 1j * self.y(flat, order)
        return z.reshape(theta.shape)

    def point(self, theta):
        return self._eval(theta, 0)

    def derivative(self, theta):
        return self._eval(theta, 1)

    def second_derivative(self, theta):
        return self._eval(theta, 2)

    def to_dict(self) -> dict:
        if self.kind == "unit_circle":
            return {"kind": "unit_circle"}
        return {"kind": "trigonometric", "x": self.x.to_dict(), "y": self.y.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "CurveParametrization":
        unknown = set(data) - {"kind", "x", "y"}
        if unknown:
            raise ValueError(f"unknown curve fields: {sorted(unknown)}")
        if data.get("kind") == "unit_circle":
            return cls.unit_circle()
        return cls(
            "trigonometric", TrigSeries.from_dict(data["x"]), TrigSeries.from_dict(data["y"])
        )


def curve_point(curve: CurveParametrization, theta):
    """Point ``t(theta)`` on the curve."""
    return curve.point(theta)


@dataclass(frozen=True)
class CurveFrame:
    tangent: np.ndarray
    arc_element: np.ndarray
    normal: np.ndarray  # (..., 2), unit, pointing into the exterior domain


def curve_frame(curve: CurveParametrization, theta) -> CurveFrame:
    """Tangent ``t'``, arc element ``|t'|`` and unit normal into the exterior."""
    tp = np.asarray(curve.derivative(theta))
    speed = np.abs(tp)
    if np.any(speed < DEGENERACY_TOL):
        raise DegenerateCurve("|t'(theta)| below tolerance")
    # counterclockwise curve: exterior lies to the right of the tangent
    nu = -1j * tp / speed
    return CurveFrame(tp, speed, np.stack([nu.real, nu.imag], axis=-1))


# ---------------------------------------------------------------------------
# Coefficients and characteristic maps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EllipticCoefficients:
    """Constants ``(a_j, b_j, c_j)`` of ``n`` decoupled scalar equations."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a, b, c = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (self.a, self.b, self.c))
        if not (a.shape == b.shape == c.shape) or a.ndim != 1:
            raise DimensionMismatch("a, b, c must be 1-d arrays of equal length")
        if np.any(a <= 0) or np.any(a * c - b * b <= 0):
            raise NotElliptic("need a_j > 0 and a_j c_j - b_j^2 > 0 for every component")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def laplace(cls, n: int = 1) -> "EllipticCoefficients":
        return cls(np.ones(n), np.zeros(n), np.ones(n))

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def delta(self) -> np.ndarray:
        return np.sqrt(self.a * self.c - self.b**2)

    def maps(self) -> list["CharacteristicMap"]:
        return [CharacteristicMap(j, self.a[j], self.b[j], self.c[j]) for j in range(self.n)]

    def matrices(self):
        """Diagonal ``A, B, C`` of the decomposed system."""
        return np.diag(self.a), np.diag(self.b), np.diag(self.c)


@dataclass(frozen=True)
class CharacteristicMap:
    """Linear map ``(x, y) -> z_j`` that turns component ``j`` into Laplace."""

    index: int
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a <= 0 or self.a * self.c - self.b**2 <= 0:
            raise NotElliptic(f"component {self.index} is not elliptic")

    @property
    def delta(self) -> float:
        return float(np.sqrt(self.a * self.c - self.b**2))

    @property
    def dz_dx(self) -> complex:
        sa = np.sqrt(self.a)
        return complex(1.0 / sa, -self.b / (self.delta * sa))

    @property
    def dz_dy(self) -> complex:
        return complex(0.0, np.sqrt(self.a) / self.delta)

    @property
    def jacobian(self) -> np.ndarray:
        """Real 2x2 Jacobian of ``(x, y) -> (x_j, y_j)``."""
        zx, zy = self.dz_dx, self.dz_dy
        return np.array([[zx.real, zy.real], [zx.imag, zy.imag]])

    def forward(self, z):
        """Image of the point(s) ``z = x + i y`` (complex array)."""
        z = np.asarray(z)
        return self.dz_dx * z.real + self.dz_dy * z.imag

    def inverse(self, zj):
        zj = np.asarray(zj)
        x = np.sqrt(self.a) * zj.real
        y = (self.delta * zj.imag + self.b * x / np.sqrt(self.a)) / np.sqrt(self.a)
        return x + 1j * y


def characteristic_forward(cmap: CharacteristicMap, point):
    """``z_j`` for a point given as complex ``x + i y`` or an ``(x, y)`` pair."""
    if isinstance(point, tuple):
        point = complex(point[0], point[1])
    return cmap.forward(point)


def characteristic_inverse(cmap: CharacteristicMap, zj):
    return cmap.inverse(zj)


@dataclass(frozen=True)
class SampledCurve:
    """Curve samples on a grid: points, first/second derivatives, speed."""

    theta: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    second: np.ndarray

    @property
    def arc_element(self) -> np.ndarray:
        return np.abs(self.tangents)


def sample_curve(curve: CurveParametrization, theta) -> SampledCurve:
    theta = np.asarray(theta, dtype=float)
    tp = curve.derivative(theta)
    if np.any(np.abs(tp) < DEGENERACY_TOL):
        raise DegenerateCurve("|t'(theta)| below tolerance")
    return SampledCurve(theta, curve.point(theta), tp, curve.second_derivative(theta))


def image_curve(curve: CurveParametrization, cmap: CharacteristicMap, theta) -> SampledCurve:
    """Samples of the image curve ``S_j``; tangents transform by the same linear map."""
    base = sample_curve(curve, theta)
    # the map is linear, so derivatives map exactly like points
    return SampledCurve(
        base.theta, cmap.forward(base.points), cmap.forward(base.tangents), cmap.forward(base.second)
    )


# ---------------------------------------------------------------------------
# Ellipticity
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EllipticityResult:
    elliptic: bool
    witness: Optional[float]
    polynomial: np.ndarray  # ascending coefficients of det(A l^2 + 2 B l + C)


def characteristic_determinant(A, B, C, lam):
    lam = np.asarray(lam, dtype=float)
    M = A[None] * lam.reshape(-1, 1, 1) ** 2 + 2.0 * B[None] * lam.reshape(-1, 1, 1) + C[None]
    return np.linalg.det(M).reshape(lam.shape)


def ellipticity_check(A, B, C) -> EllipticityResult:
    """Decide whether ``det(A l^2 + 2 B l + C)`` has a real root ``l``.

    The determinant is recovered exactly as a polynomial of degree ``2n``
    from ``2n + 1`` samples; its roots are then screened for real ones.  A
    coarse grid scan catches sign changes the root finder might blur.  A
    singular ``A`` means a real characteristic direction at infinity and is
    reported with ``witness = inf``.
    """
    A, B, C = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, C))
    n = A.shape[0]
    if any(M.shape != (n, n) for M in (A, B, C)):
        raise DimensionMismatch("A, B, C must be square of equal size")
    deg = 2 * n
    nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    poly = np.polynomial.polynomial.polyfit(nodes, characteristic_determinant(A, B, C, nodes), deg)
    scale = max(np.max(np.abs(poly)), 1.0)
    if abs(np.linalg.det(A)) <= ROOT_TOL * scale:
        return EllipticityResult(False, float("inf"), poly)

    for r in np.polynomial.polynomial.polyroots(poly):
        lam = float(r.real)
        if abs(r.imag) <= 1e-6 * max(1.0, abs(r)):
            value = abs(characteristic_determinant(A, B, C, lam))
            if value <= ROOT_TOL * scale * max(1.0, abs(lam)) ** deg:
                return EllipticityResult(False, lam, poly)

    grid = np.linspace(-10.0, 10.0, 4001)
    vals = characteristic_determinant(A, B, C, grid)
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if sign_change.size:
        i = sign_change[0]
        return EllipticityResult(False, float(0.5 * (grid[i] + grid[i + 1])), poly)
    return EllipticityResult(True, None, poly)
