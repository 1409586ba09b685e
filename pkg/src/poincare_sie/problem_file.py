"""JSON problem files: parsing, validation and canonical serialization.

Three kinds are understood:

``poincare``
    decomposable system on a curve; ``coefficients`` ``{a, b, c}``,
    ``P`` and ``Q`` as ``(n, n)`` Fourier tables (or ``"preset":
    "neumann"`` for ``P = cos(theta) I``, ``Q = sin(theta) I``) and ``f``
    as an ``(n,)`` table.  An optional ``manufactured`` block holds Laurent
    seeds of the exact fields, used only for error reports.
``bitsadze``
    one of the four presets on the unit circle with ``f`` a ``(2,)`` table
    and an optional complex ``constant`` (the free additive constant).
``singular_system``
    symbol tables ``alpha`` and ``beta`` (``(n, n)``) and ``f``; no smooth
    kernel.

Unknown fields are rejected at every level.  :func:`dumps` writes sorted
keys with fixed indentation, so a parsed file re-serializes byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bitsadze import PRESETS
from .decomposable import PoincareProblem
from .errors import PoincareError
from .geometry import CurveParametrization, EllipticCoefficients, TrigSeries
from .quadrature import PeriodicGrid
from .sie_engine import SingularSystem

SCHEMA_VERSION = 1
KINDS = ("poincare", "bitsadze", "singular_system")
DEFAULT_GRID = "2.5:5:6,0:6.283185307179586:16"

_COMMON = {"schema", "kind", "curve", "n", "f", "solver", "output"}
_FIELDS = {
    "poincare": _COMMON | {"coefficients", "P", "Q", "preset", "manufactured"},
    "bitsadze": _COMMON | {"preset", "constant"},
    "singular_system": _COMMON | {"alpha", "beta"},
}


class ProblemFileError(PoincareError, ValueError):
    """Malformed or inconsistent problem file."""


def _reject_unknown(data: dict, allowed: set, where: str):
    unknown = set(data) - allowed
    if unknown:
        raise ProblemFileError(f"unknown fields in {where}: {sorted(unknown)}")


def normal_derivative_tables(n: int) -> tuple[TrigSeries, TrigSeries]:
    """``P = cos(theta) I``, ``Q = sin(theta) I``: outward normal derivative on the unit circle."""
    one = np.zeros((n, n, 2))
    one[np.arange(n), np.arange(n), 1] = 1.0
    zero = np.zeros((n, n, 2))
    return TrigSeries(one, zero), TrigSeries(zero, one)


@dataclass
class SolverOptions:
    nodes: int = 256
    tol: float = 1e-8

    @classmethod
    def from_dict(cls, data: dict) -> "SolverOptions":
        _reject_unknown(data, {"nodes", "tol"}, "solver")
        return cls(int(data.get("nodes", 256)), float(data.get("tol", 1e-8)))


@dataclass
class OutputOptions:
    grid: str = DEFAULT_GRID

    @classmethod
    def from_dict(cls, data: dict) -> "OutputOptions":
        _reject_unknown(data, {"grid"}, "output")
        return cls(str(data.get("grid", DEFAULT_GRID)))


@dataclass
class ProblemFile:
    kind: str
    n: int
    f: TrigSeries
    curve: CurveParametrization = field(default_factory=CurveParametrization.unit_circle)
    coefficients: Optional[EllipticCoefficients] = None
    P: Optional[TrigSeries] = None
    Q: Optional[TrigSeries] = None
    preset: Optional[str] = None
    constant: complex = 0.0
    alpha: Optional[TrigSeries] = None
    beta: Optional[TrigSeries] = None
    manufactured: Optional[list] = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProblemFileError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.f.value_shape != (self.n,):
            raise ProblemFileError(f"f table has shape {self.f.value_shape}, expected ({self.n},)")
        if self.kind == "poincare":
            if self.coefficients is None or self.coefficients.n != self.n:
                raise ProblemFileError("poincare problems need n coefficient triples")
            if self.preset is not None:
                if self.preset != "neumann" or self.P is not None or self.Q is not None:
                    raise ProblemFileError("poincare preset must be 'neumann' and replaces P and Q")
                self.P, self.Q = normal_derivative_tables(self.n)
                self.preset = None
            for name in ("P", "Q"):
                M = getattr(self, name)
                if M is None or M.value_shape != (self.n, self.n):
                    raise ProblemFileError(f"{name} must be an ({self.n}, {self.n}) Fourier table")
            if self.manufactured is not None and len(self.manufactured) != self.n:
                raise ProblemFileError("manufactured seeds need one sequence per component")
        elif self.kind == "bitsadze":
            if self.preset not in PRESETS:
                raise ProblemFileError(f"bitsadze preset must be one of {sorted(PRESETS)}")
            if self.n != 2 or self.curve.kind != "unit_circle":
                raise ProblemFileError("bitsadze presets live on the unit circle with n = 2")
        else:
            for name in ("alpha", "beta"):
                M = getattr(self, name)
                if M is None or M.value_shape != (self.n, self.n):
                    raise ProblemFileError(f"{name} must be an ({self.n}, {self.n}) Fourier table")
        if self.solver.nodes < 8 or self.solver.nodes % 2:
            raise ProblemFileError("solver.nodes must be even and >= 8")

    # -- conversion --------------------------------------------------------
    def poincare_problem(self) -> PoincareProblem:
        return PoincareProblem(self.curve, self.coefficients, self.P, self.Q, self.f)

    def singular_system(self, N: Optional[int] = None) -> SingularSystem:
        N = self.solver.nodes if N is None else N
        grid = PeriodicGrid(N)
        return SingularSystem(self.curve, grid, self.n, self.alpha, self.beta, None, self.f(grid.nodes).T)

    def manufactured_seeds(self) -> Optional[list]:
        if self.manufactured is None:
            return None
        return [[complex(re, im) for re, im in seq] for seq in self.manufactured]

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "schema": self.schema,
            "kind": self.kind,
            "curve": self.curve.to_dict(),
            "n": self.n,
            "f": self.f.to_dict(),
            "solver": {"nodes": self.solver.nodes, "tol": self.solver.tol},
            "output": {"grid": self.output.grid},
        }
        if self.kind == "poincare":
            c = self.coefficients
            out["coefficients"] = {"a": c.a.tolist(), "b": c.b.tolist(), "c": c.c.tolist()}
            out["P"] = self.P.to_dict()
            out["Q"] = self.Q.to_dict()
            if self.manufactured is not None:
                out["manufactured"] = [[list(map(float, p)) for p in seq] for seq in self.manufactured]
        elif self.kind == "bitsadze":
            out["preset"] = self.preset
            out["constant"] = [float(np.real(self.constant)), float(np.imag(self.constant))]
        else:
            out["alpha"] = self.alpha.to_dict()
            out["beta"] = self.beta.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemFile":
        if not isinstance(data, dict):
            raise ProblemFileError("problem file must be a JSON object")
        kind = data.get("kind")
        if kind not in KINDS:
            raise ProblemFileError(f"kind must be one of {KINDS}, got {kind!r}")
        _reject_unknown(data, _FIELDS[kind], "problem file")
        if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ProblemFileError(f"unsupported schema version {data.get('schema')}")
        try:
            kwargs = dict(
                kind=kind,
                n=int(data["n"]),
                f=TrigSeries.from_dict(data["f"]),
                curve=CurveParametrization.from_dict(data.get("curve", {"kind": "unit_circle"})),
                solver=SolverOptions.from_dict(data.get("solver", {})),
                output=OutputOptions.from_dict(data.get("output", {})),
                preset=data.get("preset"),
            )
            if kind == "poincare":
                coef = data["coefficients"]
                _reject_unknown(coef, {"a", "b", "c"}, "coefficients")
                kwargs["coefficients"] = EllipticCoefficients(coef["a"], coef["b"], coef["c"])
                for name in ("P", "Q"):
                    if name in data:
                        kwargs[name] = TrigSeries.from_dict(data[name])
                kwargs["manufactured"] = data.get("manufactured")
            elif kind == "bitsadze":
                re, im = data.get("constant", [0.0, 0.0])
                kwargs["constant"] = complex(re, im)
            else:
                kwargs["alpha"] = TrigSeries.from_dict(data["alpha"])
                kwargs["beta"] = TrigSeries.from_dict(data["beta"])
        except KeyError as exc:
            raise ProblemFileError(f"missing field {exc.args[0]!r}") from exc
        except ProblemFileError:
            raise
        except (PoincareError, ValueError, TypeError) as exc:
            raise ProblemFileError(str(exc)) from exc
        return cls(**kwargs)


def dumps(problem: ProblemFile) -> str:
    return json.dumps(problem.to_dict(), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc}") from exc
    return ProblemFile.from_dict(data)


def load(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(problem: ProblemFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(problem))


def parse_grid(spec: str) -> np.ndarray:
    """Polar grid ``"r0:r1:nr,t0:t1:nt"`` as complex points, radius-major."""
    try:
        radial, angular = spec.split(",")
        r0, r1, nr = radial.split(":")
        t0, t1, nt = angular.split(":")
        r = np.linspace(float(r0), float(r1), int(nr))
        t = np.linspace(float(t0), float(t1), int(nt), endpoint=False)
    except ValueError as exc:
        raise ProblemFileError(f"grid must look like 'r0:r1:nr,t0:t1:nt', got {spec!r}") from exc
    if int(nr) < 1 or int(nt) < 1:
        raise ProblemFileError("grid needs at least one radius and one angle")
    return (r[:, None] * np.exp(1j * t[None, :])).ravel()
