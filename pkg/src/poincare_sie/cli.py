"""Command-line front end.

Exit codes: 0 solvable (or all certificates pass), 1 a certificate failed,
2 unsolvable data, 3 not normally solvable, 4 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import bitsadze, certificates, sie_engine
from .decomposable import assemble, solve_poincare
from .errors import NotNormal, PoincareError, SolvabilityViolated, Unsolvable
from .geometry import TrigSeries
from .problem_file import ProblemFile, ProblemFileError, load, parse_grid
from .quadrature import PeriodicGrid
from .verification import make_manufactured

logger = logging.getLogger("poincare_sie")

EXIT_OK = 0
EXIT_CERTIFICATE = 1
EXIT_UNSOLVABLE = 2
EXIT_NOT_NORMAL = 3
EXIT_INPUT = 4

DIAGNOSTIC_KEYS = ("normal", "kappa", "l", "l_prime", "residuals", "moments")


def diagnostics_record(normal, kappa=None, l=None, l_prime=None, residuals=(), moments=()) -> dict:
    return {
        "normal": bool(normal),
        "kappa": None if kappa is None else int(kappa),
        "l": None if l is None else int(l),
        "l_prime": None if l_prime is None else int(l_prime),
        "residuals": [float(abs(r)) for r in residuals],
        "moments": [float(np.real(m)) for m in moments],
    }


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _write_field(out: Path, z: np.ndarray, u: np.ndarray) -> None:
    n = u.shape[1]
    _write_csv(
        out / "field.csv",
        ["x", "y"] + [f"u_{j + 1}" for j in range(n)],
        np.column_stack([z.real, z.imag, u]),
    )


def _write_density(out: Path, theta: np.ndarray, mu: np.ndarray) -> None:
    n = mu.shape[0]
    _write_csv(out / "density.csv", ["theta"] + [f"mu_{j + 1}" for j in range(n)], np.column_stack([theta, mu.T]))


def _write_certificates(out: Path, certs) -> None:
    _write_json(out / "certificates.json", [c.to_dict() for c in certs])


# ---------------------------------------------------------------------------
# Bitsadze presets
# ---------------------------------------------------------------------------
BITSADZE_COUNTS = {
    # free constants of the closed-form solutions and the number of moment conditions
    "special_neumann": (1, 1),
    "problem6": (2, 2),
}


def _bitsadze_solve(pf: ProblemFile, grid: PeriodicGrid):
    f = pf.f(grid.nodes)
    f1, f2 = f[:, 0], f[:, 1]
    if pf.preset == "special_neumann":
        sol = bitsadze.solve_special_neumann(f1, f2, K=float(np.imag(pf.constant)), grid=grid)
        moments = [grid.weight * f2.sum()]
    else:
        sol = bitsadze.solve_problem6(f1, f2, constant=pf.constant, grid=grid)
        moments = [grid.weight * f1.sum(), grid.weight * f2.sum()]
    preset = bitsadze.get_preset(pf.preset)
    res = bitsadze.boundary_residual(sol, preset.P, preset.Q, preset.R, f, grid)
    return sol, moments, res


def _null_family_certs(preset: str):
    return certificates.dirichlet_null_family() if preset == "dirichlet" else certificates.neumann_null_family()


def _run_bitsadze(pf: ProblemFile, out: Path, points: np.ndarray, diagnose_only: bool) -> int:
    if pf.preset in ("dirichlet", "neumann"):
        record = diagnostics_record(False)
        _write_json(out / "diagnostics.json", record)
        if not diagnose_only:
            _write_certificates(out, _null_family_certs(pf.preset))
        print(f"{pf.preset}: not normally solvable; infinite family of bounded null solutions")
        return EXIT_NOT_NORMAL
    l, l_prime = BITSADZE_COUNTS[pf.preset]
    grid = PeriodicGrid(pf.solver.nodes)
    f = pf.f(grid.nodes)
    if diagnose_only:
        moments = [grid.weight * f[:, 1].sum()] if pf.preset == "special_neumann" else list(grid.weight * f.sum(0))
        _write_json(out / "diagnostics.json", diagnostics_record(True, 0, l, l_prime, moments=moments))
        return EXIT_OK
    try:
        sol, moments, res = _bitsadze_solve(pf, grid)
    except SolvabilityViolated as exc:
        _write_json(out / "diagnostics.json", diagnostics_record(True, 0, l, l_prime, [exc.residual], [exc.residual]))
        print(str(exc), file=sys.stderr)
        return EXIT_UNSOLVABLE
    _write_json(out / "diagnostics.json", diagnostics_record(True, 0, l, l_prime, [], moments))
    _write_field(out, points, sol.components(points))
    certs = [
        certificates.Certificate(f"{pf.preset}-boundary-{k + 1}", float(r), 1e-8, sol.fixture_status)
        for k, r in enumerate(res)
    ]
    _write_certificates(out, certs)
    if not sol.single_valued:
        logger.warning("psi carries a logarithmic term; field values use the principal branch")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Decomposable systems and bare singular systems
# ---------------------------------------------------------------------------
def _run_poincare(pf: ProblemFile, out: Path, points: np.ndarray, diagnose_only: bool, N: int, tol: float) -> int:
    problem = pf.poincare_problem()
    if diagnose_only:
        diag, _, _ = sie_engine.diagnose(assemble(problem, N), tol)
        _write_json(out / "diagnostics.json", diagnostics_record(diag.normal, diag.kappa, diag.l, diag.l_prime))
        return EXIT_OK if diag.normal else EXIT_NOT_NORMAL
    try:
        sol = solve_poincare(problem, N, tol)
    except NotNormal as exc:
        d = exc.diagnostics
        _write_json(out / "diagnostics.json", diagnostics_record(False, d.kappa, d.l, d.l_prime))
        print(f"not normal: {exc}", file=sys.stderr)
        return EXIT_NOT_NORMAL
    except Unsolvable as exc:
        d = exc.diagnostics
        _write_json(out / "diagnostics.json", diagnostics_record(True, d.kappa, d.l, d.l_prime, exc.residuals))
        worst = max(abs(r) for r in exc.residuals)
        print(f"adjoint orthogonality violated: residual = {worst:.4f}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    d = sol.diagnostics
    _write_json(
        out / "diagnostics.json",
        diagnostics_record(True, d.kappa, d.l, d.l_prime, d.solvability_residuals, sol.moments),
    )
    _write_density(out, sol.grid.nodes, sol.mu)
    u = sol.evaluate(points)
    _write_field(out, points, u)
    certs = [
        certificates.Certificate(f"boundary-condition-{k + 1}", float(r), 10 * tol)
        for k, r in enumerate(sol.boundary_residual())
    ]
    if not all(c.passed for c in certs):
        logger.warning("boundary condition not met on the refined grid; the density is under-resolved, raise --nodes")
    seeds = pf.manufactured_seeds()
    if seeds is not None:
        case = make_manufactured(pf.coefficients, pf.P, pf.Q, seeds, pf.curve)
        err = float(np.max(np.abs(u - case.u(points))))
        certs.append(certificates.Certificate("manufactured-field", err, 1e-6))
        print(f"manufactured max field error: {err:.3e}")
    _write_certificates(out, certs)
    return EXIT_OK


def _run_singular(pf: ProblemFile, out: Path, diagnose_only: bool, N: int, tol: float) -> int:
    system = pf.singular_system(N)
    diag, discrete, nulls = sie_engine.diagnose(system, tol)
    if not diag.normal:
        _write_json(out / "diagnostics.json", diagnostics_record(False))
        print("not normal: symbol determinant vanishes", file=sys.stderr)
        return EXIT_NOT_NORMAL
    if diagnose_only:
        _write_json(out / "diagnostics.json", diagnostics_record(True, diag.kappa, diag.l, diag.l_prime))
        return EXIT_OK
    A, rhs = discrete
    result = sie_engine.solve(A, rhs, nulls, tol)
    record = diagnostics_record(True, diag.kappa, diag.l, diag.l_prime, result.residuals)
    _write_json(out / "diagnostics.json", record)
    if result.status != "Solvable":
        print(f"adjoint orthogonality violated: residual = {max(record['residuals']):.4f}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    _write_density(out, system.grid.nodes, result.mu.reshape(pf.n, N).real)
    return EXIT_OK


def _run(args, diagnose_only: bool) -> int:
    pf = load(args.problem)
    N = args.nodes or pf.solver.nodes
    tol = args.tol or pf.solver.tol
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    points = parse_grid(args.grid or pf.output.grid)
    if pf.kind == "bitsadze":
        return _run_bitsadze(pf, out, points, diagnose_only)
    if pf.kind == "poincare":
        return _run_poincare(pf, out, points, diagnose_only, N, tol)
    return _run_singular(pf, out, diagnose_only, N, tol)


def cmd_solve(args) -> int:
    return _run(args, diagnose_only=False)


def cmd_diagnose(args) -> int:
    code = _run(args, diagnose_only=True)
    print((Path(args.out_dir) / "diagnostics.json").read_text(encoding="utf-8"), end="")
    return code


# ---------------------------------------------------------------------------
# Examples and the certificate suite
# ---------------------------------------------------------------------------
def _table_arg(text: Optional[str], default) -> TrigSeries:
    if text is None:
        return default
    try:
        return TrigSeries.from_dict(json.loads(text))
    except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise ProblemFileError(f"Fourier table must be JSON like '{{\"cos\": [0, 1], \"sin\": [0, 0]}}': {exc}")


def cmd_example(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = args.preset
    if name in ("dirichlet", "neumann"):
        K = args.k
        certs = certificates.dirichlet_null_family(K) if name == "dirichlet" else certificates.neumann_null_family(K - 1)
        certs = [c for c in certs if "null" in c.name]
        first = 1 if name == "dirichlet" else 0
        t = np.exp(1j * PeriodicGrid(args.nodes).nodes)
        rows = []
        for k in range(first, first + K):
            el = bitsadze.dirichlet_null_element(k) if name == "dirichlet" else bitsadze.neumann_null_element(k)
            w = el(1.5 * t)
            rows.extend([k, (1.5 * tt).real, (1.5 * tt).imag, ww.real, ww.imag] for tt, ww in zip(t, w))
        _write_csv(out / "null_family.csv", ["k", "x", "y", "u_1", "u_2"], rows)
    else:
        grid = PeriodicGrid(args.nodes)
        f1 = _table_arg(args.f1, TrigSeries([0.0, 1.0], [0.0, 0.0]))
        f2 = _table_arg(args.f2, TrigSeries([0.0], [0.0]))
        pf = ProblemFile("bitsadze", 2, _stack_tables(f1, f2), preset=name)
        try:
            sol, moments, res = _bitsadze_solve(pf, grid)
        except SolvabilityViolated as exc:
            print(f"Unsolvable: {exc}")
            _write_json(out / "verdict.json", {"verdict": "Unsolvable", "condition": exc.condition, "residual": exc.residual})
            return EXIT_UNSOLVABLE
        certs = [
            certificates.Certificate(f"{name}-boundary-{k + 1}", float(r), 1e-8, sol.fixture_status)
            for k, r in enumerate(res)
        ]
        _write_json(out / "verdict.json", {"verdict": "Solvable", "moments": [float(m) for m in moments]})
    _write_certificates(out, certs)
    for c in certs:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.value:.3e} <= {c.tolerance:.1e}")
    return EXIT_OK if all(c.passed for c in certs) else EXIT_CERTIFICATE


def _stack_tables(a: TrigSeries, b: TrigSeries) -> TrigSeries:
    K = max(a.degree, b.degree) + 1
    cos = np.zeros((2, K))
    sin = np.zeros((2, K))
    for i, t in enumerate((a, b)):
        cos[i, : t.degree + 1] = t.cos.reshape(-1)
        sin[i, : t.degree + 1] = t.sin.reshape(-1)
    return TrigSeries(cos, sin)


def cmd_verify(args) -> int:
    certs = certificates.full_suite()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_certificates(out, certs)
    for c in certs:
        if not c.passed or args.verbose:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.value:.3e} <= {c.tolerance:.1e}")
    failed = sum(not c.passed for c in certs)
    print(f"{len(certs) - failed}/{len(certs)} certificates passed")
    return EXIT_OK if failed == 0 else EXIT_CERTIFICATE


# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share the input-error exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poincare-sie", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("problem", help="problem file (JSON)")
        p.add_argument("--nodes", type=int, default=None, help="quadrature nodes N")
        p.add_argument("--tol", type=float, default=None, help="rank and solvability tolerance")
        p.add_argument("--out-dir", default="out", help="directory for artifacts")
        p.add_argument("--grid", default=None, help="polar grid 'r0:r1:nr,t0:t1:nt'")

    p = sub.add_parser("solve", help="solve a problem file")
    common(p)
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("diagnose", help="symbol, index and null-space counts only")
    common(p)
    p.set_defaults(func=cmd_diagnose)
    p = sub.add_parser("example", help="run a Bitsadze preset")
    p.add_argument("preset", choices=sorted(bitsadze.PRESETS))
    p.add_argument("--k", type=int, default=5, help="number of null-family members")
    p.add_argument("--nodes", type=int, default=256)
    p.add_argument("--f1", default=None, help="JSON Fourier table for f1 (default cos)")
    p.add_argument("--f2", default=None, help="JSON Fourier table for f2 (default 0)")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_example)
    p = sub.add_parser("verify", help="run the full certificate suite")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("POINCARE_LOG", "WARNING").upper()
    logging.basicConfig(
        level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PoincareError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
