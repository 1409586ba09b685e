import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poincare_sie import sie_engine
from poincare_sie.errors import NotNormal, PhaseResolutionExceeded
from poincare_sie.geometry import CurveParametrization
from poincare_sie.quadrature import PeriodicGrid
from poincare_sie.sie_engine import SingularSystem, diagnose, discretize, index, nullspaces, solve, symbol_check
from poincare_sie.verification import brute_solve

CIRCLE = CurveParametrization.unit_circle()
ELLIPSE = CurveParametrization.ellipse(2.0, 1.0)


def scalar(fn):
    return lambda th: np.asarray(fn(np.atleast_1d(th)), dtype=complex).reshape(-1, 1, 1)


def synthetic(kappa_sign=1, N=64, curve=CIRCLE, rhs=None):
    """alpha = cos, beta = +-sin / pi: alpha + i pi beta = e^{+-i theta}, index +-2."""
    return SingularSystem(
        curve, PeriodicGrid(N), 1, scalar(np.cos), scalar(lambda t: kappa_sign * np.sin(t) / np.pi), None, rhs
    )


def from_g(g_plus, g_minus, N=64):
    alpha = scalar(lambda t: (g_plus(t) + g_minus(t)) / 2)
    beta = scalar(lambda t: (g_plus(t) - g_minus(t)) / (2j * np.pi))
    return SingularSystem(CIRCLE, PeriodicGrid(N), 1, alpha, beta)


def dense_winding(g, M=10_000):
    th = np.linspace(0, 2 * np.pi, M + 1)
    return int(round((np.unwrap(np.angle(g(th)))[-1] - np.angle(g(th))[0]) / (2 * np.pi)))


def trig_factor(k, coeffs):
    """e^{ik theta} (1 + small trig polynomial), never zero."""
    def g(t):
        t = np.asarray(t, dtype=float)
        p = sum(c * np.exp(1j * (m + 1) * t) for m, c in enumerate(coeffs))
        return np.exp(1j * k * t) * (1.0 + p)
    return g


class TestDiscretize:
    def test_identity(self):
        A, _ = discretize(SingularSystem(CIRCLE, PeriodicGrid(16), 1, 1.0, 0.0))
        np.testing.assert_allclose(A, np.eye(16), atol=1e-15)

    def test_pure_singular_row_sums(self):
        beta = 0.7 + 0.2j
        A, _ = discretize(SingularSystem(ELLIPSE, PeriodicGrid(64), 1, 0.0, beta))
        np.testing.assert_allclose(A.sum(axis=1), -beta * np.pi * 1j, atol=1e-10)

    def test_diagonal_solve(self):
        sys = SingularSystem(CIRCLE, PeriodicGrid(32), 1, np.pi, 0.0, None, np.ones(32))
        A, rhs = discretize(sys)
        res = solve(A, rhs, nullspaces(A, sys.node_weights()))
        np.testing.assert_allclose(res.mu, 1 / np.pi, atol=1e-14)
        assert res.status == "Solvable" and res.kernel_basis.shape[1] == 0

    def test_superposition(self, rng):
        N = 32
        f1, f2 = rng.normal(size=N), rng.normal(size=N)
        sys = synthetic(1, N)
        _, r1 = discretize(sys.with_rhs(f1))
        _, r2 = discretize(sys.with_rhs(f2))
        A, r12 = discretize(sys.with_rhs(f1 + f2))
        assert np.max(np.abs(r12 - r1 - r2)) < 1e-12
        mu1, mu2 = rng.normal(size=N), rng.normal(size=N)
        assert np.max(np.abs(A @ (mu1 + mu2) - A @ mu1 - A @ mu2)) < 1e-12

    def test_kernel_shape_checked(self):
        with pytest.raises(ValueError):
            SingularSystem(CIRCLE, PeriodicGrid(8), 1, 1.0, 0.0, np.zeros((1, 1, 4, 4)))


class TestSymbol:
    def test_constant(self):
        m1, m2, normal = symbol_check(SingularSystem(CIRCLE, PeriodicGrid(16), 1, np.pi, 0.0))
        assert m1 == pytest.approx(np.pi) and m2 == pytest.approx(np.pi) and normal

    def test_rotating(self):
        m1, m2, normal = symbol_check(synthetic(1))
        assert m1 == pytest.approx(1.0) and m2 == pytest.approx(1.0) and normal

    def test_zero(self):
        m1, m2, normal = symbol_check(SingularSystem(CIRCLE, PeriodicGrid(16), 1, 0.0, 0.0))
        assert (m1, m2, normal) == (0.0, 0.0, False)


class TestIndex:
    def test_constant_symbol(self):
        assert index(SingularSystem(CIRCLE, PeriodicGrid(16), 1, np.pi, 0.0)) == 0

    @pytest.mark.parametrize("sign", [1, -1])
    def test_synthetic(self, sign):
        assert index(synthetic(sign)) == 2 * sign

    def test_not_normal(self):
        with pytest.raises(NotNormal):
            index(SingularSystem(CIRCLE, PeriodicGrid(16), 1, 0.0, 0.0))

    def test_refinement_cap(self):
        sys = from_g(trig_factor(200, []), trig_factor(0, []), N=8)
        with pytest.raises(PhaseResolutionExceeded):
            index(sys)

    def test_refinement_resolves_fast_phase(self):
        # 9 windings on 8 nodes need the grid refined
        assert index(from_g(trig_factor(9, []), trig_factor(0, []), N=8)) == 9

    @given(
        st.integers(-4, 4), st.integers(-4, 4),
        st.lists(st.complex_numbers(max_magnitude=0.2), max_size=3),
        st.lists(st.complex_numbers(max_magnitude=0.2), max_size=3),
    )
    def test_matches_dense_winding_oracle(self, kp, km, cp, cm):
        gp, gm = trig_factor(kp, cp), trig_factor(km, cm)
        assert index(from_g(gp, gm, N=32)) == dense_winding(gp) - dense_winding(gm)


class TestNullspaces:
    def test_identity(self):
        res = nullspaces(np.eye(4))
        assert res.l == 0 and res.l_prime == 0

    def test_diagonal(self):
        res = nullspaces(np.diag([1.0, 1.0, 0.0]))
        assert res.l == 1 and res.l_prime == 1
        np.testing.assert_allclose(np.abs(res.kernel[:, 0]), [0, 0, 1], atol=1e-15)

    @pytest.mark.parametrize("N", [64, 128, 256])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_noether_count(self, N, sign):
        diag, _, _ = diagnose(synthetic(sign, N))
        assert diag.kappa == 2 * sign
        assert diag.l - diag.l_prime == diag.kappa
        assert diag.noether_consistent and diag.count_reliable

    def test_noether_count_on_ellipse(self):
        diag, _, _ = diagnose(synthetic(1, 128, ELLIPSE))
        assert (diag.l, diag.l_prime) == (2, 0)

    def test_unresolved_vectors_are_discarded(self):
        _, _, nulls = diagnose(synthetic(1, 64))
        assert nulls.discarded == (0, 2)


class TestSolve:
    def test_kernel_for_positive_index(self):
        sys = synthetic(1, 64, rhs=np.zeros(64))
        diag, (A, rhs), nulls = diagnose(sys)
        res = solve(A, rhs, nulls)
        assert res.status == "Solvable"
        assert np.max(np.abs(res.mu)) < 1e-14
        assert res.kernel_basis.shape[1] == 2
        assert np.max(np.abs(A @ res.kernel_basis)) < 1e-8

    def test_negative_index_generic_data(self, rng):
        diag, (A, _), nulls = diagnose(synthetic(-1, 64))
        res = solve(A, rng.normal(size=64), nulls)
        assert res.status == "Unsolvable" and len(res.residuals) == 2

    def test_negative_index_compatible_data(self, rng):
        diag, (A, _), nulls = diagnose(synthetic(-1, 64))
        th = PeriodicGrid(64).nodes
        f = A @ (np.cos(2 * th) + 0.3 * np.sin(th))
        res = solve(A, f, nulls)
        assert res.status == "Solvable"
        assert np.linalg.norm(A @ res.mu - f) <= 1e-8

    def test_residual_definition(self):
        sys = synthetic(-1, 64)
        _, (A, _), nulls = diagnose(sys)
        f = np.ones(64)
        r = sie_engine.solvability_residuals(f, nulls)
        manual = [np.sum(sys.node_weights() * f * np.conj(v)) for v in nulls.adjoint.T]
        np.testing.assert_allclose(r, manual)


class TestOracleAgreement:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_brute_agrees_on_synthetic(self, sign, rng):
        _, (A, _), nulls = diagnose(synthetic(sign, 64))
        f = A @ rng.normal(size=64)
        ours = solve(A, f, nulls).mu
        assert np.max(np.abs(ours - brute_solve(A, f))) <= 1e-10

    def test_brute_agrees_on_random_matrix(self, rng):
        A = rng.normal(size=(40, 40))
        f = rng.normal(size=40)
        ours = solve(A, f, nullspaces(A)).mu
        assert np.max(np.abs(ours - brute_solve(A, f))) <= 1e-10

    def test_solvable_iff_small_least_squares_residual(self, rng):
        _, (A, _), nulls = diagnose(synthetic(-1, 64))
        for f in (A @ rng.normal(size=64), rng.normal(size=64)):
            ls = np.linalg.norm(A @ brute_solve(A, f) - f)
            assert (solve(A, f, nulls).status == "Solvable") == (ls <= 1e-8)
