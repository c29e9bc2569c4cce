import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raman_qmem.errors import ContractViolation, DomainError, NullModeError
from raman_qmem.modes import decompose
from raman_qmem.numerics import (
    bessel_j0,
    bessel_j1,
    gauss_legendre,
    gauss_lobatto,
    interpolate_nodes,
    j1_ratio,
    nystrom_extend,
    symmetric_eigendecompose,
    uniform_rule,
)


def series_j(nu, x, terms=40):
    """Power series of J_nu, summed in extended precision."""
    x = mpmath.mpf(x)
    with mpmath.workdps(50):
        s = mpmath.fsum((-1) ** k * (x / 2) ** (2 * k + nu) / (mpmath.factorial(k) * mpmath.factorial(k + nu))
                        for k in range(terms))
    return float(s)


def bisect_zero(f, a, b, it=200):
    fa = f(a)
    for _ in range(it):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


class TestBessel:
    def test_j0_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_j1_at_zero(self):
        assert bessel_j1(0.0) == 0.0

    def test_j0_first_zero(self):
        z = bisect_zero(lambda x: series_j(0, x), 2.0, 3.0, 60)
        assert abs(z - 2.404825557695773) < 1e-12
        assert abs(bessel_j0(2.404825557695773)) <= 1e-10

    def test_j1_first_zero(self):
        z = bisect_zero(lambda x: series_j(1, x), 3.5, 4.0, 60)
        assert abs(z - 3.8317059702075123) < 1e-12
        assert abs(bessel_j1(3.8317059702075123)) <= 1e-10

    def test_j0_series_at_one(self):
        assert abs(bessel_j0(1.0) - series_j(0, 1.0)) <= 1e-12

    def test_j1_small_argument(self):
        assert bessel_j1(1e-6) == pytest.approx(5e-7, rel=1e-9)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -1.0])
    def test_domain_errors(self, bad):
        with pytest.raises(DomainError):
            bessel_j0(bad)
        with pytest.raises(DomainError):
            bessel_j1(bad)

    def test_absolute_accuracy_to_200(self):
        x = np.concatenate([np.linspace(0, 20, 81), np.linspace(20, 200, 37)[1:]])
        ref0 = np.array([float(mpmath.besselj(0, v)) for v in x])
        ref1 = np.array([float(mpmath.besselj(1, v)) for v in x])
        assert np.max(np.abs(bessel_j0(x) - ref0)) <= 1e-12
        assert np.max(np.abs(bessel_j1(x) - ref1)) <= 1e-12

    def test_derivative_recurrence(self):
        x = np.arange(0.5, 20.01, 0.5)
        h = 1e-5
        d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
        assert np.max(np.abs(d + bessel_j1(x))) <= 1e-6

    def test_j1_ratio_continuous(self):
        z = np.array([0.0, 1e-5, 9e-5, 1.1e-4, 0.5, 3.0])
        ref = np.array([1.0] + [2 * series_j(1, v) / v for v in z[1:]])
        assert np.allclose(j1_ratio(z), ref, rtol=1e-13, atol=0)


class TestQuadrature:
    def test_single_node(self):
        r = gauss_legendre(1)
        assert r.nodes.tolist() == [0.0]
        assert r.weights.tolist() == [2.0]

    def test_two_nodes(self):
        r = gauss_legendre(2)
        assert np.allclose(r.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
        assert np.allclose(r.weights, [1.0, 1.0], atol=1e-15)

    def test_cubic_exact(self):
        r = gauss_legendre(4, 0.0, 2.0)
        assert abs(r.integrate(r.nodes**3) - 4.0) <= 1e-12

    @pytest.mark.parametrize("deg", range(8))
    def test_exactness_degree(self, deg):
        r = gauss_legendre(4, 0.0, 1.0)
        assert abs(r.integrate(r.nodes**deg) - 1.0 / (deg + 1)) <= 1e-12

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            gauss_legendre(4, 1.0, 1.0)
        with pytest.raises(DomainError):
            gauss_legendre(4, 2.0, 1.0)

    def test_deterministic(self):
        a, b = gauss_legendre(37, 0.0, 3.0), gauss_legendre(37, 0.0, 3.0)
        assert np.array_equal(a.nodes, b.nodes) and np.array_equal(a.weights, b.weights)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 600), a=st.floats(-50, 50), width=st.floats(1e-3, 100))
    def test_rule_invariants(self, n, a, width):
        b = a + width
        r = gauss_legendre(n, a, b)
        assert np.all(np.diff(r.nodes) > 0)
        assert np.all((r.nodes > a) & (r.nodes < b))
        assert np.all(r.weights > 0)
        assert abs(r.weights.sum() - width) <= 1e-12 * width * max(1, n / 50)

    def test_lobatto_includes_ends(self):
        r = gauss_lobatto(9, 0.0, 2.0)
        assert r.nodes[0] == 0.0 and r.nodes[-1] == 2.0
        assert abs(r.integrate(r.nodes**15) - 2.0**16 / 16) <= 1e-9

    @pytest.mark.parametrize("kind", ["midpoint", "trapezoid", "simpson"])
    def test_uniform_rules(self, kind):
        r = uniform_rule(501, 0.0, 2.0, kind)
        assert abs(r.weights.sum() - 2.0) <= 1e-12
        assert abs(r.integrate(np.sin(r.nodes)) - (1 - math.cos(2.0))) <= 1e-5

    @settings(max_examples=25, deadline=None)
    @given(x=st.floats(0, 10), C=st.floats(0.01, 10), n=st.integers(64, 200))
    def test_kernel_integral_converges(self, x, C, n):
        def q(m):
            r = gauss_legendre(m, 0.0, C)
            return r.integrate(bessel_j0(2 * np.sqrt(x * r.nodes)))
        assert abs(q(n) - q(2 * n)) <= 1e-10


class TestEigen:
    def test_identity(self):
        vals, vecs = symmetric_eigendecompose(np.eye(3))
        assert np.allclose(vals, 1.0)
        assert np.allclose(vecs.T @ vecs, np.eye(3))

    def test_magnitude_order(self):
        vals, vecs = symmetric_eigendecompose(np.diag([3.0, -2.0, 1.0]))
        assert np.allclose(vals, [3.0, -2.0, 1.0])
        assert np.allclose(vecs, np.eye(3))

    def test_random_reconstruction(self, rng):
        A = rng.standard_normal((10, 10))
        M = A + A.T
        vals, vecs = symmetric_eigendecompose(M)
        assert np.max(np.abs(vecs @ np.diag(vals) @ vecs.T - M)) <= 1e-8
        assert np.max(np.abs(vecs.T @ vecs - np.eye(10))) <= 1e-8
        for k in range(10):
            assert np.linalg.norm(M @ vecs[:, k] - vals[k] * vecs[:, k]) <= 1e-8 * np.linalg.norm(M, 2)
        assert np.all(np.diff(np.abs(vals)) <= 0)

    def test_sign_convention(self, rng):
        A = rng.standard_normal((8, 8))
        _, vecs = symmetric_eigendecompose(A + A.T)
        pivots = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(8)]
        assert np.all(pivots > 0)

    def test_asymmetric_rejected(self):
        M = np.array([[1.0, 2.0], [2.1, 1.0]])
        with pytest.raises(ContractViolation):
            symmetric_eigendecompose(M)

    def test_bitwise_deterministic(self, rng):
        A = rng.standard_normal((50, 50))
        M = A + A.T
        v1, w1 = symmetric_eigendecompose(M)
        v2, w2 = symmetric_eigendecompose(M.copy())
        assert np.array_equal(v1, v2) and np.array_equal(w1, w2)


class TestNystrom:
    def test_reproduces_nodes(self, d2):
        r = d2.rule
        K = bessel_j0(2 * np.sqrt(np.outer(r.nodes, r.nodes)))
        for i in range(3):
            ext = nystrom_extend(K, r.weights, d2.phi[:, i], d2.signed_lambdas[i])
            assert np.max(np.abs(ext - d2.phi[:, i])) <= 1e-8

    def test_below_floor(self):
        with pytest.raises(NullModeError):
            nystrom_extend(np.ones(3), np.ones(3), np.ones(3), 1e-9)

    def test_midpoints_against_uniform_grid(self, d2):
        mid = 0.5 * (d2.rule.nodes[:-1] + d2.rule.nodes[1:])
        g = d2.evaluate(mid, [1])[:, 0]
        u = decompose(2.0, 501, 1, "simpson", use_cache=False).evaluate(mid, [1])[:, 0]
        assert np.max(np.abs(g - u)) <= 1e-4

    def test_local_interpolation(self):
        x = np.linspace(0, 1, 40)
        p = np.linspace(0, 1, 333)
        assert np.max(np.abs(interpolate_nodes(x, np.cos(3 * x), p) - np.cos(3 * p))) <= 1e-9
