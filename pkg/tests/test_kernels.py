import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raman_qmem.errors import DomainError
from raman_qmem.kernels import discretize_g0, discretize_g1, g0, g1_regular
from raman_qmem.numerics import gauss_legendre, uniform_rule

nonneg = st.floats(0, 20, allow_nan=False)


class TestPointKernels:
    def test_g0_origin(self):
        assert g0(0.0, 5.0) == 1.0

    def test_g0_series(self):
        assert abs(g0(1.0, 1.0) - float(mpmath.besselj(0, 2))) <= 1e-14

    def test_g0_symmetric(self, rng):
        p, q = rng.uniform(0, 10, (2, 100))
        assert np.array_equal(g0(p, q), g0(q, p))

    def test_g1_limit(self):
        assert g1_regular(0.0, 3.0) == 3.0

    def test_g1_zero_q(self):
        assert g1_regular(2.0, 0.0) == 0.0

    def test_g1_series(self):
        assert abs(g1_regular(1.0, 1.0) - float(mpmath.besselj(1, 2))) <= 1e-14

    @pytest.mark.parametrize("f", [g0, g1_regular])
    def test_negative_rejected(self, f):
        with pytest.raises(DomainError):
            f(-1.0, 1.0)
        with pytest.raises(DomainError):
            f(1.0, -1e-3)

    @settings(max_examples=50, deadline=None)
    @given(p=nonneg, q=nonneg)
    def test_g1_matches_definition(self, p, q):
        if p == 0:
            ref = q
        else:
            ref = float(mpmath.besselj(1, 2 * mpmath.sqrt(p * q)) * mpmath.sqrt(q / p))
        assert abs(g1_regular(p, q) - ref) <= 1e-12 * max(1.0, abs(ref))

    @settings(max_examples=50, deadline=None)
    @given(e=st.floats(0, 5), z=st.floats(0, 5))
    def test_reflection_symmetry(self, e, z):
        # reflection about the line y = C - x sends (x, y) to (C - y, C - x)
        C = 5.0
        assert g0(C - e, z) == pytest.approx(g0(C - (C - z), C - e), abs=1e-13)

    def test_literal_swap_is_not_a_symmetry(self):
        # swapping the arguments of C - x alone is not the reflection
        assert abs(g0(5.0 - 0.0, 1.0) - g0(5.0 - 1.0, 0.0)) > 1.0


class TestDiscretized:
    def test_g0_small_coupling(self):
        C = 1e-6
        M = discretize_g0(C, gauss_legendre(100, 0, C)).entries
        assert np.max(np.abs(np.linalg.eigvalsh(M))) <= 2e-6

    def test_g0_symmetric(self):
        M = discretize_g0(2.0, gauss_legendre(500, 0, 2.0)).entries
        assert np.max(np.abs(M - M.T)) <= 1e-14

    def test_g0_resolution(self):
        top = [np.max(np.abs(np.linalg.eigvalsh(discretize_g0(2.0, gauss_legendre(n, 0, 2.0)).entries)))
               for n in (250, 500)]
        assert abs(top[0] - top[1]) <= 1e-4

    @pytest.mark.parametrize("C", [0.5, 2.0, 10.0])
    def test_g0_bounded_by_unitarity(self, C):
        M = discretize_g0(C, gauss_legendre(300, 0, C)).entries
        assert np.max(np.abs(np.linalg.eigvalsh(M))) <= 1 + 1e-6

    def test_rule_mismatch(self):
        with pytest.raises(DomainError):
            discretize_g0(2.0, gauss_legendre(64, 0, 1.0))
        with pytest.raises(DomainError):
            discretize_g1(2.0, gauss_legendre(64, 0, 3.0))

    def test_g1_small_coupling(self):
        C = 1e-6
        G = discretize_g1(C, gauss_legendre(100, 0, C))
        assert np.max(np.abs(G.entries - np.eye(100))) <= 1e-5

    def test_g1_causal(self):
        G = discretize_g1(2.0, gauss_legendre(120, 0, 2.0))
        assert np.all(np.triu(G.causal, 1) == 0.0)
        assert np.all(np.isfinite(G.entries))

    @pytest.mark.parametrize("kind", ["gauss", "trapezoid"])
    def test_g1_constant_input(self, kind):
        C = 2.0
        rule = gauss_legendre(200, 0, C) if kind == "gauss" else uniform_rule(201, 0, C, "trapezoid")
        out = discretize_g1(C, rule).apply(np.ones(rule.order))
        ys = rule.nodes[::20]
        ref = []
        for y in ys:
            f = lambda x: mpmath.besselj(1, 2 * mpmath.sqrt((y - x) * C)) * mpmath.sqrt(C / (y - x)) if x < y else C
            ref.append(1 - float(mpmath.quad(f, [0, y])) if y > 0 else 1.0)
        assert np.max(np.abs(out[::20] - np.array(ref))) <= 1e-6
        # closed form of the same integral
        assert np.max(np.abs(out - g0(rule.nodes, C))) <= 1e-6
