import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irqft import wick_engine as we
from irqft.cone_geometry import Cone
from irqft.errors import HypothesisViolation, InvalidInputError, TruncationInsufficient, TubeViolation

ONES = we.CoefficientSequence("ones")


class TestEnumeration:
    def test_two_points(self):
        assert [K.entries for K in we.enumerate_K(2, 3)] == [(0,), (1,), (2,), (3,)]

    def test_three_points_order(self):
        assert [K.entries for K in we.enumerate_K(3, 1)] == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def test_count_stars_and_bars(self):
        assert len(list(we.enumerate_K(3, 6))) == math.comb(9, 3) == 84

    @pytest.mark.parametrize("n, N", [(2, 5), (3, 4), (4, 3), (5, 2)])
    def test_each_index_exactly_once(self, n, N):
        got = [K.entries for K in we.enumerate_K(n, N)]
        P = n * (n - 1) // 2
        brute = {e for e in itertools.product(range(N + 1), repeat=P) if sum(e) <= N}
        assert len(got) == len(set(got)) == len(brute) and set(got) == brute
        assert sum(we.count_K(n, m) for m in range(N + 1)) == len(got)
        totals = [sum(e) for e in got]
        assert totals == sorted(totals)

    def test_invalid_arguments(self):
        with pytest.raises(InvalidInputError):
            list(we.enumerate_K(1, 2))
        with pytest.raises(InvalidInputError):
            we.MultiIndexK(3, (1, 0))

    def test_kappa_and_pairs(self):
        K = we.MultiIndexK.from_pairs(3, {(1, 2): 2, (2, 3): 1})
        assert K.kappa == (2, 3, 1) and K.k(1, 2) == 2 and K.k(1, 3) == 0 and K.total == 3


class TestCoefficientDK:
    @pytest.mark.parametrize("k", range(0, 7))
    def test_two_points(self, k):
        d = we.CoefficientSequence.exponential(Fraction(1, 3))
        K = we.MultiIndexK(2, (k,))
        assert we.coefficient_D_K(K, d) == math.factorial(k) * d.value(k) ** 2

    def test_triangle(self):
        d = we.CoefficientSequence("inverse_factorial")
        assert we.coefficient_D_K(we.MultiIndexK(3, (1, 1, 1)), d) == 8 * d.value(2) ** 3

    def test_zero_index(self):
        d = we.CoefficientSequence.from_list([3, 1, 1])
        assert we.coefficient_D_K(we.MultiIndexK(4, (0,) * 6), d) == 81

    def test_exact_rational_arithmetic(self):
        val = we.coefficient_D_K(we.MultiIndexK(3, (2, 1, 3)), we.CoefficientSequence("inverse_factorial"))
        assert isinstance(val, Fraction)

    def test_log_domain_beyond_exact_range(self):
        d = we.CoefficientSequence("inverse_factorial")
        K = we.MultiIndexK(2, (100,))
        val = we.coefficient_D_K(K, d)
        assert isinstance(val, we.LogValue)
        # 100! (1/100!)^2 = 1/100!
        assert val.log_abs == pytest.approx(-math.lgamma(101), rel=1e-12)
        assert we.log_abs_D_K(K, d) == pytest.approx(val.log_abs)


class TestPairingOracle:
    @pytest.mark.parametrize("k", range(1, 8))
    def test_two_vertices(self, k):
        assert we.pairing_oracle(2, (k, k)) == {(k,): math.factorial(k)}

    def test_three_vertices_of_valence_two(self):
        # with no pairs inside a vertex, the triangle is the only diagram
        assert we.pairing_oracle(3, (2, 2, 2)) == {(1, 1, 1): 8}

    def test_odd_total(self):
        assert we.pairing_oracle(3, (1, 1, 1)) == {}

    def test_leg_limit(self):
        with pytest.raises(InvalidInputError):
            we.pairing_oracle(2, (9, 9))

    def test_total_count_is_number_of_matchings(self):
        # kappa = (2, 1, 1, 2): total matchings avoiding intra-vertex pairs, by inclusion-exclusion
        legs = [0, 0, 1, 2, 3, 3]
        brute = 0
        for perm in itertools.permutations(range(6)):
            pairs = [(perm[i], perm[i + 1]) for i in range(0, 6, 2)]
            if all(a < b for a, b in pairs) and all(perm[i] < perm[i + 2] for i in range(0, 4, 2)):
                brute += all(legs[a] != legs[b] for a, b in pairs)
        assert sum(we.pairing_oracle(4, (2, 1, 1, 2)).values()) == brute

    @pytest.mark.parametrize("n, total", [(2, 12), (3, 10), (4, 8)])
    def test_agrees_with_closed_form(self, n, total):
        checked, bad = we.compare_with_oracle(n, total)
        assert checked > 0 and bad == []


class TestCoefficientCondition:
    def test_inverse_factorial(self):
        chk = we.check_coefficient_condition(we.CoefficientSequence("inverse_factorial"))
        assert chk.ok and (chk.A, chk.h) == (1, 2)

    @pytest.mark.parametrize("g", [0.3, 2.0, 5.0])
    def test_exponential(self, g):
        d = we.CoefficientSequence.exponential(g)
        assert we.check_coefficient_condition(d).ok
        # the powers of g cancel, so (1, 2) works for every g; (1, 2g) as well once 2g >= 2
        assert we.condition_holds(d, 1, 2) is None
        if g >= 1:
            assert we.condition_holds(d, 1, 2 * g) is None

    def test_gaussian_fails_with_witness(self):
        chk = we.check_coefficient_condition(we.CoefficientSequence("gaussian"))
        assert not chk.ok
        k, l = chk.witness
        # the weakest pair is A = 100, h = 8: e^{2kl} > 100 * 8^{k+l} first at k = l = 3
        assert (k, l) == (3, 3)
        # |d_k d_l| / |d_{k+l}| = e^{2kl}
        assert chk.ratio == pytest.approx(math.exp(18), rel=1e-9)

    def test_derived_constants(self):
        assert we.derived_constants(10, 2, 3) == (100, 4 * 3 * 5 * 4)


def test_combinatorial_inequalities_exhaustive():
    for n in range(2, 5):
        rep = we.combinatorial_inequalities(n, 8)
        assert rep.ok and rep.checked == sum(we.count_K(n, m) for m in range(9))
    with pytest.raises(InvalidInputError):
        we.combinatorial_inequalities(5, 2)


class TestConvergence:
    grid = np.geomspace(0.01, 1000.0, 40)

    def test_inverse_factorial_admits_constant(self):
        fit = we.convergence_bound_check(we.CoefficientSequence("inverse_factorial"), lambda r: math.log(2 + r), "IR", 0.5, 2.0, 1.0, self.grid)
        assert fit.ok and math.isfinite(fit.C)
        assert all(v <= (2 + r) ** 2 * (1 + 1e-12) for v, r in zip(fit.values, self.grid))

    def test_constant_sequence_diverges(self):
        fit = we.convergence_bound_check(ONES, lambda r: math.log(2 + r), "IR", 0.5, 2.0, 1.0, self.grid)
        assert not fit.ok and fit.witness is not None

    def test_uv_side(self):
        fit = we.convergence_bound_check(we.CoefficientSequence("inverse_factorial"), lambda t: math.log1p(1 / t), "UV", 2.0, 2.0, 1.0, self.grid)
        assert fit.ok

    def test_series_matches_closed_form(self):
        # sum_k L^k k!/(2k)! w^k with w = 0 is exactly 1
        assert we.series_with_tail(we.CoefficientSequence("inverse_factorial"), 2.0, 0.0)[0] == 1.0
        with pytest.raises(TruncationInsufficient):
            we.series_with_tail(ONES, 2.0, 1.0)

    def test_tilde_C(self):
        d = we.CoefficientSequence("inverse_factorial")
        L = 3.0
        C = we.tilde_C(d, L)
        assert all(math.factorial(k) / math.factorial(2 * k) * L**k <= C * (1 + 1e-12) for k in range(80))
        with pytest.raises(HypothesisViolation):
            we.tilde_C(d, L, envelopes_zero=True)


class TestLambda:
    def test_backward_cone_two_dimensions(self):
        lam, smin = we.lambda_constant(Cone.light_cone(2, future=False), 2, samples=20000)
        assert lam == pytest.approx(1.0, abs=1e-6) and smin >= lam - 1e-6

    def test_backward_cone_four_dimensions(self):
        lam, smin = we.lambda_constant(Cone.light_cone(4, future=False, n_facets=8), 2, starts=4, samples=20000)
        assert lam == pytest.approx(1.0, abs=1e-6) and smin >= lam - 1e-6

    def test_euclidean_norm_gives_inverse_sqrt_two(self):
        lam, _ = we.lambda_constant(Cone.light_cone(2, future=False), 2, norm="euclidean", samples=20000)
        assert lam == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_cone_with_line_rejected(self):
        with pytest.raises(HypothesisViolation):
            we.lambda_constant(Cone.box([0, 1]), 2)


class TestModels:
    @pytest.mark.parametrize("name", sorted(we.MODELS))
    def test_certified_bound_holds_on_fresh_points(self, name):
        m = we.get_model(name)
        rng = np.random.default_rng(11)
        X = rng.uniform(-20, 20, (5000, m.d))
        Y = m.sample_subcone(5000, rng, (1e-3, 20.0))
        Z = X + 1j * Y
        assert np.all(np.abs(m(Z)) <= m.C * m.bound_rhs(Z))

    @pytest.mark.parametrize("name", sorted(we.MODELS))
    def test_two_point_function_is_analytic(self, name):
        from irqft.laplace import cauchy_riemann_residual

        m = we.get_model(name, certify=False)
        rng = np.random.default_rng(3)
        Z = rng.uniform(-2, 2, (20, m.d)) + 1j * m.sample_subcone(20, rng, (0.5, 2.0))
        assert cauchy_riemann_residual(m, Z) < 1e-8

    def test_massless_value(self):
        m = we.get_model("massless2", certify=False)
        z = np.array([[-1j, 0.0]])
        assert m(z)[0] == pytest.approx(1 / (4 * math.pi**2))

    @pytest.mark.parametrize("name", sorted(we.MODELS))
    def test_hilbert_majorant(self, name):
        m = we.get_model(name, certify=False)
        rng = np.random.default_rng(5)
        X, Xp = rng.uniform(-5, 5, (2, 2000, m.d))
        Y = m.sample_subcone(2000, rng, (0.05, 3.0))
        assert we.hilbert_majorant_probe(m, X, Xp, Y) <= 1.0

    def test_unknown_model(self):
        with pytest.raises(InvalidInputError):
            we.get_model("massive3")


class TestWightman:
    model = we.get_model("dipole2")
    d = we.CoefficientSequence.exponential(0.3)

    def _zeta(self, n, seed=0):
        rng = np.random.default_rng(seed)
        return rng.uniform(-2, 2, (n - 1, 2)) + 1j * self.model.sample_subcone(n - 1, rng, (0.1, 2.0))

    # the direct remainder enumerates every |K| <= N + extra, so n = 4 uses a shorter range
    @pytest.mark.parametrize("n, N, extra, rtol", [(2, 20, 25, 1e-8), (3, 20, 25, 1e-8), (4, 8, 6, 1e-6)])
    def test_closed_form(self, n, N, extra, rtol):
        z = self._zeta(n)
        v = we.wightman_eval(n, z, self.model, self.d, N)
        exact = we.closed_form_exponential(n, z, self.model, 0.3)
        assert abs(v.value - exact) <= rtol * abs(exact)
        assert we.wightman_remainder(n, z, self.model, self.d, N, extra) <= v.tail

    def test_tail_decreases_with_truncation(self):
        z = self._zeta(3, 1)
        tails = [we.wightman_tail(3, z, self.model, self.d, N) for N in (0, 5, 10, 20)]
        assert all(b < a for a, b in zip(tails, tails[1:]))

    @pytest.mark.parametrize("n", [2, 3])
    def test_truncation_gap_within_tail(self, n):
        rng = np.random.default_rng(11)
        for _ in range(100):
            z = rng.uniform(-2, 2, (n - 1, 2)) + 1j * self.model.sample_subcone(n - 1, rng, (0.1, 2.0))
            a = we.wightman_eval(n, z, self.model, self.d, 10)
            b = we.wightman_eval(n, z, self.model, self.d, 15, with_tail=False)
            assert abs(a.value - b.value) <= a.tail
            assert we.wightman_tail(n, z, self.model, self.d, 15) <= a.tail

    def test_pair_arguments(self):
        z = np.arange(6, dtype=float).reshape(3, 2)
        args = we.pair_arguments(z)
        # slots (1,2),(1,3),(1,4),(2,3),(2,4),(3,4) in pair_slots order
        expected = {(0, 1): z[0], (0, 2): z[0] + z[1], (0, 3): z.sum(0), (1, 2): z[1], (1, 3): z[1] + z[2], (2, 3): z[2]}
        for (j, m), a in zip(we.pair_slots(4), args):
            assert np.allclose(a, expected[(j, m)])

    def test_outside_tube_rejected(self):
        with pytest.raises(TubeViolation):
            we.wightman_eval(2, np.array([[0.0 + 1.0j, 0.0]]), self.model, self.d, 5)

    def test_order_of_summation_irrelevant(self):
        z = self._zeta(3, 2)
        gap, tail = we.permutation_surrogate(3, z, self.model, self.d, 6, 12)
        assert gap <= tail


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_combinatorial_factor_matches_oracle(entries):
    K = we.MultiIndexK(3, tuple(entries))
    if sum(K.kappa) > we.MAX_ORACLE_LEGS:
        return
    assert we.pairing_oracle(3, K.kappa).get(K.entries) == we.combinatorial_factor(K)
