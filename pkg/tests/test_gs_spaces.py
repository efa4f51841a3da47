import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from irqft import gs_spaces as gs
from irqft.cone_geometry import Cone
from irqft.errors import InvalidInputError, UnsupportedRepresentationError

GAUSS = gs.TestFunction.from_strings(1, "1", "-w1^2")
EXAMPLE = gs.TestFunction.from_strings(2, "1", "-w1^2 - w2^3")
EXAMPLE_PARAMS = gs.GSParams(2 / 3, 0.5, 2.0, 2.0)


@pytest.mark.parametrize("x", [-1.3, 0.0, 0.3, 2.0])
def test_contour_derivatives_match_hermite(x):
    # d^m exp(-x^2) = (-1)^m H_m(x) exp(-x^2)
    D = gs.contour_derivatives(GAUSS, np.array([x]), 10)
    exact = [(-1) ** m * special.eval_hermite(m, x) * math.exp(-x * x) for m in range(11)]
    assert np.allclose(D.real, exact, rtol=1e-8, atol=1e-10)
    assert np.max(np.abs(D.imag)) < 1e-8


@pytest.mark.parametrize("alpha, beta", [(0.4, 0.5), (0.0, 1.0), (0.2, 0.2)])
def test_params_reject_trivial_spaces(alpha, beta):
    with pytest.raises(InvalidInputError):
        gs.GSParams(alpha, beta)


def test_gaussian_real_norm_is_one():
    # the sup is attained by the zeroth derivative at the origin
    rep = gs.real_norm(GAUSS, gs.GSParams(0.5, 0.5, 4.0, 4.0))
    assert rep.value == pytest.approx(1.0, abs=1e-12)
    assert rep.stable


def test_growing_gaussian_diverges():
    rep = gs.real_norm(gs.TestFunction.from_strings(1, "1", "w1^2"), gs.GSParams(0.5, 0.5, 4.0, 4.0))
    assert rep.diverges and rep.value == math.inf
    assert all(b > a for a, b in zip(rep.trend, rep.trend[1:]))


@pytest.mark.parametrize(
    "R, expected",
    [
        # mpmath quadrature over the region, 15 digits
        (1, 2.08931166960968),
        (2, 3.09713078963607),
        (3, 3.34490473350718),
        (5, 3.57405901504733),
        (8, 3.74678533778943),
    ],
)
def test_example1_truncated_integral(R, expected):
    assert gs.example1_divergence(R) == pytest.approx(expected, rel=1e-8)


def test_example1_integrand_at_origin():
    assert gs.example1_integrand(np.zeros((1, 2)))[0] == pytest.approx(1.0)


def test_example1_cone_norm_finite_on_half_plane_and_infinite_on_plane():
    half = gs.cone_norm(EXAMPLE, Cone.box([0, 1]), EXAMPLE_PARAMS, 8.0)
    assert half.stable and math.isfinite(half.value)
    full = gs.cone_norm(EXAMPLE, Cone.full(2), EXAMPLE_PARAMS, 8.0)
    assert full.diverges


def test_cone_norm_of_zero():
    rep = gs.cone_norm(gs.TestFunction.from_strings(1, "0", "0"), Cone.box([1]), gs.GSParams(0.5, 0.5), 8.0)
    assert rep.value == 0.0


def test_cone_norm_monotone_under_cone_inclusion():
    # a larger cone weakens the penalty, so the norm can only shrink
    f = gs.TestFunction.from_strings(1, "1", "-w1^2")
    p = gs.GSParams(0.5, 0.5, 1.0, 1.0)
    small = gs.cone_norm(f, Cone.zero(1), p, 8.0).value
    large = gs.cone_norm(f, Cone.box([1]), p, 8.0).value
    assert large <= small * (1 + 1e-9)


class TestDecomposition:
    params = gs.GSParams(0.5, 0.5, 1.0, 1.0)

    @pytest.fixture(scope="class")
    @classmethod
    def dec(cls):
        return gs.decompose(GAUSS, Cone.zero(1), None, Cone.box([1]), Cone.box([-1]), cls.params)

    def test_partition_of_unity(self, dec):
        x = np.linspace(-5, 5, 1000)[:, None]
        assert np.max(np.abs(dec.f1(x) + dec.f2(x) - GAUSS(x))) < 1e-10
        assert np.max(np.abs(dec.g1(x) + dec.g2(x) - 1)) < 1e-12

    def test_cutoff_limits(self, dec):
        X = np.array([[-30.0], [0.0], [30.0]])
        assert np.allclose(dec.g1(X).real, [1.0, 0.5, 0.0], atol=1e-12)

    def test_certificates_are_stable(self, dec):
        assert dec.certificate["f1_norm"].stable and dec.certificate["f2_norm"].stable
        assert dec.certificate["theta1"] > 0

    def test_overlapping_cones_rejected(self):
        with pytest.raises(InvalidInputError):
            gs.decompose(GAUSS, Cone.zero(1), None, Cone.box([1]), Cone.box([1]), self.params)

    def test_alpha_zero_unsupported(self):
        with pytest.raises(UnsupportedRepresentationError):
            gs.decompose(GAUSS, Cone.zero(1), None, Cone.box([1]), Cone.box([-1]), gs.GSParams(0.0, 1.5))


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
def test_hyperfunction_ray_sup_closed_form(n):
    strip, ray = gs.hyperfunction_example(n)
    assert ray == pytest.approx(n**n * math.exp(-n), rel=1e-14)
    assert gs.hyperfunction_ray_sup(n) == pytest.approx(ray, rel=1e-9)


def test_hyperfunction_strip_norms_decrease():
    strips = [gs.hyperfunction_example(n)[0] for n in (5, 8, 12, 20)]
    assert all(b < a for a, b in zip(strips, strips[1:]))


class TestFlatFunctions:
    params = gs.GSParams(0.5, 2.0, 1.0, 1.0)
    f = gs.TestFunction.from_strings(1, "1", "-w1^2", flat=gs.FlatFactor((0,), 1.0))

    def test_vanishes_outside_open_set(self):
        vals = self.f(np.array([[0.5], [0.0], [-0.5]]))
        assert vals[0] == 0 and vals[1] == 0
        assert vals[2] == pytest.approx(math.exp(-0.25 - 2.0))

    def test_derivatives_vanish_at_the_boundary(self):
        # derivatives up to order 6 peak away from the boundary, then collapse
        prof = gs.flatness_profile(self.f, np.array([[-0.1], [-0.01], [-0.005]]))
        assert prof[2] < prof[1] < 1e-15 < prof[0]

    @pytest.mark.parametrize("x", [-3.0, -0.5, -0.1, -0.02])
    def test_taylor_bound(self, x):
        sn = gs.flat_seminorm(self.f, self.params)
        assert gs.taylor_flat_bound(self.f, self.params, [x], seminorm=sn).ok

    def test_taylor_bound_needs_interior_point(self):
        with pytest.raises(InvalidInputError):
            gs.taylor_flat_bound(self.f, self.params, [0.5], seminorm=1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 0.9), st.floats(0.5, 5.0))
def test_inf_power_bound(alpha, xi):
    # the minimizing m is near xi^(1/alpha)/e, well inside m_max here
    lhs, rhs = gs.inf_power_check(alpha, xi, m_max=400)
    assert lhs <= rhs + 1e-9


MONOTONE_FUNCS = [
    gs.TestFunction.from_strings(1, "1", "-w1^2"),
    gs.TestFunction.from_strings(1, "w1", "-w1^2"),
    gs.TestFunction.from_strings(1, "1 + w1^2", "-2*w1^2"),
    gs.TestFunction.from_strings(1, "1", "-w1^2 + w1"),
    gs.TestFunction.from_strings(1, "w1^3 - w1", "-w1^2/2"),
]


@pytest.mark.parametrize("f", MONOTONE_FUNCS)
def test_norms_do_not_increase_with_constants(f):
    # every weighted term is nonincreasing in A and in B on a fixed grid
    scales = (1.0, 2.0, 4.0)
    real = {(A, B): gs.real_norm(f, gs.GSParams(0.5, 0.5, A, B), M=8, R=6.0).value for A in scales for B in scales}
    cone = {
        (A, B): gs.cone_norm(f, Cone.box([1] * f.dim), gs.GSParams(0.5, 0.5, A, B), 6.0, n_grid=9, refine=False).value
        for A in scales
        for B in scales
    }
    for table in (real, cone):
        for (A, B), v in table.items():
            for A2, B2 in ((2 * A, B), (A, 2 * B)):
                if (A2, B2) in table:
                    assert table[(A2, B2)] <= v * (1 + 1e-12)
