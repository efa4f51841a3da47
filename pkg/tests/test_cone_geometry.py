import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irqft.cone_geometry import (
    Cone,
    MultiCone,
    PairingForm,
    compact_containment,
    complement_witness,
    cone_algebra,
    distance_to_cone,
    dual_cone,
    product,
    same_set,
)
from irqft.errors import DimensionError, MalformedConeError

QUADRANT = Cone.box([1, 1])


@pytest.mark.parametrize(
    "p, expected",
    [((-1.0, -2.0), 2.0), ((3.0, -1.0), 1.0), ((0.5, 2.0), 0.0)],
)
def test_distance_to_quadrant(p, expected):
    assert distance_to_cone(p, QUADRANT) == pytest.approx(expected, abs=1e-10)


def test_distance_to_light_cone_matches_sampling():
    # dense sampling of {a >= |b|} gives 0.5 for the point (0, -1)
    V = Cone.light_cone(2)
    assert distance_to_cone((0.0, -1.0), V) == pytest.approx(0.5, abs=1e-10)
    s = np.linspace(-3, 3, 200001)
    best = min(np.max(np.abs(np.stack([np.abs(s) + a, s], 1) - [0, -1]), axis=1).min() for a in (0.0, 0.01, 0.1))
    assert best == pytest.approx(0.5, abs=1e-4)


def test_distance_errors():
    with pytest.raises(DimensionError):
        distance_to_cone((1.0, 2.0, 3.0), QUADRANT)
    with pytest.raises(MalformedConeError):
        distance_to_cone((1.0, np.inf), QUADRANT)


def _random_cone(rng, k):
    return Cone.from_generators(rng.standard_normal((k + 1, k)) + 2 * np.eye(k + 1, k)[0])


def test_distance_zero_iff_member():
    rng = np.random.default_rng(1)
    for _ in range(100):
        k = int(rng.integers(2, 4))
        U = _random_cone(rng, k)
        P = rng.standard_normal((10, k))
        d = distance_to_cone(P, U)
        assert np.array_equal(d <= 1e-9, U.contains(P, 1e-9))


def test_distance_is_lipschitz():
    rng = np.random.default_rng(2)
    U = Cone.light_cone(3, n_facets=16)
    P = rng.standard_normal((50, 3))
    Q = P + 0.1 * rng.standard_normal((50, 3))
    gap = np.abs(distance_to_cone(P, U) - distance_to_cone(Q, U))
    assert np.all(gap <= np.abs(P - Q).max(axis=1) + 1e-9)


def test_lp_agrees_with_sampling_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        U = _random_cone(rng, 2)
        p = rng.standard_normal(2) * 2
        S = U.sample(20000, rng, unit=False) * rng.uniform(0, 5, (20000, 1))
        oracle = np.abs(S - p).max(axis=1).min()
        assert distance_to_cone(p, U) <= oracle + 1e-9
        assert distance_to_cone(p, U) == pytest.approx(oracle, abs=0.05)


def test_light_cone_is_self_dual():
    V = Cone.light_cone(2)
    assert same_set(dual_cone(V, PairingForm.lorentz(2)), V)


def test_backward_cone_dualizes_to_forward_cone_under_minus_lorentz():
    Vm = Cone.light_cone(2, future=False)
    assert same_set(dual_cone(Vm, PairingForm.minus_lorentz(2)), Cone.light_cone(2))


def test_dual_of_full_space_is_origin():
    D = dual_cone(Cone.full(3))
    assert D.contains(np.zeros(3))
    assert not np.any(D.contains(np.eye(3)))


def test_double_dual():
    rng = np.random.default_rng(4)
    for _ in range(10):
        V = _random_cone(rng, 3)
        assert same_set(dual_cone(dual_cone(V)), V)


def test_dual_sampling_oracle():
    rng = np.random.default_rng(5)
    V = Cone.light_cone(2)
    D = dual_cone(V, PairingForm.lorentz(2))
    P, Y = D.sample(1000, rng), V.sample(1000, rng)
    assert np.all(PairingForm.lorentz(2)(P, Y) >= -1e-12)


@pytest.mark.parametrize(
    "U, V, expected",
    [
        (Cone.sector(0, 10), Cone.sector(0, 20), True),
        (Cone.sector(0, 20), Cone.sector(0, 20), False),
        (Cone.zero(2), Cone.sector(0, 20), True),
    ],
)
def test_compact_containment(U, V, expected):
    assert compact_containment(U, V) is expected


def test_product_membership_is_componentwise():
    V = Cone.light_cone(2)
    VV = product(V, V)
    rng = np.random.default_rng(6)
    P = rng.standard_normal((200, 4))
    assert np.array_equal(VV.contains(P), V.contains(P[:, :2]) & V.contains(P[:, 2:]))


def test_intersection_of_quadrants_is_axis():
    Q1, Q2 = Cone.box([1, 1]), Cone.box([-1, 1])
    I = cone_algebra(Q1, Q2, "intersection")
    assert I.contains((0.0, 1.0)) and not I.contains((0.0, -1.0)) and not I.contains((1.0, 1.0))


def test_union_of_half_lines():
    U = cone_algebra(Cone.half_line([1.0, 0.0]), Cone.half_line([0.0, 1.0]), "union")
    assert isinstance(U, MultiCone)
    assert list(U.contains(np.array([[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]]))) == [True, True, False]


def test_complement_witness_separates():
    # U compact in V: unit points of U keep positive distance from the complement of V
    U, V = Cone.sector(90, 10), Cone.sector(90, 30, open=True)
    W = complement_witness(V)
    P = U.sample(200, np.random.default_rng(7))
    assert np.all(distance_to_cone(P, W) > 0.05)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_cones_are_scale_invariant(lam, p):
    V = Cone.light_cone(2)
    assert V.contains(np.array(p)) == V.contains(lam * np.array(p))


def _ray_distance(p, g):
    # sup-norm distance from p to the ray {t g : t >= 0}; convex in t
    from scipy.optimize import minimize_scalar

    f = lambda t: np.abs(p - t * g).max()
    hi = 10 * (np.abs(p).max() + 1) / np.abs(g).max()
    res = minimize_scalar(f, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-12})
    return min(f(0.0), res.fun)


def test_lp_matches_exact_planar_oracle():
    # outside a planar cone the nearest point lies on one of its two boundary rays
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = rng.uniform(0, 2 * np.pi)
        w = rng.uniform(0.1, 2.5)
        G = np.array([[np.cos(a), np.sin(a)], [np.cos(a + w), np.sin(a + w)]])
        U = Cone.from_generators(G)
        p = rng.uniform(-3, 3, 2)
        oracle = 0.0 if U.contains(p, 1e-12) else min(_ray_distance(p, g) for g in G)
        assert distance_to_cone(p, U) == pytest.approx(oracle, abs=1e-6)


@pytest.mark.parametrize("k", [3, 4])
def test_lp_never_exceeds_sampling_in_higher_dimensions(k):
    rng = np.random.default_rng(k)
    for _ in range(10):
        U = _random_cone(rng, k)
        p = rng.standard_normal(k) * 2
        S = U.sample(40000, rng, unit=False) * rng.uniform(0, 5, (40000, 1))
        oracle = np.abs(S - p).max(axis=1).min()
        assert distance_to_cone(p, U) <= oracle + 1e-9
