import numpy as np
import pytest

from irqft import literals
from irqft.cone_geometry import Cone, same_set
from irqft.errors import InvalidInputError
from irqft.gs_spaces import TestFunction
from irqft.laplace import DerivativePointMass, Density, Functional, PointMass


@pytest.mark.parametrize(
    "text, reference",
    [
        ("cone{dim=2, gens=[[1,1],[1,-1]]}", Cone.from_generators(np.array([[1.0, 1.0], [1.0, -1.0]]))),
        ("cone{dim=2, normals=[[1,0],[0,1]]}", Cone.box([1, 1])),
        ("cone{box=[1,0]}", Cone.box([1, 0])),
        ("cone{light=2}", Cone.light_cone(2)),
        ("cone{light=2, future=false, facets=8}", Cone.light_cone(2, future=False, n_facets=8)),
    ],
)
def test_cone_literals(text, reference):
    assert same_set(literals.parse(text), reference)


def test_product_of_cones():
    c = literals.parse("cone{light=2} x cone{box=[1]}")
    assert c.dim == 3
    assert c.contains((1.0, 0.5, 2.0)) and not c.contains((1.0, 0.5, -2.0))


def test_zero_cone_from_dim():
    c = literals.parse("cone{dim=3}")
    assert c.contains((0.0, 0.0, 0.0)) and not c.contains((1.0, 0.0, 0.0))


def test_test_function_literal():
    f = literals.parse('tf{dim=2, P="1 + w1", Q="-w1^2 - w2^2"}')
    assert isinstance(f, TestFunction)
    assert f(np.array([[1.0, 0.0]]))[0] == pytest.approx(2 * np.exp(-1.0))


def test_functional_literal():
    u = literals.parse(
        "fn{dim=2, atoms=[{kind=point_mass, p=[1,0.3], weight=2},"
        " {kind=derivative_point_mass, p=[1,0], direction=[0,1]},"
        ' {kind=density, tf=tf{dim=2, Q="-w1-w2"}, cone=cone{box=[1,1]}}]}'
    )
    assert isinstance(u, Functional)
    assert [type(a) for a in u.atoms] == [PointMass, DerivativePointMass, Density]
    assert u.atoms[0].weight == 2
    # u(1) = 2 + 0 + int e^{-p1-p2} over the quadrant
    assert u.apply(lambda P: np.ones(len(P))) == pytest.approx(3.0, rel=1e-9)


def test_scalars_lists_and_mappings():
    assert literals.parse("[1, 2.5, true, \"s\", name]") == [1, 2.5, True, "s", "name"]
    assert literals.parse("{a=1, b=[2]}") == {"a": 1, "b": [2]}


@pytest.mark.parametrize(
    "text",
    [
        "cone{dim=2, gens=[[1,0]]",
        "cone{}",
        "bogus{dim=1}",
        "cone{box=[1]} x 3",
        "cone{box=[1]} extra",
        "fn{dim=1, atoms=[{kind=density, tf=tf{dim=1}}]}",
        "fn{dim=1, atoms=[{kind=ghost}]}",
        "tf{P=\"1\"}",
        "cone{box=[1]} @",
    ],
)
def test_malformed_literals(text):
    with pytest.raises(InvalidInputError):
        literals.parse(text)
