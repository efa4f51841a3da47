"""Text literals for cones, test functions and functionals.

Grammar::

    expr     := product
    product  := atom ("x" atom)*          # only between cone literals
    atom     := NAME "{" [field ("," field)*] "}" | value
    field    := NAME "=" expr
    value    := NUMBER | STRING | NAME | "[" [expr ("," expr)*] "]" | "{" fields "}"

Recognized literals:

    cone{dim=2, gens=[[1,1],[1,-1]]}
    cone{dim=2, normals=[[1,0]]}
    cone{box=[1,0]}                      # per-axis kinds: 1 >=0, -1 <=0, 0 free, 2 zero
    cone{light=2, future=true, facets=64}
    tf{dim=2, P="1", Q="-w1^2 - w2^3"}
    fn{dim=2, atoms=[{kind=point_mass, p=[1,0.3]},
                     {kind=density, tf=tf{dim=2, Q="-w1-w2"}, cone=cone{box=[1,1]}}]}

A bare ``{...}`` is a plain mapping.  ``true``/``false`` are booleans.
"""

import re

import numpy as np

from .cone_geometry import Cone, cone_algebra
from .errors import InvalidInputError

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<str>"[^"]*")
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<punct>[{}\[\],=])
    )""",
    re.VERBOSE,
)


def tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise InvalidInputError(f"cannot parse literal near {text[pos:pos + 20]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise InvalidInputError("unexpected end of literal")
        if value is not None and tok[1] != value:
            raise InvalidInputError(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        left = self.atom()
        while self.peek() == ("name", "x"):
            self.take()
            right = self.atom()
            if not (isinstance(left, Cone) and isinstance(right, Cone)):
                raise InvalidInputError("'x' joins cone literals only")
            left = cone_algebra(left, right, "product")
        return left

    def fields(self):
        out = {}
        self.take("{")
        if self.peek()[1] != "}":
            while True:
                _, key = self.take()
                self.take("=")
                out[key] = self.expr()
                if self.peek()[1] == ",":
                    self.take()
                    continue
                break
        self.take("}")
        return out

    def atom(self):
        kind, val = self.peek()
        if kind == "name" and self.peek(1)[1] == "{":
            self.take()
            return build(val, self.fields())
        if val == "{":
            return self.fields()
        if val == "[":
            self.take()
            items = []
            if self.peek()[1] != "]":
                while True:
                    items.append(self.expr())
                    if self.peek()[1] == ",":
                        self.take()
                        continue
                    break
            self.take("]")
            return items
        self.take()
        if kind == "num":
            return float(val) if any(c in val for c in ".eE") else int(val)
        if kind == "str":
            return val[1:-1]
        if kind == "name":
            return {"true": True, "false": False}.get(val, val)
        raise InvalidInputError(f"unexpected token {val!r}")


def build(name, f):
    if name == "cone":
        return _cone(f)
    if name == "tf":
        return _tf(f)
    if name == "fn":
        return _fn(f)
    raise InvalidInputError(f"unknown literal kind {name!r}")


def _cone(f):
    is_open = bool(f.get("open", False))
    if "light" in f:
        return Cone.light_cone(int(f["light"]), future=bool(f.get("future", True)), n_facets=int(f.get("facets", 64)), open=is_open)
    if "box" in f:
        return Cone.box(f["box"], open=is_open)
    dim = f.get("dim")
    gens, normals = f.get("gens"), f.get("normals")
    if gens is not None and normals is not None:
        return Cone.from_both(np.array(gens, float), np.array(normals, float), dim, open=is_open)
    if gens is not None:
        return Cone.from_generators(np.array(gens, float), dim, open=is_open)
    if normals is not None:
        return Cone.from_halfspaces(np.array(normals, float), dim, open=is_open)
    if dim is not None:
        return Cone.zero(int(dim))
    raise InvalidInputError("cone literal needs gens, normals, box or light")


def _tf(f):
    from .gs_spaces import TestFunction

    if "dim" not in f:
        raise InvalidInputError("tf literal needs dim")
    return TestFunction.from_strings(int(f["dim"]), str(f.get("P", "1")), str(f.get("Q", "0")))


def _fn(f):
    from .laplace import DerivativePointMass, Density, Functional, PointMass

    dim = int(f["dim"])
    atoms = []
    for a in f.get("atoms", []):
        kind = a.get("kind")
        w = complex(a.get("weight", 1.0))
        carrier = a.get("cone")
        if kind == "point_mass":
            atoms.append(PointMass(tuple(float(v) for v in a["p"]), w, carrier))
        elif kind == "derivative_point_mass":
            atoms.append(DerivativePointMass(tuple(float(v) for v in a["p"]), tuple(float(v) for v in a["direction"]), w, carrier))
        elif kind == "density":
            tf = a["tf"]
            if carrier is None:
                raise InvalidInputError("density atoms need a cone")
            atoms.append(Density(lambda P, tf=tf: tf(P), carrier, w, str(tf.source)))
        else:
            raise InvalidInputError(f"unknown atom kind {kind!r}")
    return Functional(dim, tuple(atoms))


def parse(text):
    p = _Parser(tokenize(text))
    out = p.expr()
    if p.peek()[0] is not None:
        raise InvalidInputError(f"trailing input after literal: {p.peek()[1]!r}")
    return out
