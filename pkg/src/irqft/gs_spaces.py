"""Gelfand-Shilov test functions and norms.

Test functions are members of the closed analytic family P(w) exp(Q(w)),
optionally multiplied by a flat factor that makes them vanish to all orders
on the complement of an open orthant-type set.  Derivatives are computed by
Cauchy integrals on polydisc tori evaluated with the FFT.  Norms over
non-compact domains are truncated sups, certified only through their trend
across nested truncations.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy
from scipy import integrate, optimize, special
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from . import kernels
from .cone_geometry import Cone, MultiCone, cone_algebra, distance_to_cone
from .errors import InvalidInputError, NumericalFailure, UnsupportedRepresentationError

DIVERGENCE_RATIO = 1.5

# --------------------------------------------------------------------------
# parameters and reports


@dataclass(frozen=True)
class GSParams:
    """Indices (alpha, beta) and constants (A, B) of a Gelfand-Shilov norm."""

    alpha: float
    beta: float
    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta <= 0 or self.A <= 0 or self.B <= 0:
            raise InvalidInputError("need alpha >= 0 and beta, A, B > 0")
        s = self.alpha + self.beta
        if not (s > 1 or (self.alpha > 0 and math.isclose(s, 1.0))):
            raise InvalidInputError(f"trivial space: alpha={self.alpha}, beta={self.beta}")

    def with_constants(self, A=None, B=None):
        return GSParams(self.alpha, self.beta, self.A if A is None else A, self.B if B is None else B)


@dataclass
class NormReport:
    """Truncated norm with its trend across nested truncations."""

    value: float
    log_value: float
    truncation: dict
    trend: list = field(default_factory=list)
    diverges: bool = False

    @property
    def stable(self):
        return not self.diverges

    def to_json(self):
        return {
            "value": "inf" if self.diverges or not np.isfinite(self.value) else float(self.value),
            "truncation": {k: self.truncation.get(k) for k in ("M", "R")},
            "diverges": bool(self.diverges),
        }


def _trend_report(log_values, truncations, ratio=DIVERGENCE_RATIO):
    """Monotone envelope of nested truncated sups and the divergence flag."""
    env = np.maximum.accumulate(np.asarray(log_values, dtype=float))
    steps = np.diff(env)
    diverges = bool(len(env) >= 3 and np.all(steps[-2:] > math.log(ratio)))
    last = float(env[-1])
    value = math.inf if diverges else (math.exp(last) if last < 700 else math.inf)
    return NormReport(value, last, truncations[-1], [float(v) for v in env], diverges)


# --------------------------------------------------------------------------
# test functions

_TRANSFORMS = standard_transformations + (convert_xor, implicit_multiplication_application)


def _poly_arrays(text, symbols):
    expr = parse_expr(str(text), local_dict={s.name: s for s in symbols}, transformations=_TRANSFORMS)
    poly = sympy.Poly(sympy.expand(expr), *symbols)
    terms = poly.terms()
    exps = np.array([t[0] for t in terms], dtype=np.int64).reshape(-1, len(symbols))
    coefs = np.array([complex(sympy.N(t[1])) for t in terms], dtype=complex)
    keep = coefs != 0
    return exps[keep], coefs[keep]


@dataclass(frozen=True)
class FlatFactor:
    """exp(-c / l(x)) with l > 0 on the open set {x_a < 0 for a in axes}.

    ``mode="product"`` uses prod_a exp(c / x_a), which is analytic on the
    set; ``mode="distance"`` uses l(x) = min_a(-x_a), the sup-norm distance
    to the complement.  Both agree when a single axis is constrained.
    """

    axes: tuple
    c: float = 1.0
    mode: str = "product"

    def log_value(self, W):
        W = np.asarray(W)
        cols = W[:, list(self.axes)]
        if self.mode == "product" or len(self.axes) == 1:
            return np.sum(self.c / cols, axis=1)
        ell = np.min(-cols.real, axis=1)
        return -self.c / ell + 0j

    def support(self, X):
        X = np.asarray(X)
        return np.all(np.real(X[:, list(self.axes)]) < 0, axis=1)

    def boundary_distance(self, X):
        X = np.asarray(X, dtype=float)
        return np.min(-X[:, list(self.axes)], axis=1)


class Evaluator:
    """Common interface: ``dim``, ``analytic(W)``, ``__call__(X)``, ``log_abs(W)``."""

    dim: int
    flat = None

    def analytic(self, W):
        raise NotImplementedError

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X))
        vals = self.analytic(X)
        if self.flat is not None and not np.iscomplexobj(X):
            vals = np.where(self.flat.support(X), vals, 0.0)
        return vals

    def log_abs(self, W):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.analytic(np.atleast_2d(W))))


@dataclass(frozen=True, eq=False)
class TestFunction(Evaluator):
    """P(w) exp(Q(w)) [x flat factor] on C^k."""

    __test__ = False  # not a pytest class

    dim: int
    p_exps: np.ndarray
    p_coefs: np.ndarray
    q_exps: np.ndarray
    q_coefs: np.ndarray
    flat: FlatFactor = None
    source: tuple = ("1", "0")

    @classmethod
    def from_strings(cls, dim, P="1", Q="0", flat=None):
        syms = sympy.symbols(" ".join(f"w{i + 1}" for i in range(dim)))
        syms = (syms,) if dim == 1 else tuple(syms)
        pe, pc = _poly_arrays(P, syms)
        qe, qc = _poly_arrays(Q, syms)
        if qe.size and qe.max() > 4:
            raise InvalidInputError("exponent polynomial must have per-variable degree <= 4")
        return cls(dim, pe, pc, qe, qc, flat, (str(P), str(Q)))

    def scaled(self, a):
        return TestFunction(self.dim, self.p_exps, self.p_coefs * a, self.q_exps, self.q_coefs, self.flat, self.source)

    def _q(self, W):
        return kernels.poly_eval(self.q_exps, self.q_coefs, W)

    def _p(self, W):
        return kernels.poly_eval(self.p_exps, self.p_coefs, W)

    def _log_analytic(self, W):
        """Complex logarithm of the value (without the P factor)."""
        q = self._q(W)
        if self.flat is not None:
            q = q + self.flat.log_value(W)
        return q

    def analytic(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        return self._p(W) * np.exp(self._log_analytic(W))

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X))
        if self.flat is None or np.iscomplexobj(X):
            return self.analytic(X)
        out = np.zeros(X.shape[0], dtype=complex)
        m = self.flat.support(X)
        if np.any(m):
            out[m] = self.analytic(X[m])
        return out

    def log_abs(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._p(W))) + self._log_analytic(W).real

    def __repr__(self):
        fl = f", flat={self.flat}" if self.flat else ""
        return f"TestFunction(dim={self.dim}, P={self.source[0]!r}, Q={self.source[1]!r}{fl})"


@dataclass(frozen=True, eq=False)
class ProductEvaluator(Evaluator):
    """Pointwise product of two evaluators."""

    f: Evaluator
    g: Evaluator

    @property
    def dim(self):
        return self.f.dim

    @property
    def flat(self):
        return self.f.flat

    def analytic(self, W):
        return self.f.analytic(W) * self.g.analytic(W)

    def log_abs(self, W):
        return self.f.log_abs(W) + self.g.log_abs(W)


@dataclass(frozen=True, eq=False)
class LinearCombination(Evaluator):
    """sum_i c_i f_i for evaluators sharing dimension and flat factor."""

    terms: tuple

    @property
    def dim(self):
        return self.terms[0][1].dim

    @property
    def flat(self):
        return self.terms[0][1].flat

    def analytic(self, W):
        return sum(c * f.analytic(W) for c, f in self.terms)


@dataclass(frozen=True, eq=False)
class CallableEvaluator(Evaluator):
    """Wrap a vectorized analytic function ``fn(W) -> values``."""

    dim: int
    fn: object
    flat: FlatFactor = None

    def analytic(self, W):
        return np.asarray(self.fn(np.atleast_2d(W)), dtype=complex)


# --------------------------------------------------------------------------
# contour derivatives


def _order_groups(max_order):
    groups, lo = [], 0
    while lo <= max_order:
        hi = min(max_order, max(1, 2 * lo + 1))
        groups.append((lo, hi))
        lo = hi + 1
    return groups


def _torus_coeffs(f, x, radii, M):
    k = x.shape[0]
    theta = 2 * np.pi * np.arange(M) / M
    circ = np.exp(1j * theta)
    grids = np.meshgrid(*([circ] * k), indexing="ij")
    W = np.stack([x[a] + radii[a] * grids[a].ravel() for a in range(k)], axis=1)
    vals = np.asarray(f.analytic(W)).reshape((M,) * k)
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("non-finite values on the contour")
    return np.fft.fftn(vals) / M**k, float(np.abs(vals).max())


def contour_derivatives(
    f, x, max_order, *, alpha=0.5, nodes=128, radius=None, check=True, rtol=1e-8, max_nodes=2048
):
    """All partial derivatives d^lam f(x) with each lam_a <= ``max_order``.

    The radius for coordinate ``a`` is max(1, m^alpha) where m is the largest
    order in the block being extracted (or ``radius(m, a)`` if given).  With
    ``check`` the node count is doubled until two successive results agree
    to ``rtol`` (above the roundoff floor); if that needs more than
    ``max_nodes`` nodes per axis, :class:`NumericalFailure` names the
    offending multi-index.
    """
    x = np.asarray(x, dtype=complex).ravel()
    k = x.shape[0]
    if nodes <= max_order + 8:
        nodes = 2 ** int(math.ceil(math.log2(max_order + 16)))
    groups = _order_groups(max_order)
    out = np.zeros((max_order + 1,) * k, dtype=complex)
    fact = np.array([math.factorial(m) for m in range(max_order + 1)], dtype=float)

    def rad(m, a):
        if radius is not None:
            return float(radius(m, a))
        return max(1.0, m**alpha)

    for combo in np.ndindex(*([len(groups)] * k)):
        blocks = [groups[g] for g in combo]
        radii = np.array([rad(hi, a) for a, (lo, hi) in enumerate(blocks)])
        sl = tuple(slice(lo, hi + 1) for lo, hi in blocks)
        def block_at(M):
            coeffs, fmax = _torus_coeffs(f, x, radii, M)
            block = coeffs[sl]
            scale = np.ones(block.shape)
            for a, (lo, hi) in enumerate(blocks):
                m = np.arange(lo, hi + 1)
                shp = [1] * k
                shp[a] = -1
                scale = scale * (fact[m] / radii[a] ** m).reshape(shp)
            return block * scale, fmax * scale, fmax

        M = nodes
        val, floor, fmax = block_at(M)
        while check:
            val2, floor, fmax = block_at(2 * M)
            diff = np.abs(val - val2)
            # roundoff in exp() grows with the magnitude of its argument
            growth = max(1.0, math.log(max(fmax, 1.0)))
            allowed = rtol * np.abs(val2) + 1e3 * growth * np.finfo(float).eps * floor
            bad = np.argwhere(diff > allowed)
            val = val2
            if not bad.size:
                break
            M *= 2
            if 2 * M > max_nodes:
                idx = tuple(int(lo + b) for (lo, _), b in zip(blocks, bad[0]))
                raise NumericalFailure(f"contour derivative did not converge at index {idx}")
        out[sl] = val
    return out


# --------------------------------------------------------------------------
# norms


def _log_pow(n, e):
    """log(n^(e n)) with the convention 0^0 = 1."""
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(n > 0, e * n * np.log(np.where(n > 0, n, 1.0)), 0.0)


def _grid(R, n, k):
    axis = np.linspace(-R, R, n)
    mesh = np.meshgrid(*([axis] * k), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _multi_indices(k, M):
    return [lam for lam in np.ndindex(*([M + 1] * k)) if sum(lam) <= M]


def derivative_table(f, points, M, *, alpha=0.5, nodes=128, radius=None):
    """|d^lam f(p)| for all |lam| <= M at each point (shape: points x indices)."""
    lams = _multi_indices(f.dim, M)
    tab = np.empty((len(points), len(lams)))
    for i, p in enumerate(points):
        D = contour_derivatives(f, p, M, alpha=alpha, nodes=nodes, radius=radius)
        tab[i] = [abs(D[lam]) for lam in lams]
    return lams, tab


def _real_norm_log(points, lams, tab, params, M, role_swap=False):
    """log of the truncated sup of the real-variable norm from a table."""
    a_der, b_mom = (params.beta, params.alpha) if role_swap else (params.alpha, params.beta)
    A_der, B_mom = (params.B, params.A) if role_swap else (params.A, params.B)
    k = points.shape[1]
    mus = _multi_indices(k, M)
    lam_tot = np.array([sum(l) for l in lams])
    with np.errstate(divide="ignore"):
        log_der = np.log(tab) - lam_tot * math.log(A_der) - _log_pow(lam_tot, a_der)
        absP = np.abs(points)
        logP = np.log(np.where(absP > 0, absP, 1.0))
        zero = absP == 0
        best_mom = np.full(points.shape[0], -np.inf)
        for mu in mus:
            mu = np.array(mu)
            tot = int(mu.sum())
            term = (logP * mu).sum(axis=1) - tot * math.log(B_mom) - float(_log_pow(tot, b_mom))
            term = np.where(np.any(zero & (mu > 0), axis=1), -np.inf, term)
            best_mom = np.maximum(best_mom, term)
    return float(np.max(log_der.max(axis=1) + best_mom))


def real_norm(f, params, M=20, R=10.0, *, n_grid=41, levels=3, nodes=128, role_swap=False):
    """Truncated sup of |p^mu d^lam f(p)| / (A^|lam| B^|mu| |lam|^(a|lam|) |mu|^(b|mu|)).

    Nested truncations use (M_i, R_i) = (M, R) * i/levels.  With
    ``role_swap`` the derivative index carries (beta, B) and the moment
    index (alpha, A), which is the normalization of the Sigma-type spaces.
    """
    d_alpha = params.beta if role_swap else params.alpha
    logs, truncs = [], []
    pts_all = _grid(R, n_grid, f.dim)
    lams, tab = derivative_table(f, pts_all, M, alpha=min(max(d_alpha, 0.0), 1.0), nodes=nodes)
    if not np.any(tab):
        rep = NormReport(0.0, -math.inf, {"M": M, "R": R}, [-math.inf] * levels, False)
        return rep
    for i in range(1, levels + 1):
        Mi = max(1, int(round(M * i / levels)))
        Ri = R * i / levels
        sel_pts = np.all(np.abs(pts_all) <= Ri + 1e-12, axis=1)
        sel_l = [j for j, lam in enumerate(lams) if sum(lam) <= Mi]
        logs.append(_real_norm_log(pts_all[sel_pts], [lams[j] for j in sel_l], tab[np.ix_(sel_pts, sel_l)], params, Mi, role_swap))
        truncs.append({"M": Mi, "R": Ri})
    return _trend_report(logs, truncs)


def _cone_log_objective(f, U, params, P, Q, delta=None):
    a = 1.0 / (1.0 - params.alpha)
    if delta is None:
        delta = distance_to_cone(params.A * P, U) if U is not None else np.zeros(P.shape[0])
    pn = np.abs(P).max(axis=1)
    qn = np.abs(Q).max(axis=1)
    return (
        f.log_abs(P + 1j * Q)
        + (pn / params.B) ** (1.0 / params.beta)
        - (params.A * qn) ** a
        - np.asarray(delta) ** a
    )


def cone_norm(f, U, params, R=20.0, *, radii=None, n_grid=17, q_radius=None, refine=True, seed=0):
    """Truncated sup over w = p + iq of |f(w)| exp(|p/B|^(1/b) - |Aq|^(1/(1-a)) - d_U(Ap)^(1/(1-a))).

    The sup is taken on a uniform grid of the box |p|, |q| <= R_i for each
    radius R_i of the nested sequence ``radii`` (default R/4, R/2, R), then
    refined by bounded quasi-Newton steps from the best grid points.
    """
    if params.alpha >= 1:
        raise InvalidInputError("cone norms need alpha < 1")
    k = f.dim
    radii = list(radii) if radii is not None else [R / 4, R / 2, R]
    logs, truncs, prev = [], [], -math.inf
    rng = np.random.default_rng(seed)
    for Ri in radii:
        Rq = Ri if q_radius is None else min(Ri, q_radius)
        p_axis = np.linspace(-Ri, Ri, n_grid)
        q_axis = np.linspace(-Rq, Rq, n_grid)
        P = np.stack([m.ravel() for m in np.meshgrid(*([p_axis] * k), indexing="ij")], axis=1)
        Qg = np.stack([m.ravel() for m in np.meshgrid(*([q_axis] * k), indexing="ij")], axis=1)
        dP = distance_to_cone(params.A * P, U) if U is not None else np.zeros(P.shape[0])
        best = -math.inf
        best_pts = []
        for j in range(Qg.shape[0]):
            Q = np.broadcast_to(Qg[j], P.shape)
            vals = _cone_log_objective(f, U, params, P, Q, dP)
            vals = np.where(np.isnan(vals), -np.inf, vals)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best = float(vals[i])
            best_pts.append((float(vals[i]), np.concatenate([P[i], Qg[j]])))
        if refine and np.isfinite(best):
            best_pts.sort(key=lambda t: -t[0])
            starts = [x for _, x in best_pts[:3]] + [np.zeros(2 * k) + 1e-3 * rng.standard_normal(2 * k)]
            bounds = [(-Ri, Ri)] * k + [(-Rq, Rq)] * k

            def neg(z):
                v = _cone_log_objective(f, U, params, z[None, :k], z[None, k:])[0]
                return -v if np.isfinite(v) else 1e300

            for z0 in starts:
                res = optimize.minimize(neg, z0, method="L-BFGS-B", bounds=bounds)
                if np.isfinite(res.fun) and -res.fun > best:
                    best = float(-res.fun)
        prev = max(prev, best)
        logs.append(prev)
        truncs.append({"M": None, "R": Ri})
    if all(v == -math.inf for v in logs):
        return NormReport(0.0, -math.inf, truncs[-1], logs, False)
    return _trend_report(logs, truncs)


# --------------------------------------------------------------------------
# the cone-carried example with a non-strong product carrier


def example1_integrand(p):
    p = np.atleast_2d(p)
    return np.exp(-p[:, 0] ** 2 - p[:, 1] ** 3)


def example1_divergence(R, *, epsrel=1e-10):
    """Integral of exp(-p1^2 - p2^3) over {|p| <= R, p2 >= -|p1|^(2/3)}.

    The integrand equals 1 on the curved boundary p2 = -|p1|^(2/3).  The
    truncated integral increases with R; near the boundary the inner
    integral behaves like 1 / (3 |p1|^(4/3)), so the increments decay like
    R^(-1/3).
    """
    if R <= 0:
        raise InvalidInputError("R must be positive")

    def inner(p1):
        a = max(-R, -abs(p1) ** (2.0 / 3.0))
        span = R - a
        g = lambda t: math.exp(-p1 * p1 - (a + t) ** 3)
        brk = [min(span, 1.0 / max(1.0, 3 * a * a))]
        val, _ = integrate.quad(g, 0.0, span, epsabs=0.0, epsrel=epsrel, limit=400, points=brk)
        return val

    half, _ = integrate.quad(inner, 0.0, R, epsabs=0.0, epsrel=epsrel, limit=400)
    return 2.0 * half


# --------------------------------------------------------------------------
# mollifier decomposition


class _OrthantMollifier(Evaluator):
    """int over a coordinate cone of the standard Gaussian g0(w - eta) d eta."""

    def __init__(self, kinds, k):
        self.kinds = list(kinds)
        self.dim = k

    def analytic(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        out = np.ones(W.shape[0], dtype=complex)
        for a, kd in enumerate(self.kinds):
            z = W[:, a] / math.sqrt(2)
            if kd == 1:  # eta_a >= 0
                out = out * 0.5 * special.erfc(-z)
            elif kd == -1:  # eta_a <= 0
                out = out * 0.5 * special.erfc(z)
            elif kd == 2:
                raise UnsupportedRepresentationError("lower-dimensional mollifier domain")
        return out


class _SectorMollifier(Evaluator):
    """int over a planar cone (< pi) of g0(w - eta) d eta, by reduction to a
    one-dimensional integral of complex error functions."""

    def __init__(self, a, b, n=160):
        self.dim = 2
        self.a, self.b = np.asarray(a, float), np.asarray(b, float)
        self.jac = abs(self.a[0] * self.b[1] - self.a[1] * self.b[0])
        t = np.linspace(-4.0, 4.5, n)
        hp = math.pi / 2
        self.s = np.exp(hp * np.sinh(t))
        self.ws = (t[1] - t[0]) * hp * np.cosh(t) * self.s

    def analytic(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        bb = float(self.b @ self.b)
        out = np.zeros(W.shape[0], dtype=complex)
        for s, w in zip(self.s, self.ws):
            v = W - s * self.a[None, :]
            vb = v @ self.b
            vv = np.sum(v * v, axis=1)
            # int_0^inf exp(-|v - t b|^2 / 2) dt in closed form
            c = vb / bb
            rest = vv - vb * vb / bb
            inner = np.sqrt(math.pi / (2 * bb)) * special.erfc(-c * math.sqrt(bb / 2)) * np.exp(-rest / 2)
            out += w * inner
        return out * self.jac / (2 * math.pi)


class _SumEvaluator(Evaluator):
    def __init__(self, parts, k):
        self.parts = list(parts)
        self.dim = k

    def analytic(self, W):
        return sum(p.analytic(W) for p in self.parts)


def _split_planar(angle_lo, angle_hi, max_span=np.radians(170)):
    span = angle_hi - angle_lo
    n = max(1, int(math.ceil(span / max_span)))
    edges = np.linspace(angle_lo, angle_hi, n + 1)
    return [(edges[i], edges[i + 1]) for i in range(n)]


def _ray_angles(cone):
    G = cone.generators
    ang = np.sort(np.mod(np.arctan2(G[:, 1], G[:, 0]), 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    j = int(np.argmax(gaps))
    lo = ang[(j + 1) % len(ang)]
    hi = ang[j] + (2 * np.pi if j + 1 < len(ang) else 0.0)
    if hi < lo:
        hi += 2 * np.pi
    return lo, hi


@dataclass
class Decomposition:
    f1: Evaluator
    f2: Evaluator
    g1: Evaluator
    g2: Evaluator
    certificate: dict


def _mollifier_for(region, k):
    """Evaluator of int_region g0(w - eta) d eta for a region given as
    ("box", kinds) or ("angles", lo, hi)."""
    if region[0] == "box":
        return _OrthantMollifier(region[1], k)
    lo, hi = region[1], region[2]
    parts = []
    for a0, a1 in _split_planar(lo, hi):
        parts.append(_SectorMollifier([math.cos(a0), math.sin(a0)], [math.cos(a1), math.sin(a1)]))
    return _SumEvaluator(parts, 2)


class _PaddedMollifier(Evaluator):
    """Mollifier acting on the first k1 of k coordinates."""

    def __init__(self, inner, k1, k):
        self.inner, self.k1, self.dim = inner, k1, k

    def analytic(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        return self.inner.analytic(W[:, : self.k1])


def measure_theta(U1, V1_test, k1, n=4000, seed=0):
    """inf of d_U1(p) over unit (sup-norm) p outside V1."""
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, k1))
    S /= np.abs(S).max(axis=1)[:, None]
    if k1 == 1:
        S = np.array([[1.0], [-1.0]])
    outside = ~V1_test(S)
    if not np.any(outside):
        return 1.0
    return float(np.min(distance_to_cone(S[outside], U1)))


def decompose(f, U, V, U1, U2, params, *, A0=None, B0=None, R=8.0, radii=None):
    """Split f = f1 + f2 with f1 decaying along U1 and f2 along U2.

    ``U``, ``U1``, ``U2`` are cones in R^{k1}; ``V`` a cone in R^{k2} (or
    None when k2 = 0); ``f`` is a function on C^{k1+k2} with finite cone
    norm over U x V at constants ``params.A``, ``params.B``.  The mollifier
    is the standard Gaussian, which belongs to the alpha = 1/2 space with
    A0 = 1/sqrt(2), B0 = sqrt(2).
    """
    if params.alpha <= 0:
        raise UnsupportedRepresentationError("the alpha = 0 decomposition is not implemented")
    k1 = U1.dim
    k = f.dim
    if U.dim != k1 or U2.dim != k1:
        raise InvalidInputError("U, U1, U2 must live in the same space")
    if V is not None and V.dim != k - k1:
        raise InvalidInputError("V has the wrong dimension")
    if not cone_algebra(U1, U2, "intersection").is_degenerate:
        raise InvalidInputError("closures of U1 and U2 must meet only at the origin")
    A0 = 1 / math.sqrt(2) if A0 is None else A0
    B0 = math.sqrt(2) if B0 is None else B0

    if k1 == 1:
        s1 = 1 if U1.contains([1.0]) else -1
        W1 = ("box", [s1])
        W2 = ("box", [-s1])
        V1_test = lambda S: (S[:, 0] * s1) > 0
        V2_test = lambda S: (S[:, 0] * s1) < 0
    elif k1 == 2:
        lo1, hi1 = _ray_angles(U1)
        lo2, hi2 = _ray_angles(U2)
        gap_a = (lo2 - hi1) % (2 * np.pi)
        gap_b = (lo1 - hi2) % (2 * np.pi)
        phi = min(gap_a, gap_b) / 3
        q_lo, q_hi = lo1 - phi, hi1 + phi
        W1 = ("angles", q_lo, q_hi)
        W2 = ("angles", q_hi, q_lo + 2 * np.pi)

        def _in_arc(S, lo, hi):
            ang = np.mod(np.arctan2(S[:, 1], S[:, 0]) - lo, 2 * np.pi)
            return ang < (hi - lo)

        V1_test = lambda S: _in_arc(S, lo1 - phi / 2, hi1 + phi / 2)
        V2_test = lambda S: _in_arc(S, lo2 - phi / 2, hi2 + phi / 2)
    else:
        raise UnsupportedRepresentationError("mollifier decomposition implemented for k1 <= 2")

    g1 = _PaddedMollifier(_mollifier_for(W2, k1), k1, k)
    g2 = _PaddedMollifier(_mollifier_for(W1, k1), k1, k)
    f1, f2 = ProductEvaluator(f, g1), ProductEvaluator(f, g2)

    theta1 = measure_theta(U1, V1_test, k1)
    theta2 = measure_theta(U2, V2_test, k1)
    A1 = 2 * (A0 + params.A) + params.A / theta1
    A2 = 2 * (A0 + params.A) + params.A / theta2

    def full_cone(Ui):
        base = cone_algebra(U, Ui, "union")
        if V is None:
            return base
        return cone_algebra(base, V, "product")

    rep1 = cone_norm(f1, full_cone(U1), params.with_constants(A=A1), R, radii=radii)
    rep2 = cone_norm(f2, full_cone(U2), params.with_constants(A=A2), R, radii=radii)
    cert = {
        "theta1": theta1,
        "theta2": theta2,
        "A0": A0,
        "B0": B0,
        "A1": A1,
        "A2": A2,
        "f1_norm": rep1,
        "f2_norm": rep2,
    }
    return Decomposition(f1, f2, g1, g2, cert)


# --------------------------------------------------------------------------
# the unbounded sequence of the hyperfunction example


def hyperfunction_example(n, epsilon=0.25, A=3.0, B=2.0, lam=1.0, *, R=60.0, n_grid=121):
    """Truncated strip norm of g_n(p) = p2^n exp(-p1) and its sup on a ray.

    The strip domain is the complex 1/A-neighbourhood of
    (-eps, inf) x (-eps, eps); the norm is sup |g_n(w)| exp(|Re w| / B).
    The ray value sup_{t >= 0} |g_n(t, lam t)| = lam^n n^n e^-n is returned
    in closed form (with 0^0 = 1).
    """
    if not (epsilon < 0.5 and lam > 0 and n >= 0):
        raise InvalidInputError("need epsilon < 1/2, lambda > 0, n >= 0")
    r = 1.0 / A
    p1 = np.concatenate([np.linspace(-epsilon - r, 5.0, n_grid), np.linspace(5.0, R, n_grid)])
    t = np.linspace(-epsilon, epsilon, 41)
    rho = np.linspace(0.0, r, 21)
    phi = np.linspace(0.0, 2 * np.pi, 73)
    T, Rh, Ph = np.meshgrid(t, rho, phi, indexing="ij")
    w2 = (T + Rh * np.exp(1j * Ph)).ravel()
    logw2 = np.log(np.maximum(np.abs(w2), 1e-300))
    p2 = np.abs(w2.real)
    # log |g_n| + |p| / B, maximized over the product grid
    best = -np.inf
    for x in p1:
        val = n * logw2 - x + np.maximum(abs(x), p2) / B
        best = max(best, float(val.max()))
    strip = math.exp(best)
    ray = (lam * n) ** n * math.exp(-n) if n > 0 else 1.0
    return strip, ray


def hyperfunction_ray_sup(n, lam=1.0, t_max=None):
    """Numerical sup over t >= 0 of |g_n(t, lam t)| = (lam t)^n e^-t."""
    if n == 0:
        return 1.0
    t_max = 4.0 * n + 10 if t_max is None else t_max
    res = optimize.minimize_scalar(
        lambda t: -(n * math.log(lam * t) - t), bounds=(1e-12, t_max), method="bounded", options={"xatol": 1e-12}
    )
    return math.exp(-res.fun)


# --------------------------------------------------------------------------
# Sigma-space flat functions


def flat_seminorm(f, params, M=12, *, x_grid=None, nodes=128):
    """sup over x in O and |lam| <= M of |d^lam f(x)| / (B^|lam| |lam|^(beta |lam|)).

    Only the derivative part of the norm is used (no moment weights), which
    is what the Taylor estimate at the boundary consumes.  Contours are
    circles of radius half the distance to the boundary of O.
    """
    if f.flat is None:
        raise InvalidInputError("f must carry a flat factor")
    if x_grid is None:
        x_grid = -np.geomspace(0.01, 1e3, 400)[:, None]
    X = np.asarray(x_grid, dtype=float)
    dist = f.flat.boundary_distance(X)
    lams = _multi_indices(f.dim, M)
    tot = np.array([sum(l) for l in lams])
    best = -np.inf
    for x, dx in zip(X, dist):
        rad = lambda m, a, dx=dx: 0.5 * dx
        D = contour_derivatives(f, x, M, nodes=nodes, radius=rad, check=False)
        with np.errstate(divide="ignore"):
            vals = np.log(np.abs(np.array([D[l] for l in lams]))) - tot * math.log(params.B) - _log_pow(tot, params.beta)
        best = max(best, float(np.max(vals)))
    return math.exp(best)


def taylor_exponent(params, k):
    """A' = (beta-1)/(2e) (B k e)^(-1/(beta-1))."""
    b = params.beta
    if b <= 1:
        raise InvalidInputError("need beta > 1")
    return (b - 1) / (2 * math.e) * (params.B * k * math.e) ** (-1.0 / (b - 1))


@dataclass
class TaylorBound:
    lhs: float
    rhs: float
    ok: bool
    C: float
    seminorm: float
    A_prime: float


def fit_taylor_constant(f, params, seminorm, calib=(-2.0, -0.05), n=200, far=(-1e3, -10.0)):
    """Smallest C with |f(x)| <= C |||f||| exp(-A' d(x)^(-1/(beta-1))) on the
    calibration grid, also covering the far-field limit where the bound
    reduces to |f| <= C |||f|||."""
    Ap = taylor_exponent(params, f.dim)
    e = -1.0 / (params.beta - 1)
    xs = np.linspace(calib[0], calib[1], n)
    xf = np.linspace(far[0], far[1], 50)

    def ratio(xs):
        X = np.zeros((xs.size, f.dim))
        X[:, list(f.flat.axes)] = xs[:, None]
        d = f.flat.boundary_distance(X)
        with np.errstate(divide="ignore"):
            lv = np.log(np.abs(f(X))) + Ap * d**e
        return float(np.exp(lv.max())) / seminorm

    return max(ratio(xs), ratio(xf))


def taylor_flat_bound(f, params, x, *, C=None, seminorm=None):
    """Compare |f(x)| with C |||f||| exp(-A' d(x)^(-1/(beta-1)))."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if f.flat is None or not f.flat.support(X)[0]:
        raise InvalidInputError("x must lie in the open set O")
    if seminorm is None:
        seminorm = flat_seminorm(f, params)
    if C is None:
        C = fit_taylor_constant(f, params, seminorm)
    Ap = taylor_exponent(params, f.dim)
    d = float(f.flat.boundary_distance(X)[0])
    lhs = float(abs(f(X)[0]))
    rhs = C * seminorm * math.exp(-Ap * d ** (-1.0 / (params.beta - 1)))
    return TaylorBound(lhs, rhs, lhs <= rhs, C, seminorm, Ap)


def inf_power_check(alpha, xi, m_max=200):
    """(log inf_m xi^-m m^(alpha m), log of exp(-(alpha/e) xi^(1/alpha) + alpha e / 2))."""
    m = np.arange(0, m_max + 1, dtype=float)
    lhs = float(np.min(-m * math.log(xi) + _log_pow(m, alpha)))
    rhs = -(alpha / math.e) * xi ** (1.0 / alpha) + alpha * math.e / 2
    return lhs, rhs


def flatness_profile(f, axis_points, M=6, nodes=64):
    """max_{|lam| <= M} |d^lam f(x)| at points approaching the boundary."""
    out = []
    for x in np.atleast_2d(axis_points):
        d = float(f.flat.boundary_distance(x[None, :])[0])
        D = contour_derivatives(f, x, M, nodes=nodes, radius=lambda m, a: 0.5 * d, check=False)
        out.append(float(np.max(np.abs(D))))
    return np.array(out)
