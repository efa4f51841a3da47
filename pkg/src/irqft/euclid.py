"""Euclidean side: Schwinger functions at imaginary times, their growth
bounds, chronological ordering by rotations, and the identities linking
Euclidean test functions with momentum-space functionals."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import kernels, quadrature
from . import wick_engine as we
from .cone_geometry import Cone, PairingForm
from .errors import DimensionError, InvalidInputError, NumericalFailure, TubeViolation
from .laplace import Density, Functional, PointMass, _adaptive, _tensor_grid, check_transform, laplace_values


@dataclass
class EuclidConfig:
    d: int
    n: int
    model: we.TwoPointModel
    coeffs: we.CoefficientSequence
    alpha: float = 0.5
    beta: float = 2.0

    def __post_init__(self):
        if self.d < 2 or self.n < 2:
            raise InvalidInputError("need d >= 2 and n >= 2")
        if not self.beta > 1:
            raise InvalidInputError("beta must exceed 1")
        if not 0 <= self.alpha < 1:
            raise InvalidInputError("alpha must lie in [0, 1)")
        if self.model.d != self.d:
            raise DimensionError("model dimension differs from d")


def iota(x, d=None):
    """Multiply every time component by i.  ``x`` is a flat vector of n
    d-dimensional points or an array whose last axis has length d."""
    x = np.asarray(x)
    z = x.astype(complex)
    if d is None:
        z[..., 0] *= 1j
    else:
        if x.shape[-1] % d:
            raise DimensionError("length is not a multiple of d")
        z[..., ::d] *= 1j
    return z


def _points(x, d):
    x = np.asarray(x, float)
    if x.ndim == 1:
        if x.size % d:
            raise DimensionError("length is not a multiple of d")
        x = x.reshape(-1, d)
    if x.shape[1] != d:
        raise DimensionError("points must have d components")
    return x


def _check_distinct(x, tol=0.0):
    n = x.shape[0]
    for j, k in itertools.combinations(range(n), 2):
        if np.linalg.norm(x[j] - x[k]) <= tol:
            raise InvalidInputError(f"points {j + 1} and {k + 1} coincide")


def difference_variables(x):
    """xi_j = x_j - x_(j+1)."""
    return x[:-1] - x[1:]


def schwinger_eval(config, x, N=20, *, require_tube=True):
    """s_n(x) = W_(n-1)(iota xi) through the truncated Wick sum.

    With ``require_tube`` (the default) every xi_j must have negative time
    component so that iota xi lies in the past tube, and the tail bound is
    returned.  Otherwise the series is evaluated at the Euclidean points
    directly, where the shipped models depend only on Euclidean distances,
    and no tail bound is attached.
    """
    x = _points(x, config.d)
    if x.shape[0] != config.n:
        raise DimensionError(f"expected {config.n} points")
    _check_distinct(x)
    xi = difference_variables(x)
    zeta = iota(xi)
    if require_tube:
        if np.any(xi[:, 0] >= 0):
            raise TubeViolation("difference variables need negative time components")
        return we.wightman_eval(config.n, zeta, config.model, config.coeffs, N)
    w = config.model(we.pair_arguments(zeta))
    arr, D = we._D_table(config.n, N, config.coeffs)
    value = complex(np.sum(D * np.prod(w[None, :] ** arr, axis=1)))
    return we.WightmanValue(value, math.nan, N, len(D))


# --------------------------------------------------------------------------
# chronological ordering


def _best_for_order(deltas):
    """max_{|e| <= 1} min_j e . delta_j for the consecutive differences of a
    fixed ordering, via the dual problem min |e| s.t. delta_j . e >= 1
    solved over all active sets.  Returns (value, e) or (0, None)."""
    m = deltas.shape[0]
    best, best_e = 0.0, None
    for r in range(1, m + 1):
        for S in itertools.combinations(range(m), r):
            D = deltas[list(S)]
            Gm = D @ D.T
            if abs(np.linalg.det(Gm)) < 1e-13 * max(1.0, np.abs(Gm).max()) ** r:
                continue
            lam = np.linalg.solve(Gm, np.ones(r))
            if np.any(lam < -1e-12):
                continue
            e = D.T @ lam
            if np.all(deltas @ e >= 1 - 1e-10):
                val = 1.0 / np.linalg.norm(e)
                if val > best:
                    best, best_e = val, e / np.linalg.norm(e)
    return best, best_e


def _sphere_grid(d, resolution):
    if d == 2:
        th = np.arange(0, np.pi, resolution)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if d == 3:
        th = np.arange(0, np.pi / 2 + resolution, resolution)
        ph = np.arange(0, 2 * np.pi, resolution)
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.stack([np.cos(T), np.sin(T) * np.cos(P), np.sin(T) * np.sin(P)], axis=-1).reshape(-1, 3)
    rng = np.random.default_rng(0)
    g = rng.standard_normal((20000, d))
    return g / np.linalg.norm(g, axis=1)[:, None]


def rotation_with_time_axis(e):
    """A rotation T (det +1) whose first row is the unit vector e."""
    e = np.asarray(e, float) / np.linalg.norm(e)
    d = e.size
    M = np.eye(d)
    M[:, 0] = e
    Q, _ = np.linalg.qr(M)
    if Q[:, 0] @ e < 0:
        Q[:, 0] *= -1
    T = Q.T
    if np.linalg.det(T) < 0:
        T[-1] *= -1
    return T


@dataclass
class Ordering:
    rotation: np.ndarray
    permutation: tuple
    ratio: float
    min_gap: float


def chronological_order(x, d, *, resolution=None):
    """Rotation T and permutation pi maximizing the smallest consecutive time
    gap of the rotated, time-sorted configuration, relative to the smallest
    pairwise distance.

    Candidate time axes come from a sphere grid and the pair axes; every
    ordering seen among them is then solved exactly as a small quadratic
    program, so the result does not depend on the grid placement.
    """
    x = _points(x, d)
    n = x.shape[0]
    _check_distinct(x)
    pairs = np.array([x[k] - x[j] for j, k in itertools.combinations(range(n), 2)])
    dmin = float(np.linalg.norm(pairs, axis=1).min())
    if resolution is None:
        resolution = 1e-3 if d == 2 else 2e-2
    dirs = np.concatenate([_sphere_grid(d, resolution), pairs / np.linalg.norm(pairs, axis=1)[:, None]])
    scores = kernels.min_projection(dirs, pairs)
    orders = set()
    for e in dirs[np.argsort(-scores)[: max(64, len(dirs) // 50)]]:
        perm = tuple(np.argsort(x @ e, kind="stable"))
        orders.add(min(perm, perm[::-1]))
    best = (0.0, None, None)
    for perm in sorted(orders):
        deltas = np.diff(x[list(perm)], axis=0)
        val, e = _best_for_order(deltas)
        if val > best[0]:
            best = (val, e, perm)
    val, e, perm = best
    if e is None:
        raise NumericalFailure("no admissible time axis found")
    T = rotation_with_time_axis(e)
    perm = tuple(int(p) for p in np.argsort((x @ T.T)[:, 0], kind="stable"))
    return Ordering(T, perm, val / dmin, val)


def angle_search_ratio(x, resolution=1e-3):
    """Exhaustive d = 2 angle scan of max_e min_pairs |e . delta| / dmin."""
    x = _points(x, 2)
    pairs = np.array([x[k] - x[j] for j, k in itertools.combinations(range(x.shape[0]), 2)])
    th = np.arange(0, np.pi, resolution)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    return float(kernels.min_projection(dirs, pairs).max() / np.linalg.norm(pairs, axis=1).min())


def chronological_floor(n):
    """A proven lower bound on the ratio: each pair forbids an arc of
    directions of width at most 2 arcsin(t), so t = sin(pi / (n (n-1)))
    always admits a direction, and sin(y) >= 2y/pi."""
    return 2.0 / (n * (n - 1))


def calibration_corpus(size=1000, seed=0, n_range=(2, 4), d_range=(2, 3)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(size):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        kind = rng.integers(3)
        if kind == 0:
            x = rng.standard_normal((n, d))
        elif kind == 1:
            x = rng.uniform(-1, 1, (n, d)) * rng.uniform(0.01, 10, d)
        else:  # nearly collinear or clustered configurations
            t = np.sort(rng.uniform(0, 1, n))
            v = rng.standard_normal(d)
            x = t[:, None] * v[None, :] + 1e-2 * rng.standard_normal((n, d))
        out.append(x)
    return out


def calibrate_chronological(corpus):
    """c_n = smallest exact optimum over the corpus, per n."""
    c = {}
    for x in corpus:
        n, d = x.shape
        r = chronological_order(x, d).ratio
        c[n] = min(c.get(n, math.inf), r)
    return c


# --------------------------------------------------------------------------
# growth bounds


@dataclass
class BoundFit:
    epsilon: float
    C: float
    grid: dict
    residual: float
    rows: list = field(default_factory=list)

    def to_json(self):
        return {"epsilon": self.epsilon, "C": self.C, "residual": self.residual, "grid": self.grid}


def schwinger_grid(n_time=100, n_space=100, radius=10.0, t_min=0.1):
    """Points xi = (xi^0, xi^1) with xi^0 in -[t_min, radius] (geometric) and
    |xi| <= radius."""
    t = -np.geomspace(t_min, radius, n_time)
    s = np.linspace(-radius, radius, n_space)
    T, S = np.meshgrid(t, s, indexing="ij")
    G = np.stack([T.ravel(), S.ravel()], axis=1)
    return G[np.linalg.norm(G, axis=1) <= radius]


def bound_fit_S(config, grid, epsilon, *, N=20, form="difference"):
    """Minimal C with |S(xi)| <= C exp(eps |xi|^(1/alpha) + eps m^(-1/(beta-1)))
    over the grid, where m = min_j |xi_j^0| (``form="difference"``) or the
    smallest pairwise distance of points x (``form="points"``).

    For the difference form each grid row holds the n-1 difference vectors;
    |S| is taken as |truncated value| + tail bound.
    """
    grid = np.atleast_2d(np.asarray(grid, float))
    d, n = config.d, config.n
    a, b = config.alpha, config.beta
    logs_S, logs_w = [], []
    for row in grid:
        if form == "difference":
            xi = row.reshape(n - 1, d)
            if np.any(xi[:, 0] >= 0):
                raise TubeViolation("grid must lie in the negative-time region")
            v = we.wightman_eval(n, iota(xi), config.model, config.coeffs, N)
            mag = abs(v.value) + v.tail
            m = np.abs(xi[:, 0]).min()
        elif form == "points":
            x = row.reshape(n, d)
            v = schwinger_eval(config, x, N, require_tube=False)
            mag = abs(v.value)
            m = min(np.linalg.norm(x[j] - x[k]) for j, k in itertools.combinations(range(n), 2))
        else:
            raise InvalidInputError("form must be 'difference' or 'points'")
        if not np.isfinite(mag):
            raise NumericalFailure("Schwinger value overflowed; the series does not match the bound")
        size = np.linalg.norm(row)
        lw = epsilon * size ** (1.0 / a) + epsilon * m ** (-1.0 / (b - 1)) if a > 0 else epsilon * m ** (-1.0 / (b - 1))
        logs_S.append(math.log(mag) if mag > 0 else -math.inf)
        logs_w.append(lw)
    logs_S, logs_w = np.array(logs_S), np.array(logs_w)
    logC = float(np.max(logs_S - logs_w)) + 1e-12
    residual = float(np.max(np.exp(logs_S) - np.exp(logC + logs_w)))
    rows = [
        {"point": list(map(float, r)), "S": float(np.exp(s)), "bound": float(np.exp(logC + w)), "margin": float(np.exp(logC + w) - np.exp(s))}
        for r, s, w in zip(grid, logs_S, logs_w)
    ]
    info = {"points": int(grid.shape[0]), "radius": float(np.abs(grid).max()), "form": form, "N": N}
    return BoundFit(float(epsilon), math.exp(logC), info, residual, rows)


def two_point_direct_check(model, grid):
    """max over the grid of |w(iota xi)| / (C (1 + w_IR(2|iota xi|) + w_UV(|xi^0|)))."""
    Z = iota(np.atleast_2d(np.asarray(grid, float)))
    if model.C is None:
        model.certify()
    return float(np.max(np.abs(model(Z)) / (model.C * model.bound_rhs(Z))))


# --------------------------------------------------------------------------
# Euclidean test functions


class SigmaFunction:
    """A test function on R^(dn) given by a sympy expression in variables
    t1, x1, ..., (time then space per point), set to zero wherever some time
    component is >= 0.  Value and gradient are vectorized over rows."""

    def __init__(self, expr, d=2, n=1, label=""):
        self.d, self.n = d, n
        names = []
        for j in range(1, n + 1):
            names.append(f"t{j}" if n > 1 else "t")
            names += [f"x{a}" + (str(j) if n > 1 else "") for a in range(1, d)]
        self.symbols = sp.symbols(names, real=True)
        self.expr = sp.sympify(expr, locals=dict(zip(names, self.symbols))) if isinstance(expr, str) else expr
        self._f = sp.lambdify(self.symbols, self.expr, "numpy")
        self._grad = [sp.lambdify(self.symbols, sp.diff(self.expr, s), "numpy") for s in self.symbols]
        self.label = label or str(expr)

    @property
    def dim(self):
        return self.d * self.n

    def _mask(self, X):
        return np.all(X[:, :: self.d] < 0, axis=1)

    def _eval(self, fn, X):
        X = np.atleast_2d(np.asarray(X, float))
        out = np.zeros(X.shape[0])
        m = self._mask(X)
        if np.any(m):
            with np.errstate(over="ignore", under="ignore", invalid="ignore"):
                v = np.broadcast_to(fn(*X[m].T), (int(m.sum()),))
            out[m] = np.nan_to_num(v, nan=0.0, posinf=0.0, neginf=0.0)
        return out

    def __call__(self, X):
        return self._eval(self._f, X)

    def gradient(self, X):
        return np.stack([self._eval(g, X) for g in self._grad], axis=1)

    def rotation_generator(self, l, j=0):
        """(Y_0l f) = xi^0 d_l f - xi^l d_0 f for point j, as a new function."""
        t = self.symbols[j * self.d]
        s = self.symbols[j * self.d + l]
        e = t * sp.diff(self.expr, s) - s * sp.diff(self.expr, t)
        return SigmaFunction(e, self.d, self.n, f"Y0{l}[{self.label}]")


SIGMA_FAMILY = (
    "exp(1/t - t**2 - x1**2)",
    "exp(1/t - (t + 1)**2 - (x1 - 1/2)**2)",
    "(1 + x1)*exp(1/t - t**2 - 2*x1**2)",
)


def sigma_family(d=2):
    if d != 2:
        raise InvalidInputError("the shipped family lives in d = 2, n = 1")
    return [SigmaFunction(e, 2, 1) for e in SIGMA_FAMILY]


def past_tube_cone(d, n_facets=64):
    return Cone.light_cone(d, future=False, n_facets=n_facets, open=True)


def gaussian_density(d=2, weight=1.0):
    carrier = Cone.light_cone(d, future=True, n_facets=2 if d == 2 else 64)
    return Functional(d, (Density(lambda P: np.exp(-np.sum(P**2, axis=1)), carrier, weight, "exp(-|p|^2)"),))


@dataclass
class ReconstructionResult:
    lhs: complex
    rhs: complex

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)


def reconstruction_lhs(u, f, *, rtol=1e-10, h0=0.5, max_level=6, atol=1e-14):
    """(2 pi)^(-dn) int_{R^dn_-} (L u)(iota xi) f(xi) dxi, with L taken in the
    pairing <p, x> = -p.x (Lorentz product)."""
    d, n = f.d, f.n
    k = d * n
    form = PairingForm.minus_lorentz(d, n)
    V = past_tube_cone(d) if n == 1 else None
    time = np.zeros(k, dtype=bool)
    time[::d] = True
    spatial = quadrature.uniform(quadrature.decay_radius(f, k))
    rules = [quadrature.NEG_TIME if t else spatial for t in time]
    norm = (2 * math.pi) ** (-k)

    def evaluate(h):
        _, X, g = _tensor_grid(rules, h, f)
        g = g.ravel()
        live = g != 0
        L = laplace_values(u, iota(X[live], d), form, V, rtol=rtol * 0.1)
        return np.array([norm * np.sum(g[live] * L)])

    return complex(_adaptive(evaluate, h0, max_level, rtol, atol, "reconstruction integral")[0])


def reconstruction_rhs(u, f, *, rtol=1e-10):
    """u applied to the check transform of f."""
    return complex(u.apply(lambda P: check_transform(f, P, f.d, f.n, rtol=rtol * 0.1), rtol=rtol))


def reconstruction_check(u, f, *, rtol=1e-10):
    for a in u.atoms:
        if isinstance(a, PointMass):
            p = np.asarray(a.p).reshape(-1, f.d)
            if np.any(p[:, 0] <= np.linalg.norm(p[:, 1:], axis=1)):
                raise InvalidInputError(f"point mass at {a.p} is not strictly inside the forward cone")
    if not u.atoms:
        return ReconstructionResult(0j, 0j)
    return ReconstructionResult(reconstruction_lhs(u, f, rtol=rtol), reconstruction_rhs(u, f, rtol=rtol))


# --------------------------------------------------------------------------
# boosts versus rotations


def probe_grid(n0=5, n1=5, p0=(0.5, 2.5), p1=(-1.0, 1.0)):
    a, b = np.meshgrid(np.linspace(*p0, n0), np.linspace(*p1, n1), indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1)


def boost_derivative(F, P, l, step=1e-4):
    """(p^0 d_l + p^l d_0) F at P by central differences with one Richardson
    level; F maps an array of momenta to values."""
    P = np.atleast_2d(np.asarray(P, float))
    m, k = P.shape
    shifts = []
    for hh in (step, step / 2):
        for axis in (0, l):
            e = np.zeros(k)
            e[axis] = hh
            shifts += [P + e, P - e]
    vals = F(np.concatenate(shifts)).reshape(len(shifts), m)

    def deriv(i, hh):
        return (vals[2 * i] - vals[2 * i + 1]) / (2 * hh)

    d0 = (4 * deriv(2, step / 2) - deriv(0, step)) / 3
    dl = (4 * deriv(3, step / 2) - deriv(1, step)) / 3
    return P[:, 0] * dl + P[:, l] * d0


def boost_intertwine_check(f, l=1, probes=None, *, step=1e-4, rtol=1e-12):
    """Compare check(Y_0l f) with -i X_0l check(f).

    Y_0l = xi^0 d_l - xi^l d_0 is the Euclidean rotation generator and
    X_0l = p^0 d_l + p^l d_0 the boost generator.  Returns (relative
    residual, lhs, rhs) with the residual scaled by max |lhs| (absolute when
    both sides vanish).
    """
    if f.d < 2 or not 1 <= l < f.d:
        raise InvalidInputError("need d >= 2 and a spatial index l")
    P = probe_grid() if probes is None else np.atleast_2d(np.asarray(probes, float))
    if np.any(P[:, 0] <= 0):
        raise InvalidInputError("probes need positive time components")
    lhs = check_transform(f.rotation_generator(l), P, f.d, f.n, rtol=rtol)
    rhs = -1j * boost_derivative(lambda Q: check_transform(f, Q, f.d, f.n, rtol=rtol), P, l, step)
    diff = np.max(np.abs(lhs - rhs))
    scale = np.max(np.abs(lhs))
    return (float(diff / scale) if scale > 1e-300 else float(diff)), lhs, rhs
