"""Laplace transforms of cone-carried functionals and related transforms.

A functional is a finite sum of atoms: point masses, first-derivative point
masses and densities on a polyhedral carrier cone.  All transforms pair a
momentum variable p with a position variable through a
:class:`~irqft.cone_geometry.PairingForm`, <p, z> = p^T M z.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, quadrature
from .cone_geometry import Cone, PairingForm
from .errors import (
    DimensionError,
    InvalidInputError,
    NumericalFailure,
    TubeViolation,
    UnsupportedRepresentationError,
)

# --------------------------------------------------------------------------
# functionals

DENSITY_CUTOFF = 1e-20


@dataclass(frozen=True)
class PointMass:
    """phi -> weight * phi(p)."""

    p: tuple
    weight: complex = 1.0
    carrier: Cone = None


@dataclass(frozen=True)
class DerivativePointMass:
    """phi -> weight * (d/de phi)(p), the derivative along ``direction``."""

    p: tuple
    direction: tuple
    weight: complex = 1.0
    carrier: Cone = None


@dataclass(frozen=True)
class Density:
    """phi -> weight * int_carrier rho(p) phi(p) dp; ``rho`` is vectorized over rows."""

    rho: object
    carrier: Cone
    weight: complex = 1.0
    label: str = ""


def carrier_rules(cone):
    """Quadrature rules and the linear parametrization of a carrier cone.

    Returns ``(rules, G, jac)``: nodes s of the tensor rule map to p = s @ G
    with constant Jacobian ``jac``.  Coordinate-aligned cones use one rule
    per axis; full-dimensional simplicial cones are mapped from the orthant.
    """
    kinds = cone.box_kinds()
    if kinds is not None and 2 not in kinds:
        rules = [quadrature.LINE if kd == 0 else quadrature.SOFTPLUS for kd in kinds]
        G = np.diag([-1.0 if kd == -1 else 1.0 for kd in kinds])
        return rules, G, 1.0
    G = np.asarray(cone.generators, float)
    if G.shape[0] == cone.dim and abs(np.linalg.det(G)) > 1e-12:
        return [quadrature.SOFTPLUS] * cone.dim, G, abs(float(np.linalg.det(G)))
    raise UnsupportedRepresentationError("density carriers must be box-type or simplicial full-dimensional cones")


def _tensor_grid(rules, h, weight_fn, to_x=None):
    """Axes, node matrix and weight tensor (with underflowing weights zeroed)."""
    xs, ws = zip(*(r.nodes(h) for r in rules))
    S, W = quadrature.tensor_nodes(rules, h)
    X = S if to_x is None else to_x(S)
    g = W * np.asarray(weight_fn(X), dtype=complex)
    mag = np.abs(g)
    g[mag <= DENSITY_CUTOFF * mag.max()] = 0.0
    return list(xs), X, g.reshape([len(x) for x in xs])


def _density_grid(atom, h):
    rules, G, jac = carrier_rules(atom.carrier)
    axes, P, g = _tensor_grid(rules, h, lambda P: jac * np.asarray(atom.rho(P)), lambda S: S @ G)
    return axes, P, g, G


def _adaptive(evaluate, h0, max_level, rtol, atol, what, min_level=1):
    prev, h, err = None, h0, np.inf
    for level in range(max_level + 1):
        vals = evaluate(h)
        if prev is not None and level >= min_level:
            err = np.max(np.abs(vals - prev))
            if err <= max(atol, rtol * np.max(np.abs(vals))):
                return vals
        prev, h = vals, h / 2
    raise NumericalFailure(f"{what} did not converge (last change {err:.3e})")


@dataclass(frozen=True)
class Functional:
    dim: int
    atoms: tuple = ()

    def __post_init__(self):
        for a in self.atoms:
            if isinstance(a, (PointMass, DerivativePointMass)):
                if len(a.p) != self.dim:
                    raise DimensionError("atom location has the wrong dimension")
                if a.carrier is not None and not a.carrier.contains(np.asarray([a.p], float))[0]:
                    raise InvalidInputError(f"point mass at {a.p} lies outside its carrier")
            elif isinstance(a, Density):
                if a.carrier.dim != self.dim:
                    raise DimensionError("density carrier has the wrong dimension")
            else:
                raise InvalidInputError(f"unknown atom {a!r}")

    @classmethod
    def zero(cls, k):
        return cls(k, ())

    @classmethod
    def delta(cls, p, carrier=None):
        p = tuple(float(v) for v in np.atleast_1d(p))
        return cls(len(p), (PointMass(p, 1.0, carrier),))

    def scaled(self, c):
        new = []
        for a in self.atoms:
            d = dict(a.__dict__)
            d["weight"] = a.weight * c
            new.append(type(a)(**d))
        return Functional(self.dim, tuple(new))

    def __add__(self, other):
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch")
        return Functional(self.dim, self.atoms + other.atoms)

    def apply(self, phi, *, grad=None, rtol=1e-11, atol=1e-14, h0=0.5, fd_step=1e-3):
        """u(phi) for a vectorized test function ``phi(P) -> values``.

        ``phi`` may return an array of shape (N, ...) to apply u to a family
        of functions at once.  Derivative atoms use ``grad(P) -> (N, k, ...)``
        when provided, otherwise a fourth-order central difference.
        """
        total = 0.0
        for a in self.atoms:
            if isinstance(a, PointMass):
                total = total + a.weight * np.asarray(phi(np.array([a.p], float)))[0]
            elif isinstance(a, DerivativePointMass):
                p = np.array(a.p, float)
                e = np.array(a.direction, float)
                if grad is not None:
                    g = np.asarray(grad(p[None, :]))[0]
                    val = np.tensordot(e, g, axes=(0, 0))
                else:
                    h = fd_step
                    pts = np.stack([p + 2 * h * e, p + h * e, p - h * e, p - 2 * h * e])
                    v = np.asarray(phi(pts))
                    val = (-v[0] + 8 * v[1] - 8 * v[2] + v[3]) / (12 * h)
                total = total + a.weight * val
            else:
                rules, G, jac = carrier_rules(a.carrier)

                def integrand(S, a=a, G=G, jac=jac):
                    P = S @ G
                    rho = np.asarray(a.rho(P)) * jac
                    # nodes where the density underflows contribute nothing;
                    # skipping them keeps phi away from irrelevant far nodes
                    live = np.abs(rho) > DENSITY_CUTOFF * np.max(np.abs(rho))
                    vals = np.asarray(phi(P[live]))
                    out = np.zeros((P.shape[0],) + vals.shape[1:], dtype=complex)
                    out[live] = rho[live].reshape((-1,) + (1,) * (vals.ndim - 1)) * vals
                    return out

                total = total + a.weight * quadrature.integrate(
                    integrand, rules, h0=h0, rtol=rtol, atol=atol, min_level=1
                )
        return total


# --------------------------------------------------------------------------
# tube points and the transform


@dataclass(frozen=True)
class TubePoint:
    x: tuple
    y: tuple
    cone: Cone

    def __post_init__(self):
        if len(self.x) != len(self.y) or len(self.y) != self.cone.dim:
            raise DimensionError("tube point and cone dimensions differ")
        check_tube(np.array([self.y], float), self.cone)

    @property
    def z(self):
        return np.asarray(self.x, float) + 1j * np.asarray(self.y, float)


def check_tube(Y, V, margin=0.0):
    """Raise :class:`TubeViolation` unless every row of Y is interior to V."""
    if V is None:
        return
    m = V.interior_margin(np.atleast_2d(Y))
    bad = np.where(~(m > margin))[0]
    if bad.size:
        raise TubeViolation(f"imaginary part {np.atleast_2d(Y)[bad[0]]} is not interior to the tube cone")


def _form(form, k):
    if form is None:
        return np.eye(k)
    if form.dim != k:
        raise DimensionError("pairing form has the wrong dimension")
    return form.matrix


def laplace_values(u, Z, form=None, V=None, *, rtol=1e-11, h0=0.5, max_level=7):
    """(L u)(z) = u(exp(i <., z>)) for each row z of the complex array Z."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != u.dim:
        raise DimensionError("tube points have the wrong dimension")
    check_tube(Z.imag, V)
    M = _form(form, u.dim)
    MZ = Z @ M.T  # <p, z> = p . (M z)
    out = np.zeros(Z.shape[0], dtype=complex)
    for a in u.atoms:
        if isinstance(a, PointMass):
            out += a.weight * np.exp(1j * (MZ @ np.array(a.p, float)))
        elif isinstance(a, DerivativePointMass):
            e = np.array(a.direction, float)
            out += a.weight * 1j * (MZ @ e) * np.exp(1j * (MZ @ np.array(a.p, float)))
        else:
            out += a.weight * _density_laplace(a, MZ, rtol=rtol, h0=h0, max_level=max_level)
    return out


def _density_laplace(atom, MZ, *, rtol, h0, max_level, atol=1e-14):
    """int rho(p) exp(i p . MZ) dp at every row of MZ, with step halving."""

    def evaluate(h):
        axes, _, g, G = _density_grid(atom, h)
        # p . MZ = s . (G MZ) for p = s G
        return quadrature.tensor_exp_sum(1j * (MZ @ G.T), axes, g)

    return _adaptive(evaluate, h0, max_level, rtol, atol, "density transform")


def density_laplace_scattered(atom, MZ, h):
    """The same sum on one fixed grid through the pointwise kernel; used as an
    independent evaluation path in cross-checks and benchmarks."""
    _, P, g, _ = _density_grid(atom, h)
    g = g.ravel()
    live = g != 0
    XY = np.concatenate([MZ.real, MZ.imag], axis=1)
    k = MZ.shape[1]
    c = np.concatenate([np.full(k, 1j), np.full(k, -1.0 + 0j)])
    return kernels.exp_sum(XY, np.concatenate([P[live], P[live]], axis=1), c, g[live])


def laplace_transform(u, z, form=None):
    """Value of the Laplace transform at a :class:`TubePoint`."""
    return complex(laplace_values(u, np.array([z.z]), form, z.cone)[0])


# --------------------------------------------------------------------------
# Fourier side and boundary values


def fourier_values(f, P, form=None, *, rtol=1e-12, h0=0.5, max_level=7, atol=1e-15):
    """f^(p) = int f(x) exp(i <p, x>) dx at each row of P (real)."""
    P = np.atleast_2d(np.asarray(P, float))
    k = P.shape[1]
    MP = P @ _form(form, k)  # <p, x> = (M^T p) . x, M symmetric
    rules = [quadrature.uniform(quadrature.decay_radius(f, k))] * k

    def evaluate(h):
        axes, _, g = _tensor_grid(rules, h, f)
        return quadrature.tensor_exp_sum(1j * MP, axes, g)

    return _adaptive(evaluate, h0, max_level, rtol, atol, "Fourier transform")


@dataclass
class BoundaryReport:
    rows: list = field(default_factory=list)
    limit: complex = 0j

    @property
    def max_gap(self):
        return max(r["gap"] for r in self.rows)

    @property
    def final_limit_gap(self):
        return self.rows[-1]["limit_gap"]

    @property
    def tail_monotone(self):
        g = [r["limit_gap"] for r in self.rows]
        return all(b <= a * (1 + 1e-9) + 1e-13 for a, b in zip(g, g[1:]))

    def to_rows(self):
        return [
            {"y": list(map(float, r["y"])), "lhs": r["lhs"], "rhs": r["rhs"], "gap": r["gap"], "limit_gap": r["limit_gap"]}
            for r in self.rows
        ]


def _separable(u, M):
    """True when every atom is a box-carried density and the form is diagonal,
    so that all transforms factorize over coordinate axes."""
    if not np.allclose(M, np.diag(np.diag(M))) or not u.atoms:
        return False
    for a in u.atoms:
        if not isinstance(a, Density):
            return False
        kinds = a.carrier.box_kinds()
        if kinds is None or 0 in kinds or 2 in kinds:
            return False
    return True


def _grid_boundary_sides(u, f, ys, M, rtol, h0):
    """Both sides of the boundary-value identity on tensor grids."""
    k = u.dim
    m = np.diag(M)
    xrule = quadrature.uniform(quadrature.decay_radius(f, k))

    def x_grid(h):
        axes, X, fx = _tensor_grid([xrule] * k, h, f)
        return axes, fx

    def lhs(y):
        def outer(hx):
            xa, fx = x_grid(hx)

            def inner(hp):
                total = 0.0
                for a in u.atoms:
                    sa, _, g, G = _density_grid(a, hp)
                    # exp(i p_b m_b z_b) with p_b = G_bb s_b
                    out_axes = [m[b] * G[b, b] * (xa[b] + 1j * y[b]) for b in range(k)]
                    total = total + a.weight * quadrature.grid_transform(out_axes, sa, g, [1j] * k)
                return total

            L = _adaptive(inner, h0, 7, rtol, 1e-15, "boundary-side transform")
            return np.atleast_1d(np.sum(L * fx))

        return complex(_adaptive(outer, h0, 7, rtol, 1e-15, "boundary integral")[0])

    def rhs_all():
        def outer(hp):
            vals = np.zeros(len(ys) + 1, dtype=complex)
            for a in u.atoms:
                sa, _, g, G = _density_grid(a, hp)
                p_axes = [G[b, b] * sa[b] for b in range(k)]

                def fourier(hx):
                    xa, fx = x_grid(hx)
                    return quadrature.grid_transform([m[b] * p_axes[b] for b in range(k)], xa, fx, [1j] * k)

                F = _adaptive(fourier, h0, 7, rtol, 1e-15, "Fourier transform")
                for j, y in enumerate(ys):
                    decay = np.ones(())
                    for b in range(k):
                        decay = np.multiply.outer(decay, np.exp(-m[b] * p_axes[b] * y[b]))
                    vals[j] += a.weight * np.sum(g * F * decay)
                vals[-1] += a.weight * np.sum(g * F)
            return vals

        return _adaptive(outer, h0, 7, rtol, 1e-15, "functional pairing")

    rhs = rhs_all()
    return [lhs(y) for y in ys], rhs[:-1], complex(rhs[-1])


def boundary_value_check(u, f, y_sequence, form=None, V=None, *, rtol=1e-11, h0=0.5, separable=None):
    """Compare int (L u)(x + iy) f(x) dx with u(exp(-<., y>) f^) and u(f^).

    Each row carries the identity gap |lhs - u(exp(-<.,y>) f^)| (zero up to
    quadrature error for every y) and the limit gap |lhs - u(f^)|, which
    tends to zero as y -> 0 inside a compact subcone.  Box-carried densities
    with a diagonal form use grid-to-grid transforms; everything else goes
    through pointwise evaluation.
    """
    k = u.dim
    M = _form(form, k)
    ys = [np.asarray(y, float).ravel() for y in y_sequence]
    for y in ys:
        check_tube(y[None, :], V)
    if separable is None:
        separable = _separable(u, M)
    if separable:
        lhs_vals, rhs_vals, limit = _grid_boundary_sides(u, f, ys, M, rtol, h0)
    else:
        lhs_vals, rhs_vals, limit = _pointwise_boundary_sides(u, f, ys, form, M, rtol, h0)
    rep = BoundaryReport(limit=limit)
    for y, lhs, rhs in zip(ys, lhs_vals, rhs_vals):
        rhs = complex(rhs)
        rep.rows.append({"y": y, "lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs), "limit_gap": abs(lhs - limit)})
    return rep


def _pointwise_boundary_sides(u, f, ys, form, M, rtol, h0):
    k = u.dim
    rules = [quadrature.uniform(quadrature.decay_radius(f, k))] * k

    def lhs_for(y):
        def evaluate(h):
            X, W = quadrature.tensor_nodes(rules, h)
            fx = np.asarray(f(X), dtype=complex)
            live = np.abs(fx) > DENSITY_CUTOFF * np.max(np.abs(fx))
            Lu = laplace_values(u, X[live] + 1j * y[None, :], form, None, rtol=rtol)
            return np.atleast_1d(np.sum(W[live] * Lu * fx[live]))

        return complex(_adaptive(evaluate, h0, 7, rtol, 1e-14, "boundary integral")[0])

    Y = np.array(ys)
    fam = lambda P: np.concatenate([np.exp(-(P @ M @ Y.T)), np.ones((P.shape[0], 1))], axis=1) * fourier_values(
        f, P, form, rtol=rtol
    )[:, None]
    rhs_all = u.apply(fam, rtol=rtol)
    return [lhs_for(y) for y in ys], rhs_all[:-1], complex(rhs_all[-1])


# --------------------------------------------------------------------------
# the norms of the analytic class


@dataclass
class ANormReport:
    value: float
    log_value: float
    trend: list
    diverges: bool
    epsilon: float
    truncation: dict


def a_norm(v, subcone, epsilon, alpha, beta, *, R=8.0, y_min=0.05, n_x=21, n_t=40, n_dir=16, levels=3, ratio=1.5, seed=0):
    """Truncated sup of |v(z)| exp(-eps |z|^(1/alpha) - eps |y|^(-1/(beta-1))) over T^{V'}.

    ``v`` maps complex rows to values.  The truncation is nested: level i
    uses |x| <= R_i and |y| in [y_i, R_i] with R_i = R 2^(i-levels) and
    y_i = y_min 4^(levels-i).  For ``alpha == 0`` the weight
    exp(-eps |y|^(-1/(beta-1))) is used on |Re z| <= R only.
    """
    if beta <= 1:
        raise InvalidInputError("need beta > 1")
    k = subcone.dim
    rng = np.random.default_rng(seed)
    dirs = subcone.sample(n_dir, rng, unit=True)
    if k == 1:
        dirs = subcone.generators / np.abs(subcone.generators).max(axis=1)[:, None]
    logs, truncs = [], []
    best_prev = -math.inf
    for i in range(1, levels + 1):
        Ri = R * 2.0 ** (i - levels)
        yi = y_min * 4.0 ** (levels - i)
        xs = np.linspace(-Ri, Ri, n_x)
        X = np.stack([m.ravel() for m in np.meshgrid(*([xs] * k), indexing="ij")], axis=1)
        ts = np.geomspace(yi, Ri, n_t)
        best = -math.inf
        for d in dirs:
            Yd = ts[:, None] * d[None, :]
            Z = (X[:, None, :] + 1j * Yd[None, :, :]).reshape(-1, k)
            with np.errstate(divide="ignore", over="ignore"):
                lv = np.log(np.abs(np.asarray(v(Z))))
            zn = np.abs(Z).max(axis=1)
            yn = np.abs(Z.imag).max(axis=1)
            w = -epsilon * yn ** (-1.0 / (beta - 1))
            if alpha > 0:
                w = w - epsilon * zn ** (1.0 / alpha)
            vals = np.where(np.isnan(lv), -np.inf, lv + w)
            best = max(best, float(np.max(vals)))
        best_prev = max(best_prev, best)
        logs.append(best_prev)
        truncs.append({"R": Ri, "y_min": yi})
    diverges = bool(levels >= 3 and np.all(np.diff(logs)[-2:] > math.log(ratio)))
    last = logs[-1]
    value = math.inf if diverges or last > 700 else math.exp(last)
    return ANormReport(value, last, logs, diverges, epsilon, truncs[-1])


# --------------------------------------------------------------------------
# analyticity probe


def cauchy_riemann_residual(v, Z, h=1e-3):
    """max over points and coordinates of |dv/d(conj z_a)| by fourth-order differences."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    k = Z.shape[1]
    worst = 0.0
    for a in range(k):
        e = np.zeros(k)
        e[a] = 1.0

        def d(direction):
            s = [2, 1, -1, -2]
            c = [-1, 8, -8, 1]
            return sum(ci * np.asarray(v(Z + si * h * direction * e)) for si, ci in zip(s, c)) / (12 * h)

        dzbar = 0.5 * (d(1.0) + 1j * d(1j))
        worst = max(worst, float(np.max(np.abs(dzbar))))
    return worst


# --------------------------------------------------------------------------
# the check transform


def check_transform(f, P, d=None, n=1, *, spatial_sign=1, rtol=1e-11, h0=0.5, max_level=7, atol=1e-15):
    """(2 pi)^(-dn) int_{R^{dn}_-} f(xi) exp(sum_j p_j^0 xi_j^0 + s i p_j . xi_j) dxi.

    ``P`` holds one momentum configuration per row (all time components
    positive).  Coordinates are ordered (xi_1^0, xi_1^1, ..., xi_n^{d-1}).
    The default spatial sign s = +1 is the one produced by the Lorentz
    pairing <p, x> = -p.x evaluated at Euclidean points; s = -1 is exposed
    for comparison.
    """
    P = np.atleast_2d(np.asarray(P, float))
    k = P.shape[1]
    if d is None:
        d = k // n
    if d * n != k:
        raise DimensionError("momentum configuration must have d*n components")
    time = np.zeros(k, dtype=bool)
    time[::d] = True
    if np.any(P[:, time] <= 0):
        raise InvalidInputError("time components of p must be positive")
    c = np.where(time, 1.0 + 0j, spatial_sign * 1j)
    spatial = quadrature.uniform(quadrature.decay_radius(f, k)) if np.any(~time) else None
    rules = [quadrature.NEG_TIME if t else spatial for t in time]
    norm = (2 * math.pi) ** (-k)

    def evaluate(h):
        axes, _, g = _tensor_grid(rules, h, f)
        return norm * quadrature.tensor_exp_sum(P * c[None, :], axes, g)

    return _adaptive(evaluate, h0, max_level, rtol, atol, "check transform")
