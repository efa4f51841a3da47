"""Polyhedral cones in R^k: representations, sup-norm distances, duals,
compact containment and set algebra.

A :class:`Cone` always carries both descriptions:

* ``generators``: rows g_i with C = {sum_i t_i g_i : t_i >= 0};
* ``halfspaces``: inward normals n_j with C = {p : <n_j, p> >= 0 for all j}.

Whichever form is supplied, the other is computed by facet enumeration.  An
empty generator list is the zero cone, an empty half-space list is the whole
space.  Non-convex sets (finite unions) are :class:`MultiCone` values.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull

from . import kernels
from .errors import (
    DimensionError,
    MalformedConeError,
    UnsupportedRepresentationError,
)

_RANK_TOL = 1e-10
_SIDE_TOL = 1e-10
CONTAINMENT_MARGIN = 1e-9


def _as_rows(vectors, dim=None):
    a = np.asarray(vectors, dtype=float)
    if a.size == 0:
        if dim is None:
            raise MalformedConeError("cannot infer dimension from an empty list")
        return np.zeros((0, dim))
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise MalformedConeError("direction lists must be two-dimensional")
    if dim is not None and a.shape[1] != dim:
        raise DimensionError(f"expected vectors in R^{dim}, got R^{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise MalformedConeError("cone description contains non-finite entries")
    return a


def _normalize_rows(a):
    if a.shape[0] == 0:
        return a
    norms = np.abs(a).max(axis=1)
    a = a[norms > _RANK_TOL]
    return a / np.abs(a).max(axis=1)[:, None]


def _dedupe(a, decimals=9):
    if a.shape[0] == 0:
        return a
    a = _normalize_rows(a)
    _, idx = np.unique(np.round(a, decimals), axis=0, return_index=True)
    return a[np.sort(idx)]


def _span_basis(G, k):
    """Orthonormal rows spanning row(G) and its orthogonal complement."""
    if G.shape[0] == 0:
        return np.zeros((0, k)), np.eye(k)
    _, s, vt = np.linalg.svd(G, full_matrices=True)
    r = int(np.sum(s > _RANK_TOL * max(1.0, s[0])))
    return vt[:r], vt[r:]


def _facets(G, k):
    """Inward facet normals of cone(G) in R^k (including +-equalities)."""
    G = _dedupe(_as_rows(G, k))
    if G.shape[0] == 0:
        eye = np.eye(k)
        return np.vstack([eye, -eye])
    B, O = _span_basis(G, k)
    r = B.shape[0]
    eqs = np.vstack([O, -O]) if O.shape[0] else np.zeros((0, k))
    Gs = G @ B.T
    normals = []
    if r == 1:
        col = Gs[:, 0]
        if np.all(col > -_SIDE_TOL):
            normals.append(B[0])
        elif np.all(col < _SIDE_TOL):
            normals.append(-B[0])
    else:
        hull_normals = _pointed_hull_facets(Gs) if r >= 3 else None
        if hull_normals is not None:
            normals.extend(hull_normals @ B)
        else:
            for sub in combinations(range(Gs.shape[0]), r - 1):
                M = Gs[list(sub)]
                _, s, vt = np.linalg.svd(M, full_matrices=True)
                if np.sum(s > _RANK_TOL * max(1.0, s[0])) != r - 1:
                    continue
                nvec = vt[-1]
                side = Gs @ nvec
                scale = np.abs(side).max()
                if scale < _RANK_TOL:
                    continue
                if np.all(side > -_SIDE_TOL * scale):
                    normals.append(nvec @ B)
                elif np.all(side < _SIDE_TOL * scale):
                    normals.append(-nvec @ B)
    nrm = _dedupe(np.array(normals).reshape(-1, k)) if normals else np.zeros((0, k))
    return np.vstack([eqs, nrm]) if eqs.shape[0] else nrm


def _pointed_hull_facets(Gs):
    """Facet normals of a pointed full-dimensional cone via its cross-section."""
    r = Gs.shape[1]
    unit = Gs / np.linalg.norm(Gs, axis=1)[:, None]
    c = unit.mean(axis=0)
    if np.linalg.norm(c) < 1e-12:
        return None
    c = c / np.linalg.norm(c)
    heights = Gs @ c
    if np.any(heights <= 1e-9) or Gs.shape[0] <= r + 1:
        return None
    _, _, vt = np.linalg.svd(c[None, :], full_matrices=True)
    P = vt[1:]
    pts = (Gs / heights[:, None]) @ P.T
    try:
        hull = ConvexHull(pts)
    except Exception:  # degenerate cross-section: fall back to enumeration
        return None
    a, b = hull.equations[:, :-1], hull.equations[:, -1]
    return -(a @ P + b[:, None] * c[None, :])


@dataclass(frozen=True, eq=False)
class Cone:
    """A closed polyhedral cone, optionally flagged as standing for the open
    cone with the same interior (``is_open_projection``)."""

    dim: int
    generators: np.ndarray
    halfspaces: np.ndarray
    is_open_projection: bool = False
    label: str = field(default="", compare=False)

    # ---- construction -------------------------------------------------
    @classmethod
    def from_generators(cls, gens, dim=None, *, open=False, label=""):
        G = _as_rows(gens, dim)
        k = G.shape[1] if dim is None else dim
        G = _dedupe(G)
        return cls(k, G, _facets(G, k), open, label)

    @classmethod
    def from_halfspaces(cls, normals, dim=None, *, open=False, label=""):
        N = _as_rows(normals, dim)
        k = N.shape[1] if dim is None else dim
        N = _dedupe(N)
        if N.shape[0] == 0:
            eye = np.eye(k)
            return cls(k, np.vstack([eye, -eye]), N, open, label)
        G = _facets(N, k)  # facets of the dual are the generators
        return cls(k, _dedupe(G), _facets(G, k), open, label)

    @classmethod
    def from_both(cls, gens, normals, dim=None, *, open=False, label="", check=True):
        G = _dedupe(_as_rows(gens, dim))
        k = G.shape[1] if dim is None else dim
        N = _dedupe(_as_rows(normals, k))
        cone = cls(k, G, N, open, label)
        if check and not cone.forms_agree():
            raise MalformedConeError("generators and half-spaces describe different sets")
        return cone

    @classmethod
    def zero(cls, k):
        return cls.from_generators(np.zeros((0, k)), k, label="{0}")

    @classmethod
    def full(cls, k):
        return cls.from_halfspaces(np.zeros((0, k)), k, label=f"R^{k}")

    @classmethod
    def box(cls, kinds, *, open=False):
        """Coordinate cone; per axis 1: x>=0, -1: x<=0, 0: free, 2: x=0."""
        kinds = list(kinds)
        k = len(kinds)
        rows = []
        for a, kd in enumerate(kinds):
            e = np.zeros(k)
            e[a] = 1.0
            if kd in (1, 2):
                rows.append(e)
            if kd in (-1, 2):
                rows.append(-e)
        return cls.from_halfspaces(np.array(rows).reshape(-1, k), k, open=open)

    @classmethod
    def half_line(cls, direction):
        return cls.from_generators([direction])

    @classmethod
    def sector(cls, center_deg, half_angle_deg, *, open=False):
        """Planar cone of the given half-angle around a direction."""
        c, h = np.radians(center_deg), np.radians(half_angle_deg)
        gens = [[np.cos(c - h), np.sin(c - h)], [np.cos(c + h), np.sin(c + h)]]
        return cls.from_generators(gens, open=open)

    @classmethod
    def light_cone(cls, d, *, future=True, n_facets=64, open=False):
        """Closed forward (``future=True``) or backward light cone in R^d.

        d = 2 is exact.  For d = 3 the spatial unit circle is replaced by an
        inscribed regular ``n_facets``-gon; for d >= 4 by the convex hull of
        ``n_facets`` quasi-uniform points on the unit sphere.
        """
        s = 1.0 if future else -1.0
        if d < 2:
            raise DimensionError("light cones need d >= 2")
        if d == 2:
            gens = np.array([[s, 1.0], [s, -1.0]])
        elif d == 3:
            th = 2 * np.pi * np.arange(n_facets) / n_facets
            gens = np.column_stack([np.full(n_facets, s), np.cos(th), np.sin(th)])
        else:
            gens = np.column_stack([np.full(n_facets, s), _sphere_points(n_facets, d - 1)])
        lab = ("V+" if future else "V-") + f"(d={d})"
        return cls.from_generators(gens, open=open, label=lab)

    # ---- queries -------------------------------------------------------
    @property
    def is_degenerate(self):
        return self.generators.shape[0] == 0

    def contains(self, points, tol=1e-9):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.dim:
            raise DimensionError(f"point dimension {P.shape[1]} != cone dimension {self.dim}")
        if self.halfspaces.shape[0] == 0:
            out = np.ones(P.shape[0], dtype=bool)
        else:
            scale = np.maximum(1.0, np.abs(P).max(axis=1))
            out = np.all(P @ self.halfspaces.T >= -tol * scale[:, None], axis=1)
        return out if np.ndim(points) > 1 else bool(out[0])

    def interior_margin(self, points):
        """min_j <n_j, p> for unit normals (sup-normalized); +inf for R^k."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if self.halfspaces.shape[0] == 0:
            return np.full(P.shape[0], np.inf)
        N = self.halfspaces / np.linalg.norm(self.halfspaces, axis=1)[:, None]
        return (P @ N.T).min(axis=1)

    def contains_line(self):
        if self.dim == 0:
            return False
        N = self.halfspaces
        if N.shape[0] == 0:
            return True
        return np.linalg.matrix_rank(N, tol=_RANK_TOL) < self.dim

    def box_kinds(self):
        """Per-axis kinds if every half-space is a signed coordinate axis."""
        kinds = np.zeros(self.dim, dtype=np.int64)
        pos = np.zeros(self.dim, dtype=bool)
        neg = np.zeros(self.dim, dtype=bool)
        for n in self.halfspaces:
            nz = np.flatnonzero(np.abs(n) > 1e-12)
            if nz.size != 1:
                return None
            a = nz[0]
            if n[a] > 0:
                pos[a] = True
            else:
                neg[a] = True
        kinds[pos & ~neg] = 1
        kinds[neg & ~pos] = -1
        kinds[pos & neg] = 2
        return kinds

    def sample(self, n, rng=None, *, unit=True):
        """Random points of the cone (nonnegative generator combinations)."""
        rng = np.random.default_rng(rng)
        if self.is_degenerate:
            return np.zeros((n, self.dim))
        t = rng.exponential(size=(n, self.generators.shape[0]))
        t *= rng.random((n, self.generators.shape[0])) < 0.7
        t[np.arange(n), rng.integers(0, self.generators.shape[0], n)] += 1.0
        P = t @ self.generators
        if unit:
            nrm = np.abs(P).max(axis=1)
            P = P[nrm > 1e-12] / nrm[nrm > 1e-12, None]
        return P

    def forms_agree(self, n=512, seed=0):
        """Cross-check generator and half-space forms by sampling."""
        g_cone = Cone.from_generators(self.generators, self.dim)
        h_cone = Cone.from_halfspaces(self.halfspaces, self.dim)
        return same_set(g_cone, h_cone, n=n, seed=seed)

    def __repr__(self):
        lab = f" {self.label}" if self.label else ""
        return (
            f"Cone(dim={self.dim}{lab}, gens={self.generators.shape[0]}, "
            f"halfspaces={self.halfspaces.shape[0]}, open={self.is_open_projection})"
        )


@dataclass(frozen=True, eq=False)
class MultiCone:
    """A finite union of polyhedral cones of a common dimension."""

    members: tuple

    def __post_init__(self):
        if not self.members:
            raise MalformedConeError("a union needs at least one member")
        dims = {m.dim for m in self.members}
        if len(dims) != 1:
            raise DimensionError("union members must share a dimension")

    @property
    def dim(self):
        return self.members[0].dim

    @property
    def generators(self):
        return np.vstack([m.generators for m in self.members])

    @property
    def is_degenerate(self):
        return all(m.is_degenerate for m in self.members)

    def contains(self, points, tol=1e-9):
        res = [np.atleast_1d(m.contains(points, tol)) for m in self.members]
        out = np.any(np.vstack(res), axis=0)
        return out if np.ndim(points) > 1 else bool(out[0])

    def sample(self, n, rng=None, *, unit=True):
        rng = np.random.default_rng(rng)
        which = rng.integers(0, len(self.members), n)
        parts = [m.sample(int(np.sum(which == i)), rng, unit=unit) for i, m in enumerate(self.members)]
        return np.vstack(parts)


def _sphere_points(n, dim):
    """Quasi-uniform points on the unit sphere S^{dim-1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if dim == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        rho = np.sqrt(1 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    g = np.random.default_rng(12345).normal(size=(n, dim))
    return g / np.linalg.norm(g, axis=1)[:, None]


# --------------------------------------------------------------------------
# pairing forms


@dataclass(frozen=True, eq=False)
class PairingForm:
    """Nondegenerate symmetric bilinear form <p, x> = p^T M x."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError("pairing matrix must be square")
        if not np.allclose(M, M.T):
            raise MalformedConeError("pairing matrix must be symmetric")
        if abs(np.linalg.det(M)) < 1e-14:
            raise MalformedConeError("pairing matrix must be nondegenerate")
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __call__(self, p, x):
        return np.einsum("...i,ij,...j->...", np.asarray(p), self.matrix, np.asarray(x))

    @classmethod
    def euclidean(cls, k):
        return cls(np.eye(k))

    @classmethod
    def lorentz(cls, d):
        return cls(np.diag([1.0] + [-1.0] * (d - 1)))

    @classmethod
    def minus_lorentz(cls, d, n=1):
        """<p, x> = -sum_j p_j . x_j with the Lorentz product in each block."""
        return cls(np.kron(np.eye(n), -np.diag([1.0] + [-1.0] * (d - 1))))


# --------------------------------------------------------------------------
# operations


def _check_point(p, dim):
    P = np.asarray(p, dtype=float)
    if P.shape[-1] != dim:
        raise DimensionError(f"point dimension {P.shape[-1]} != cone dimension {dim}")
    if not np.all(np.isfinite(P)):
        raise MalformedConeError("points must be finite")
    return P


def _lp_distance(p, N):
    k = p.shape[0]
    c = np.zeros(k + 1)
    c[-1] = 1.0
    eye = np.eye(k)
    ones = np.ones((k, 1))
    A = [np.hstack([-eye, -ones]), np.hstack([eye, -ones])]
    b = [-p, p]
    if N.shape[0]:
        A.append(np.hstack([-N, np.zeros((N.shape[0], 1))]))
        b.append(np.zeros(N.shape[0]))
    res = linprog(
        c,
        A_ub=np.vstack(A),
        b_ub=np.concatenate(b),
        bounds=[(None, None)] * k + [(0, None)],
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise MalformedConeError(f"distance LP failed: {res.message}")
    return max(0.0, float(res.fun))


def distance_to_cone(p, U, norm="sup"):
    """Distance from ``p`` (a point or an (N, k) array) to the cone ``U``.

    ``norm="sup"`` (the default) uses |p| = max_j |p_j| and solves a linear
    program; coordinate cones use a closed form.  ``norm="euclidean"`` solves
    a nonnegative least-squares problem on the generator form.
    """
    if isinstance(U, MultiCone):
        vals = [np.atleast_1d(distance_to_cone(p, m, norm)) for m in U.members]
        out = np.min(np.vstack(vals), axis=0)
        return out if np.ndim(p) > 1 else float(out[0])
    if not isinstance(U, Cone):
        raise MalformedConeError(f"not a cone: {U!r}")
    P = np.atleast_2d(_check_point(p, U.dim))
    if norm == "sup":
        kinds = U.box_kinds()
        if kinds is not None:
            out = kernels.box_distance(P, kinds)
        else:
            out = np.array([_lp_distance(q, U.halfspaces) for q in P])
    elif norm == "euclidean":
        if U.is_degenerate:
            out = np.linalg.norm(P, axis=1)
        else:
            out = np.array([nnls(U.generators.T, q)[1] for q in P])
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return out if np.ndim(p) > 1 else float(out[0])


def dual_cone(V, form=None):
    """{p : <p, y> >= 0 for all y in V} under ``form`` (Euclidean default)."""
    if isinstance(V, MultiCone):
        G, k = V.generators, V.dim
    elif isinstance(V, Cone):
        G, k = V.generators, V.dim
    else:
        raise UnsupportedRepresentationError("dual_cone needs a polyhedral cone")
    form = form or PairingForm.euclidean(k)
    if form.dim != k:
        raise DimensionError("pairing form and cone dimensions differ")
    if G.shape[0] == 0:
        return Cone.full(k)
    return Cone.from_halfspaces(G @ form.matrix, k)


def compact_containment(U, V, *, margin=CONTAINMENT_MARGIN, samples=512, seed=0):
    """True iff the closure of U minus the origin lies inside the interior of V."""
    if U.dim != V.dim:
        raise DimensionError("cones of different dimension")
    if U.is_degenerate:
        return True
    if isinstance(V, MultiCone):
        raise UnsupportedRepresentationError("containment in a union is not supported")
    G = U.generators / np.abs(U.generators).max(axis=1)[:, None]
    if not np.all(V.interior_margin(G) > margin):
        return False
    simplicial = U.generators.shape[0] <= np.linalg.matrix_rank(U.generators)
    if not simplicial:
        S = U.sample(samples, seed)
        if S.shape[0] and not np.all(V.interior_margin(S) > margin):
            return False
    return True


def cone_algebra(a, b, op):
    """Union (as a :class:`MultiCone`), intersection or product of cones."""
    if op == "product":
        return _product(a, b)
    if a.dim != b.dim:
        raise DimensionError("cones of different dimension")
    if op == "union":
        ma = a.members if isinstance(a, MultiCone) else (a,)
        mb = b.members if isinstance(b, MultiCone) else (b,)
        return MultiCone(tuple(ma) + tuple(mb))
    if op == "intersection":
        if isinstance(a, MultiCone) or isinstance(b, MultiCone):
            ma = a.members if isinstance(a, MultiCone) else (a,)
            mb = b.members if isinstance(b, MultiCone) else (b,)
            return MultiCone(tuple(cone_algebra(x, y, "intersection") for x in ma for y in mb))
        return Cone.from_halfspaces(np.vstack([a.halfspaces, b.halfspaces]), a.dim)
    raise ValueError(f"unknown cone operation {op!r}")


def _product(a, b):
    if isinstance(a, MultiCone) or isinstance(b, MultiCone):
        ma = a.members if isinstance(a, MultiCone) else (a,)
        mb = b.members if isinstance(b, MultiCone) else (b,)
        return MultiCone(tuple(_product(x, y) for x in ma for y in mb))
    ka, kb = a.dim, b.dim
    Na = np.hstack([a.halfspaces, np.zeros((a.halfspaces.shape[0], kb))])
    Nb = np.hstack([np.zeros((b.halfspaces.shape[0], ka)), b.halfspaces])
    Ga = np.hstack([a.generators, np.zeros((a.generators.shape[0], kb))])
    Gb = np.hstack([np.zeros((b.generators.shape[0], ka)), b.generators])
    G = np.vstack([Ga, Gb])
    N = np.vstack([Na, Nb])
    return Cone(ka + kb, _dedupe(G), _dedupe(N), a.is_open_projection and b.is_open_projection)


def product(*cones):
    out = cones[0]
    for c in cones[1:]:
        out = _product(out, c)
    return out


def complement_witness(V):
    """Closed complement of the interior of V as a union of half-spaces."""
    if V.halfspaces.shape[0] == 0:
        raise MalformedConeError("the whole space has empty complement")
    return MultiCone(tuple(Cone.from_halfspaces(-n[None, :], V.dim) for n in V.halfspaces))


def same_set(a, b, n=512, seed=0, tol=1e-8):
    """Mutual generator membership plus a sampled cross-check."""
    ga = a.generators / np.maximum(1e-300, np.abs(a.generators).max(axis=1))[:, None] if a.generators.shape[0] else a.generators
    gb = b.generators / np.maximum(1e-300, np.abs(b.generators).max(axis=1))[:, None] if b.generators.shape[0] else b.generators
    if ga.shape[0] and not np.all(b.contains(ga, tol)):
        return False
    if gb.shape[0] and not np.all(a.contains(gb, tol)):
        return False
    rng = np.random.default_rng(seed)
    for x, y in ((a, b), (b, a)):
        S = x.sample(n, rng)
        if S.shape[0] and not np.all(y.contains(S, 1e-7)):
            return False
    return True
