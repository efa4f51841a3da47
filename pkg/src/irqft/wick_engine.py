"""Wick power series of a free field: combinatorics, coefficient bounds and
truncated n-point functions with rigorous tail estimates.

Pair slots (j, m), 1 <= j < m <= n, are ordered (1,2), (1,3), ..., (1,n),
(2,3), ..., (n-1,n).  A multi-index K assigns a multiplicity k_jm to each
slot; the valence of vertex j is kappa_j = sum of k over slots touching j.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import kernels
from .cone_geometry import Cone
from .errors import HypothesisViolation, InvalidInputError, TruncationInsufficient, TubeViolation

EXACT_LIMIT = 64

# --------------------------------------------------------------------------
# multi-indices


@lru_cache(maxsize=None)
def pair_slots(n):
    return tuple((j, m) for j in range(n) for m in range(j + 1, n))


@lru_cache(maxsize=None)
def slot_table(n):
    """n x n array with the slot index of each unordered pair (-1 on the diagonal)."""
    S = -np.ones((n, n), dtype=np.int64)
    for s, (j, m) in enumerate(pair_slots(n)):
        S[j, m] = S[m, j] = s
    return S


@dataclass(frozen=True)
class MultiIndexK:
    n: int
    entries: tuple

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInputError("need at least two points")
        if len(self.entries) != self.n * (self.n - 1) // 2:
            raise InvalidInputError("wrong number of pair entries")
        if any(int(k) != k or k < 0 for k in self.entries):
            raise InvalidInputError("entries must be nonnegative integers")

    @classmethod
    def from_pairs(cls, n, pairs):
        """Build from a mapping {(j, m): k} with 1-based j < m."""
        e = [0] * (n * (n - 1) // 2)
        for (j, m), k in pairs.items():
            e[slot_table(n)[j - 1, m - 1]] = int(k)
        return cls(n, tuple(e))

    @property
    def total(self):
        return sum(self.entries)

    @property
    def kappa(self):
        kap = [0] * self.n
        for (j, m), k in zip(pair_slots(self.n), self.entries):
            kap[j] += k
            kap[m] += k
        return tuple(kap)

    def k(self, j, m):
        """k_jm with 1-based indices."""
        return self.entries[slot_table(self.n)[j - 1, m - 1]]

    def __iter__(self):
        return iter(self.entries)


def _compositions_desc(total, parts):
    """All tuples of ``parts`` nonnegative ints summing to ``total``, in
    descending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions_desc(total - first, parts - 1):
            yield (first,) + rest


def enumerate_K(n, N):
    """Every K with |K| <= N exactly once, ordered by |K| and then by
    descending lexicographic order of the entries (so (1,0,0) precedes
    (0,1,0))."""
    if n < 2 or N < 0:
        raise InvalidInputError("need n >= 2 and N >= 0")
    P = n * (n - 1) // 2
    for tot in range(N + 1):
        for e in _compositions_desc(tot, P):
            yield MultiIndexK(n, e)


def count_K(n, m):
    """Number of K with |K| = m."""
    P = n * (n - 1) // 2
    return math.comb(m + P - 1, P - 1)


def K_array(n, N):
    return np.array([K.entries for K in enumerate_K(n, N)], dtype=np.int64).reshape(-1, n * (n - 1) // 2)


# --------------------------------------------------------------------------
# coefficient sequences


@dataclass(frozen=True)
class CoefficientSequence:
    """d_k for a tagged closed form or an explicit list.

    Tags: ``"exponential"`` (g^k / k!), ``"inverse_factorial"`` (1/k!),
    ``"gaussian"`` (exp(-k^2), inexact), ``"ones"`` (1), ``"list"``.
    """

    kind: str
    g: object = 1
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("exponential", "inverse_factorial", "gaussian", "ones", "list"):
            raise InvalidInputError(f"unknown coefficient sequence {self.kind!r}")

    @classmethod
    def exponential(cls, g):
        return cls("exponential", g)

    @classmethod
    def from_list(cls, vals):
        return cls("list", 1, tuple(Fraction(v) if not isinstance(v, float) else v for v in vals))

    @property
    def exact(self):
        if self.kind == "gaussian":
            return False
        if self.kind == "list":
            return all(isinstance(v, (int, Fraction)) for v in self.values)
        return True

    def value(self, k):
        """Exact value when available, float otherwise."""
        if self.kind == "exponential":
            return Fraction(self.g) ** k / math.factorial(k)
        if self.kind == "inverse_factorial":
            return Fraction(1, math.factorial(k))
        if self.kind == "ones":
            return Fraction(1)
        if self.kind == "gaussian":
            return math.exp(-k * k)
        if k < len(self.values):
            return self.values[k]
        return Fraction(0)

    def log_abs(self, k):
        """log |d_k| (-inf for zero), valid for large k."""
        if self.kind == "exponential":
            g = abs(float(self.g))
            return (k * math.log(g) if g > 0 else (0.0 if k == 0 else -math.inf)) - math.lgamma(k + 1)
        if self.kind == "inverse_factorial":
            return -math.lgamma(k + 1)
        if self.kind == "ones":
            return 0.0
        if self.kind == "gaussian":
            return -float(k * k)
        v = self.value(k)
        return math.log(abs(float(v))) if v != 0 else -math.inf

    def float_value(self, k):
        if self.kind in ("exponential", "inverse_factorial"):
            sign = 1.0 if (self.kind != "exponential" or float(self.g) >= 0 or k % 2 == 0) else -1.0
            return sign * math.exp(self.log_abs(k))
        return float(self.value(k))


# --------------------------------------------------------------------------
# D_K


@dataclass(frozen=True)
class LogValue:
    """sign * exp(log_abs) for values outside exact range."""

    sign: int
    log_abs: float

    def __float__(self):
        return self.sign * math.exp(self.log_abs) if self.log_abs < 709 else self.sign * math.inf


def combinatorial_factor(K):
    """kappa! / K! as an exact integer."""
    num = math.prod(math.factorial(c) for c in K.kappa)
    den = math.prod(math.factorial(k) for k in K.entries)
    q, r = divmod(num, den)
    assert r == 0
    return q


def coefficient_D_K(K, d):
    """D_K = kappa!/K! prod_j d_{kappa_j}.

    Exact (int/Fraction) for |K| <= 64 with an exact sequence; a
    :class:`LogValue` beyond that, or a float for inexact sequences.
    """
    kap = K.kappa
    if K.total <= EXACT_LIMIT and d.exact:
        out = Fraction(combinatorial_factor(K))
        for c in kap:
            out *= d.value(c)
        return out
    if K.total <= EXACT_LIMIT:
        return float(combinatorial_factor(K)) * math.prod(d.float_value(c) for c in kap)
    log_c = sum(math.lgamma(c + 1) for c in kap) - sum(math.lgamma(k + 1) for k in K.entries)
    sign = 1
    for c in kap:
        v = d.float_value(c) if d.log_abs(c) > -700 else (1.0 if d.kind != "exponential" or float(d.g) >= 0 or c % 2 == 0 else -1.0)
        if v == 0 and d.log_abs(c) == -math.inf:
            return LogValue(0, -math.inf)
        sign *= 1 if v >= 0 else -1
    return LogValue(sign, log_c + sum(d.log_abs(c) for c in kap))


def log_abs_D_K(K, d):
    kap = K.kappa
    return (
        sum(math.lgamma(c + 1) for c in kap)
        - sum(math.lgamma(k + 1) for k in K.entries)
        + sum(d.log_abs(c) for c in kap)
    )


# --------------------------------------------------------------------------
# brute-force pairing oracle

MAX_ORACLE_LEGS = 16


def pairing_oracle(n, kappa):
    """Count perfect matchings of labelled legs (kappa_j legs at vertex j, no
    pair inside a vertex), grouped by the multi-index K they produce."""
    kappa = [int(c) for c in kappa]
    if len(kappa) != n or any(c < 0 for c in kappa):
        raise InvalidInputError("kappa must have n nonnegative entries")
    L = sum(kappa)
    if L % 2:
        return {}
    if L > MAX_ORACLE_LEGS:
        raise InvalidInputError(f"oracle limited to {MAX_ORACLE_LEGS} legs")
    owner = np.repeat(np.arange(n), kappa)
    base = max(kappa) + 1 if kappa else 1
    P = n * (n - 1) // 2
    counts = kernels.matching_counts(owner, slot_table(n), P, base)
    out = {}
    for code in np.nonzero(counts)[0]:
        e, c = [], int(code)
        for _ in range(P):
            e.append(c % base)
            c //= base
        out[tuple(e)] = int(counts[code])
    return out


def compare_with_oracle(n, max_total):
    """(number of kappa checked, list of mismatches) for all kappa with
    even sum <= max_total."""
    ones = CoefficientSequence("ones")
    mismatches, checked = [], 0
    for kappa in itertools.product(range(max_total + 1), repeat=n):
        s = sum(kappa)
        if s > max_total or s % 2:
            continue
        checked += 1
        oracle = pairing_oracle(n, kappa)
        # every K with these valences, derived independently from the oracle
        for K in enumerate_K(n, s // 2):
            if K.total != s // 2 or K.kappa != tuple(kappa):
                continue
            D = coefficient_D_K(K, ones)
            if oracle.pop(K.entries, 0) != D:
                mismatches.append((tuple(kappa), K.entries))
        mismatches.extend((tuple(kappa), e) for e in oracle)
    return checked, mismatches


# --------------------------------------------------------------------------
# the coefficient condition


@dataclass
class CoefficientCheck:
    ok: bool
    A: float
    h: float
    witness: tuple = None
    ratio: float = None


def _log_condition_gap(d, k, l, A, h):
    """log(A h^(k+l) |d_(k+l)|) - log|d_k d_l| (negative means violation)."""
    lhs = d.log_abs(k) + d.log_abs(l)
    if lhs == -math.inf:
        return math.inf
    return math.log(A) + (k + l) * math.log(h) + d.log_abs(k + l) - lhs


def condition_holds(d, A, h, kmax=64, tol=1e-12):
    """First (k, l) violating |d_k d_l| <= A h^(k+l) |d_(k+l)|, or None.

    Pairs are scanned by k + l and then by k (k <= l by symmetry).
    """
    for s in range(kmax + 1):
        for k in range(0, s // 2 + 1):
            if _log_condition_gap(d, k, s - k, A, h) < -tol:
                return (k, s - k)
    return None


def check_coefficient_condition(d, kmax=64, A_grid=(1, 10, 100), h_grid=(2, 4, 8)):
    return _check_condition_cached(d, kmax, tuple(A_grid), tuple(h_grid))


@lru_cache(maxsize=256)
def _check_condition_cached(d, kmax, A_grid, h_grid):
    """Search A, h over the grids for the condition on all k + l <= kmax.

    On failure the witness is the first violation of the weakest pair
    (largest A and h), i.e. a pair (k, l) that no grid choice can repair.
    """
    if kmax > EXACT_LIMIT:
        raise InvalidInputError("kmax must be <= 64")
    for A in A_grid:
        for h in h_grid:
            if condition_holds(d, A, h, kmax) is None:
                return CoefficientCheck(True, A, h)
    A, h = max(A_grid), max(h_grid)
    w = condition_holds(d, A, h, kmax)
    k, l = w
    ratio = math.exp(d.log_abs(k) + d.log_abs(l) - d.log_abs(k + l))
    return CoefficientCheck(False, A, h, w, ratio)


def derived_constants(A, h, n):
    """(A', h') with |D_K| <= A' h'^|K| |K|! |d_(2|K|)|.

    Chaining the condition over the n valences gives
    prod_j |d_kappa_j| <= A^(n-1) h^(2|K|) |d_(2|K|)|, and
    kappa!/K! <= (|K|!/K!) kappa! / |K|! <= (n(2n-1))^|K| 4^|K| |K|!.
    """
    return float(A) ** (n - 1), 4.0 * n * (2 * n - 1) * float(h) ** 2


# --------------------------------------------------------------------------
# combinatorial inequalities


@dataclass
class InequalityReport:
    checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def combinatorial_inequalities(n, Nmax):
    """Exhaustive check of |K|!/K! <= (n(2n-1))^|K| and
    kappa! <= |kappa|! <= 4^|K| (|K|!)^2 for all |K| <= Nmax."""
    if n > 4 or Nmax > 8:
        raise InvalidInputError("desk-scale limits are n <= 4 and Nmax <= 8")
    rep = InequalityReport(0)
    base = n * (2 * n - 1)
    for K in enumerate_K(n, Nmax):
        t = K.total
        multinom = math.factorial(t) // math.prod(math.factorial(k) for k in K.entries)
        kap_fact = math.prod(math.factorial(c) for c in K.kappa)
        tot_fact = math.factorial(2 * t)
        rep.checked += 1
        if multinom > base**t:
            rep.violations.append(("multinomial", K.entries))
        if kap_fact > tot_fact:
            rep.violations.append(("kappa!", K.entries))
        if tot_fact > 4**t * math.factorial(t) ** 2:
            rep.violations.append(("central", K.entries))
    return rep


# --------------------------------------------------------------------------
# convergence criteria


@dataclass
class ConvergenceFit:
    ok: bool
    C: float
    values: list
    witness: tuple = None


def series_with_tail(d, L, w, *, kmax=400, rtol=1e-15):
    """sum_k L^k k! |d_2k| w^k with a bound on the neglected tail.

    Returns (value, tail_bound) or raises :class:`TruncationInsufficient`
    with the first index where the terms stop decreasing past kmax.
    """
    if w < 0:
        raise InvalidInputError("envelope values must be nonnegative")
    logs = []
    total = 0.0
    for k in range(kmax + 1):
        la = d.log_abs(2 * k)
        lt = k * math.log(L) + math.lgamma(k + 1) + la + (k * math.log(w) if w > 0 else (0.0 if k == 0 else -math.inf))
        logs.append(lt)
        if lt > 700:
            raise TruncationInsufficient(f"terms overflow at k={k}")
        total += math.exp(lt)
        if k >= 2 and lt < math.log(rtol) + math.log(max(total, 1e-300)):
            # ratio test from the last two terms
            r = math.exp(lt - logs[-2]) if logs[-2] > -math.inf else 0.0
            if r < 0.5 and logs[-2] >= lt:
                return total, math.exp(lt) * r / (1 - r)
    raise TruncationInsufficient(f"partial sums did not stabilize by k={kmax} (term exp({logs[-1]:.3g}))")


def convergence_bound_check(d, envelope, side, index, L, epsilon, grid):
    """Fit the minimal C with sum_k L^k k!|d_2k| w(r)^k <= C exp(eps r^(1/alpha))
    (``side="IR"``, index alpha) or <= C exp(eps t^(-1/(beta-1)))
    (``side="UV"``, index beta) over the grid."""
    grid = np.asarray(grid, float)
    ratios, vals = [], []
    for r in grid:
        try:
            s, tail = series_with_tail(d, L, float(envelope(r)))
        except TruncationInsufficient as exc:
            return ConvergenceFit(False, math.inf, vals, (float(r), str(exc)))
        s += tail
        if side == "IR":
            lw = epsilon * r ** (1.0 / index)
        elif side == "UV":
            lw = epsilon * r ** (-1.0 / (index - 1))
        else:
            raise InvalidInputError("side must be IR or UV")
        vals.append(s)
        ratios.append(math.log(s) - lw if s > 0 else -math.inf)
    C = math.exp(max(ratios))
    return ConvergenceFit(bool(np.isfinite(C)), C, vals)


def tilde_C(d, L, kmax=400, envelopes_zero=False):
    """C~_L = sup_k k!|d_2k| L^k, which exists whenever the convergence
    relations hold with a nonzero envelope."""
    if envelopes_zero:
        raise HypothesisViolation("both envelopes vanish identically; the bound is not implied")
    best, prev = -math.inf, -math.inf
    for k in range(kmax + 1):
        lt = math.lgamma(k + 1) + d.log_abs(2 * k) + k * math.log(L)
        best = max(best, lt)
        if k > 2 and lt < best - 50 and lt < prev:
            return math.exp(best)
        prev = lt
    raise TruncationInsufficient("k!|d_2k| L^k is not eventually decreasing")


# --------------------------------------------------------------------------
# the lambda constant


def lambda_constant(cone, max_terms, *, norm="sup", starts=24, samples=100_000, seed=0):
    """min over 2 <= r <= max_terms of inf |eta_1+...+eta_r| with eta_i in the
    cone and sum |eta_i| = 1.  Returns (lambda, sample_min)."""
    if cone.contains_line() or cone.is_degenerate:
        raise HypothesisViolation("cone contains a line; lambda would vanish")
    G = cone.generators
    k = cone.dim
    nrm = (lambda v: np.abs(v).max(axis=-1)) if norm == "sup" else (lambda v: np.linalg.norm(v, axis=-1))
    rng = np.random.default_rng(seed)
    best = math.inf
    for r in range(2, max_terms + 1):

        def f(a):
            a = np.abs(a).reshape(r, -1)
            etas = a @ G
            tot = nrm(etas).sum()
            return nrm(etas.sum(axis=0)) / tot

        for _ in range(starts):
            a0 = rng.random(r * G.shape[0])
            res = optimize.minimize(f, a0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
            best = min(best, float(res.fun))
        # pairs of extreme rays are the natural candidates
        for i, j in itertools.product(range(G.shape[0]), repeat=2):
            etas = np.stack([G[i], G[j]])
            best = min(best, float(nrm(etas.sum(axis=0)) / nrm(etas).sum()))
    # dense sampling certificate
    smin = math.inf
    for r in range(2, max_terms + 1):
        a = rng.random((samples, r, G.shape[0])) ** 4
        etas = a @ G
        vals = nrm(etas.sum(axis=1)) / nrm(etas).sum(axis=1)
        smin = min(smin, float(vals.min()))
    return best, smin


# --------------------------------------------------------------------------
# two-point models


def lorentz_square(Z):
    Z = np.asarray(Z)
    return Z[..., 0] ** 2 - np.sum(Z[..., 1:] ** 2, axis=-1)


def in_past_cone(Y, margin=0.0):
    Y = np.atleast_2d(np.asarray(Y, float))
    return Y[:, 0] < -np.linalg.norm(Y[:, 1:], axis=1) - margin


@dataclass
class TwoPointModel:
    """Analytic two-point function on the past tube with majorant data.

    ``kind == "massless"``: w(z) = c / (-z^2), w_IR = 0, w_UV(t) = t^-2.
    ``kind == "dipole"``: w(z) = -c log(-z^2 / mu^2) (principal branch),
    w_IR(r) = log(1 + r), w_UV(t) = log(1 + 1/t).
    The certification subcone is {eta^0 <= -s |eta_vec|} with s = ``slope``.
    """

    name: str
    d: int
    kind: str
    c: float
    mu: float = 1.0
    slope: float = 2.0
    C: float = None
    cert_grid: dict = field(default_factory=dict)

    def __call__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        s = -lorentz_square(Z)
        if self.kind == "massless":
            return self.c / s
        return -self.c * np.log(s / self.mu**2)

    def w_IR(self, r):
        r = np.asarray(r, float)
        return np.zeros_like(r) if self.kind == "massless" else np.log1p(r)

    def w_UV(self, t):
        t = np.asarray(t, float)
        return t**-2.0 if self.kind == "massless" else np.log1p(1.0 / t)

    def subcone_contains(self, Y, tol=1e-12):
        Y = np.atleast_2d(np.asarray(Y, float))
        return Y[:, 0] <= -self.slope * np.linalg.norm(Y[:, 1:], axis=1) + tol

    def sample_subcone(self, n, rng, t_range=(0.05, 3.0)):
        u = rng.standard_normal((n, self.d - 1))
        u /= np.maximum(np.linalg.norm(u, axis=1), 1e-300)[:, None]
        frac = rng.random(n)[:, None] / self.slope
        t = np.exp(rng.uniform(*np.log(t_range), n))[:, None]
        Y = np.concatenate([-np.ones((n, 1)), frac * u], axis=1)
        return Y * t / np.abs(Y).max(axis=1)[:, None]

    def bound_rhs(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        zn = np.abs(Z).max(axis=1)
        yn = np.abs(Z.imag).max(axis=1)
        return 1.0 + self.w_IR(2 * zn) + self.w_UV(yn)

    def certify(self, R=50.0, n=20000, seed=0, safety=1.0 + 1e-9):
        """Fit C in |w(z)| <= C (1 + w_IR(2|z|) + w_UV(|Im z|)) on a grid over
        the certification subcone; the grid spans |Re z| <= R and
        |Im z| in [1e-4, R]."""
        rng = np.random.default_rng(seed)
        X = rng.uniform(-R, R, (n, self.d)) * rng.random((n, 1)) ** 3
        Y = self.sample_subcone(n, rng, (1e-4, R))
        Z = X + 1j * Y
        ratio = np.abs(self(Z)) / self.bound_rhs(Z)
        self.C = float(ratio.max()) * safety
        self.cert_grid = {"R": R, "n": n, "seed": seed, "t_range": (1e-4, R)}
        return self.C

    def majorant(self, X, Y):
        """Declared majorant |w_maj(x - iy, x + iy)| used for the Hilbert-type
        bound; y in the certification subcone."""
        X = np.atleast_2d(np.asarray(X, float))
        Y = np.atleast_2d(np.asarray(Y, float))
        yl = np.sqrt(np.maximum(lorentz_square(Y), 0.0))
        if self.kind == "massless":
            return self.c / (4 * yl**2)
        big = np.log1p(np.abs(X).max(axis=1) + np.abs(Y).max(axis=1))
        small = np.log1p(1.0 / yl)
        return self.c * (4.0 + 4.0 * (big**2 + small**2))


MODELS = {
    "massless2": dict(d=2, kind="massless", c=1 / (4 * math.pi**2)),
    "dipole2": dict(d=2, kind="dipole", c=1 / (4 * math.pi)),
    "dipole4": dict(d=4, kind="dipole", c=1 / (4 * math.pi)),
}


def get_model(name, certify=True):
    if name not in MODELS:
        raise InvalidInputError(f"unknown model {name!r}; known: {sorted(MODELS)}")
    m = TwoPointModel(name, **MODELS[name])
    if certify:
        m.certify()
    return m


def hilbert_majorant_probe(model, X, Xp, Y):
    """max of |w(x - x' - 2iy)|^2 / (|w_maj(x, y)| |w_maj(x', y)|)."""
    Z = np.asarray(X) - np.asarray(Xp) - 2j * np.asarray(Y)
    lhs = np.abs(model(Z)) ** 2
    rhs = model.majorant(X, Y) * model.majorant(Xp, Y)
    return float(np.max(lhs / rhs))


# --------------------------------------------------------------------------
# truncated Wightman functions


def pair_arguments(zeta):
    """zeta_j + ... + zeta_(m-1) for each pair slot (j, m) of n = len(zeta)+1 points."""
    zeta = np.asarray(zeta)
    n = zeta.shape[0] + 1
    csum = np.concatenate([np.zeros((1,) + zeta.shape[1:], zeta.dtype), np.cumsum(zeta, axis=0)])
    return np.stack([csum[m] - csum[j] for j, m in pair_slots(n)])


def check_past_tube(zeta, margin=0.0):
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    ok = in_past_cone(zeta.imag, margin)
    if not np.all(ok):
        j = int(np.where(~ok)[0][0])
        raise TubeViolation(f"Im zeta_{j + 1} = {zeta[j].imag} is not in the open past cone")


@lru_cache(maxsize=64)
def _D_table(n, N, d):
    Ks = list(enumerate_K(n, N))
    arr = np.array([K.entries for K in Ks], dtype=np.int64).reshape(len(Ks), -1)
    D = np.array([float(coefficient_D_K(K, d)) for K in Ks])
    return arr, D


@dataclass
class WightmanValue:
    value: complex
    tail: float
    N: int
    terms: int

    def __complex__(self):
        return self.value


def wightman_tail(n, zeta, model, d, N, *, A=None, h=None, lam=1.0, extra_terms=60):
    """Bound on sum_{|K| > N} |D_K W^K(zeta)| assembled from the chain
    |D_K| <= A' h'^|K| |K|! |d_2|K||,
    |W^K| <= (n+1)^|K| C^|K| (1 + w_IR(2n|zeta|)^|K| + sum_i w_UV(lam |eta_i|)^|K|)
    and the count of K with a given |K|.  Terms are summed explicitly and the
    remainder is bounded geometrically through C~_L."""
    if model.C is None:
        model.certify()
    if A is None or h is None:
        chk = check_coefficient_condition(d)
        if not chk.ok:
            raise HypothesisViolation(f"coefficient condition fails at {chk.witness}")
        A, h = chk.A, chk.h
    Ap, hp = derived_constants(A, h, n)
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    zn = float(np.abs(zeta).max())
    etas = np.abs(zeta.imag).max(axis=1)
    wir = float(model.w_IR(2 * n * zn))
    wuv = [float(model.w_UV(lam * e)) for e in etas]
    base = (n + 1) * model.C * hp
    P = n * (n - 1) // 2

    def log_term(m):
        ld = d.log_abs(2 * m)
        if ld == -math.inf:
            return -math.inf
        envs = [0.0] + [m * math.log(w) if w > 0 else -math.inf for w in [wir] + wuv]
        env = max(envs) + math.log(sum(math.exp(e - max(envs)) for e in envs))
        return (
            math.log(count_K(n, m))
            + math.log(Ap)
            + m * math.log(base)
            + math.lgamma(m + 1)
            + ld
            + env
        )

    total = 0.0
    M = N + 1 + extra_terms
    for m in range(N + 1, M + 1):
        lt = log_term(m)
        if lt > 700:
            raise TruncationInsufficient(f"tail bound diverges at |K| = {m}")
        total += math.exp(lt)
    # remainder: k!|d_2k| <= C~_L L^-k with L = 4 * base * W, W the envelope base
    W = max([1.0, wir] + wuv)
    L = 4.0 * base * W
    CL = tilde_C(d, L)
    rem, m = 0.0, M + 1
    while True:
        t = count_K(n, m) * Ap * CL * (1 + len(wuv) + 1) * 4.0 ** (-m)
        rem += t
        if t < 1e-30 * max(rem, 1e-300) or m > M + 4000:
            break
        m += 1
    return total + rem


def wightman_eval(n, zeta, model, d, N, *, with_tail=True):
    """Truncated sum_{|K| <= N} D_K prod_{j<m} w(zeta_j + ... + zeta_(m-1))^k_jm."""
    if n < 2:
        raise InvalidInputError("need n >= 2")
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    if zeta.shape != (n - 1, model.d):
        raise InvalidInputError(f"expected {n - 1} difference vectors of dimension {model.d}")
    check_past_tube(zeta)
    w = model(pair_arguments(zeta))
    arr, D = _D_table(n, N, d)
    vals = D * np.prod(w[None, :] ** arr, axis=1)
    value = complex(np.sum(vals))
    tail = wightman_tail(n, zeta, model, d, N) if with_tail else math.nan
    return WightmanValue(value, tail, N, len(D))


def closed_form_exponential(n, zeta, model, g):
    """prod_{j<m} exp(g^2 w(zeta_j + ... + zeta_(m-1))), the sum for d_k = g^k/k!."""
    w = model(pair_arguments(np.atleast_2d(np.asarray(zeta, dtype=complex))))
    return complex(np.exp(float(g) ** 2 * np.sum(w)))


def permutation_surrogate(n, zeta, model, d, N1, N2, *, seed=0):
    """Sum the first terms of a random permutation of the |K| <= N2
    enumeration until every |K| <= N1 has appeared; returns
    (|partial - full|, tail at N1)."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    w = model(pair_arguments(zeta))
    arr, D = _D_table(n, N2, d)
    vals = D * np.prod(w[None, :] ** arr, axis=1)
    full = vals.sum()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(vals))
    small = arr.sum(axis=1) <= N1
    need = int(small.sum())
    seen, partial = 0, 0j
    for idx in order:
        partial += vals[idx]
        seen += int(small[idx])
        if seen == need:
            break
    return abs(partial - full), wightman_tail(n, zeta, model, d, N1)


def wightman_remainder(n, zeta, model, d, N, extra=25):
    """|sum over N < |K| <= N + extra| summed directly, a cancellation-free
    estimate of the truncation error."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    w = model(pair_arguments(zeta))
    arr, D = _D_table(n, N + extra, d)
    sel = arr.sum(axis=1) > N
    return float(abs(np.sum(D[sel] * np.prod(w[None, :] ** arr[sel], axis=1))))
