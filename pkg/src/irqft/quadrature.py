"""Mapped trapezoid rules with step halving, and their tensor products.

Every rule is a change of variables x = phi(t) applied to the trapezoid rule
on a uniform t-grid.  For integrands that are analytic in a strip around the
real t-axis and decay at both ends the trapezoid rule converges
exponentially, which is the situation for all integrands in this package
(Gaussian tails, exponential kernels, and flat factors exp(c/x) near the
boundary of a half-line).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure


@dataclass(frozen=True)
class Rule:
    """A one-dimensional mapped trapezoid rule.

    ``kind`` selects the map:

    * ``"line"``: x = sinh(pi/2 sinh t), integrates over the real line.
    * ``"halfline"``: x = exp(pi/2 sinh t), integrates over (0, inf).
    * ``"neg_exp"``: x = -exp(t), integrates over (-inf, 0); the map used
      for time axes of negative-time configurations.
    * ``"interval"``: x = (a+b)/2 + (b-a)/2 tanh(pi/2 sinh t) on (a, b).
    * ``"softplus"``: x = log(1 + e^t), integrates over (0, inf); nodes
      cluster at 0 and become uniform for large x, which suits oscillatory
      integrands with exponential decay.
    * ``"uniform"``: x = t on [t_lo, t_hi]; the plain trapezoid rule, which
      is spectrally accurate for smooth integrands that are negligible at
      both ends (including oscillatory ones such as Fourier integrands).
    """

    kind: str
    t_lo: float = -3.5
    t_hi: float = 3.5
    a: float = 0.0
    b: float = 1.0

    def nodes(self, h):
        t = np.arange(np.ceil(self.t_lo / h), np.floor(self.t_hi / h) + 1) * h
        hp = np.pi / 2
        if self.kind == "line":
            s = hp * np.sinh(t)
            x = np.sinh(s)
            w = h * hp * np.cosh(t) * np.cosh(s)
        elif self.kind == "halfline":
            s = hp * np.sinh(t)
            x = np.exp(s)
            w = h * hp * np.cosh(t) * x
        elif self.kind == "neg_exp":
            x = -np.exp(t)
            w = h * np.exp(t)
        elif self.kind == "softplus":
            x = np.logaddexp(0.0, t)
            w = h / (1.0 + np.exp(-t))
        elif self.kind == "uniform":
            x = t
            w = np.full(t.shape, h)
        elif self.kind == "interval":
            s = hp * np.sinh(t)
            c, r = 0.5 * (self.a + self.b), 0.5 * (self.b - self.a)
            x = c + r * np.tanh(s)
            w = h * r * hp * np.cosh(t) / np.cosh(s) ** 2
        else:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        keep = np.isfinite(x) & np.isfinite(w) & (w > 0)
        return x[keep], w[keep]


LINE = Rule("line")
HALFLINE = Rule("halfline", -4.0, 4.0)
NEG_TIME = Rule("neg_exp", -7.0, 5.0)
SOFTPLUS = Rule("softplus", -36.0, 40.0)


def interval(a, b):
    return Rule("interval", -3.5, 3.5, float(a), float(b))


def uniform(radius):
    return Rule("uniform", -float(radius), float(radius))


def decay_radius(f, k, *, cutoff=1e-20, r_max=256.0, n_dir=64, seed=0):
    """Smallest power-of-two radius outside of which |f| < cutoff * max|f|,
    probed along coordinate axes, diagonals and random directions."""
    rng = np.random.default_rng(seed)
    dirs = [np.eye(k), -np.eye(k), rng.standard_normal((n_dir, k))]
    D = np.concatenate(dirs)
    D /= np.abs(D).max(axis=1)[:, None]
    ts = np.linspace(0.0, 1.0, 65)
    r = 2.0
    while True:
        pts = (ts[:, None, None] * r * D[None, :, :]).reshape(-1, k)
        vals = np.abs(np.asarray(f(pts)))
        top = vals.max()
        shell = (ts >= 0.5)[:, None].repeat(D.shape[0], axis=1).ravel()
        if top == 0 or vals[shell].max() < cutoff * top or r >= r_max:
            return r
        r *= 2


def tensor_nodes(rules, h):
    """Tensor-product nodes (N x k) and weights (N,) for step ``h``."""
    xs, ws = zip(*(r.nodes(h) for r in rules))
    grids = np.meshgrid(*xs, indexing="ij")
    wgrids = np.meshgrid(*ws, indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return X, W


def integrate(fun, rules, *, h0=0.5, rtol=1e-10, atol=1e-13, max_level=7, min_level=2):
    """Integrate a vectorized ``fun(X) -> values`` over the tensor domain.

    The step is halved until two successive estimates agree to
    ``max(atol, rtol*|I|)``.  Raises :class:`NumericalFailure` when the
    budget of halvings is exhausted.
    """
    rules = list(rules)
    prev = None
    err = np.inf
    h = h0
    for level in range(max_level + 1):
        X, W = tensor_nodes(rules, h)
        val = np.tensordot(W, np.asarray(fun(X)), axes=(0, 0))
        if prev is not None and level >= min_level:
            err = np.max(np.abs(val - prev))
            if err <= max(atol, rtol * np.max(np.abs(val))):
                return val
        prev = val
        h /= 2
    raise NumericalFailure(f"quadrature did not converge (last change {err:.3e})")


def tensor_exp_sum(Wc, axes, g, block=1024):
    """out_i = sum_j g[j_1..j_k] prod_b exp(Wc[i, b] * axes[b][j_b]).

    The exponential kernel factorizes over a tensor grid, so only
    N * sum_b n_b exponentials are formed and the rest is a sequence of
    matrix contractions.
    """
    Wc = np.atleast_2d(np.asarray(Wc, dtype=complex))
    N, k = Wc.shape
    g = np.asarray(g, dtype=complex)
    sizes = [len(a) for a in axes]
    if g.shape != tuple(sizes):
        raise ValueError("weight tensor does not match the axes")
    out = np.empty(N, dtype=complex)
    for s in range(0, N, block):
        W = Wc[s : s + block]
        B = W.shape[0]
        with np.errstate(over="ignore", invalid="ignore"):
            E = np.exp(W[:, 0, None] * axes[0][None, :])
            T = E @ g.reshape(sizes[0], -1)
            for b in range(1, k):
                E = np.exp(W[:, b, None] * axes[b][None, :])
                T = np.einsum("bjr,bj->br", T.reshape(B, sizes[b], -1), E)
        out[s : s + B] = T[:, 0]
    return out


def grid_transform(out_axes, in_axes, g, coefs):
    """out[a_1..a_k] = sum_j g[j_1..j_k] prod_b exp(coefs[b] * out_axes[b][a_b] * in_axes[b][j_b]).

    Grid-to-grid version of :func:`tensor_exp_sum` for kernels that do not
    couple different axes; costs one matrix product per axis.
    """
    T = np.asarray(g, dtype=complex)
    for b, (xo, xi) in enumerate(zip(out_axes, in_axes)):
        E = np.exp(coefs[b] * np.outer(np.asarray(xo), np.asarray(xi)))
        T = np.moveaxis(np.tensordot(E, T, axes=(1, b)), 0, b)
    return T
