"""Scenario registry.  Each scenario takes a parameter map and a seed and
returns table rows plus named assertions."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import euclid as eu
from . import gs_spaces as gs
from . import laplace as lp
from . import wick_engine as we
from .cone_geometry import Cone


@dataclass
class Assertion:
    name: str
    passed: bool
    value: object = None
    bound: object = None

    def to_json(self):
        return {"name": self.name, "pass": bool(self.passed), "value": _plain(self.value), "bound": _plain(self.bound)}


@dataclass
class ScenarioResult:
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(a.passed for a in self.assertions)

    def check(self, name, passed, value=None, bound=None):
        self.assertions.append(Assertion(name, bool(passed), value, bound))


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


REGISTRY = {}


def scenario(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn

    return deco


def coefficient_sequence(spec):
    """'exponential:0.3', 'inverse_factorial', 'gaussian', 'ones' or a list."""
    if isinstance(spec, (list, tuple)):
        return we.CoefficientSequence.from_list(spec)
    kind, _, arg = str(spec).partition(":")
    if kind == "exponential":
        return we.CoefficientSequence.exponential(float(arg) if arg else 1.0)
    return we.CoefficientSequence(kind)


# --------------------------------------------------------------------------


@scenario("example1-divergence")
def example1_divergence(p, seed):
    res = ScenarioResult()
    vals = []
    for R in p["radii"]:
        v = gs.example1_divergence(R)
        vals.append(v)
        res.rows.append({"R": R, "integral": v})
    res.check("strictly increasing", all(b > a for a, b in zip(vals, vals[1:])), vals)
    ratio = vals[-1] / vals[-2]
    res.check("last/penultimate ratio", ratio > p["ratio_min"], ratio, p["ratio_min"])
    f = gs.TestFunction.from_strings(2, "1", "-w1^2 - w2^3")
    params = gs.GSParams(p["alpha"], p["beta"], p["A"], p["B"])
    rep = gs.cone_norm(f, Cone.box([0, 1]), params, p["cone_R"], seed=seed)
    res.info["cone_norm"] = rep.to_json()
    res.check("cone norm over R x R+ stable", rep.stable, rep.value)
    return res


@scenario("decompose-demo")
def decompose_demo(p, seed):
    res = ScenarioResult()
    f = gs.TestFunction.from_strings(1, "1", p["Q"])
    params = gs.GSParams(p["alpha"], p["beta"], p["A"], p["B"])
    dec = gs.decompose(f, Cone.zero(1), None, Cone.box([1]), Cone.box([-1]), params, R=p["R"])
    x = np.linspace(-p["grid_radius"], p["grid_radius"], p["grid_points"])[:, None]
    err = float(np.max(np.abs(dec.f1(x) + dec.f2(x) - f(x))))
    for xi, a, b in zip(x[:, 0], dec.f1(x), dec.f2(x)):
        res.rows.append({"x": xi, "f1": a.real, "f2": b.real})
    res.check("f1 + f2 = f", err <= p["tol"], err, p["tol"])
    for key in ("f1_norm", "f2_norm"):
        rep = dec.certificate[key]
        res.check(f"{key} stable", rep.stable, rep.value)
    res.info["A1"] = dec.certificate["A1"]
    res.info["theta1"] = dec.certificate["theta1"]
    return res


@scenario("laplace-boundary")
def laplace_boundary(p, seed):
    res = ScenarioResult()
    u = lp.Functional(2, (lp.Density(lambda P: np.exp(-P.sum(axis=1)), Cone.box([1, 1]), 1.0, "exp(-p1-p2)"),))
    f = lambda X: np.exp(-np.sum(X**2, axis=1))
    V = Cone.box([1, 1], open=True)
    for direction in p["directions"]:
        ys = [np.asarray(direction, float) * s for s in p["scales"]]
        rep = lp.boundary_value_check(u, f, ys, None, V)
        for r in rep.to_rows():
            r["direction"] = list(direction)
            res.rows.append({k: (v if not isinstance(v, complex) else abs(v)) for k, v in r.items()})
        res.check(f"identity gap along {list(direction)}", rep.max_gap < p["tol"], rep.max_gap, p["tol"])
        res.check(f"limit gap shrinks along {list(direction)}", rep.tail_monotone, rep.final_limit_gap)
    return res


@scenario("check-transform")
def check_transform_scenario(p, seed):
    res = ScenarioResult()
    point = tuple(p["point"])
    u = lp.Functional.delta(point)
    for f in eu.sigma_family():
        lhs = eu.reconstruction_lhs(u, f)
        plus = lp.check_transform(f, [point])[0]
        minus = lp.check_transform(f, [point], spatial_sign=-1)[0]
        res.rows.append({"f": f.label, "lhs": abs(lhs), "gap_plus": abs(lhs - plus), "gap_minus": abs(lhs - minus)})
        res.check(f"spatial sign +1 for {f.label}", abs(lhs - plus) < p["tol"], abs(lhs - plus), p["tol"])
    return res


@scenario("wick-oracle")
def wick_oracle(p, seed):
    res = ScenarioResult()
    t0 = time.perf_counter()
    for n in range(2, p["n"] + 1):
        checked, bad = we.compare_with_oracle(n, p["kmax"])
        res.rows.append({"n": n, "kmax": p["kmax"], "kappas": checked, "mismatches": len(bad)})
        res.check(f"n={n} zero mismatches", not bad, len(bad), 0)
    elapsed = time.perf_counter() - t0
    res.check("runtime", elapsed < p["time_limit"], elapsed, p["time_limit"])
    return res


@scenario("coefficient-condition")
def coefficient_condition(p, seed):
    res = ScenarioResult()
    expected = dict(p["expected"])
    for spec in p["sequences"]:
        d = coefficient_sequence(spec)
        chk = we.check_coefficient_condition(d, p["kmax"])
        res.rows.append({"sequence": spec, "ok": chk.ok, "A": chk.A, "h": chk.h, "witness": chk.witness})
        want = expected.get(spec)
        res.check(f"{spec} outcome", chk.ok == want, chk.ok, want)
        if not chk.ok:
            res.check(f"{spec} witness", chk.witness is not None, chk.witness)
    return res


@scenario("convergence-bound")
def convergence_bound(p, seed):
    res = ScenarioResult()
    grid = np.geomspace(*p["grid"])
    env = lambda r: math.log(2 + r)
    good = we.convergence_bound_check(we.CoefficientSequence("inverse_factorial"), env, "IR", p["alpha"], p["L"], p["epsilon"], grid)
    res.rows.append({"sequence": "inverse_factorial", "ok": good.ok, "C": good.C})
    res.check("1/k! admits a finite C", good.ok, good.C)
    # (2 + r)^L majorizes the series since k!/(2k)! <= 1/k!
    maj = max(v / (2 + r) ** p["L"] for v, r in zip(good.values, grid))
    res.check("closed-form majorant", maj <= 1 + 1e-12, maj, 1.0)
    bad = we.convergence_bound_check(we.CoefficientSequence("ones"), env, "IR", p["alpha"], p["L"], p["epsilon"], grid)
    res.rows.append({"sequence": "ones", "ok": bad.ok, "C": bad.C})
    res.check("d_k = 1 diverges", not bad.ok, bad.witness)
    Ct = we.tilde_C(we.CoefficientSequence("inverse_factorial"), p["L"])
    res.info["tilde_C"] = Ct
    ks = np.arange(0, 60)
    ok = all(math.factorial(k) / math.factorial(2 * k) <= Ct * p["L"] ** (-k) * (1 + 1e-12) for k in ks)
    res.check("k!|d_2k| <= C~ L^-k", ok, Ct)
    return res


@scenario("lambda-constant")
def lambda_constant(p, seed):
    res = ScenarioResult()
    V = Cone.light_cone(p["d"], future=False, n_facets=p["n_facets"])
    lam, smin = we.lambda_constant(V, p["max_terms"], norm=p["norm"], samples=p["samples"], seed=seed)
    res.rows.append({"d": p["d"], "norm": p["norm"], "lambda": lam, "sample_min": smin})
    if p.get("expected") is not None:
        res.check("lambda value", abs(lam - p["expected"]) <= p["tol"], lam, p["expected"])
    res.check("certificate never undercuts", smin >= lam - p["tol"], smin, lam)
    return res


@scenario("wightman-closed-form")
def wightman_closed_form(p, seed):
    res = ScenarioResult()
    model = we.get_model(p["model"])
    d = we.CoefficientSequence.exponential(p["g"])
    rng = np.random.default_rng(seed)
    worst_rel, worst_dom = 0.0, True
    for n in p["n_values"]:
        for i in range(p["points"]):
            X = rng.uniform(-2, 2, (n - 1, model.d))
            Y = model.sample_subcone(n - 1, rng, tuple(p["imag_range"]))
            z = X + 1j * Y
            v = we.wightman_eval(n, z, model, d, p["N"])
            exact = we.closed_form_exponential(n, z, model, p["g"])
            rel = abs(v.value - exact) / abs(exact)
            rem = we.wightman_remainder(n, z, model, d, p["N"])
            worst_rel = max(worst_rel, rel)
            worst_dom &= rem <= v.tail
            res.rows.append({"n": n, "i": i, "value_re": v.value.real, "value_im": v.value.imag, "rel_err": rel, "remainder": rem, "tail": v.tail})
    res.check("relative error", worst_rel < p["rtol"], worst_rel, p["rtol"])
    res.check("tail dominates remainder", worst_dom)
    return res


def _euclid_config(p):
    model = we.get_model(p["model"])
    return eu.EuclidConfig(model.d, p["n"], model, coefficient_sequence(p["coeffs"]), p["alpha"], p["beta"])


@scenario("schwinger-bounds")
def schwinger_bounds(p, seed):
    res = ScenarioResult()
    cfg = _euclid_config(p)
    grid = eu.schwinger_grid(p["n_time"], p["n_space"], p["radius"], p["t_min"])
    fit = eu.bound_fit_S(cfg, grid, p["epsilon"], N=p["N"])
    fit2 = eu.bound_fit_S(cfg, grid, 2 * p["epsilon"], N=p["N"])
    res.rows = fit.rows
    res.info["fit"] = fit.to_json()
    res.check("residual <= 0", fit.residual <= 0, fit.residual, 0.0)
    res.check("doubling epsilon does not increase C", fit2.C <= fit.C, fit2.C, fit.C)
    direct = eu.two_point_direct_check(cfg.model, grid)
    res.check("single-term two-point bound", direct <= 1.0, direct, 1.0)
    return res


@scenario("chronological-order")
def chronological_order(p, seed):
    res = ScenarioResult()
    corpus = eu.calibration_corpus(p["corpus_size"], seed)
    c = eu.calibrate_chronological(corpus)
    for n, cn in sorted(c.items()):
        res.rows.append({"n": n, "c_n": cn, "floor": eu.chronological_floor(n)})
        res.check(f"c_{n} above proven floor", cn >= eu.chronological_floor(n) - 1e-12, cn, eu.chronological_floor(n))
    rng = np.random.default_rng(seed + 1)
    worst_inv, below = 0.0, 0
    for x in corpus:
        n, d = x.shape
        r = eu.chronological_order(x, d).ratio
        below += r < c[n] - 1e-12
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        r2 = eu.chronological_order(x @ Q.T + rng.standard_normal(d), d).ratio
        worst_inv = max(worst_inv, abs(r - r2))
    res.check("never below c_n", below == 0, below, 0)
    res.check("translation/rotation invariance", worst_inv <= p["tol"], worst_inv, p["tol"])
    # fresh configurations must also respect the calibrated constants
    fresh = eu.calibration_corpus(p["fresh_size"], seed + 2)
    low = min(eu.chronological_order(x, x.shape[1]).ratio - c[x.shape[0]] for x in fresh)
    res.info["fresh_min_margin"] = low
    return res


@scenario("reconstruction")
def reconstruction(p, seed):
    res = ScenarioResult()
    t0 = time.perf_counter()
    funcs = eu.sigma_family()
    us = {"delta": lp.Functional.delta(tuple(p["point"])), "density": eu.gaussian_density()}
    for uname, u in us.items():
        for f in funcs:
            r = eu.reconstruction_check(u, f)
            res.rows.append({"u": uname, "f": f.label, "lhs_re": r.lhs.real, "lhs_im": r.lhs.imag, "rhs_re": r.rhs.real, "rhs_im": r.rhs.imag, "gap": r.gap})
            res.check(f"{uname} / {f.label}", r.gap < p["tol"], r.gap, p["tol"])
    elapsed = time.perf_counter() - t0
    res.check("runtime", elapsed < p["time_limit"], elapsed, p["time_limit"])
    return res


@scenario("boost-intertwine")
def boost_intertwine(p, seed):
    res = ScenarioResult()
    for f in eu.sigma_family():
        r, lhs, rhs = eu.boost_intertwine_check(f, 1, step=p["step"])
        res.rows.append({"f": f.label, "residual": r})
        res.check(f"residual for {f.label}", r < p["tol"], r, p["tol"])
    return res


@scenario("hyperfunction-example")
def hyperfunction_example(p, seed):
    res = ScenarioResult()
    strips = {}
    for n in p["n_values"]:
        strip, ray = gs.hyperfunction_example(n, p["epsilon"], p["A"], p["B"], p["lam"])
        ray_num = gs.hyperfunction_ray_sup(n, p["lam"])
        strips[n] = strip
        res.rows.append({"n": n, "strip": strip, "ray_closed": ray, "ray_numeric": ray_num})
        res.check(f"ray sup n={n}", abs(ray_num - ray) <= 1e-9 * ray, ray_num, ray)
    tail = [strips[n] for n in sorted(strips) if n >= p["decrease_from"]]
    res.check("strip norms decrease", all(b < a for a, b in zip(tail, tail[1:])), tail)
    return res
