"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every test runs the packaged scenario with its default configuration and
adds independent checks on top of the scenario's own assertions.
"""

import math
import time

import numpy as np

from irqft import scenarios
from irqft import wick_engine as we
from irqft.cli import load_config


def run_scenario(name, **overrides):
    params = load_config(name)
    params.update(overrides)
    return params, scenarios.REGISTRY[name](params, 0)


def failing(result):
    return [f"{a.name}={a.value!r}" for a in result.assertions if not a.passed]


def test_criterion_01_wick_combinatorics(acceptance):
    t0 = time.perf_counter()
    params, res = run_scenario("wick-oracle")
    elapsed = time.perf_counter() - t0
    assert params["n"] == 4 and params["kmax"] == 12
    mismatches = sum(r["mismatches"] for r in res.rows)
    ok = res.passed and mismatches == 0 and elapsed < 60
    acceptance(1, "D_K matches pairing oracle (n<=4, sum kappa<=12)", ok, f"mismatches={mismatches}, {elapsed:.1f}s")
    assert ok, failing(res)


def test_criterion_02_closed_form_series(acceptance):
    params, res = run_scenario("wightman-closed-form")
    assert params["g"] == 0.3 and params["N"] == 20 and params["points"] == 100
    worst = max(r["rel_err"] for r in res.rows)
    dominated = all(r["remainder"] <= r["tail"] for r in res.rows)
    ok = res.passed and worst < 1e-8 and dominated and len(res.rows) == 200
    acceptance(2, "partial sum matches exp(g^2 w) product, tail dominates", ok, f"max rel err={worst:.2e}")
    assert ok, failing(res)


def test_criterion_03_combinatorial_inequalities(acceptance):
    checked, violations = 0, []
    for n in range(2, 5):
        rep = we.combinatorial_inequalities(n, 8)
        checked += rep.checked
        violations += rep.violations
    # independent recount of the number of multi-indices scanned
    expected = sum(we.count_K(n, m) for n in range(2, 5) for m in range(9))
    ok = not violations and checked == expected
    acceptance(3, "multinomial inequalities for |K|<=8, n<=4", ok, f"checked={checked}")
    assert ok, violations[:5]


def test_criterion_04_coefficient_condition(acceptance):
    params, res = run_scenario("coefficient-condition")
    inv = we.check_coefficient_condition(we.CoefficientSequence("inverse_factorial"), 64)
    g2 = we.CoefficientSequence.exponential(2.0)
    gauss = we.check_coefficient_condition(we.CoefficientSequence("gaussian"), 64)
    ok = (
        res.passed
        and inv.ok
        and (inv.A, inv.h) == (1, 2)
        and we.check_coefficient_condition(g2, 64).ok
        and we.condition_holds(g2, 1, 4, 64) is None
        and not gauss.ok
        and gauss.witness is not None
    )
    acceptance(4, "coefficient condition passes 1/k!, g^k/k!; fails e^{-k^2}", ok, f"witness={gauss.witness}")
    assert ok, failing(res)


def test_criterion_05_reconstruction(acceptance):
    params, res = run_scenario("reconstruction")
    gaps = [r["gap"] for r in res.rows]
    ok = res.passed and len(gaps) == 6 and max(gaps) < 1e-6
    acceptance(5, "reconstruction identities for delta and Gaussian density", ok, f"max gap={max(gaps):.1e}")
    assert ok, failing(res)


def test_criterion_06_boundary_values(acceptance):
    params, res = run_scenario("laplace-boundary")
    at_target = [r for r in res.rows if math.isclose(max(abs(v) for v in r["y"]) / max(r["direction"]), 1e-3)]
    gaps = [r["gap"] for r in at_target]
    ok = len(params["directions"]) == 2 and len(at_target) == 2 and max(gaps) < 1e-6 and res.passed
    acceptance(6, "boundary-value gap at y=1e-3 along two directions", ok, f"max gap={max(gaps):.1e}")
    assert ok, failing(res)


def test_criterion_07_boost_intertwining(acceptance):
    params, res = run_scenario("boost-intertwine")
    worst = max(r["residual"] for r in res.rows)
    ok = res.passed and worst < 1e-4
    acceptance(7, "boost intertwining on the 5x5 probe grid", ok, f"max residual={worst:.1e}")
    assert ok, failing(res)


def test_criterion_08_example1_divergence(acceptance):
    params, res = run_scenario("example1-divergence")
    vals = [r["integral"] for r in res.rows]
    assert tuple(params["radii"]) == (1, 2, 3, 5, 8)
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    ratio = vals[-1] / vals[-2]
    cone_ok = next(a.passed for a in res.assertions if a.name.startswith("cone norm"))
    ok = increasing and ratio > 1.5 and cone_ok
    acceptance(8, "truncated integral increases with last/penultimate ratio > 1.5", ok, f"ratio={ratio:.4f}, cone norm stable={cone_ok}")
    assert ok, failing(res)


def test_criterion_09_decomposition(acceptance):
    params, res = run_scenario("decompose-demo")
    assert params["grid_points"] == 1000
    err = next(a.value for a in res.assertions if a.name == "f1 + f2 = f")
    ok = res.passed and err <= 1e-9
    acceptance(9, "f1 + f2 = f with stable certificates", ok, f"sup error={err:.1e}")
    assert ok, failing(res)


def test_criterion_10_lambda_constant(acceptance):
    params, res = run_scenario("lambda-constant")
    row = res.rows[0]
    ok = res.passed and abs(row["lambda"] - 1.0) <= 1e-6 and row["sample_min"] >= row["lambda"] - 1e-6 and params["samples"] == 100000
    acceptance(10, "lambda = 1 for the closed backward cone in R^2", ok, f"lambda={row['lambda']:.9f}, sample min={row['sample_min']:.6f}")
    assert ok, failing(res)


def test_criterion_11_chronological_ordering(acceptance):
    params, res = run_scenario("chronological-order")
    assert params["corpus_size"] == 1000
    inv = next(a for a in res.assertions if a.name.startswith("translation"))
    ok = res.passed and inv.value <= 1e-9
    acceptance(11, "ratio never below calibrated c_n, invariant under motions", ok, f"invariance err={inv.value:.1e}")
    assert ok, failing(res)


def test_criterion_12_hyperfunction_example(acceptance):
    params, res = run_scenario("hyperfunction-example")
    exact = all(math.isclose(r["ray_closed"], params["lam"] ** r["n"] * r["n"] ** r["n"] * math.exp(-r["n"]), rel_tol=1e-12) for r in res.rows)
    strips = [r["strip"] for r in res.rows if r["n"] >= 5]
    ok = res.passed and exact and all(b < a for a, b in zip(strips, strips[1:]))
    acceptance(12, "ray sup equals lambda^n n^n e^-n, strip norms decrease for n>=5", ok)
    assert ok, failing(res)


def test_criterion_13_schwinger_bound_fit(acceptance):
    params, res = run_scenario("schwinger-bounds")
    fit = res.info["fit"]
    ok = res.passed and fit["residual"] <= 0 and np.isfinite(fit["C"])
    acceptance(13, "certifying (epsilon, C) for the Schwinger bound", ok, f"epsilon={fit['epsilon']}, C={fit['C']:.4g}, residual={fit['residual']:.1e}")
    assert ok, failing(res)
