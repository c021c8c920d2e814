"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s``; the lines are also
collected into the terminal summary.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from idp_lab.base_systems import (
    WindowSpec,
    disjoint_union,
    moving_average_base,
    null_recurrent_walk_base,
    rigid_tower_base,
)
from idp_lab.cli import main
from idp_lab.config import load
from idp_lab.ergodic_tests import Budget, classify
from idp_lab.process import (
    alpha_stable_spec,
    char_functional,
    laplace_functional,
    leaf,
    moving_average_roundtrip,
    sample_trajectory,
    scaling_check,
)
from idp_lab.spectral import autocov_empirical, covariance_isometry_check, predict_exp_covariance, levy_sigma
from idp_lab.suspension import (
    CoordinateEvent,
    TestFunction,
    count,
    cross_integrals,
    event_mass,
    exponential_vector,
    moment_oracle,
    multiple_integral,
    multiple_integral_bruteforce,
    sample_configurations,
    window_event,
)

from conftest import ACCEPTANCE_LINES, SHIPPED, mc_close

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
DRAWS = 100_000


def report(number, title, ok, elapsed, limit, detail=""):
    status = "PASS" if ok and (limit is None or elapsed < limit) else "FAIL"
    budget = f" (limit {limit:.0f} s)" if limit is not None else ""
    line = f"criterion {number:2d} {status}  {title}  [{elapsed:.1f} s{budget}] {detail}".rstrip()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return status == "PASS"


def test_criterion_01_poisson_law():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    walk = null_recurrent_walk_base((-1, 1))
    w = WindowSpec(2, 0.5)
    counts = sample_configurations(walk, w, DRAWS, rng).counts.astype(float)
    mean_ok, mean, _ = mc_close(counts, 2.0)
    var_ok, var, _ = mc_close((counts - counts.mean()) ** 2 * DRAWS / (DRAWS - 1), 2.0)

    union = disjoint_union([walk, moving_average_base([1.0, 0.5], {"atoms": [[1.0, 1.0]]})])
    cfg = sample_configurations(union, w, DRAWS, rng)
    a = count(cfg, window_event(w, 0)).astype(float)
    b = count(cfg, window_event(w, 1)).astype(float)
    cov_ok, cov, _ = mc_close((a - a.mean()) * (b - b.mean()), 0.0)
    ok = walk.hit_mass(w) == pytest.approx(2.0) and mean_ok and var_ok and cov_ok
    assert report(1, "Poisson law of configuration counts", ok, time.perf_counter() - t0, 10,
                  f"mean={mean:.4f} var={var:.4f} cov={cov:.2e}")


def _pairs():
    w = WindowSpec(4, 0.4)
    bern = moving_average_base([1.0, 0.5], {"atoms": [[1.0, 1.0], [2.0, 0.5]]})
    walk = null_recurrent_walk_base((-2, -1, 1, 2))
    tower = rigid_tower_base(2)
    ev = CoordinateEvent
    return w, [
        (bern, TestFunction.indicator(ev((0,), 0.4), 0.5), TestFunction.indicator(ev((0, 1), 0.4), -0.3 + 0.4j)),
        (walk, TestFunction.indicator(ev((0, 2), 0.4), 0.6j), TestFunction.indicator(ev((1,), 0.4), 0.7)),
        (tower, TestFunction.indicator(ev((1, 3), 0.4, "all"), -0.5), TestFunction.indicator(ev((0, 1), 0.4), 0.4 - 0.2j)),
    ]


def test_criterion_02_exponential_vectors():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    w, pairs = _pairs()
    ok, worst = True, 0.0
    for base, h, g in pairs:
        cfg = sample_configurations(base, w, DRAWS, rng)
        eh, eg = exponential_vector(cfg, h), exponential_vector(cfg, g)
        inner = cross_integrals(base, w, [h, g])[frozenset({0, 1})]
        for samples, exact in ((eh, 1.0), (eg, 1.0), (eh * eg, np.exp(inner))):
            good, mean, se = mc_close(samples, exact)
            ok &= good
            worst = max(worst, abs(mean - exact) / se if se else 0.0)
    assert report(2, "exponential-vector identities", ok, time.perf_counter() - t0, 30,
                  f"worst deviation {worst:.2f} SE")


def test_criterion_03_chaos_isometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    base = null_recurrent_walk_base((-1, 1))
    w = WindowSpec(3, 0.5)
    ef, eg = CoordinateEvent((0, 1), 0.5), CoordinateEvent((1, 2), 0.5)
    f = TestFunction.indicator(ef, 0.8)
    g = TestFunction.indicator(eg, 1.2)
    inner = 0.8 * 1.2 * event_mass(base, [ef, eg], w)
    cfg = sample_configurations(base, w, DRAWS, rng)
    jf = {n: multiple_integral(cfg, f, n) for n in (1, 2, 3)}
    jg = {n: multiple_integral(cfg, g, n) for n in (1, 2, 3)}
    ok = True
    for n in (1, 2, 3):
        for p in (1, 2, 3):
            exact = math.factorial(n) * inner ** n if n == p else 0.0
            ok &= mc_close(jf[n] * np.conj(jg[p]), exact)[0]

    small = sample_configurations(moving_average_base([1.0, 0.5], {"atoms": [[1.0, 1.0], [2.0, 0.5]]}),
                                  WindowSpec(4, 0.4), 2000, rng)
    simple = (TestFunction.indicator(CoordinateEvent((0, 1), 0.4), 0.5)
              + TestFunction.indicator(CoordinateEvent((2,), 0.9), -1.0 + 0.5j))
    checked, exact_ok = 0, True
    for r in range(small.replicates):
        one = small.replicate(r)
        if len(one) > 12:
            continue
        checked += 1
        for n in (1, 2, 3):
            fast, slow = multiple_integral(one, simple, n), multiple_integral_bruteforce(one, simple, n)
            exact_ok &= abs(fast - slow) <= 1e-10 * max(abs(slow), 1.0)
    ok = ok and exact_ok
    assert report(3, "chaos isometry and Charlier evaluation", ok, time.perf_counter() - t0, 60,
                  f"{checked} configurations checked by enumeration")


def test_criterion_04_joint_moment_formula():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    w = WindowSpec(4, 0.4)
    ev = CoordinateEvent
    triples = [
        (moving_average_base([1.0, 0.5, 0.5], {"atoms": [[1.0, 1.0], [2.0, 0.5]]}),
         [(ev((0, 1), 0.4), 0.5), (ev((1, 2), 0.4), -0.3 + 0.2j), (ev((2,), 0.4), 0.4)]),
        (null_recurrent_walk_base((-1, 1)),
         [(ev((0,), 0.4), 0.3j), (ev((0, 1), 0.4), 0.4), (ev((1, 3), 0.4), -0.2)]),
        (rigid_tower_base(2),
         [(ev((0, 1), 0.4), 0.4), (ev((1, 2), 0.4), 0.3 - 0.3j), (ev((0, 3), 0.4, "all"), 0.5)]),
    ]
    ok = True
    for base, terms in triples:
        hs = [TestFunction.indicator(e, c) for e, c in terms]
        cfg = sample_configurations(base, w, DRAWS, rng)
        prod = np.prod([exponential_vector(cfg, h) for h in hs], axis=0)
        ok &= mc_close(prod, moment_oracle(hs, cross_integrals(base, w, hs)))[0]
    assert report(4, "joint-moment formula", ok, time.perf_counter() - t0, 30)


GRID = np.array([
    [0.5, 0.0, 0.0, 0.0],
    [0.3, -0.4, 0.0, 0.2],
    [0.0, 1.0, 0.5, 0.0],
    [-0.7, 0.0, 0.0, 0.7],
    [0.2, 0.2, 0.2, 0.2],
])


def test_criterion_05_functional_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    w = WindowSpec(4, 0.5)
    ok = True
    failures = []
    for name, make in sorted(SHIPPED.items()):
        spec = make()
        x = sample_trajectory(spec, 4, 0.5, DRAWS, rng).windows
        for a in GRID:
            good_c = mc_close(np.exp(1j * x @ a), char_functional(spec, a, w).value)[0]
            b = np.abs(a)
            good_l = mc_close(np.exp(-x @ b), laplace_functional(spec, b, w).value)[0]
            if not (good_c and good_l):
                failures.append(name)
            ok &= good_c and good_l
    assert report(5, "characteristic and Laplace functionals", ok, time.perf_counter() - t0, 120,
                  f"failures: {sorted(set(failures))}" if failures else "")


def test_criterion_06_covariance_isometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    ok = True
    for name, make in sorted(SHIPPED.items()):
        spec = make()
        if not all(lf.base.square_integrable for lf in spec.leaves()):
            continue
        batch = sample_trajectory(spec, 16, 0.5, 20_000, rng)
        ok &= covariance_isometry_check(spec, batch, 10)["pass"]
    assert report(6, "covariance isometry for |k| <= 10", ok, time.perf_counter() - t0, 60)


def test_criterion_07_transformed_covariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    n, K = 16, 10
    w = WindowSpec(n, 0.5)
    ok, worst = True, 0.0
    for name, make in sorted(SHIPPED.items()):
        spec = make()
        batch = sample_trajectory(spec, n, 0.5, 20_000, rng)
        for lam in (0.5, 1.0, 2.0):
            emp = autocov_empirical(batch, lam, K)
            pred = predict_exp_covariance(spec, lam, levy_sigma(spec, lam, K, w, by_start=True, rng=rng), w)
            for k in range(-K, K + 1):
                se = math.hypot(emp.std_error(k), pred.std_error(k))
                dev = abs(emp[k] - pred[k])
                worst = max(worst, dev / se if se else 0.0)
                ok &= dev <= 3 * se + 1e-12
    assert report(7, "exp(i lam X) covariance prediction", ok, time.perf_counter() - t0, 300,
                  f"worst deviation {worst:.2f} SE")


def test_criterion_08_four_class_behaviour():
    t0 = time.perf_counter()
    cfg = load(CONFIGS / "classify_single.json")
    b = cfg.budget
    budget = Budget(replicates=b.replicates, length=cfg.span, threshold=cfg.threshold, K=b.K,
                    schedule=b.schedule, lambdas=b.lambdas, lam=b.lam)
    seeds = np.random.SeedSequence(808).spawn(len(cfg.specs))
    reports = {name: classify(spec, budget, np.random.default_rng(s), cfg.cal)
               for (name, spec), s in zip(cfg.specs, seeds)}
    specs = dict(cfg.specs)

    ii1 = reports["ii1"]
    ii1_ok = (ii1.birkhoff_constant["statistic"] - cfg.cal.n_se * ii1.birkhoff_constant["std_error"] > 0
              and ii1.atom_at_zero["detected"])

    tower = reports["tower"]
    revivals = [r for r in tower.rigidity_revival["grid"] if r["detected"]]
    tower_ok = (tower.cesaro_decay["pass"] and bool(revivals)
                and all(v >= cfg.cal.rigidity_ratio * r["cesaro"] for r in revivals for v in r["values"]))

    walk = reports["walk"]
    walk_ok = walk.pairwise_decay["pass"] and walk.triple_decay["pass"]

    bern = reports["bernoulli"]
    est_limit = [max(cfg.cal.rel_decay * bern.pairwise_decay["abs_cov"][0], cfg.cal.n_se * se)
                 for se in bern.pairwise_decay["se"]]
    reach = len(specs["bernoulli"].base.pulse)
    immediate = all(c <= lim for c, lim in zip(bern.pairwise_decay["abs_cov"][reach:], est_limit[reach:]))
    generator, _ = moving_average_roundtrip(specs["bernoulli"])
    bern_ok = immediate and bern.inferred == "bernoulli" and generator["wandering_set"] is not None

    ok = ii1_ok and tower_ok and walk_ok and bern_ok and all(r.matches for r in reports.values())
    detail = " ".join(f"{name}={r.inferred}" for name, r in sorted(reports.items()))
    assert report(8, "four-class behaviour", ok, time.perf_counter() - t0, 600, detail)


def test_criterion_09_emergent_ergodicity_check():
    t0 = time.perf_counter()
    cfg = load(CONFIGS / "classify_composite.json")
    b = cfg.budget
    budget = Budget(replicates=b.replicates, length=cfg.span, threshold=cfg.threshold, K=b.K,
                    schedule=b.schedule, lambdas=b.lambdas, lam=b.lam)
    seeds = np.random.SeedSequence(909).spawn(len(cfg.specs))
    reports = {name: classify(spec, budget, np.random.default_rng(s), cfg.cal)
               for (name, spec), s in zip(cfg.specs, seeds)}
    without, with_ne = reports["four_without_ne"], reports["four_with_ne"]
    ok = (without.cesaro_decay["pass"] and without.birkhoff_constant["pass"]
          and not without.atom_at_zero["detected"] and without.inferred == "weakly_mixing"
          and with_ne.inferred == "nonergodic"
          and (not with_ne.birkhoff_constant["pass"] or with_ne.atom_at_zero["detected"]))
    assert report(9, "canonical four with and without the nonergodic slot", ok, time.perf_counter() - t0, 120,
                  f"without={without.inferred} with={with_ne.inferred}")


def test_criterion_10_moving_average_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    spec = leaf(moving_average_base([0.0, 1.0, -0.5, 0.25], {"atoms": [[1.0, 1.0], [-2.0, 0.5]]}), 0.1)
    w = WindowSpec(6, 0.3)
    _, rebuilt = moving_average_roundtrip(spec, w)
    a = sample_trajectory(spec, 6, 0.3, 10_000, rng).windows
    b = sample_trajectory(rebuilt, 6, 0.3, 10_000, rng).windows
    # the pair (X_0, X_1) is compared through its marginals and the two diagonal projections
    directions = ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0])
    pvalues = [stats.ks_2samp(a[:, :2] @ d, b[:, :2] @ d).pvalue for d in directions]
    ok = min(pvalues) > 0.01
    assert report(10, "moving-average round trip", ok, time.perf_counter() - t0, 60,
                  f"min p = {min(pvalues):.3f}")


def test_criterion_11_stable_scaling():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1111)
    events = [CoordinateEvent((0,), 1.0), CoordinateEvent((0, 2), 0.7, "all"), CoordinateEvent((1, 2), 2.0)]
    ok, pmin = True, 1.0
    for alpha, b in ((0.8, 2.0), (1.5, 2.0)):
        spec = alpha_stable_spec(alpha, [1.0, 0.5, -0.25])
        out = scaling_check(spec, b, events)
        ok &= all(r["rel_error"] <= 1e-12 for r in out["events"])
        ok &= out["class_invariant"] and out["wandering_set_invariant"]
        # b X truncated at eps has the law of the b^alpha-intensity process truncated at b eps
        eps, n = 0.5, 3
        x = sample_trajectory(spec, n, eps, 10_000, rng, tolerance=math.inf).windows
        boosted = leaf(spec.base.with_intensity(b ** alpha))
        y = sample_trajectory(boosted, n, b * eps, 10_000, rng, tolerance=math.inf).windows
        # one trajectory-level statistic per (alpha, b): the window sum
        p = stats.ks_2samp(b * x.sum(axis=1), y.sum(axis=1)).pvalue
        pmin = min(pmin, p)
        ok &= p > 0.01
    assert report(11, "alpha-stable scaling", ok, time.perf_counter() - t0, 120, f"min p = {pmin:.3f}")


def _cli_run(command, config, out):
    return main([command, "--config", str(config), "--seed", "12345", "--out", str(out)])


def test_criterion_12_reproducibility(tmp_path):
    t0 = time.perf_counter()
    raw = json.loads((CONFIGS / "default.json").read_text())
    raw.pop("output")
    default = tmp_path / "default.json"
    default.write_text(json.dumps(raw))
    raw = json.loads((CONFIGS / "classify_single.json").read_text())
    raw.pop("output")
    raw["budget"]["replicates"] = 2000
    single = tmp_path / "classify.json"
    single.write_text(json.dumps(raw))
    ok = True
    for command, config in (("simulate", default), ("verify", default), ("spectra", default),
                            ("classify", single)):
        codes = [_cli_run(command, config, tmp_path / f"{command}_{i}") for i in (0, 1)]
        first, second = tmp_path / f"{command}_0", tmp_path / f"{command}_1"
        names = sorted(p.name for p in first.iterdir())
        ok &= codes[0] == codes[1] and names == sorted(p.name for p in second.iterdir())
        ok &= all((first / f).read_bytes() == (second / f).read_bytes() for f in names)
    assert report(12, "byte-identical reruns", ok, time.perf_counter() - t0, None)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
