"""Acceptance gate: one test per release criterion.

Run with ``pytest -v tests/test_acceptance.py``: the verbose line of each
``test_criterion_*`` function is the pass/fail verdict for that criterion;
details are printed and shown by pytest on failure.

Criterion 7 is a known, intentional failure: the documented response model
adds a bounded 0/1 indicator to the linear dose term, which caps the
achievable omitted-variable bias of the unadjusted regression estimator far
below the target magnitudes (1.515 / 0.837). Every plausible unbounded
variant of the nonlinearity was probed and none reproduces the full target
pattern, so the generator keeps the documented model and this criterion
reports the measured values honestly. See the project decision log.
"""

import itertools
import math
import time

import numpy as np
import pytest

import dosematch.inference as inference
from dosematch.cover import CardinalityPenalty, full_match
from dosematch.distances import (
    DistanceMatrix,
    DosePenaltyConfig,
    UnitTable,
    apply_dose_penalty,
    mahalanobis_matrix,
)
from dosematch.graph import EdgeCover, WeightedGraph, cover_cost
from dosematch.homogeneity import (
    Measure,
    WeightingScheme,
    balance_ss,
    brute_force_optimum,
    mean_pairwise_distance,
    mu_dose,
    nu,
    nu_star,
    nu_star_min,
    weighted_measure,
)
from dosematch.inference import Alternative, ClusteredStudy, randomization_test
from dosematch.matching import min_weight_perfect_matching, optimal_pair_match
from dosematch.simulation import (
    DoseModel,
    SimulationConfig,
    generate_dataset,
    run_factorial,
    run_pair_vs_full,
)
from dosematch.subclassification import Subclass, Subclassification

from conftest import (
    brute_force_min_perfect_matching,
    random_complete_graph,
    random_metric_matrix,
)

SEED = 20260823


def graph_to_matrix(g: WeightedGraph) -> DistanceMatrix:
    vals = np.full((g.vertex_count, g.vertex_count), np.nan)
    np.fill_diagonal(vals, 0.0)
    for u, v, c in g.edges:
        vals[u, v] = vals[v, u] = c
    return DistanceMatrix(vals)


def test_criterion_01_full_match_optimality():
    """full_match attains the exact brute-force optimum of the penalized
    star objective on 200 random integer-cost graphs, within 60 s."""
    rng = np.random.default_rng(SEED)
    start = time.monotonic()
    for i in range(200):
        n = int(rng.integers(3, 9))
        lam = 0.0 if i % 2 == 0 else 3.0
        g = random_complete_graph(rng, n, low=0, high=100, integer=True)
        dm = graph_to_matrix(g)
        pi = full_match(dm, CardinalityPenalty(lam))
        val = weighted_measure(pi, dm, WeightingScheme.SUIT, Measure.NU_STAR, lam=lam)
        _, best = brute_force_optimum(dm, WeightingScheme.SUIT, Measure.NU_STAR, lam=lam)
        assert val == best, f"graph {i} (n={n}, lam={lam}): got {val}, optimum {best}"
    elapsed = time.monotonic() - start
    print(f"CRITERION 1: PASS - 200/200 exact optima in {elapsed:.1f}s")
    assert elapsed < 60.0


def test_criterion_02_perfect_matching_exactness():
    """Matching solver equals (N-1)!! enumeration on 100 random graphs."""
    rng = np.random.default_rng(SEED)
    for i in range(100):
        n = int(rng.integers(1, 6)) * 2  # 2..10
        g = random_complete_graph(rng, n, low=0, high=100, integer=True)
        res = min_weight_perfect_matching(g)
        best, _ = brute_force_min_perfect_matching(g)
        assert res.total_cost == best, f"graph {i} (n={n})"
        assert res.matching.is_perfect(n)
    print("CRITERION 2: PASS - 100/100 exact minimum perfect matchings")


def test_criterion_03_two_approximation():
    """On metric instances the algorithmic match is a strict 2-approximation
    of the pairwise-homogeneity optimum, which in turn never beats it."""
    rng = np.random.default_rng(SEED)
    for i in range(100):
        n = int(rng.integers(3, 8))
        dm = random_metric_matrix(rng, n)
        pi_alg = full_match(dm)
        val_alg = weighted_measure(pi_alg, dm, WeightingScheme.SUIT, Measure.NU)
        _, val_opt = brute_force_optimum(dm, WeightingScheme.SUIT, Measure.NU)
        assert val_opt <= val_alg * (1 + 1e-12), f"instance {i}: oracle not optimal"
        assert val_alg < 2.0 * val_opt, f"instance {i}: ratio {val_alg / val_opt}"
    print("CRITERION 3: PASS - 0 violations of the 2-approximation bound in 100 instances")


def test_criterion_04_sandwich_bounds():
    """Star/pairwise sandwich bounds hold on 1000 random subclasses."""
    rng = np.random.default_rng(SEED)
    tol = 1e-12
    for i in range(1000):
        m = int(rng.integers(2, 7))
        dm = random_metric_matrix(rng, m)
        members = tuple(range(m))
        star_min, _ = nu_star_min(members, dm)
        pairwise = nu(members, dm)
        assert star_min <= pairwise * (1 + tol), f"subclass {i}"
        for ref in members:
            bound = 2.0 * (m - 1) / m * nu_star(members, ref, dm)
            assert pairwise <= bound * (1 + tol), f"subclass {i}, ref {ref}"
        # same bounds for the weighted measures on a one-block subclassification
        pi = Subclassification((Subclass(members, reference=0),), unit_count=m)
        for scheme in WeightingScheme:
            lo = weighted_measure(pi, dm, scheme, Measure.NU_STAR_MIN)
            mid = weighted_measure(pi, dm, scheme, Measure.NU)
            assert lo <= mid * (1 + tol) and mid < 2.0 * lo * (1 + tol), f"subclass {i}"
        if m == 2:
            assert abs(pairwise - star_min) <= tol * max(pairwise, star_min)
    print("CRITERION 4: PASS - sandwich bounds exact on 1000 random subclasses")


def test_criterion_05_worked_example_fixtures():
    """Hand-computed example values reproduce exactly."""
    eight = WeightedGraph(
        8,
        (
            (5, 7, 1.0), (3, 5, 1.5), (3, 6, 2.0), (1, 2, 3.0), (0, 4, 4.0),
            (0, 1, 1.0), (0, 2, 4.0), (4, 5, 3.0),
            (0, 5, 5.0), (1, 5, 5.0), (0, 6, 5.0), (1, 3, 5.0), (6, 7, 5.0),
        ),
    )
    assert cover_cost(eight, EdgeCover(((3, 5), (5, 7), (1, 2), (3, 6), (0, 4)))) == 11.5
    assert cover_cost(eight, EdgeCover(((0, 1), (0, 2), (1, 2), (5, 7), (3, 6), (4, 5)))) == 14.0

    # two tight blocks of three: full matching recovers the blocks
    vals = np.full((6, 6), 100.0)
    for block in ((0, 1, 2), (3, 4, 5)):
        for i, j in itertools.combinations(block, 2):
            vals[i, j] = vals[j, i] = 1.0
    np.fill_diagonal(vals, 0.0)
    pi = full_match(DistanceMatrix(vals))
    assert pi.member_sets() == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}

    # dose-separation worked example
    assert mu_dose((0, 1, 2), 0, np.array([0.8, 0.5, 0.2])) == pytest.approx(0.45, rel=1e-12)

    # balance worked example: high mean 1.5, low mean 1.75 (exact floats)
    u = UnitTable(
        ("a", "b", "c", "d", "e"),
        np.array([0.1, 0.2, 0.3, 0.4, 0.5]),
        np.array([[1.5], [2.0], [1.0], [1.5], [2.0]]),
    )
    high = u.covariates[u.dose >= np.median(u.dose)].mean()
    low = u.covariates[u.dose < np.median(u.dose)].mean()
    assert (high, low) == (1.5, 1.75)
    one = Subclassification((Subclass((0, 1, 2, 3, 4), reference=0),), unit_count=5)
    assert balance_ss(one, u) == (1.75 - 1.5) ** 2
    print("CRITERION 5: PASS - all worked-example fixtures exact")


def test_criterion_06_mean_pairwise_distance_is_10():
    """Mean pairwise squared Mahalanobis distance equals 2d (= 10 at d=5)."""
    cfg = SimulationConfig(
        d=5, n=2000, dose_model=DoseModel.UNIFORM01, c=-2.0, a=0.5, b=-0.5, seed=SEED
    )
    u, _ = generate_dataset(cfg)
    mean = mean_pairwise_distance(mahalanobis_matrix(u, squared=True))
    print(f"CRITERION 6: {'PASS' if abs(mean - 10) <= 0.5 else 'FAIL'} - mean distance {mean:.6f}")
    assert mean == pytest.approx(10.0, abs=0.5)


def test_criterion_07_factorial_bias_targets():
    """KNOWN FAILURE (kept honest): the documented bounded-indicator response
    model yields near-zero estimator bias in every cell, so the external
    target magnitudes (bias(REG)=1.515, bias(REG_MATCH)=0.837 in the
    Exponential/c=2 cell) and the bias/MSE orderings are unattainable."""
    start = time.monotonic()
    base = dict(d=5, n=500, a=0.5, b=-0.5, replications=200, seed=SEED)
    cells = [
        SimulationConfig(dose_model=DoseModel.MULTILEVEL_U5, c=-2.0, **base),
        SimulationConfig(dose_model=DoseModel.UNIFORM_SHIFTED, c=2.0, **base),
        SimulationConfig(dose_model=DoseModel.EXPONENTIAL1, c=-2.0, **base),
        SimulationConfig(dose_model=DoseModel.EXPONENTIAL1, c=2.0, **base),
    ]
    rows = run_factorial(cells)
    failures = []
    for row in rows:
        cfg = row["config"]
        reg, match = row["reg"], row["reg_match"]
        label = f"{cfg.dose_model.value}/c={cfg.c:+g}"
        print(
            f"  {label}: bias_reg={reg.bias:+.4f} bias_match={match.bias:+.4f} "
            f"mse_reg={reg.mse:.4f} mse_match={match.mse:.4f} failures={row['failures']}"
        )
        assert row["failures"] == 0
        if not abs(match.bias) < abs(reg.bias):
            failures.append(f"{label}: |bias| not reduced by matching")
        if not match.mse < reg.mse:
            failures.append(f"{label}: MSE not reduced by matching")
    exp_cell = rows[3]
    if not abs(exp_cell["reg"].bias - 1.515) <= 0.15:
        failures.append(f"exp/c=+2: bias(REG) {exp_cell['reg'].bias:+.4f} not in 1.515 +/- 0.15")
    if not abs(exp_cell["reg_match"].bias - 0.837) <= 0.20:
        failures.append(
            f"exp/c=+2: bias(REG_MATCH) {exp_cell['reg_match'].bias:+.4f} not in 0.837 +/- 0.20"
        )
    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    verdict = "PASS" if not failures else "FAIL"
    print(f"CRITERION 7: {verdict} - {len(failures)} unmet sub-assertions in {elapsed:.0f}s")
    assert not failures, (
        "known failure, documented in the decision log: the bounded indicator "
        "in the response model cannot generate the target bias magnitudes; "
        "unmet sub-assertions: " + "; ".join(failures)
    )


def test_criterion_08_pair_vs_full_comparison():
    """At the widest dose caliper, full matching beats pair matching on
    balance and on all four homogeneity summaries; set count shrinks with
    the caliper; balance magnitudes land within 25% of the targets."""
    cfg = SimulationConfig(
        d=5, n=2000, dose_model=DoseModel.UNIFORM01, c=-2.0, a=0.5, b=-0.5, seed=SEED
    )
    res = run_pair_vs_full(cfg, tau0_grid=(0.0, 0.1, 0.2, 0.3, 0.4), lam=0.0, C=100000.0)
    by_tau = {row["tau0"]: row for row in res["rows"]}
    last = by_tau[0.4]
    ss_pair, ss_full = last["pair"].ss, last["full"].ss
    counts = [len(by_tau[t]["full_pi"]) for t in (0.0, 0.1, 0.2, 0.3, 0.4)]
    print(
        f"CRITERION 8: ss_pair={ss_pair:.4f} (target 0.389 +/- 25%), "
        f"ss_full={ss_full:.4f} (target 0.105 +/- 25%), full |Pi|={counts}"
    )
    assert ss_full < ss_pair
    for name in ("hm1", "hm2", "hm3", "hm4"):
        assert getattr(last["full"], name) <= getattr(last["pair"], name), name
    assert all(a > b for a, b in zip(counts, counts[1:])), f"|Pi| not strictly decreasing: {counts}"
    assert abs(ss_pair - 0.389) <= 0.25 * 0.389
    assert abs(ss_full - 0.105) <= 0.25 * 0.105
    print("CRITERION 8: PASS")


def test_criterion_09_lambda_sweep():
    """The set count grows with the cardinality penalty and reaches n/2."""
    cfg = SimulationConfig(
        d=3, n=1000, dose_model=DoseModel.UNIFORM01, c=-2.0, a=0.8, b=0.5,
        beta=1.0, intercept=2.0, seed=SEED,
    )
    u, _ = generate_dataset(cfg)
    dm = apply_dose_penalty(
        mahalanobis_matrix(u, squared=True), u, DosePenaltyConfig(C=100000.0, tau0=0.3)
    )
    counts = [len(full_match(dm, CardinalityPenalty(lam))) for lam in (0.01, 0.1, 1.0, 10.0, 100.0)]
    print(f"CRITERION 9: |Pi| over the lambda sweep = {counts}")
    assert all(a <= b for a, b in zip(counts, counts[1:])), counts
    assert counts[-1] == 500
    print("CRITERION 9: PASS")


def test_criterion_10_randomization_test_level(monkeypatch):
    """The test holds its level on null data, and sampling agrees with
    exhaustive enumeration within Monte Carlo error."""
    rng = np.random.default_rng(777)
    rejections = 0
    n_studies = 1000
    for s in range(n_studies):
        sets = []
        for k in range(50):
            m = int(rng.integers(2, 4))
            zs = rng.permutation(np.arange(m, dtype=float))
            rs = rng.normal(size=m)
            sets.append(tuple((f"c{k}_{i}", float(z), float(r)) for i, (z, r) in enumerate(zip(zs, rs))))
        res = randomization_test(
            ClusteredStudy(tuple(sets)), draws=1000, seed=s, alternative=Alternative.LESS
        )
        assert not res.exhaustive
        if res.p_value <= 0.05:
            rejections += 1
    rate = rejections / n_studies
    print(f"CRITERION 10: null rejection rate {rate:.3f} (need 0.03..0.07)")
    assert 0.03 <= rate <= 0.07

    # exhaustive vs sampled agreement on small instances (6 sets of 3)
    for seed in range(5):
        rng = np.random.default_rng((SEED, seed))
        sets = []
        for k in range(6):
            zs = rng.normal(size=3)
            rs = rng.normal(size=3)
            sets.append(tuple((f"c{k}_{i}", float(z), float(r)) for i, (z, r) in enumerate(zip(zs, rs))))
        s = ClusteredStudy(tuple(sets))
        exact = randomization_test(s, alternative=Alternative.LESS)
        assert exact.exhaustive and exact.draws == 6**6
        with monkeypatch.context() as mp:
            mp.setattr(inference, "EXHAUSTIVE_LIMIT", 0)
            sampled = randomization_test(s, draws=100000, seed=seed, alternative=Alternative.LESS)
        se = math.sqrt(exact.p_value * (1 - exact.p_value) / sampled.draws)
        diff = abs(sampled.p_value - exact.p_value)
        assert diff <= 3 * se + 1e-12, f"instance {seed}: diff {diff:.2e} > 3 SE {3 * se:.2e}"
    print("CRITERION 10: PASS")
