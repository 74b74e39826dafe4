"""Acceptance suite: one test per exit criterion, each printing a verdict.

Statistical criteria run on fixed-seed synthetic networks chosen to match
the published datasets' connectivity statistics; dataset-dependent
criteria run only when the corresponding files are supplied through
environment variables (QMRDX_SYMCAT_NET, QMRDX_HPO_NET, QMRDX_MUZHI_TRAIN,
QMRDX_MUZHI_TEST, QMRDX_DXY_TRAIN, QMRDX_DXY_TEST).

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines.
"""

import functools
import os
import time

import numpy as np
import pytest

from qmrdx import (
    LookaheadConfig,
    SessionConfig,
    UtilityKind,
    build_network_from_cases,
    candidate_findings,
    cheater_evaluate,
    evaluate,
    evaluate_cases,
    evaluate_dialogue,
    generate_synthetic_network,
    grid_search,
    load_dialogue_cases,
    load_network,
    lookahead_value,
    network_stats,
    outcome_probability,
    paired_se,
    posterior,
    sample_cases,
    select_next,
    utility,
)

from oracles import (
    direct_posterior,
    enumeration_posterior,
    one_hot_prior,
    two_level_value,
)
from test_inference import ev, random_evidence


def criterion(name, budget_s):
    """Wrap a test so it prints one PASS/FAIL line and honors its runtime budget."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            started = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                verdict = "SKIP" if isinstance(exc, pytest.skip.Exception) else "FAIL"
                print(f"\nACCEPTANCE {name}: {verdict}", flush=True)
                raise
            elapsed = time.monotonic() - started
            print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s)", flush=True)
            assert elapsed < budget_s, f"{name} exceeded its {budget_s}s runtime budget"

        return wrapper

    return decorate


@pytest.fixture(scope="module")
def symcat_like():
    """300 diseases, ~10 diseases per finding; activation probs in the
    published snapshot's range."""
    net = generate_synthetic_network(300, 349, 11.477, (0.2, 0.7), seed=300)
    stats = network_stats(net)
    assert abs(stats.diseases_per_finding - 10) < 1.5
    return net


@pytest.fixture(scope="module")
def hpo_like():
    """500 diseases, ~2.5 diseases per finding (sparse regime)."""
    net = generate_synthetic_network(500, 1901, 9.682, (0.1, 0.9), seed=500)
    stats = network_stats(net)
    assert abs(stats.diseases_per_finding - 2.5) / 2.5 < 0.10
    return net


@criterion("kl-ig-equivalence", budget_s=60)
def test_kl_equals_ig_across_randomized_triples():
    rng = np.random.default_rng(1001)
    checked = 0
    while checked < 1000:
        net = generate_synthetic_network(
            int(rng.integers(2, 30)),
            int(rng.integers(4, 40)),
            float(rng.uniform(2.0, 6.0)),
            (0.05, 0.95),
            seed=int(rng.integers(1 << 30)),
        )
        for _ in range(10):
            e = random_evidence(net, rng)
            free = sorted(set(range(net.n_findings)) - set(e.observed))
            if not free:
                continue
            f = int(rng.choice(free))
            kl = utility(net, e, f, UtilityKind.KL)
            ig = utility(net, e, f, UtilityKind.IG)
            assert abs(kl - ig) <= 1e-9, (kl, ig)
            checked += 1
    assert checked >= 1000


@criterion("pruning-soundness", budget_s=60)
def test_pruning_soundness_and_argmax_equivalence():
    rng = np.random.default_rng(1002)
    for _ in range(500):
        net = generate_synthetic_network(
            int(rng.integers(3, 18)),
            int(rng.integers(6, 30)),
            float(rng.uniform(2.0, 5.0)),
            (0.05, 0.95),
            seed=int(rng.integers(1 << 30)),
        )
        e = random_evidence(net, rng)
        cand = candidate_findings(net, e)
        free = sorted(set(range(net.n_findings)) - set(e.observed))
        if not free:
            continue
        scores = {f: utility(net, e, f) for f in free}
        for f in free:
            if f not in cand:
                assert scores[f] <= 1e-12, (f, scores[f])
        best_global = min(free, key=lambda f: (-scores[f], f))
        if scores[best_global] > 1e-9:
            got = select_next(net, e)
            assert got is not None and got[0] == best_global


@criterion("posterior-correctness", budget_s=60)
def test_posterior_matches_both_oracles():
    rng = np.random.default_rng(1003)
    for _ in range(150):
        net = generate_synthetic_network(
            int(rng.integers(2, 13)),
            int(rng.integers(4, 14)),
            3.0,
            (0.05, 0.95),
            seed=int(rng.integers(1 << 30)),
        )
        e = random_evidence(net, rng, max_pos=4, max_neg=4)
        mine = posterior(net, e)
        direct, degenerate = direct_posterior(net, set(e.positive), set(e.negative))
        assert mine.degenerate == degenerate
        np.testing.assert_allclose(mine.probs, direct, atol=1e-9)
        if not degenerate and net.n_diseases <= 12:
            enum = enumeration_posterior(
                net, set(e.positive), set(e.negative), one_hot_prior(net)
            )
            np.testing.assert_allclose(mine.probs, enum, atol=1e-9)


@criterion("snapshot-hand-values", budget_s=30)
def test_snapshot_hand_values(snapshot_net, snap_ids):
    post = posterior(snapshot_net, ev({snap_ids["sharp"]}))
    assert post.probs[snap_ids["aaa"]] == pytest.approx(0.44915, abs=1e-4)
    assert post.probs[snap_ids["hernia"]] == pytest.approx(0.55085, abs=1e-4)
    got = outcome_probability(snapshot_net, ev({snap_ids["sharp"]}), snap_ids["groin"])
    assert got == pytest.approx(0.17627, abs=1e-4)


@criterion("lookahead-dominance", budget_s=300)
def test_lookahead_dominance_and_exhaustive_match():
    rng = np.random.default_rng(1005)
    for trial in range(100):
        net = generate_synthetic_network(
            int(rng.integers(3, 10)),
            int(rng.integers(4, 11)),
            float(rng.uniform(2.0, 4.0)),
            (0.1, 0.9),
            seed=int(rng.integers(1 << 30)),
        )
        e = random_evidence(net, rng, max_pos=2, max_neg=1)
        cand = sorted(candidate_findings(net, e))
        for f in cand:
            v1 = lookahead_value(net, e, f, depth=1)
            v2 = lookahead_value(net, e, f, depth=2)
            assert v2 >= v1 - 1e-9, (v1, v2)
        if net.n_findings <= 10:
            for f in cand[:3]:
                want = two_level_value(net, set(e.positive), set(e.negative), f, "kl")
                got = lookahead_value(net, e, f, depth=2)
                assert got == pytest.approx(want, abs=1e-9)


@criterion("cheater-upper-bound", budget_s=900)
def test_cheater_bounds_inquiry_on_hpo_like(hpo_like):
    n = 1000
    cases = sample_cases(hpo_like, n, seed=9)
    bed = evaluate_cases(
        hpo_like, SessionConfig(max_steps=20, utility_threshold=0.01), cases
    )
    ceiling = cheater_evaluate(hpo_like, n_cases=n, seed=9, cases=cases)
    hits_cheater = [e.hit(1) for e in ceiling.episodes]
    hits_bed = [e.hit(1) for e in bed.episodes]
    se = paired_se(hits_cheater, hits_bed)
    assert ceiling.top1 >= bed.top1 - 2 * se, (ceiling.top1, bed.top1, se)
    assert abs(bed.top1 - ceiling.top1) <= 0.05, (bed.top1, ceiling.top1)


@criterion("threshold-step-trends", budget_s=1800)
def test_grid_trends_on_symcat_like(symcat_like):
    reports = grid_search(
        symcat_like,
        thresholds=[0.01, 0.05, 0.10],
        max_steps_list=[10, 15, 20],
        depth=1,
        n_cases=2000,
        seed=1,
    )
    assert len(reports) == 9
    by_cell = {(r.max_steps, r.threshold): r for r in reports}
    for max_steps in (10, 15, 20):
        row = [by_cell[(max_steps, t)].avg_steps for t in (0.01, 0.05, 0.10)]
        assert row[0] > row[1] > row[2], (max_steps, row)
    for threshold in (0.01, 0.05, 0.10):
        col = [by_cell[(n, threshold)].top1 for n in (10, 15, 20)]
        assert col[0] <= col[1] <= col[2], (threshold, col)


@criterion("two-step-improvement", budget_s=3600)
def test_two_step_beats_one_step_on_symcat_like(symcat_like):
    # equal budgets and no threshold: both depths ask exactly the same
    # number of questions, so the accuracy gap isolates question choice
    n = 2000
    cases = sample_cases(symcat_like, n, seed=2)
    one = evaluate_cases(
        symcat_like,
        SessionConfig(max_steps=8, utility_threshold=0.0,
                      lookahead=LookaheadConfig(depth=1)),
        cases,
    )
    two = evaluate_cases(
        symcat_like,
        SessionConfig(max_steps=8, utility_threshold=0.0,
                      lookahead=LookaheadConfig(depth=2)),
        cases,
    )
    se = paired_se([e.hit(1) for e in two.episodes], [e.hit(1) for e in one.episodes])
    assert two.avg_steps <= one.avg_steps, (two.avg_steps, one.avg_steps)
    assert two.top1 - one.top1 >= 2 * se, (two.top1, one.top1, se)


# ---------------------------------------------------------------------------
# Conditional criteria: real dataset files
# ---------------------------------------------------------------------------

def _env_path(var):
    path = os.environ.get(var)
    if not path or not os.path.exists(path):
        pytest.skip(f"{var} not supplied; conditional criterion skipped")
    return path


@criterion("symcat-table-cell", budget_s=3600)
def test_symcat_table_cell_with_real_data():
    path = _env_path("QMRDX_SYMCAT_NET")
    net = load_network(path, "symcat")
    report = evaluate(
        net, SessionConfig(max_steps=10, utility_threshold=0.01), 10_000, seed=0
    )
    assert report.top1 == pytest.approx(0.5789, abs=0.03)


@criterion("hpo-table-cell", budget_s=3600)
def test_hpo_table_cell_with_real_data():
    path = _env_path("QMRDX_HPO_NET")
    net = load_network(path, "symcat")
    report = evaluate(
        net, SessionConfig(max_steps=20, utility_threshold=0.01), 10_000, seed=0
    )
    assert report.top1 == pytest.approx(0.9814, abs=0.015)


@criterion("dxy-dialogue-top1", budget_s=3600)
def test_dxy_dialogue_with_real_data():
    train = _env_path("QMRDX_DXY_TRAIN")
    test = _env_path("QMRDX_DXY_TEST")
    net = build_network_from_cases(load_dialogue_cases(train), prior_mode="uniform")
    report = evaluate_dialogue(
        net,
        load_dialogue_cases(test),
        SessionConfig(max_steps=20, utility_threshold=0.01),
        unrecorded="absent",
    )
    assert report.top1 == pytest.approx(0.808, abs=0.05)
