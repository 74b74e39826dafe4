"""Batch evaluation: episode runner, accuracy metrics, and grids.

Episodes are independent given their per-case random stream, so results
are identical at any worker count; aggregation works on integer hit and
step counts, never on float accumulation order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .inference import Evidence, posterior, top_k
from .inquiry import LookaheadConfig, UtilityKind
from .network import DialogueCase, QmrNetwork
from .session import Diagnose, Session, SessionConfig
from .simulate import SimulatedCase, patient_answer, sample_case, case_rng

AnswerPolicy = Callable[[int], Optional[bool]]
Case = Union[SimulatedCase, DialogueCase]

RANKING_DEPTH = 5  # metrics go down to top-5


@dataclass(frozen=True)
class EpisodeResult:
    true_disease: int
    ranked: tuple[int, ...]
    steps: int
    degenerate: bool
    unknown_disease: bool = False  # dialogue case for a disease the net lacks

    def hit(self, k: int) -> bool:
        return self.true_disease in self.ranked[:k]


@dataclass(frozen=True)
class EvalReport:
    top1: float
    top3: float
    top5: float
    avg_steps: float
    n_cases: int
    threshold: float
    max_steps: int
    depth: int
    utility: str
    seed: Optional[int]
    top1_ci: tuple[float, float]
    top3_ci: tuple[float, float]
    top5_ci: tuple[float, float]
    n_degenerate: int = 0
    n_unknown_disease: int = 0
    episodes: tuple[EpisodeResult, ...] = field(default=(), repr=False)


def _binomial_ci(p: float, n: int) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    half = 1.96 * math.sqrt(p * (1.0 - p) / n)
    return (max(0.0, p - half), min(1.0, p + half))


def paired_se(hits_a: Sequence[bool], hits_b: Sequence[bool]) -> float:
    """Standard error of the mean accuracy difference on a shared cohort."""
    if len(hits_a) != len(hits_b):
        raise ValueError("paired comparison needs equal-length hit vectors")
    n = len(hits_a)
    if n < 2:
        return float("inf")
    diffs = [int(a) - int(b) for a, b in zip(hits_a, hits_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    return math.sqrt(var / n)


def dialogue_setup(
    net: QmrNetwork, case: DialogueCase, unrecorded: str
) -> tuple[Evidence, AnswerPolicy]:
    """Initial evidence from the volunteered findings; answers from the
    questioned ones. Findings the network does not know are skipped.
    Inquiries about findings the record never mentions are answered
    "absent" or "unknown" per the ``unrecorded`` protocol flag.
    """
    if unrecorded not in ("absent", "skip"):
        raise ValueError(f"unrecorded mode must be 'absent' or 'skip', got {unrecorded!r}")
    pos, neg = set(), set()
    for name, present in case.explicit.items():
        if net.has_finding(name):
            (pos if present else neg).add(net.finding_id(name))
    recorded = {
        net.finding_id(name): present
        for name, present in case.implicit.items()
        if net.has_finding(name)
    }
    default: Optional[bool] = False if unrecorded == "absent" else None

    def policy(finding_id: int) -> Optional[bool]:
        return recorded.get(finding_id, default)

    return Evidence(frozenset(pos), frozenset(neg)), policy


def run_episode(
    net: QmrNetwork,
    cfg: SessionConfig,
    case: Case,
    answer_policy: AnswerPolicy | None = None,
    unrecorded: str = "absent",
) -> EpisodeResult:
    """Drive one session from the case's opening evidence to diagnosis."""
    if isinstance(case, SimulatedCase):
        true_disease = case.true_disease
        initial = Evidence(positive=frozenset({case.initial_positive}))
        policy = answer_policy or (lambda f: patient_answer(case, f))
    else:
        if not net.has_disease(case.disease_name):
            return EpisodeResult(-1, (), 0, False, unknown_disease=True)
        true_disease = net.disease_id(case.disease_name)
        initial, default_policy = dialogue_setup(net, case, unrecorded)
        policy = answer_policy or default_policy

    session = Session(net, cfg, initial)
    while True:
        decision = session.next_suggestion()
        if isinstance(decision, Diagnose):
            diagnosis = session.finalize(decision.reason)
            break
        session.answer(decision.finding_id, policy(decision.finding_id))

    depth_k = min(net.n_diseases, max(RANKING_DEPTH, cfg.top_k))
    ranked = tuple(j for j, _ in top_k(diagnosis.posterior, depth_k))
    return EpisodeResult(true_disease, ranked, diagnosis.steps, diagnosis.posterior.degenerate)


def _aggregate(
    episodes: Sequence[EpisodeResult],
    cfg: SessionConfig,
    seed: Optional[int],
) -> EvalReport:
    n = len(episodes)
    hits = {k: sum(e.hit(k) for e in episodes) for k in (1, 3, 5)}
    steps_total = sum(e.steps for e in episodes)
    accs = {k: hits[k] / n if n else 0.0 for k in hits}
    return EvalReport(
        top1=accs[1],
        top3=accs[3],
        top5=accs[5],
        avg_steps=steps_total / n if n else 0.0,
        n_cases=n,
        threshold=cfg.utility_threshold,
        max_steps=cfg.max_steps,
        depth=cfg.lookahead.depth,
        utility=cfg.lookahead.utility_kind.value,
        seed=seed,
        top1_ci=_binomial_ci(accs[1], n),
        top3_ci=_binomial_ci(accs[3], n),
        top5_ci=_binomial_ci(accs[5], n),
        n_degenerate=sum(e.degenerate for e in episodes),
        n_unknown_disease=sum(e.unknown_disease for e in episodes),
        episodes=tuple(episodes),
    )


def _episode_chunk(args) -> list[EpisodeResult]:
    net, cfg, seed, indices = args
    out = []
    for i in indices:
        case = sample_case(net, case_rng(seed, i))
        out.append(run_episode(net, cfg, case))
    return out


def evaluate(
    net: QmrNetwork,
    cfg: SessionConfig,
    n_cases: int,
    seed: int,
    workers: int = 1,
) -> EvalReport:
    """Run ``n_cases`` simulated episodes; deterministic for a fixed seed."""
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    indices = list(range(n_cases))
    if workers <= 1:
        episodes = _episode_chunk((net, cfg, seed, indices))
    else:
        chunks = [
            (net, cfg, seed, indices[w::workers]) for w in range(workers)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            interleaved = list(pool.map(_episode_chunk, chunks))
        # stitch the strided chunks back into case-index order
        episodes = [None] * n_cases
        for w, chunk in enumerate(interleaved):
            for slot, episode in zip(indices[w::workers], chunk):
                episodes[slot] = episode
    return _aggregate(episodes, cfg, seed)


def evaluate_cases(
    net: QmrNetwork,
    cfg: SessionConfig,
    cases: Sequence[SimulatedCase],
    seed: Optional[int] = None,
) -> EvalReport:
    """Evaluate a fixed cohort (shared cohorts make paired comparisons)."""
    episodes = [run_episode(net, cfg, case) for case in cases]
    return _aggregate(episodes, cfg, seed)


def cheater_evaluate(
    net: QmrNetwork,
    n_cases: int,
    seed: int,
    cases: Sequence[SimulatedCase] | None = None,
) -> EvalReport:
    """Accuracy with every finding's true state observed and zero inquiries.

    No strategy on the same network can beat this in expectation, so it
    serves as the empirical accuracy ceiling for a cohort.
    """
    if cases is None:
        cases = [sample_case(net, case_rng(seed, i)) for i in range(n_cases)]
    all_ids = frozenset(range(net.n_findings))
    episodes = []
    for case in cases:
        pos = frozenset(int(i) for i in case.finding_states.nonzero()[0])
        post = posterior(net, Evidence(pos, all_ids - pos))
        depth_k = min(net.n_diseases, RANKING_DEPTH)
        ranked = tuple(j for j, _ in top_k(post, depth_k))
        episodes.append(
            EpisodeResult(case.true_disease, ranked, 0, post.degenerate)
        )
    cfg = SessionConfig(max_steps=0, utility_threshold=0.0)
    return _aggregate(episodes, cfg, seed)


def grid_search(
    net: QmrNetwork,
    thresholds: Sequence[float],
    max_steps_list: Sequence[int],
    depth: int,
    n_cases: int,
    seed: int,
    utility_kind: UtilityKind = UtilityKind.KL,
    top_k_rank: int = 5,
) -> list[EvalReport]:
    """One report per (threshold, max_steps) cell, all cells sharing a
    single sampled cohort so differences between cells are paired."""
    if not thresholds or not max_steps_list:
        raise ValueError("grids must be non-empty")
    cases = [sample_case(net, case_rng(seed, i)) for i in range(n_cases)]
    reports = []
    for max_steps in max_steps_list:
        for threshold in thresholds:
            cfg = SessionConfig(
                max_steps=max_steps,
                utility_threshold=threshold,
                lookahead=LookaheadConfig(depth=depth, utility_kind=utility_kind),
                top_k=top_k_rank,
            )
            reports.append(evaluate_cases(net, cfg, cases, seed))
    return reports


def evaluate_dialogue(
    net: QmrNetwork,
    cases: Sequence[DialogueCase],
    cfg: SessionConfig,
    unrecorded: str = "absent",
) -> EvalReport:
    episodes = [run_episode(net, cfg, case, unrecorded=unrecorded) for case in cases]
    return _aggregate(episodes, cfg, None)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

CSV_HEADER = "threshold,max_steps,depth,utility,top1,top3,top5,avg_steps,n,seed"


def report_to_csv_rows(reports: Sequence[EvalReport]) -> list[str]:
    rows = [CSV_HEADER]
    for r in reports:
        rows.append(
            f"{r.threshold:g},{r.max_steps},{r.depth},{r.utility},"
            f"{r.top1:.6f},{r.top3:.6f},{r.top5:.6f},{r.avg_steps:.6f},"
            f"{r.n_cases},{'' if r.seed is None else r.seed}"
        )
    return rows


def format_table(reports: Sequence[EvalReport]) -> str:
    """Fixed-width grid, one row per step budget, threshold groups across."""
    thresholds = sorted({r.threshold for r in reports})
    step_rows = sorted({r.max_steps for r in reports})
    by_cell = {(r.max_steps, r.threshold): r for r in reports}

    header1 = f"{'Max steps':>9} |"
    header2 = f"{'':>9} |"
    for t in thresholds:
        header1 += f" {'Threshold=' + format(t, 'g'):^31} |"
        header2 += f" {'Top1':>6} {'Top3':>6} {'Top5':>6} {'Steps':>6}    |"
    lines = [header1, header2, "-" * len(header1)]
    for s in step_rows:
        line = f"{s:>9} |"
        for t in thresholds:
            r = by_cell.get((s, t))
            if r is None:
                line += f" {'-':>6} {'-':>6} {'-':>6} {'-':>6}    |"
            else:
                line += (
                    f" {100 * r.top1:6.2f} {100 * r.top3:6.2f}"
                    f" {100 * r.top5:6.2f} {r.avg_steps:6.2f}    |"
                )
        lines.append(line)
    return "\n".join(lines)
