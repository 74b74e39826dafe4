"""Choosing the next finding to ask about.

A candidate question is scored by the expected divergence between the
disease beliefs after hearing the answer and the current beliefs, summed
over the per-disease Bernoulli marginals. The two divergence choices
(Kullback-Leibler and Shannon information gain) have the same expectation,
the summed per-disease mutual information between disease and answer, and
are both available. Candidate generation walks the adjacency maps from the
known-positive findings; any finding outside that set provably has zero
utility. Multi-step selection is an expectimax over answer outcomes whose
leaf values are divergences taken against the beliefs at the root.

All scoring is restricted to diseases with nonzero current posterior;
excluded diseases contribute exactly nothing to any term.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .exceptions import EvidenceError
from .inference import Evidence, posterior
from .network import QmrNetwork


class UtilityKind(str, Enum):
    KL = "kl"
    IG = "ig"


@dataclass(frozen=True)
class LookaheadConfig:
    depth: int = 1
    utility_kind: UtilityKind = UtilityKind.KL

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("lookahead depth must be >= 1")
        object.__setattr__(self, "utility_kind", UtilityKind(self.utility_kind))


@dataclass(frozen=True)
class CandidateScore:
    finding_id: int
    utility: float


# ---------------------------------------------------------------------------
# Divergence kernels (arrays of Bernoulli parameters)
# ---------------------------------------------------------------------------

def _xlogx(p: np.ndarray) -> np.ndarray:
    return np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)


def _bernoulli_entropy(p: np.ndarray) -> np.ndarray:
    return -(_xlogx(p) + _xlogx(1.0 - p))


class _Reference:
    """Current beliefs with their logs precomputed once per selection.

    Divergences against the same reference are evaluated for every branch
    of every candidate, so the log terms of the reference dominate the
    kernel unless hoisted out.
    """

    __slots__ = ("probs", "log_p", "log_1mp", "entropy_total")

    def __init__(self, probs: np.ndarray):
        self.probs = probs
        self.log_p = np.log(np.where(probs > 0.0, probs, 1.0))
        complement = 1.0 - probs
        self.log_1mp = np.log(np.where(complement > 0.0, complement, 1.0))
        self.entropy_total = float(
            -(probs * self.log_p + complement * self.log_1mp).sum()
        )


def _divergence_sum(branch: np.ndarray, ref: _Reference, kind: UtilityKind):
    """Sum over diseases of D(branch_j || ref_j); ``branch`` is (s,) or (s, c).

    Zero-probability conventions: terms with branch mass 0 drop out.
    Evidence only ever shrinks disease support, so branch > 0 implies
    ref > 0 and branch < 1 implies ref < 1 wherever this is called.
    """
    if branch.ndim == 1:
        branch = branch[:, None]
        squeeze = True
    else:
        squeeze = False
    if kind is UtilityKind.KL:
        a, am = branch, 1.0 - branch
        t_present = np.where(
            a > 0.0, a * (np.log(np.where(a > 0.0, a, 1.0)) - ref.log_p[:, None]), 0.0
        )
        t_absent = np.where(
            am > 0.0,
            am * (np.log(np.where(am > 0.0, am, 1.0)) - ref.log_1mp[:, None]),
            0.0,
        )
        out = (t_present + t_absent).sum(axis=0)
    else:
        out = ref.entropy_total - _bernoulli_entropy(branch).sum(axis=0)
    return float(out[0]) if squeeze else out


def _branch_split(q: np.ndarray, cols: np.ndarray):
    """Outcome probabilities and renormalized posteriors for each column.

    ``q`` is the current posterior on the support, ``cols`` the matching
    activation columns (s, c). Returns (p_present, post_present,
    p_absent, post_absent); a zero-probability outcome yields an all-zero
    posterior column and must be skipped by weight.
    """
    w1 = q[:, None] * cols
    p1 = w1.sum(axis=0)
    w0 = q[:, None] * (1.0 - cols)
    p0 = w0.sum(axis=0)
    a1 = np.where(p1 > 0.0, w1 / np.where(p1 > 0.0, p1, 1.0), 0.0)
    a0 = np.where(p0 > 0.0, w0 / np.where(p0 > 0.0, p0, 1.0), 0.0)
    return p1, a1, p0, a0


def _candidate_values(
    q: np.ndarray, cols: np.ndarray, ref: _Reference, kind: UtilityKind
) -> np.ndarray:
    """Expected divergence vs ``ref`` for each candidate column."""
    p1, a1, p0, a0 = _branch_split(q, cols)
    d1 = _divergence_sum(a1, ref, kind)
    d0 = _divergence_sum(a0, ref, kind)
    return np.where(p1 > 0.0, p1 * d1, 0.0) + np.where(p0 > 0.0, p0 * d0, 0.0)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _check_unobserved(ev: Evidence, finding_id: int) -> None:
    if finding_id in ev.observed:
        raise EvidenceError(f"finding {finding_id} is already observed")


def outcome_probability(net: QmrNetwork, ev: Evidence, finding_id: int) -> float:
    """Probability that the finding is present given the evidence:
    the posterior-weighted sum of its activation probabilities."""
    if not 0 <= finding_id < net.n_findings:
        raise EvidenceError(f"unknown finding id: {finding_id}")
    _check_unobserved(ev, finding_id)
    q = posterior(net, ev).probs
    return float(q @ net.activation[:, finding_id])


def utility(
    net: QmrNetwork,
    ev: Evidence,
    finding_id: int,
    kind: UtilityKind = UtilityKind.KL,
) -> float:
    """One-step value of asking about a finding (nats, non-negative)."""
    if not 0 <= finding_id < net.n_findings:
        raise EvidenceError(f"unknown finding id: {finding_id}")
    _check_unobserved(ev, finding_id)
    kind = UtilityKind(kind)
    q_full = posterior(net, ev).probs
    sup = np.nonzero(q_full > 0.0)[0]
    q = q_full[sup]
    cols = net.activation[np.ix_(sup, [finding_id])]
    return float(_candidate_values(q, cols, _Reference(q), kind)[0])


def candidate_findings(
    net: QmrNetwork, ev: Evidence, exclude: frozenset[int] = frozenset()
) -> frozenset[int]:
    """Findings worth asking about: everything reachable from the positive
    evidence through shared diseases, minus what is already observed.

    With no positive evidence yet the adjacency walk has nothing to seed
    from, so every unobserved finding is returned instead (utilities of
    unreachable findings are zero either way).
    """
    if ev.positive:
        diseases: set[int] = set()
        for f in ev.positive:
            diseases |= net.index_fd[f]
        cand: set[int] = set()
        for d in diseases:
            cand |= net.index_df[d]
    else:
        cand = set(range(net.n_findings))
    return frozenset(cand) - ev.observed - exclude


def score_candidates(
    net: QmrNetwork,
    ev: Evidence,
    cfg: LookaheadConfig = LookaheadConfig(),
    exclude: frozenset[int] = frozenset(),
) -> list[CandidateScore]:
    """All candidates with their lookahead values, best first (ties by id)."""
    ev.validate_for(net)
    cand = sorted(candidate_findings(net, ev, exclude))
    if not cand:
        return []
    values = _lookahead_values(net, ev, cand, cfg.depth, cfg.utility_kind, exclude)
    order = sorted(range(len(cand)), key=lambda k: (-values[k], cand[k]))
    return [CandidateScore(cand[k], float(values[k])) for k in order]


def select_next(
    net: QmrNetwork,
    ev: Evidence,
    cfg: LookaheadConfig = LookaheadConfig(),
    exclude: frozenset[int] = frozenset(),
) -> tuple[int, float] | None:
    """Best next finding and its value, or None when nothing is left to ask.

    Ties are broken toward the lowest finding id so selection is
    deterministic across runs and platforms.
    """
    ev.validate_for(net)
    cand = sorted(candidate_findings(net, ev, exclude))
    if not cand:
        return None
    values = _lookahead_values(net, ev, cand, cfg.depth, cfg.utility_kind, exclude)
    best = int(np.argmax(values))  # first maximum = lowest id, cand is sorted
    return cand[best], float(values[best])


def lookahead_value(
    net: QmrNetwork,
    ev: Evidence,
    finding_id: int,
    depth: int,
    kind: UtilityKind = UtilityKind.KL,
    exclude: frozenset[int] = frozenset(),
) -> float:
    """Expectimax value of asking about the finding and then playing the
    best follow-up questions for ``depth - 1`` more steps.

    Outcomes are weighted by their predicted probability at each level;
    the value of a completed question path is the divergence between the
    beliefs at the end of the path and the beliefs here at the root. At
    depth 1 this is exactly :func:`utility`.
    """
    if not 0 <= finding_id < net.n_findings:
        raise EvidenceError(f"unknown finding id: {finding_id}")
    _check_unobserved(ev, finding_id)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ev.validate_for(net)
    values = _lookahead_values(net, ev, [finding_id], depth, UtilityKind(kind), exclude)
    return float(values[0])


def _lookahead_values(
    net: QmrNetwork,
    ev: Evidence,
    cand: Sequence[int],
    depth: int,
    kind: UtilityKind,
    exclude: frozenset[int],
) -> np.ndarray:
    root = posterior(net, ev).probs
    sup = np.nonzero(root > 0.0)[0]
    if len(sup) == net.n_diseases:
        q, act = root, net.activation
    else:
        q, act = root[sup], net.activation[sup, :]
    ref = _Reference(q)

    def descend(ev_here: Evidence, q_here: np.ndarray, ids: Sequence[int], d: int) -> np.ndarray:
        cols = act[:, list(ids)]
        if d == 1:
            return _candidate_values(q_here, cols, ref, kind)
        p1, a1, p0, a0 = _branch_split(q_here, cols)
        out = np.zeros(len(ids))
        for k, f in enumerate(ids):
            acc = 0.0
            for p_y, q_y, y in ((p1[k], a1[:, k], True), (p0[k], a0[:, k], False)):
                if p_y <= 0.0:
                    continue
                ev_y = ev_here.with_finding(f, y)
                nxt = sorted(candidate_findings(net, ev_y, exclude))
                if nxt:
                    branch = float(np.max(descend(ev_y, q_y, nxt, d - 1)))
                else:
                    # nothing left to ask: the path ends here, valued by
                    # what this branch alone revealed relative to the root
                    branch = _divergence_sum(q_y, ref, kind)
                acc += p_y * branch
            out[k] = acc
        return out

    return descend(ev, q, list(cand), depth)
