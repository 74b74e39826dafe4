"""Exact disease inference.

One disease per case makes the posterior a normalized product per disease:
prior times the activation probability of every known-positive finding
times one minus the activation probability of every known-negative one.
Products are carried in log space with exact zeros tracked as a mask, so
long evidence lists cannot underflow and impossible diseases stay at
exactly zero. A brute-force multi-disease posterior over all 2^n disease
configurations is provided as a reference for small networks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EvidenceError
from .network import QmrNetwork

POSTERIOR_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Evidence:
    """Disjoint sets of known-present and known-absent finding ids."""

    positive: frozenset[int] = frozenset()
    negative: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))
        overlap = self.positive & self.negative
        if overlap:
            raise EvidenceError(
                f"findings marked both positive and negative: {sorted(overlap)}"
            )

    @property
    def observed(self) -> frozenset[int]:
        return self.positive | self.negative

    def __len__(self) -> int:
        return len(self.positive) + len(self.negative)

    def with_finding(self, finding_id: int, present: bool) -> "Evidence":
        """Return a copy with one more observation (the id must be new)."""
        if finding_id in self.observed:
            raise EvidenceError(f"finding {finding_id} is already observed")
        if present:
            return Evidence(self.positive | {finding_id}, self.negative)
        return Evidence(self.positive, self.negative | {finding_id})

    def without_finding(self, finding_id: int) -> "Evidence":
        return Evidence(self.positive - {finding_id}, self.negative - {finding_id})

    def validate_for(self, net: QmrNetwork) -> "Evidence":
        bad = [i for i in self.observed if not 0 <= i < net.n_findings]
        if bad:
            raise EvidenceError(f"unknown finding ids: {sorted(bad)}")
        return self


@dataclass(frozen=True)
class LogWeight:
    """Log of one disease's joint weight with the evidence.

    Exact impossibility (a positive finding the disease cannot cause, a
    negative finding it causes with certainty, or a zero prior) is an
    explicit flag rather than a floating -inf that arithmetic could turn
    into NaN.
    """

    value: float
    is_zero: bool = False

    @classmethod
    def zero(cls) -> "LogWeight":
        return cls(float("-inf"), True)


@dataclass(frozen=True)
class Posterior:
    """Normalized disease probabilities, in disease-id order.

    ``degenerate`` is set when the evidence gave every disease exactly zero
    weight; the probabilities then fall back to the priors so downstream
    ranking still works.
    """

    probs: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def _sorted_ids(ids) -> list[int]:
    # fixed iteration order keeps float accumulation identical across runs
    return sorted(ids)


def _negative_row_totals(net: QmrNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Per-disease sum of log(1 - activation) over all findings, plus the
    count of certain (probability 1) edges; cached on the network."""
    cached = getattr(net, "_neg_row_totals", None)
    if cached is None:
        act = net.activation
        log1m_total = np.log1p(-np.where(act < 1.0, act, 0.0)).sum(axis=1)
        ones_count = (act == 1.0).sum(axis=1)
        for arr in (log1m_total, ones_count):
            arr.setflags(write=False)
        cached = (log1m_total, ones_count)
        object.__setattr__(net, "_neg_row_totals", cached)
    return cached


def _log_weights(net: QmrNetwork, ev: Evidence) -> tuple[np.ndarray, np.ndarray]:
    """Per-disease log joint weights and the exact-zero mask."""
    act = net.activation
    zero = net.priors <= 0.0
    logw = np.log(np.where(zero, 1.0, net.priors))

    pos = _sorted_ids(ev.positive)
    if pos:
        cols = act[:, pos]
        zero = zero | (cols == 0.0).any(axis=1)
        logw = logw + np.log(np.where(cols > 0.0, cols, 1.0)).sum(axis=1)

    neg = _sorted_ids(ev.negative)
    if len(neg) > net.n_findings // 2:
        # mostly-negative evidence (e.g. fully observed cases): start from
        # the all-findings-negative row totals and back out the complement
        comp = _sorted_ids(set(range(net.n_findings)) - ev.negative)
        log1m_total, ones_count = _negative_row_totals(net)
        logw = logw + log1m_total
        ones_in_neg = ones_count
        if comp:
            cols = act[:, comp]
            certain = cols == 1.0
            logw = logw - np.log1p(-np.where(certain, 0.0, cols)).sum(axis=1)
            ones_in_neg = ones_count - certain.sum(axis=1)
        zero = zero | (ones_in_neg > 0)
    elif neg:
        cols = act[:, neg]
        zero = zero | (cols == 1.0).any(axis=1)
        logw = logw + np.log1p(-np.where(cols < 1.0, cols, 0.0)).sum(axis=1)

    logw = np.where(zero, -np.inf, logw)
    return logw, zero


def log_joint_weight(net: QmrNetwork, ev: Evidence, disease_id: int) -> LogWeight:
    """Log joint weight of one disease with the evidence (prior times the
    product of positive activations and negative complements)."""
    if not 0 <= disease_id < net.n_diseases:
        raise ValueError(f"unknown disease id: {disease_id}")
    ev.validate_for(net)
    logw, zero = _log_weights(net, ev)
    if zero[disease_id]:
        return LogWeight.zero()
    return LogWeight(float(logw[disease_id]))


def _logsumexp(values: np.ndarray) -> float:
    m = values.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.exp(values - m).sum()))


def posterior(net: QmrNetwork, ev: Evidence) -> Posterior:
    """Disease posterior given the evidence.

    Normalization happens through a log-sum-exp over the non-zero weights;
    if no disease has positive weight the priors are returned with the
    ``degenerate`` flag set.
    """
    ev.validate_for(net)
    logw, zero = _log_weights(net, ev)
    if zero.all():
        return Posterior(net.priors.copy(), degenerate=True)
    norm = _logsumexp(logw[~zero])
    probs = np.zeros(net.n_diseases)
    probs[~zero] = np.exp(logw[~zero] - norm)
    return Posterior(probs, degenerate=False)


def top_k(post: Posterior, k: int) -> list[tuple[int, float]]:
    """The k most probable diseases, ties broken by ascending disease id."""
    n = post.probs.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    # stable sort on -prob keeps equal-probability diseases in id order
    order = np.argsort(-post.probs, kind="stable")[:k]
    return [(int(j), float(post.probs[j])) for j in order]


def general_noisy_or_posterior(
    net: QmrNetwork, ev: Evidence, prior_mode: str = "independent-bernoulli"
) -> np.ndarray:
    """Exact per-disease marginals without the one-disease restriction.

    Enumerates all 2^n disease configurations under independent Bernoulli
    priors with the noisy-OR likelihood (a finding is absent iff every
    present parent fails to activate it; no leak). Reference-grade only:
    refuses networks with more than 20 diseases.
    """
    if prior_mode != "independent-bernoulli":
        raise ValueError(f"unsupported prior_mode: {prior_mode!r}")
    n = net.n_diseases
    if n > 20:
        raise ValueError(f"enumeration over 2^{n} configurations refused (n > 20)")
    ev.validate_for(net)

    configs = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.float64)

    # independent Bernoulli prior per configuration
    b = net.priors
    LOG_ZERO = -1e300  # finite stand-in so 0 * log(0) contributes 0, exp -> 0
    log_b = np.where(b > 0.0, np.log(np.where(b > 0.0, b, 1.0)), LOG_ZERO)
    log_1mb = np.where(b < 1.0, np.log1p(-np.where(b < 1.0, b, 0.0)), LOG_ZERO)
    log_prior = configs @ log_b + (1.0 - configs) @ log_1mb

    log_like = np.zeros(configs.shape[0])
    for i in _sorted_ids(ev.positive | ev.negative):
        col = net.activation[:, i]
        log_1mp = np.where(col < 1.0, np.log1p(-np.where(col < 1.0, col, 0.0)), LOG_ZERO)
        log_absent = configs @ log_1mp  # log P(finding absent | configuration)
        if i in ev.negative:
            log_like += log_absent
        else:
            present = 1.0 - np.exp(log_absent)
            log_like += np.where(present > 0.0, np.log(np.where(present > 0.0, present, 1.0)), LOG_ZERO)

    weights = np.exp(log_prior + log_like)
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("evidence has zero probability under the network")
    return (configs * weights[:, None]).sum(axis=0) / total
