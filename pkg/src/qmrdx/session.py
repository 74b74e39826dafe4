"""Stateful diagnosis episode: suggest, answer, override, finalize.

The control flow asks the highest-value question while the budget lasts
and the best value stays at or above the configured threshold; it
diagnoses as soon as the budget is spent, the best value drops below the
threshold, or nothing is left to ask. The user may answer off-script,
force finding states without spending a step, or stop early at any time.

Every mutation is appended to a transcript (one JSON object per event)
from which the episode can be replayed bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union

from .exceptions import EvidenceError, SessionStateError
from .inference import Evidence, Posterior, posterior, top_k
from .inquiry import LookaheadConfig, UtilityKind, select_next
from .network import QmrNetwork


class SessionStatus(str, Enum):
    ACTIVE = "active"
    DIAGNOSED = "diagnosed"


class StopReason(str, Enum):
    BUDGET = "budget"
    THRESHOLD = "threshold"
    EXHAUSTED = "exhausted"
    MANUAL = "manual"


@dataclass(frozen=True)
class SessionConfig:
    max_steps: int = 20
    utility_threshold: float = 0.01
    lookahead: LookaheadConfig = field(default_factory=LookaheadConfig)
    top_k: int = 5

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.utility_threshold < 0:
            raise ValueError("utility_threshold must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class Suggest:
    finding_id: int
    utility: float


@dataclass(frozen=True)
class Diagnose:
    reason: StopReason


Decision = Union[Suggest, Diagnose]


@dataclass(frozen=True)
class Diagnosis:
    ranked: tuple[tuple[int, float], ...]
    posterior: Posterior
    reason: StopReason
    steps: int


class Session:
    """Single diagnosis episode over a fixed network.

    Not thread-safe: concurrent mutation must be serialized by the caller
    (the HTTP service keeps one lock per session).
    """

    def __init__(
        self,
        net: QmrNetwork,
        config: SessionConfig | None = None,
        initial: Evidence | None = None,
    ):
        self.net = net
        self.config = config or SessionConfig()
        self.evidence = (initial or Evidence()).validate_for(net)
        self.step = 0
        self.status = SessionStatus.ACTIVE
        self.last_suggestion: Optional[Suggest] = None
        self.diagnosis: Optional[Diagnosis] = None
        self.unknown: frozenset[int] = frozenset()  # asked, answer unknown
        self._pending: Optional[Decision] = None
        self._events: list[dict] = [
            {
                "t": "start",
                "config": {
                    "max_steps": self.config.max_steps,
                    "utility_threshold": self.config.utility_threshold,
                    "depth": self.config.lookahead.depth,
                    "utility": self.config.lookahead.utility_kind.value,
                    "top_k": self.config.top_k,
                },
                "positive": self._names(self.evidence.positive),
                "negative": self._names(self.evidence.negative),
            }
        ]

    def _names(self, ids: Iterable[int]) -> list[str]:
        return [self.net.findings[i].name for i in sorted(ids)]

    def _require_active(self) -> None:
        if self.status is not SessionStatus.ACTIVE:
            raise SessionStateError("session is already diagnosed")

    def posterior(self) -> Posterior:
        return posterior(self.net, self.evidence)

    # -- inquiry loop ------------------------------------------------------

    def next_suggestion(self) -> Decision:
        """The system's move: a question to ask, or the decision to stop.

        Pure with respect to the evidence; repeated calls return the same
        cached decision until an answer or override changes the state.
        """
        self._require_active()
        if self._pending is not None:
            return self._pending

        if self.step >= self.config.max_steps:
            decision: Decision = Diagnose(StopReason.BUDGET)
        else:
            best = select_next(
                self.net, self.evidence, self.config.lookahead, exclude=self.unknown
            )
            if best is None:
                decision = Diagnose(StopReason.EXHAUSTED)
            elif best[1] < self.config.utility_threshold:
                decision = Diagnose(StopReason.THRESHOLD)
            else:
                decision = Suggest(*best)

        if isinstance(decision, Suggest):
            self.last_suggestion = decision
            self._events.append(
                {
                    "t": "suggest",
                    "step": self.step,
                    "finding": self.net.findings[decision.finding_id].name,
                    "utility": decision.utility,
                }
            )
        self._pending = decision
        return decision

    def answer(self, finding_id: int, value: Optional[bool]) -> None:
        """Record the reply to an inquiry and spend one step.

        The finding need not be the one suggested (off-script answers are
        fine). ``None`` records "asked but unknown": no evidence is added,
        yet the finding will not be suggested again.
        """
        self._require_active()
        if not 0 <= finding_id < self.net.n_findings:
            raise EvidenceError(f"unknown finding id: {finding_id}")
        if finding_id in self.evidence.observed or finding_id in self.unknown:
            raise EvidenceError(f"finding {finding_id} was already asked")
        if self.step > self.config.max_steps:
            raise SessionStateError("inquiry budget exhausted")
        if value is None:
            self.unknown = self.unknown | {finding_id}
        else:
            self.evidence = self.evidence.with_finding(finding_id, bool(value))
        self.step += 1
        self._pending = None
        self._events.append(
            {
                "t": "answer",
                "step": self.step,
                "finding": self.net.findings[finding_id].name,
                "value": value,
            }
        )

    def override(self, finding_id: int, value: Optional[bool]) -> None:
        """Force a finding to present/absent/unknown without spending a step."""
        self._require_active()
        if not 0 <= finding_id < self.net.n_findings:
            raise EvidenceError(f"unknown finding id: {finding_id}")
        ev = self.evidence.without_finding(finding_id)
        self.unknown = self.unknown - {finding_id}
        if value is not None:
            ev = ev.with_finding(finding_id, bool(value))
        self.evidence = ev
        self._pending = None
        self._events.append(
            {
                "t": "override",
                "finding": self.net.findings[finding_id].name,
                "value": value,
            }
        )

    def finalize(self, reason: StopReason | str | None = None) -> Diagnosis:
        """Close the episode with a ranked diagnosis (callable at any time)."""
        self._require_active()
        if reason is None:
            if isinstance(self._pending, Diagnose):
                reason = self._pending.reason
            else:
                reason = StopReason.MANUAL
        reason = StopReason(reason)
        post = self.posterior()
        ranked = tuple(top_k(post, min(self.config.top_k, self.net.n_diseases)))
        self.diagnosis = Diagnosis(ranked, post, reason, self.step)
        self.status = SessionStatus.DIAGNOSED
        self._events.append(
            {
                "t": "final",
                "reason": reason.value,
                "steps": self.step,
                "degenerate": post.degenerate,
                "ranked": [
                    [self.net.diseases[j].name, p] for j, p in ranked
                ],
            }
        )
        return self.diagnosis

    # -- transcripts -------------------------------------------------------

    def transcript(self) -> list[dict]:
        return [dict(e) for e in self._events]

    def transcript_jsonl(self) -> str:
        return "\n".join(json.dumps(e) for e in self._events) + "\n"


def create_session(
    net: QmrNetwork,
    config: SessionConfig | None = None,
    initial: Evidence | None = None,
) -> Session:
    return Session(net, config, initial)


def _config_from_event(doc: dict) -> SessionConfig:
    cfg = doc.get("config", {})
    return SessionConfig(
        max_steps=int(cfg.get("max_steps", 20)),
        utility_threshold=float(cfg.get("utility_threshold", 0.01)),
        lookahead=LookaheadConfig(
            depth=int(cfg.get("depth", 1)),
            utility_kind=UtilityKind(cfg.get("utility", "kl")),
        ),
        top_k=int(cfg.get("top_k", 5)),
    )


def replay_transcript(net: QmrNetwork, events: Iterable[dict | str]) -> Diagnosis:
    """Re-run a recorded episode and return its final diagnosis.

    Only state-changing events (start, answer, override, final) drive the
    replay; suggest events are informational. The result is bit-identical
    to the original episode's diagnosis because the evidence sequence is.
    """
    session: Session | None = None
    final_reason: str | None = None
    for raw in events:
        e = json.loads(raw) if isinstance(raw, str) else raw
        kind = e.get("t")
        if kind == "start":
            pos = frozenset(net.finding_id(n) for n in e.get("positive", []))
            neg = frozenset(net.finding_id(n) for n in e.get("negative", []))
            session = Session(net, _config_from_event(e), Evidence(pos, neg))
        elif session is None:
            raise ValueError("transcript does not begin with a start event")
        elif kind == "answer":
            session.answer(net.finding_id(e["finding"]), e["value"])
        elif kind == "override":
            session.override(net.finding_id(e["finding"]), e["value"])
        elif kind == "final":
            final_reason = e.get("reason")
    if session is None:
        raise ValueError("empty transcript")
    if session.status is SessionStatus.ACTIVE:
        return session.finalize(final_reason)
    assert session.diagnosis is not None
    return session.diagnosis
