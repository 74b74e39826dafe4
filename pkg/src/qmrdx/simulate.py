"""Synthetic patients sampled from a network.

A case is one true disease drawn from the priors plus a full
present/absent state for every finding: Bernoulli draws on the disease's
own edges, absent everywhere else (noisy-OR with a single active cause).
All-negative draws are rejected and the findings redrawn, since an
episode needs at least one reportable positive; the disease itself is
kept so disease frequencies track the priors exactly. One positive
finding is picked (uniformly, unless a custom rule is given) as the
complaint that opens the episode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .network import QmrNetwork

MAX_RESAMPLE_ATTEMPTS = 10_000

InitialChoice = Callable[[Sequence[int], np.random.Generator], int]


@dataclass(frozen=True)
class SimulatedCase:
    true_disease: int
    finding_states: np.ndarray  # bool per finding id
    initial_positive: int

    def __post_init__(self):
        states = np.asarray(self.finding_states, dtype=bool)
        states.setflags(write=False)
        object.__setattr__(self, "finding_states", states)


def case_rng(seed: int, index: int) -> np.random.Generator:
    """Independent per-case stream; reproducible regardless of scheduling."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(seed & (2**64 - 1), index))
    )


def sample_case(
    net: QmrNetwork,
    rng: np.random.Generator,
    initial_choice: InitialChoice | None = None,
) -> SimulatedCase:
    disease = int(rng.choice(net.n_diseases, p=net.priors))
    finding_ids = sorted(net.index_df[disease])
    probs = net.activation[disease, finding_ids]

    for _ in range(MAX_RESAMPLE_ATTEMPTS):
        draws = rng.random(len(finding_ids)) < probs
        if draws.any():
            break
    else:
        raise RuntimeError(
            f"disease {net.diseases[disease].name!r} produced no positive finding "
            f"in {MAX_RESAMPLE_ATTEMPTS} attempts"
        )

    states = np.zeros(net.n_findings, dtype=bool)
    states[np.asarray(finding_ids, dtype=int)[draws]] = True
    positives = [f for f, hit in zip(finding_ids, draws) if hit]
    if initial_choice is None:
        initial = int(positives[rng.integers(len(positives))])
    else:
        initial = int(initial_choice(positives, rng))
        if not states[initial]:
            raise ValueError("initial_choice returned a finding that is not positive")
    return SimulatedCase(disease, states, initial)


def sample_cases(
    net: QmrNetwork,
    n_cases: int,
    seed: int,
    initial_choice: InitialChoice | None = None,
) -> list[SimulatedCase]:
    return [
        sample_case(net, case_rng(seed, i), initial_choice) for i in range(n_cases)
    ]


def patient_answer(case: SimulatedCase, finding_id: int) -> bool:
    """The simulated patient reports the true state, every time."""
    if not 0 <= finding_id < case.finding_states.shape[0]:
        raise ValueError(f"unknown finding id: {finding_id}")
    return bool(case.finding_states[finding_id])


def dump_cases(net: QmrNetwork, cases: Iterable[SimulatedCase]) -> list[dict]:
    """Case-file records (dialogue-case shape plus the full state map)."""
    out = []
    for case in cases:
        out.append(
            {
                "disease": net.diseases[case.true_disease].name,
                "explicit": {net.findings[case.initial_positive].name: True},
                "implicit": {},
                "all_states": {
                    f.name: bool(case.finding_states[f.id]) for f in net.findings
                },
            }
        )
    return out


def cases_from_dump(net: QmrNetwork, docs: Iterable[dict]) -> list[SimulatedCase]:
    """Rebuild simulated cases from :func:`dump_cases` output."""
    cases = []
    for doc in docs:
        states = np.zeros(net.n_findings, dtype=bool)
        for name, value in doc["all_states"].items():
            states[net.finding_id(name)] = bool(value)
        initial_name = next(iter(doc["explicit"]))
        cases.append(
            SimulatedCase(
                net.disease_id(doc["disease"]),
                states,
                net.finding_id(initial_name),
            )
        )
    return cases
