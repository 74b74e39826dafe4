"""Bipartite noisy-OR belief network: data model, loaders, and builders.

The network is a two-level graph. Disease nodes carry a categorical prior
(one disease per case, so priors sum to one). Each disease->finding edge
carries the probability that the disease, when present, activates the
finding on its own; a finding with no present parent is absent (no leak).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import NetworkFormatError, NetworkValidationError

PRIOR_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Disease:
    id: int
    name: str
    prior: float


@dataclass(frozen=True)
class Finding:
    id: int
    name: str


@dataclass(frozen=True)
class Edge:
    disease_id: int
    finding_id: int
    prob: float


@dataclass(frozen=True)
class DialogueCase:
    """One structured consultation record.

    ``explicit`` holds findings the patient volunteered up front,
    ``implicit`` those surfaced by the doctor's questions. The two key
    sets are disjoint; values are presence flags.
    """

    disease_name: str
    explicit: Mapping[str, bool]
    implicit: Mapping[str, bool]

    def __post_init__(self):
        overlap = set(self.explicit) & set(self.implicit)
        if overlap:
            raise NetworkFormatError(
                f"findings recorded as both explicit and implicit: {sorted(overlap)}"
            )
        object.__setattr__(self, "explicit", MappingProxyType(dict(self.explicit)))
        object.__setattr__(self, "implicit", MappingProxyType(dict(self.implicit)))


@dataclass(frozen=True)
class QmrNetwork:
    """Immutable network with adjacency indexes and dense probability arrays.

    ``index_fd`` maps a finding id to the ids of diseases that can cause it;
    ``index_df`` is the reverse map. ``activation[j, i]`` is the edge
    probability P(finding i present | disease j alone present), 0 without
    an edge. Arrays are read-only so the instance can be shared freely.
    """

    diseases: tuple[Disease, ...]
    findings: tuple[Finding, ...]
    edges: tuple[Edge, ...]
    index_fd: Mapping[int, frozenset[int]] = field(repr=False, default=None)
    index_df: Mapping[int, frozenset[int]] = field(repr=False, default=None)

    def __post_init__(self):
        fd, df = build_indexes(self.edges, len(self.diseases), len(self.findings))
        object.__setattr__(self, "index_fd", fd)
        object.__setattr__(self, "index_df", df)

        n, m = len(self.diseases), len(self.findings)
        priors = np.array([d.prior for d in self.diseases], dtype=np.float64)
        activation = np.zeros((n, m), dtype=np.float64)
        for e in self.edges:
            # out-of-range ids are tolerated here so validate() can report them
            if 0 <= e.disease_id < n and 0 <= e.finding_id < m:
                activation[e.disease_id, e.finding_id] = e.prob
        for arr in (priors, activation):
            arr.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "activation", activation)
        object.__setattr__(
            self, "_disease_by_name", {d.name: d.id for d in self.diseases}
        )
        object.__setattr__(
            self, "_finding_by_name", {f.name: f.id for f in self.findings}
        )

    def __reduce__(self):
        # derived maps/arrays are rebuilt on unpickle (worker processes)
        return (QmrNetwork, (self.diseases, self.findings, self.edges))

    @property
    def n_diseases(self) -> int:
        return len(self.diseases)

    @property
    def n_findings(self) -> int:
        return len(self.findings)

    def disease_id(self, name: str) -> int:
        try:
            return self._disease_by_name[name]
        except KeyError:
            raise KeyError(f"unknown disease name: {name!r}") from None

    def finding_id(self, name: str) -> int:
        try:
            return self._finding_by_name[name]
        except KeyError:
            raise KeyError(f"unknown finding name: {name!r}") from None

    def has_finding(self, name: str) -> bool:
        return name in self._finding_by_name

    def has_disease(self, name: str) -> bool:
        return name in self._disease_by_name


def build_indexes(
    edges: Iterable[Edge], n_diseases: int, n_findings: int
) -> tuple[Mapping[int, frozenset[int]], Mapping[int, frozenset[int]]]:
    """Construct the finding->diseases and disease->findings maps from edges."""
    fd: dict[int, set[int]] = {i: set() for i in range(n_findings)}
    df: dict[int, set[int]] = {j: set() for j in range(n_diseases)}
    for e in edges:
        if 0 <= e.finding_id < n_findings:
            fd[e.finding_id].add(e.disease_id)
        if 0 <= e.disease_id < n_diseases:
            df[e.disease_id].add(e.finding_id)
    freeze = lambda d: MappingProxyType({k: frozenset(v) for k, v in d.items()})
    return freeze(fd), freeze(df)


def validate(net: QmrNetwork) -> list[str]:
    """Check every structural invariant; return all violations (empty = ok)."""
    violations: list[str] = []
    n, m = net.n_diseases, net.n_findings

    names = [d.name for d in net.diseases]
    if len(set(names)) != len(names):
        dupes = sorted({x for x in names if names.count(x) > 1})
        violations.append(f"duplicate disease names: {dupes}")
    fnames = [f.name for f in net.findings]
    if len(set(fnames)) != len(fnames):
        dupes = sorted({x for x in fnames if fnames.count(x) > 1})
        violations.append(f"duplicate finding names: {dupes}")

    for pos, d in enumerate(net.diseases):
        if d.id != pos:
            violations.append(f"disease id {d.id} is not dense/ordered")
        if not 0.0 <= d.prior <= 1.0:
            violations.append(f"disease {d.name!r} prior {d.prior} out of [0,1]")
    for pos, f in enumerate(net.findings):
        if f.id != pos:
            violations.append(f"finding id {f.id} is not dense/ordered")
    prior_sum = sum(d.prior for d in net.diseases)
    if n and abs(prior_sum - 1.0) > PRIOR_SUM_TOL:
        violations.append(f"priors sum to {prior_sum!r}, expected 1")

    seen_pairs: set[tuple[int, int]] = set()
    for e in net.edges:
        if not 0 <= e.disease_id < n:
            violations.append(f"edge references unknown disease id {e.disease_id}")
        if not 0 <= e.finding_id < m:
            violations.append(f"edge references unknown finding id {e.finding_id}")
        if not 0.0 < e.prob <= 1.0:
            violations.append(
                f"edge ({e.disease_id},{e.finding_id}) prob {e.prob} out of (0,1]"
            )
        if (e.disease_id, e.finding_id) in seen_pairs:
            violations.append(
                f"duplicate edge for pair ({e.disease_id},{e.finding_id})"
            )
        seen_pairs.add((e.disease_id, e.finding_id))

    ok_edges = [
        e
        for e in net.edges
        if 0 <= e.disease_id < n and 0 <= e.finding_id < m
    ]
    fd, df = build_indexes(ok_edges, n, m)
    if dict(fd) != dict(net.index_fd) or dict(df) != dict(net.index_df):
        violations.append("adjacency indexes do not match the edge list")

    return violations


def _validated(net: QmrNetwork) -> QmrNetwork:
    violations = validate(net)
    if violations:
        raise NetworkValidationError(violations)
    return net


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _parse_native(doc) -> QmrNetwork:
    try:
        diseases = tuple(
            Disease(i, str(d["name"]).strip(), float(d["prior"]))
            for i, d in enumerate(doc["diseases"])
        )
        findings = tuple(
            Finding(i, str(f["name"]).strip()) for i, f in enumerate(doc["findings"])
        )
        by_dname = {d.name: d.id for d in diseases}
        by_fname = {f.name: f.id for f in findings}
        edges = tuple(
            Edge(
                by_dname[str(e["disease"]).strip()],
                by_fname[str(e["finding"]).strip()],
                float(e["prob"]),
            )
            for e in doc["edges"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"malformed native network document: {exc}") from exc
    return QmrNetwork(diseases, findings, edges)


def _parse_symcat(doc) -> QmrNetwork:
    """Parse the map format {disease: [[finding, prob], ...]}.

    Disease priors are not part of this format; a uniform categorical
    prior 1/n is assigned.
    """
    if not isinstance(doc, dict) or not doc:
        raise NetworkFormatError("symcat-style document must be a non-empty object")
    disease_names = [str(name).strip() for name in doc]
    n = len(disease_names)
    diseases = tuple(Disease(j, name, 1.0 / n) for j, name in enumerate(disease_names))

    finding_names: list[str] = []
    seen: dict[str, int] = {}
    edges: list[Edge] = []
    try:
        for j, (_, items) in enumerate(doc.items()):
            for fname, prob in items:
                fname = str(fname).strip()
                if fname not in seen:
                    seen[fname] = len(finding_names)
                    finding_names.append(fname)
                edges.append(Edge(j, seen[fname], float(prob)))
    except (TypeError, ValueError) as exc:
        raise NetworkFormatError(f"malformed symcat-style document: {exc}") from exc
    findings = tuple(Finding(i, name) for i, name in enumerate(finding_names))
    return QmrNetwork(diseases, findings, tuple(edges))


def load_network(path: str | Path, format: str = "auto", strict: bool = True) -> QmrNetwork:
    """Load a network file; validation failures raise unless ``strict`` is off.

    ``format`` is one of ``native``, ``symcat``, or ``auto`` (detect from
    the document structure: a native file is an object with ``diseases``,
    ``findings`` and ``edges`` keys). ``strict=False`` returns the parsed
    network even when invariants fail, so linting can list every problem.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON: {exc}") from exc

    if format == "auto":
        is_native = isinstance(doc, dict) and {"diseases", "findings", "edges"} <= set(doc)
        format = "native" if is_native else "symcat"
    if format == "native":
        net = _parse_native(doc)
    elif format in ("symcat", "symcat-style"):
        net = _parse_symcat(doc)
    else:
        raise ValueError(f"unknown network format: {format!r}")
    return _validated(net) if strict else net


def to_native_dict(net: QmrNetwork) -> dict:
    """Serialize to the native JSON structure (carries explicit priors)."""
    return {
        "diseases": [{"name": d.name, "prior": d.prior} for d in net.diseases],
        "findings": [{"name": f.name} for f in net.findings],
        "edges": [
            {
                "disease": net.diseases[e.disease_id].name,
                "finding": net.findings[e.finding_id].name,
                "prob": e.prob,
            }
            for e in net.edges
        ],
    }


def save_network(net: QmrNetwork, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_native_dict(net), fh, indent=1)


def load_dialogue_cases(path: str | Path) -> list[DialogueCase]:
    """Load a list of consultation cases (see :class:`DialogueCase`).

    Unknown extra keys (e.g. a simulator's ``all_states`` dump) are ignored.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise NetworkFormatError("case file must be a JSON array")
    cases = []
    for k, item in enumerate(doc):
        try:
            cases.append(
                DialogueCase(
                    disease_name=str(item["disease"]).strip(),
                    explicit={
                        str(f).strip(): bool(v)
                        for f, v in item.get("explicit", {}).items()
                    },
                    implicit={
                        str(f).strip(): bool(v)
                        for f, v in item.get("implicit", {}).items()
                    },
                )
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise NetworkFormatError(f"case #{k} is malformed: {exc}") from exc
    return cases


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_network_from_cases(
    cases: Sequence[DialogueCase], prior_mode: str = "uniform"
) -> QmrNetwork:
    """Estimate a network from labeled cases.

    Edge probability is the fraction of a disease's cases in which the
    finding is recorded positive (explicit or implicit); zero estimates are
    omitted entirely, since a noisy-OR edge with probability 0 is the same
    as no edge and candidate pruning relies on absent edges. Priors are
    uniform or the empirical case frequency, per ``prior_mode``.
    """
    if not cases:
        raise ValueError("cannot build a network from zero cases")
    if prior_mode not in ("uniform", "empirical"):
        raise ValueError(f"unknown prior_mode: {prior_mode!r}")

    disease_names: list[str] = []
    finding_names: list[str] = []
    d_seen: dict[str, int] = {}
    f_seen: dict[str, int] = {}
    for case in cases:
        if case.disease_name not in d_seen:
            d_seen[case.disease_name] = len(disease_names)
            disease_names.append(case.disease_name)
        for fname in list(case.explicit) + list(case.implicit):
            if fname not in f_seen:
                f_seen[fname] = len(finding_names)
                finding_names.append(fname)

    n, m = len(disease_names), len(finding_names)
    case_counts = np.zeros(n, dtype=np.int64)
    positive_counts = np.zeros((n, m), dtype=np.int64)
    for case in cases:
        j = d_seen[case.disease_name]
        case_counts[j] += 1
        for fname, present in {**case.explicit, **case.implicit}.items():
            if present:
                positive_counts[j, f_seen[fname]] += 1

    edges = []
    for j in range(n):
        row = positive_counts[j]
        for i in np.nonzero(row)[0]:
            edges.append(Edge(j, int(i), float(row[i] / case_counts[j])))

    undiagnosable = [disease_names[j] for j in range(n) if not positive_counts[j].any()]
    if undiagnosable:
        warnings.warn(
            f"diseases with no positive findings in any case (undiagnosable): "
            f"{undiagnosable}",
            stacklevel=2,
        )

    if prior_mode == "uniform":
        priors = np.full(n, 1.0 / n)
    else:
        priors = case_counts / case_counts.sum()
    diseases = tuple(
        Disease(j, name, float(priors[j])) for j, name in enumerate(disease_names)
    )
    findings = tuple(Finding(i, name) for i, name in enumerate(finding_names))
    return _validated(QmrNetwork(diseases, findings, tuple(edges)))


def generate_synthetic_network(
    n_diseases: int,
    n_findings: int,
    mean_findings_per_disease: float,
    prob_range: tuple[float, float] = (0.1, 0.9),
    seed: int = 0,
) -> QmrNetwork:
    """Generate a random network with roughly Poisson connectivity.

    Each disease gets max(1, Poisson(mean)) distinct findings (capped at
    ``n_findings``) with activation probabilities uniform over
    ``prob_range``; priors are uniform. Deterministic for a fixed seed.
    """
    lo, hi = prob_range
    if n_diseases < 1 or n_findings < 1:
        raise ValueError("need at least one disease and one finding")
    if not 0.0 < lo <= hi <= 1.0:
        raise ValueError(f"prob_range must satisfy 0 < lo <= hi <= 1, got {prob_range}")
    if mean_findings_per_disease > n_findings:
        raise ValueError(
            f"mean_findings_per_disease {mean_findings_per_disease} exceeds "
            f"the {n_findings} available findings"
        )

    rng = np.random.default_rng(seed)
    dd = max(1, len(str(n_diseases - 1)))
    fd = max(1, len(str(n_findings - 1)))
    diseases = tuple(
        Disease(j, f"disease_{j:0{dd}d}", 1.0 / n_diseases) for j in range(n_diseases)
    )
    findings = tuple(Finding(i, f"finding_{i:0{fd}d}") for i in range(n_findings))

    edges = []
    for j in range(n_diseases):
        k = int(min(n_findings, max(1, rng.poisson(mean_findings_per_disease))))
        chosen = rng.choice(n_findings, size=k, replace=False)
        probs = rng.uniform(lo, hi, size=k)
        for i, p in sorted(zip(chosen.tolist(), probs.tolist())):
            edges.append(Edge(j, i, p))
    return _validated(QmrNetwork(diseases, findings, tuple(edges)))


@dataclass(frozen=True)
class NetworkStats:
    n_diseases: int
    n_findings: int
    n_edges: int
    findings_per_disease: float
    diseases_per_finding: float
    n_connected_findings: int


def network_stats(net: QmrNetwork) -> NetworkStats:
    """Connectivity summary; ``diseases_per_finding`` averages over the whole
    finding universe (dataset convention), connected-only count is also kept."""
    n_edges = len(net.edges)
    connected = sum(1 for i in range(net.n_findings) if net.index_fd[i])
    return NetworkStats(
        n_diseases=net.n_diseases,
        n_findings=net.n_findings,
        n_edges=n_edges,
        findings_per_disease=n_edges / net.n_diseases if net.n_diseases else 0.0,
        diseases_per_finding=n_edges / net.n_findings if net.n_findings else 0.0,
        n_connected_findings=connected,
    )
