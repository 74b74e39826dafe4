"""Differential diagnosis over noisy-OR belief networks.

Exact disease inference under the one-disease-per-case assumption,
information-driven selection of the next finding to ask about (with
multi-step lookahead), interactive diagnosis sessions, a patient
simulator, and an evaluation harness.
"""

from .exceptions import (
    EvidenceError,
    NetworkFormatError,
    NetworkValidationError,
    QmrdxError,
    SessionStateError,
)
from .inference import (
    Evidence,
    LogWeight,
    Posterior,
    general_noisy_or_posterior,
    log_joint_weight,
    posterior,
    top_k,
)
from .inquiry import (
    CandidateScore,
    LookaheadConfig,
    UtilityKind,
    candidate_findings,
    lookahead_value,
    outcome_probability,
    score_candidates,
    select_next,
    utility,
)
from .network import (
    DialogueCase,
    Disease,
    Edge,
    Finding,
    QmrNetwork,
    build_network_from_cases,
    generate_synthetic_network,
    load_dialogue_cases,
    load_network,
    network_stats,
    save_network,
    to_native_dict,
    validate,
)
from .session import (
    Diagnose,
    Diagnosis,
    Session,
    SessionConfig,
    SessionStatus,
    StopReason,
    Suggest,
    create_session,
    replay_transcript,
)
from .simulate import (
    SimulatedCase,
    case_rng,
    cases_from_dump,
    dump_cases,
    patient_answer,
    sample_case,
    sample_cases,
)
from .evaluate import (
    EpisodeResult,
    EvalReport,
    cheater_evaluate,
    dialogue_setup,
    evaluate,
    evaluate_cases,
    evaluate_dialogue,
    format_table,
    grid_search,
    paired_se,
    report_to_csv_rows,
    run_episode,
)

__version__ = "0.1.0"
