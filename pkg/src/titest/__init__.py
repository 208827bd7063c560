"""Discrete Bayesian hypothesis testing against the test-information ceiling.

The package is organized bottom-up: model (joint distributions and entropy
summaries in bits), rules (posterior decision rules and exact error
probabilities), typicality (M-extension sampling, typical-set predicates,
exact censuses), experiment (seeded Monte Carlo trials, achievability and
converse audits, sweeps), and cli (the titest command).
"""

from .experiment import (
    SWEEP_COLUMNS,
    AchievabilityRecord,
    ConverseRecord,
    ExperimentReport,
    FanoRecord,
    SequenceTrial,
    achievability_check,
    converse_check,
    exact_failure_probability,
    extended_fano_check,
    make_rule_tables,
    run_experiment,
    run_trial,
    sweep,
)
from .model import (
    COIN_N_CAP,
    DiscreteJointModel,
    InfoSummary,
    InvalidDistributionError,
    PosteriorColumn,
    ZeroEvidenceError,
    build_bsc_model,
    build_coin_model,
    build_constant_model,
    build_identity_model,
    entropy,
    info_summary,
    posterior,
    surprisal,
)
from .rules import (
    DecisionRule,
    decide,
    decide_eap,
    decide_map,
    decide_meap,
    decide_sap,
    error_probability,
    inverse_cdf_pick,
    sap_sample,
)
from .typicality import (
    DEFAULT_ENUM_CAP,
    CensusBound,
    CensusReport,
    EnumerationTooLargeError,
    SequencePair,
    TypicalityCheck,
    TypicalityParams,
    TypicalityVerdict,
    conditional_members,
    is_jointly_typical,
    is_typical,
    sample_extension,
    typical_set_census,
)

__version__ = "0.1.0"

__all__ = [
    "COIN_N_CAP",
    "DEFAULT_ENUM_CAP",
    "SWEEP_COLUMNS",
    "AchievabilityRecord",
    "CensusBound",
    "CensusReport",
    "ConverseRecord",
    "DecisionRule",
    "DiscreteJointModel",
    "EnumerationTooLargeError",
    "ExperimentReport",
    "FanoRecord",
    "InfoSummary",
    "InvalidDistributionError",
    "PosteriorColumn",
    "SequencePair",
    "SequenceTrial",
    "TypicalityCheck",
    "TypicalityParams",
    "TypicalityVerdict",
    "ZeroEvidenceError",
    "achievability_check",
    "build_bsc_model",
    "build_coin_model",
    "build_constant_model",
    "build_identity_model",
    "conditional_members",
    "converse_check",
    "decide",
    "decide_eap",
    "decide_map",
    "decide_meap",
    "decide_sap",
    "entropy",
    "error_probability",
    "exact_failure_probability",
    "extended_fano_check",
    "info_summary",
    "inverse_cdf_pick",
    "is_jointly_typical",
    "is_typical",
    "make_rule_tables",
    "posterior",
    "run_experiment",
    "run_trial",
    "sample_extension",
    "sap_sample",
    "surprisal",
    "sweep",
    "typical_set_census",
    "__version__",
]
