"""Exact, desk-scale experiments on sigma protocols viewed as sheaves over
an attacker's site of partial transcripts."""
from .attacker_site import (
    AttackerSite,
    CoveringFamily,
    ViewMorphism,
    ViewObject,
    ViewShape,
    build_site,
    check_topology_axioms,
    validate_covering_by_simulation,
)
from .exceptions import (
    ConfigError,
    DomainError,
    InconsistencyError,
    PreconditionError,
    ScaleError,
    SigmaSiteError,
)
from .group_arith import GroupElement, GroupParams, validate_group
from .indist_lab import (
    ExactDistribution,
    real_distribution,
    simulated_distribution,
    statistical_distance,
)
from .sigma_core import ChaumPedersen, Schnorr, Statement, Transcript, Witness, make_protocol
from .suite import SuiteConfig, emit_report, parse_config, run_suite
from .transcript_sheaf import (
    build_presheaf,
    check_functoriality,
    check_sheaf_distributional,
    check_sheaf_literal,
    check_torsor,
    global_section_analysis,
    local_triviality_witness,
)

__all__ = [
    "AttackerSite",
    "build_presheaf",
    "build_site",
    "ChaumPedersen",
    "check_functoriality",
    "check_sheaf_distributional",
    "check_sheaf_literal",
    "check_topology_axioms",
    "check_torsor",
    "ConfigError",
    "CoveringFamily",
    "DomainError",
    "emit_report",
    "ExactDistribution",
    "global_section_analysis",
    "GroupElement",
    "GroupParams",
    "InconsistencyError",
    "local_triviality_witness",
    "make_protocol",
    "parse_config",
    "PreconditionError",
    "real_distribution",
    "run_suite",
    "ScaleError",
    "Schnorr",
    "SigmaSiteError",
    "simulated_distribution",
    "Statement",
    "statistical_distance",
    "SuiteConfig",
    "Transcript",
    "validate_covering_by_simulation",
    "validate_group",
    "ViewMorphism",
    "ViewObject",
    "ViewShape",
    "Witness",
]
__version__ = "0.1.0"
