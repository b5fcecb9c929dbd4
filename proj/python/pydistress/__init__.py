from ._distress import (
    Codec,
    DistressError,
    analytic_advantage,
    builtin_profile_json,
    closed_form_advantage,
    estimate_advantage,
    false_positive_rate,
    guarantee_suite,
    scenario_run,
    structure_rate,
    toy_census,
    validate_profile,
)

__all__ = [
    "Codec",
    "DistressError",
    "analytic_advantage",
    "builtin_profile_json",
    "closed_form_advantage",
    "estimate_advantage",
    "false_positive_rate",
    "guarantee_suite",
    "scenario_run",
    "structure_rate",
    "toy_census",
    "validate_profile",
]
