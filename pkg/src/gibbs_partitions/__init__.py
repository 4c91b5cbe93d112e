"""Gibbs partition / composition scheme models: phase diagram, exact laws,
samplers, limit laws, and limit-theorem verifiers."""

from .weights import SlowVarying, WeightSequence, SchemeSpec
from .phases import Phase, Criticality, Scale, PhaseReport, classify, solve_rho_u, mu_of, mixture_p
from .exact import (
    DiscreteLaw,
    tv_distance,
    law_X,
    law_N,
    law_Nhat,
    law_Nn,
    stopped_sum_law,
    brute_force_partition_law,
    profile_law,
    prefix_law,
    giant_deficit_law,
    product_law,
    extended_law_Nn,
)
from .schemes import bundled_scheme, bundled_names

__all__ = [
    "SlowVarying",
    "WeightSequence",
    "SchemeSpec",
    "Phase",
    "Criticality",
    "Scale",
    "PhaseReport",
    "classify",
    "solve_rho_u",
    "mu_of",
    "mixture_p",
    "DiscreteLaw",
    "tv_distance",
    "law_X",
    "law_N",
    "law_Nhat",
    "law_Nn",
    "stopped_sum_law",
    "brute_force_partition_law",
    "profile_law",
    "prefix_law",
    "giant_deficit_law",
    "product_law",
    "extended_law_Nn",
    "bundled_scheme",
    "bundled_names",
]

__version__ = "0.1.0"
