"""Input-constrained binary symmetric channels: entropy-rate expansions and capacity bounds."""

from .asymptotics import AsymptoticExpansion, expansion_of, f_nk, g_nk, g_positive, h_nk
from .capacity import (
    CapacityExpansion,
    TaylorProbe,
    capacity_expansion,
    capacity_sandwich,
    optimize_hm,
    optimize_Hn,
    sharpness_probe,
    taylor_probe,
)
from .channel import cond_entropy_birch_lower, cond_entropy_output, entropy_rate_sandwich, joint_xz_prob
from .constraint import FiniteTypeConstraint, ReducibleConstraintError, ResourceError
from .markov import InvalidChainError, MarkovChain, chain_from_kernel, entropy_rate_markov, two_state_chain
from .rll import RLLParams, f_general, rho0, rll_constraint
from .spectral import ConvergenceError, noiseless_capacity, parry_chain, perron

__version__ = "0.1.0"

__all__ = [
    "AsymptoticExpansion", "expansion_of", "f_nk", "g_nk", "g_positive", "h_nk",
    "CapacityExpansion", "TaylorProbe", "capacity_expansion", "capacity_sandwich",
    "optimize_hm", "optimize_Hn", "sharpness_probe", "taylor_probe",
    "cond_entropy_birch_lower", "cond_entropy_output", "entropy_rate_sandwich", "joint_xz_prob",
    "FiniteTypeConstraint", "ReducibleConstraintError", "ResourceError",
    "InvalidChainError", "MarkovChain", "chain_from_kernel", "entropy_rate_markov", "two_state_chain",
    "RLLParams", "f_general", "rho0", "rll_constraint",
    "ConvergenceError", "noiseless_capacity", "parry_chain", "perron",
]
