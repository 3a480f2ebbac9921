"""Antithetic multilevel Monte Carlo for multi-dimensional SDEs.

A numpy library for estimating expectations of European and Asian payoffs
under SDEs driven by multi-dimensional Brownian motion.  Paths use a
truncated Milstein discretisation that needs only Brownian increments (no
iterated-area simulation); level corrections couple each coarse path with an
antithetic pair of fine paths whose half-step increments are swapped, which
restores the fast variance decay of the scalar first-order scheme.
"""

__version__ = "0.1.0"

from .models import ModelSpec, builtin, builtin_names, check_commutativity, compute_h
from .payoffs import PayoffSpec, builtin_payoff, correction_sample, payoff_names
from .randomness import (
    BrownianSlice,
    StreamKey,
    antithetic_swap,
    coarse_increment,
    draw_slice,
    draw_slices,
)
from .schemes import (
    PathDivergenceError,
    TripleState,
    clark_cameron_oracle,
    coupled_coarse_step,
    euler_step,
    simulate_euler_pair,
    simulate_single_path,
    simulate_triple_path,
    truncated_milstein_step,
)
from .stats import MomentAccumulator
from .mlmc import (
    LevelStats,
    MlmcResult,
    consistency_check,
    fit_rates,
    run_adaptive,
    run_fixed,
)

__all__ = [
    "__version__",
    "ModelSpec", "builtin", "builtin_names", "check_commutativity", "compute_h",
    "PayoffSpec", "builtin_payoff", "correction_sample", "payoff_names",
    "BrownianSlice", "StreamKey", "antithetic_swap", "coarse_increment",
    "draw_slice", "draw_slices",
    "PathDivergenceError", "TripleState", "clark_cameron_oracle",
    "coupled_coarse_step", "euler_step", "simulate_euler_pair",
    "simulate_single_path", "simulate_triple_path", "truncated_milstein_step",
    "MomentAccumulator",
    "LevelStats", "MlmcResult", "consistency_check", "fit_rates",
    "run_adaptive", "run_fixed",
]
