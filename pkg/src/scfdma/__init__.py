"""Minimum-power channel allocation for SC-FDMA uplink (interleaved and localized)."""

from .blocks import count_blocks_bruteforce, enumerate_blocks, iter_blocks
from .gainsim import Scenario, cost231_path_loss_db, noise_power, sample_gains
from .lfdma import ContiguousResult, lfdma_optimal, lfdma_user_block_cost
from .matching import MatchingResult, WeightMatrix, brute_force_matching, kuhn_munkres
from .model import (
    Allocation, AllocationResult, ChannelBlock, GuardError, Instance, InvalidInstanceError,
    ParameterError, block_length, channels_of, validate_instance,
)
from .mpca import SolveReport, build_weight_matrix, evaluate_allocation, mpca
from .power import (
    UserCost, feasibility_check, max_per_channel_power, min_power_for_demand, rate,
)

__all__ = [
    "Allocation", "AllocationResult", "ChannelBlock", "ContiguousResult", "GuardError", "Instance",
    "InvalidInstanceError", "MatchingResult", "ParameterError", "Scenario", "SolveReport", "UserCost",
    "WeightMatrix", "block_length", "brute_force_matching", "build_weight_matrix", "channels_of",
    "cost231_path_loss_db", "count_blocks_bruteforce", "enumerate_blocks", "evaluate_allocation",
    "feasibility_check", "iter_blocks", "kuhn_munkres", "lfdma_optimal", "lfdma_user_block_cost",
    "max_per_channel_power", "min_power_for_demand", "mpca", "noise_power", "rate", "sample_gains",
    "validate_instance",
]
