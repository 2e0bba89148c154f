"""Continuous-time simulation of the Tangle DAG ledger."""

from .arrival import SimConfig, Simulation, next_interarrival, run_seed, run_simulation
from .metrics import (ExitProfile, MetricsRecord, check_tip_approval_relation, confidence_level,
                      fit_growth_phases, summarize_approval, summarize_tips, tip_growth_slope)
from .selector import URTS, URW, SelectorKind, brw, select_pair, select_urts, select_walk, walk_step
from .tangle import (Tangle, Transaction, add_transaction, cumulative_weight_oracle, indirectly_approves,
                     update_weights_incremental)

__version__ = "0.1.0"
