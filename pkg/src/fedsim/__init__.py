"""Federated-learning simulator with pluggable aggregation strategies.

The core loop broadcasts a global model, trains it locally on each
selected client, and averages the results back together. Three weighting
schemes are provided (plain size-weighted averaging, cost-weighted
averaging, and a PID-style scheme with proportional, differential, and
integral terms), together with Poisson-based client selection that drops
oversized outliers in most rounds.
"""

from fedsim._kernels import BACKEND
from fedsim.aggregation import (
    DEFAULT_CW_ALPHA,
    DEFAULT_PID_COEFFS,
    DEFAULT_WINDOW,
    STRATEGIES,
    AggregationWeights,
    ClientRoundInput,
    PidCoefficients,
    StrategySpec,
    aggregate,
    compute_weights,
    fedavg_weights,
    fedcostwavg_weights,
    fedpidavg_weights,
)
from fedsim.config import SimulationConfig, parse_config
from fedsim.errors import (
    ConfigError,
    DimensionMismatch,
    DivergenceError,
    EmptyInput,
    FedsimError,
    FormatError,
    InvalidArgument,
    InvalidCost,
    MissingHistory,
    NonFiniteValue,
    NonFiniteWeight,
)
from fedsim.metrics import RoundRecord, comm_cost_summary, read_records, write_records
from fedsim.params import ParameterVector, checkpoint_read, checkpoint_write, weighted_sum
from fedsim.selection import (
    SELECTION_MODES,
    SelectionPolicy,
    estimate_lambda,
    poisson_pmf,
    select_clients,
)
from fedsim.sim import (
    TASK_KINDS,
    ClientRecord,
    FederationState,
    SyntheticTask,
    build_federation,
    generate_federation,
    local_train,
    run_federation,
    run_round,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationWeights",
    "BACKEND",
    "ClientRecord",
    "ClientRoundInput",
    "ConfigError",
    "DEFAULT_CW_ALPHA",
    "DEFAULT_PID_COEFFS",
    "DEFAULT_WINDOW",
    "DimensionMismatch",
    "DivergenceError",
    "EmptyInput",
    "FederationState",
    "FedsimError",
    "FormatError",
    "InvalidArgument",
    "InvalidCost",
    "MissingHistory",
    "NonFiniteValue",
    "NonFiniteWeight",
    "ParameterVector",
    "PidCoefficients",
    "RoundRecord",
    "SELECTION_MODES",
    "STRATEGIES",
    "SelectionPolicy",
    "SimulationConfig",
    "StrategySpec",
    "SyntheticTask",
    "TASK_KINDS",
    "aggregate",
    "build_federation",
    "checkpoint_read",
    "checkpoint_write",
    "comm_cost_summary",
    "compute_weights",
    "estimate_lambda",
    "fedavg_weights",
    "fedcostwavg_weights",
    "fedpidavg_weights",
    "generate_federation",
    "local_train",
    "parse_config",
    "poisson_pmf",
    "read_records",
    "run_federation",
    "run_round",
    "run_simulation",
    "select_clients",
    "weighted_sum",
    "write_records",
]
