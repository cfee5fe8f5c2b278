"""Synthetic federation and the federated round loop.

Each round: select participants, train each one locally from the current
global model, append the resulting costs to the participants' histories
(non-participants carry their last cost forward so every history stays
aligned), aggregate the participants' models with the configured
strategy, and broadcast the new global model.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from fedsim import _kernels
from fedsim.aggregation import (
    FALLBACK_MISSING_HISTORY,
    ClientRoundInput,
    PidCoefficients,
    StrategySpec,
    aggregate,
)
from fedsim.errors import ConfigError, DivergenceError, MissingHistory
from fedsim.metrics import RoundRecord
from fedsim.params import ParameterVector
from fedsim.selection import (
    MODE_POISSON_DROPOUT,
    SelectionPolicy,
    estimate_lambda,
    select_clients,
)

if TYPE_CHECKING:
    from fedsim.config import SimulationConfig

logger = logging.getLogger(__name__)

TASK_LEAST_SQUARES = "least_squares"
TASK_LOGISTIC = "logistic"
TASK_KINDS = (TASK_LEAST_SQUARES, TASK_LOGISTIC)

# Floor keeping every recorded cost strictly positive.
COST_FLOOR = 1e-12


@dataclass(frozen=True)
class SyntheticTask:
    """A synthetic local learning problem shared by all clients.

    ``client_shift`` scales a per-client offset of the generating
    parameters; zero means IID clients. ``noise_sigma`` perturbs the
    generating signal.
    """

    kind: str = TASK_LEAST_SQUARES
    dim: int = 8
    client_shift: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"task.kind: unknown task {self.kind!r}; expected one of {TASK_KINDS}")
        if self.dim < 1:
            raise ConfigError(f"task.dim: must be >= 1, got {self.dim}")
        if self.client_shift < 0:
            raise ConfigError(f"task.client_shift: must be >= 0, got {self.client_shift}")
        if self.noise_sigma < 0:
            raise ConfigError(f"task.noise_sigma: must be >= 0, got {self.noise_sigma}")


@dataclass
class ClientRecord:
    """One data center: its local dataset and per-round cost history."""

    client_id: int
    size: int
    features: np.ndarray
    targets: np.ndarray
    cost_history: list[float] = field(default_factory=list)


@dataclass
class FederationState:
    task: SyntheticTask
    global_model: ParameterVector
    clients: list[ClientRecord]
    round_index: int = 0
    rng_seed: int = 0


def poisson_sizes(rng: np.random.Generator, count: int, lam: float) -> list[int]:
    """Draw ``count`` client sizes from Poisson(lam), resampling zeros."""
    sizes = []
    while len(sizes) < count:
        value = int(rng.poisson(lam))
        if value > 0:
            sizes.append(value)
    return sizes


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _build_clients(
    task: SyntheticTask, sizes: list[int], rng: np.random.Generator
) -> list[ClientRecord]:
    base = rng.standard_normal(task.dim)
    clients = []
    for cid, size in enumerate(sizes):
        shift = task.client_shift * rng.standard_normal(task.dim)
        w_true = base + shift
        x = rng.standard_normal((size, task.dim))
        signal = x @ w_true + task.noise_sigma * rng.standard_normal(size)
        if task.kind == TASK_LEAST_SQUARES:
            y = signal
        else:
            y = (rng.random(size) < _stable_sigmoid(signal)).astype(np.float64)
        clients.append(ClientRecord(client_id=cid, size=size, features=x, targets=y))
    return clients


def build_federation(task: SyntheticTask, sizes: list[int], seed: int) -> FederationState:
    """Deterministically build a federation with the given client sizes."""
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError(f"client sizes must all be >= 1, got {sizes!r}")
    rng = np.random.default_rng(seed)
    clients = _build_clients(task, list(sizes), rng)
    return FederationState(
        task=task,
        global_model=ParameterVector(np.zeros(task.dim)),
        clients=clients,
        rng_seed=seed,
    )


def generate_federation(
    task: SyntheticTask, n_clients: int, lam: float, seed: int
) -> FederationState:
    """Build a federation with sizes drawn i.i.d. from Poisson(lam)."""
    if n_clients < 1:
        raise ConfigError(f"clients: must be >= 1, got {n_clients}")
    if not (math.isfinite(lam) and lam > 0):
        raise ConfigError(f"lambda: must be positive, got {lam!r}")
    rng = np.random.default_rng(seed)
    sizes = poisson_sizes(rng, n_clients, lam)
    clients = _build_clients(task, sizes, rng)
    return FederationState(
        task=task,
        global_model=ParameterVector(np.zeros(task.dim)),
        clients=clients,
        rng_seed=seed,
    )


def evaluate_cost(client: ClientRecord, model: ParameterVector, kind: str) -> float:
    """Local cost of ``model`` on the client's data, floored positive."""
    if kind == TASK_LEAST_SQUARES:
        cost = _kernels.least_squares_cost(client.features, client.targets, model.values)
    else:
        cost = _kernels.logistic_cost(client.features, client.targets, model.values)
    return max(cost, COST_FLOOR)


def local_train(
    client: ClientRecord,
    global_model: ParameterVector,
    kind: str,
    epochs: int,
    lr: float,
) -> tuple[ParameterVector, float]:
    """Run full-batch gradient descent from the broadcast model.

    Returns the updated local parameters and the post-training cost on
    the client's own data. A non-finite cost raises DivergenceError
    instead of leaking NaNs downstream.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if not (math.isfinite(lr) and lr > 0):
        raise ValueError(f"lr must be positive, got {lr!r}")
    if kind == TASK_LEAST_SQUARES:
        w, cost = _kernels.train_least_squares(
            client.features, client.targets, global_model.values, lr, epochs
        )
    else:
        w, cost = _kernels.train_logistic(
            client.features, client.targets, global_model.values, lr, epochs
        )
    if not math.isfinite(cost) or not np.all(np.isfinite(w)):
        raise DivergenceError(
            f"client {client.client_id}: training diverged (cost={cost!r}); reduce lr"
        )
    return ParameterVector(w), max(cost, COST_FLOOR)


def _global_cost(state: FederationState) -> float:
    total = sum(c.size for c in state.clients)
    pooled = math.fsum(
        c.size * evaluate_cost(c, state.global_model, state.task.kind)
        for c in state.clients
    )
    return max(pooled / total, COST_FLOOR)


def run_round(
    state: FederationState,
    strategy: StrategySpec,
    policy: SelectionPolicy,
    epochs: int = 1,
    lr: float = 0.1,
) -> tuple[FederationState, RoundRecord]:
    """Advance the federation by one round."""
    start = time.perf_counter_ns()
    sizes = {c.client_id: c.size for c in state.clients}
    selected = select_clients(sizes, policy, state.round_index)
    selected_set = set(selected)

    trained: dict[int, ParameterVector] = {}
    for client in state.clients:
        if client.client_id in selected_set:
            model, cost = local_train(
                client, state.global_model, state.task.kind, epochs, lr
            )
            trained[client.client_id] = model
            client.cost_history.append(cost)
        elif client.cost_history:
            client.cost_history.append(client.cost_history[-1])
        else:
            # Dropped in the very first round: nothing to carry forward
            # yet, so record the broadcast model's local cost instead.
            client.cost_history.append(
                evaluate_cost(client, state.global_model, state.task.kind)
            )

    inputs = [
        ClientRoundInput(
            client_id=c.client_id,
            size=c.size,
            model=trained[c.client_id],
            cost_history=tuple(c.cost_history),
        )
        for c in state.clients
        if c.client_id in selected_set
    ]
    try:
        new_model, weights = aggregate(strategy, inputs)
        fallback = weights.fallback_applied
    except MissingHistory:
        new_model, weights = aggregate(StrategySpec("fedavg"), inputs)
        fallback = FALLBACK_MISSING_HISTORY
        logger.info(
            "round %d: %s needs more cost history; fell back to fedavg",
            state.round_index,
            strategy.name,
        )

    round_index = state.round_index
    state.global_model = new_model
    state.round_index += 1

    record = RoundRecord(
        round_index=round_index,
        selected_ids=tuple(selected),
        weights=weights,
        per_client_cost={c.client_id: c.cost_history[-1] for c in state.clients},
        global_cost=_global_cost(state),
        participation_fraction=len(selected) / len(state.clients),
        fallback_applied=fallback,
        wall_ms=(time.perf_counter_ns() - start) // 1_000_000,
    )
    return state, record


def build_policy(state: FederationState, mode: str, period: int) -> SelectionPolicy:
    """Selection policy for a federation; lambda is estimated once."""
    if mode == MODE_POISSON_DROPOUT:
        lam_hat = estimate_lambda([c.size for c in state.clients])
        return SelectionPolicy(mode, period, lam_hat)
    return SelectionPolicy(mode, period)


def run_rounds(
    state: FederationState,
    strategy: StrategySpec,
    policy: SelectionPolicy,
    rounds: int,
    epochs: int = 1,
    lr: float = 0.1,
    patience: int = 10,
    tol: float = 1e-6,
) -> list[RoundRecord]:
    """Run up to ``rounds`` rounds on a prepared federation.

    With ``patience`` > 0, stops early once the global cost has failed to
    improve by a relative ``tol`` for ``patience`` consecutive rounds.
    """
    records: list[RoundRecord] = []
    best = math.inf
    stall = 0
    for _ in range(rounds):
        state, record = run_round(state, strategy, policy, epochs=epochs, lr=lr)
        records.append(record)
        if patience > 0:
            if record.global_cost < best * (1.0 - tol):
                best = record.global_cost
                stall = 0
            else:
                stall += 1
            if stall >= patience:
                logger.info(
                    "stopping after round %d: no relative improvement > %g "
                    "for %d rounds",
                    record.round_index,
                    tol,
                    patience,
                )
                break
    return records


def run_federation(config: "SimulationConfig") -> tuple[list[RoundRecord], FederationState]:
    """Generate the federation from the config, run it, return both."""
    task = SyntheticTask(
        kind=config.task_kind,
        dim=config.dim,
        client_shift=config.client_shift,
        noise_sigma=config.noise_sigma,
    )
    state = generate_federation(task, config.clients, config.lam, config.seed)
    policy = build_policy(state, config.selection_mode, config.full_participation_period)
    strategy = StrategySpec(
        name=config.strategy,
        cw_alpha=config.cw_alpha,
        coeffs=PidCoefficients(config.alpha, config.beta, config.gamma),
        window=config.window,
        k_abs=config.k_abs,
    )
    records = run_rounds(
        state,
        strategy,
        policy,
        rounds=config.rounds,
        epochs=config.epochs,
        lr=config.lr,
        patience=config.patience,
        tol=config.tol,
    )
    return records, state


def run_simulation(config: "SimulationConfig") -> list[RoundRecord]:
    """Run a full simulation from a validated config."""
    return run_federation(config)[0]
