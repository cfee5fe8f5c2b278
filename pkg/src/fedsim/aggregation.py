"""Aggregation strategies: FedAvg, FedCostWAvg, and FedPIDAvg.

All three compute one scalar weight per client and combine the client
models with a weighted sum. FedAvg weighs by dataset-size share alone.
FedCostWAvg mixes the size share with the share of each client's
cost *ratio* (previous cost over current cost). FedPIDAvg mixes three
terms, echoing a PID controller: the size share (proportional), the
share of the last-round cost *drop* (derivative), and the share of the
summed recent costs (integral).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from fedsim.errors import EmptyInput, InvalidCost, MissingHistory
from fedsim.params import ParameterVector, weighted_sum

STRATEGIES = ("fedavg", "fedcostwavg", "fedpidavg")

FALLBACK_NONE = "none"
FALLBACK_MISSING_HISTORY = "missing_history"
FALLBACK_DEGENERATE = "degenerate_normalizer"

DEFAULT_CW_ALPHA = 0.5
DEFAULT_PID_COEFFS = (0.45, 0.45, 0.1)
DEFAULT_WINDOW = 6

# Relative threshold below which a cost-drop normalizer counts as zero.
NORMALIZER_EPS = 1e-12


@dataclass(frozen=True)
class ClientRoundInput:
    """One client's contribution to a single aggregation call.

    ``cost_history`` is ordered oldest first; its last element is the
    client's post-training cost for the current round.
    """

    client_id: int
    size: int
    model: ParameterVector
    cost_history: tuple[float, ...]

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"client {self.client_id}: size must be >= 1, got {self.size}")
        if len(self.cost_history) == 0:
            raise InvalidCost(f"client {self.client_id}: empty cost history")
        for c in self.cost_history:
            if not (math.isfinite(c) and c > 0.0):
                raise InvalidCost(
                    f"client {self.client_id}: cost {c!r} is not finite and positive"
                )


@dataclass(frozen=True)
class PidCoefficients:
    """Mixing coefficients for FedPIDAvg; must sum to 1."""

    alpha: float = DEFAULT_PID_COEFFS[0]
    beta: float = DEFAULT_PID_COEFFS[1]
    gamma: float = DEFAULT_PID_COEFFS[2]

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        total = self.alpha + self.beta + self.gamma
        if abs(total - 1.0) > 1e-12:
            raise ValueError(
                f"alpha + beta + gamma must equal 1 (got {total!r})"
            )


@dataclass(frozen=True)
class AggregationWeights:
    """Per-client weights plus the client ordering they apply to."""

    client_ids: tuple[int, ...]
    weights: tuple[float, ...]
    fallback_applied: str = FALLBACK_NONE

    def __post_init__(self):
        if len(self.client_ids) != len(self.weights):
            raise ValueError(
                f"{len(self.weights)} weights for {len(self.client_ids)} clients"
            )


def _check_inputs(inputs: list[ClientRoundInput]) -> None:
    if not inputs:
        raise EmptyInput("aggregation needs at least one client")
    hist_len = len(inputs[0].cost_history)
    for inp in inputs[1:]:
        if len(inp.cost_history) != hist_len:
            raise ValueError(
                "cost histories must have equal length across clients "
                f"(client {inp.client_id} has {len(inp.cost_history)}, "
                f"client {inputs[0].client_id} has {hist_len})"
            )


def _require_history(inputs: list[ClientRoundInput]) -> None:
    for inp in inputs:
        if len(inp.cost_history) < 2:
            raise MissingHistory(
                f"client {inp.client_id} has {len(inp.cost_history)} cost "
                "entries; need at least 2"
            )


def fedavg_weights(inputs: list[ClientRoundInput]) -> AggregationWeights:
    """Size-share weights: w_j = s_j / sum(s)."""
    _check_inputs(inputs)
    total = sum(inp.size for inp in inputs)
    return AggregationWeights(
        client_ids=tuple(inp.client_id for inp in inputs),
        weights=tuple(inp.size / total for inp in inputs),
    )


def fedcostwavg_weights(
    inputs: list[ClientRoundInput], alpha: float = DEFAULT_CW_ALPHA
) -> AggregationWeights:
    """Mix size shares with cost-ratio shares.

    w_j = alpha * s_j/S + (1-alpha) * k_j/K with k_j the ratio of the
    previous cost to the current cost. The ratios are strictly positive,
    so K never degenerates.
    """
    _check_inputs(inputs)
    _require_history(inputs)
    if not (math.isfinite(alpha) and 0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha!r}")
    total = sum(inp.size for inp in inputs)
    ratios = [inp.cost_history[-2] / inp.cost_history[-1] for inp in inputs]
    k_sum = sum(ratios)
    return AggregationWeights(
        client_ids=tuple(inp.client_id for inp in inputs),
        weights=tuple(
            alpha * (inp.size / total) + (1.0 - alpha) * (k / k_sum)
            for inp, k in zip(inputs, ratios)
        ),
    )


def fedpidavg_weights(
    inputs: list[ClientRoundInput],
    coeffs: PidCoefficients | None = None,
    window: int = DEFAULT_WINDOW,
    k_abs: bool = False,
) -> AggregationWeights:
    """Mix size shares, cost-drop shares, and recent-cost-sum shares.

    w_j = alpha * s_j/S + beta * k_j/K + gamma * m_j/I, where k_j is the
    signed drop c_prev - c_curr (its magnitude when ``k_abs`` is set) and
    m_j sums the last ``window`` cost entries. A drop can be negative, so
    K may cancel to ~0; when |K| <= 1e-12 * max(c_prev) the beta mass is
    folded into the alpha term and the result is flagged. The same guard
    protects the integral normalizer I.
    """
    _check_inputs(inputs)
    _require_history(inputs)
    if coeffs is None:
        coeffs = PidCoefficients()
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")

    total = sum(inp.size for inp in inputs)
    drops = []
    for inp in inputs:
        d = inp.cost_history[-2] - inp.cost_history[-1]
        drops.append(abs(d) if k_abs else d)
    integrals = [sum(inp.cost_history[-window:]) for inp in inputs]
    k_sum = sum(drops)
    i_sum = sum(integrals)

    alpha, beta, gamma = coeffs.alpha, coeffs.beta, coeffs.gamma
    fallback = FALLBACK_NONE

    k_eps = NORMALIZER_EPS * max(abs(inp.cost_history[-2]) for inp in inputs)
    if abs(k_sum) <= k_eps:
        alpha += beta
        beta = 0.0
        fallback = FALLBACK_DEGENERATE
    i_eps = NORMALIZER_EPS * max(abs(m) for m in integrals)
    if abs(i_sum) <= i_eps:
        alpha += gamma
        gamma = 0.0
        fallback = FALLBACK_DEGENERATE

    weights = []
    for inp, k, m in zip(inputs, drops, integrals):
        w = alpha * (inp.size / total)
        if beta != 0.0:
            w += beta * (k / k_sum)
        if gamma != 0.0:
            w += gamma * (m / i_sum)
        weights.append(w)
    return AggregationWeights(
        client_ids=tuple(inp.client_id for inp in inputs),
        weights=tuple(weights),
        fallback_applied=fallback,
    )


@dataclass(frozen=True)
class StrategySpec:
    """A strategy choice plus its parameters, ready to apply each round."""

    name: str
    cw_alpha: float = DEFAULT_CW_ALPHA
    coeffs: PidCoefficients | None = None
    window: int = DEFAULT_WINDOW
    k_abs: bool = False

    def __post_init__(self):
        if self.name not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.name!r}; expected one of {STRATEGIES}")


def compute_weights(
    strategy: StrategySpec, inputs: list[ClientRoundInput]
) -> AggregationWeights:
    """Dispatch to the strategy's weight rule."""
    if strategy.name == "fedavg":
        return fedavg_weights(inputs)
    if strategy.name == "fedcostwavg":
        return fedcostwavg_weights(inputs, alpha=strategy.cw_alpha)
    return fedpidavg_weights(
        inputs,
        coeffs=strategy.coeffs,
        window=strategy.window,
        k_abs=strategy.k_abs,
    )


def aggregate(
    strategy: StrategySpec | str, inputs: list[ClientRoundInput], **params
) -> tuple[ParameterVector, AggregationWeights]:
    """Compute strategy weights and the new global model.

    ``strategy`` may be a StrategySpec or a strategy name; keyword
    parameters (cw_alpha, coeffs, window, k_abs) apply in the latter case.
    """
    if isinstance(strategy, str):
        strategy = StrategySpec(strategy, **params)
    elif params:
        raise TypeError("pass parameters either in the StrategySpec or as keywords, not both")
    weights = compute_weights(strategy, inputs)
    model = weighted_sum([inp.model for inp in inputs], list(weights.weights))
    return model, weights
