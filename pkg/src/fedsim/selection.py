"""Client selection under a Poisson model of dataset sizes.

Clients whose size exceeds twice the estimated Poisson mean are treated
as outliers and sit out most rounds; every ``full_participation_period``-th
round includes everyone so outlier data still contributes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from fedsim.errors import EmptyInput, InvalidArgument

logger = logging.getLogger(__name__)

MODE_ALL = "all"
MODE_POISSON_DROPOUT = "poisson_dropout"
SELECTION_MODES = (MODE_ALL, MODE_POISSON_DROPOUT)


def poisson_pmf(x: int, lam: float) -> float:
    """Poisson probability mass exp(-lam) * lam**x / x!.

    Evaluated in log space so large x does not overflow the factorial.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise InvalidArgument(f"lambda must be positive, got {lam!r}")
    if x < 0:
        raise InvalidArgument(f"x must be nonnegative, got {x}")
    return math.exp(x * math.log(lam) - lam - math.lgamma(x + 1))


def estimate_lambda(sizes: Sequence[int]) -> float:
    """Maximum-likelihood Poisson mean: the sample average."""
    if len(sizes) == 0:
        raise EmptyInput("cannot estimate lambda from zero sizes")
    return sum(sizes) / len(sizes)


@dataclass(frozen=True)
class SelectionPolicy:
    """How participants are chosen each round."""

    mode: str = MODE_POISSON_DROPOUT
    full_participation_period: int = 5
    lambda_estimate: float | None = None

    def __post_init__(self):
        if self.mode not in SELECTION_MODES:
            raise ValueError(f"unknown selection mode {self.mode!r}")
        if self.full_participation_period < 1:
            raise ValueError(
                f"full_participation_period must be >= 1, got {self.full_participation_period}"
            )
        if self.mode == MODE_POISSON_DROPOUT:
            lam = self.lambda_estimate
            if lam is None or not (math.isfinite(lam) and lam > 0.0):
                raise ValueError(
                    f"poisson_dropout needs a positive lambda_estimate, got {lam!r}"
                )


def select_clients(
    sizes: Mapping[int, int], policy: SelectionPolicy, round_index: int
) -> list[int]:
    """Return the sorted ids participating in the given round.

    Dropout rounds keep exactly the clients with size <= 2 * lambda
    (boundary retained); every period-th round includes everyone. The
    result is never empty: if every client is an outlier the round falls
    back to full participation.
    """
    if not sizes:
        raise EmptyInput("no clients to select from")
    if round_index < 0:
        raise InvalidArgument(f"round_index must be nonnegative, got {round_index}")
    everyone = sorted(sizes)
    if policy.mode == MODE_ALL:
        return everyone
    if round_index % policy.full_participation_period == policy.full_participation_period - 1:
        return everyone
    threshold = 2.0 * policy.lambda_estimate
    kept = [cid for cid in everyone if sizes[cid] <= threshold]
    if not kept:
        logger.warning(
            "round %d: all %d clients exceed the outlier threshold %.6g; "
            "falling back to full participation",
            round_index,
            len(everyone),
            threshold,
        )
        return everyone
    return kept
