"""Round-by-round result records and their on-disk formats.

Records are persisted as JSON lines with a fixed key order and floats
rendered at 17 significant digits, which makes the files byte-stable for
a given run and lossless to parse back. Wall time is kept in memory only;
persisting it would break the byte-for-byte reproducibility of output
files across identical runs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from fedsim.aggregation import AggregationWeights
from fedsim.errors import EmptyInput
from fedsim.params import ParameterVector, checkpoint_write

RECORDS_FILENAME = "records.jsonl"
SUMMARY_FILENAME = "summary.csv"
MODEL_FILENAME = "final_model.fpv"


@dataclass(frozen=True)
class RoundRecord:
    """Outcome of one federated round."""

    round_index: int
    selected_ids: tuple[int, ...]
    weights: AggregationWeights
    per_client_cost: dict[int, float]
    global_cost: float
    participation_fraction: float
    fallback_applied: str
    wall_ms: int = 0

    def __post_init__(self):
        if not 0.0 < self.participation_fraction <= 1.0:
            raise ValueError(
                f"participation_fraction must be in (0, 1], got {self.participation_fraction!r}"
            )
        if self.weights.client_ids != self.selected_ids:
            raise ValueError("weights are not aligned with selected_ids")
        if self.wall_ms < 0:
            raise ValueError(f"wall_ms must be nonnegative, got {self.wall_ms}")


def comm_cost_summary(records: list[RoundRecord]) -> float:
    """Mean participation fraction over all rounds.

    This is deliberately labeled ``mean_participation_fraction`` in
    outputs: it accounts for how much of the federation communicated,
    not for any externally normalized cost.
    """
    if not records:
        raise EmptyInput("comm_cost_summary needs at least one record")
    return math.fsum(r.participation_fraction for r in records) / len(records)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(item) for item in v) + "]"
    if isinstance(v, dict):
        parts = (f"{json.dumps(str(k))}: {_fmt_value(val)}" for k, val in v.items())
        return "{" + ", ".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def record_to_json(record: RoundRecord) -> str:
    """Render one record as a single JSON line with fixed key order."""
    fields = {
        "round": record.round_index,
        "selected_ids": list(record.selected_ids),
        "weights": list(record.weights.weights),
        "fallback": record.fallback_applied,
        "per_client_cost": {
            str(cid): record.per_client_cost[cid]
            for cid in sorted(record.per_client_cost)
        },
        "global_cost": record.global_cost,
        "participation_fraction": record.participation_fraction,
    }
    return _fmt_value(fields)


def write_records(records: list[RoundRecord], path) -> None:
    """Write records as JSON lines, one record per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json(record))
            fh.write("\n")


def read_records(path) -> list[RoundRecord]:
    """Parse a records.jsonl file back into RoundRecord objects.

    Wall time is not persisted, so it reads back as 0.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            selected = tuple(raw["selected_ids"])
            records.append(
                RoundRecord(
                    round_index=raw["round"],
                    selected_ids=selected,
                    weights=AggregationWeights(
                        client_ids=selected,
                        weights=tuple(raw["weights"]),
                        fallback_applied=raw["fallback"],
                    ),
                    per_client_cost={int(k): v for k, v in raw["per_client_cost"].items()},
                    global_cost=raw["global_cost"],
                    participation_fraction=raw["participation_fraction"],
                    fallback_applied=raw["fallback"],
                )
            )
    return records


def write_summary_csv(records: list[RoundRecord], path) -> None:
    """Write the per-round summary table next to the full records."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "global_cost", "participation_fraction", "fallback"])
        for r in records:
            writer.writerow(
                [
                    r.round_index,
                    _fmt_float(r.global_cost),
                    _fmt_float(r.participation_fraction),
                    r.fallback_applied,
                ]
            )


def write_run_outputs(
    records: list[RoundRecord], final_model: ParameterVector, out_dir
) -> None:
    """Persist a run: records.jsonl, summary.csv, and the final checkpoint."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / RECORDS_FILENAME)
    write_summary_csv(records, out / SUMMARY_FILENAME)
    checkpoint_write(final_model, out / MODEL_FILENAME)
