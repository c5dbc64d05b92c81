"""Ranking metrics (AP@K, Hit@K) and multi-run aggregation.

AP@K divides by min(|relevant|, K), so a perfect prefix scores 1.0 even when
K is smaller than the relevant set; under this convention AP@1 is 0-or-1 and
MAP@1 equals the Hit@1 rate on single-relevant-file task sets.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_K_VALUES = (1, 5, 10)


class EmptyRelevant(ValueError):
    """Raised when the relevant set is empty; AP is undefined."""


class MismatchedTaskSets(ValueError):
    """Raised when runs or reports do not cover the same task ids."""


def average_precision_at_k(
    ranking: Sequence[str], relevant: Iterable[str], k: int
) -> float:
    """AP@K = (sum of precision@i over relevant hits i <= K) / min(|rel|, K)."""
    relevant_set = set(relevant)
    if not relevant_set:
        raise EmptyRelevant("relevant set must be non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = 0
    total = 0.0
    for i, path in enumerate(ranking[:k], start=1):
        if path in relevant_set:
            hits += 1
            total += hits / i
    return total / min(len(relevant_set), k)


def hit_at_k(ranking: Sequence[str], relevant: Iterable[str], k: int) -> bool:
    """True iff any of the first K ranked paths is relevant."""
    relevant_set = set(relevant)
    return any(path in relevant_set for path in ranking[:k])


@dataclass(frozen=True)
class TaskScores:
    ap_at_k: dict[int, float]
    hit_at_k: dict[int, bool]


def evaluate_ranking(
    ranking: Sequence[str],
    relevant: Iterable[str],
    k_values: Sequence[int] = DEFAULT_K_VALUES,
) -> TaskScores:
    relevant_set = set(relevant)
    return TaskScores(
        ap_at_k={k: average_precision_at_k(ranking, relevant_set, k) for k in k_values},
        hit_at_k={k: hit_at_k(ranking, relevant_set, k) for k in k_values},
    )


@dataclass(frozen=True)
class EvalReport:
    """Aggregate over tasks (per run) and then over runs.

    per_task holds the first run's per-task scores; aggregate maps K to the
    across-run mean MAP and hit rate; std_dev is the population standard
    deviation of per-run MAP@K.
    """

    per_task: dict[str, TaskScores]
    aggregate: dict[int, dict[str, float]]
    runs: int
    std_dev: dict[int, float]

    @property
    def k_values(self) -> list[int]:
        return sorted(self.aggregate)

    def task_ids(self) -> list[str]:
        return sorted(self.per_task)

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "per_task": {
                task_id: {
                    "ap_at_k": {str(k): v for k, v in scores.ap_at_k.items()},
                    "hit_at_k": {str(k): v for k, v in scores.hit_at_k.items()},
                }
                for task_id, scores in self.per_task.items()
            },
            "aggregate": {
                str(k): dict(values) for k, values in self.aggregate.items()
            },
            "std_dev": {str(k): v for k, v in self.std_dev.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        per_task = {
            task_id: TaskScores(
                ap_at_k={int(k): float(v) for k, v in scores["ap_at_k"].items()},
                hit_at_k={int(k): bool(v) for k, v in scores["hit_at_k"].items()},
            )
            for task_id, scores in data["per_task"].items()
        }
        return cls(
            per_task=per_task,
            aggregate={
                int(k): {name: float(v) for name, v in values.items()}
                for k, values in data["aggregate"].items()
            },
            runs=int(data["runs"]),
            std_dev={int(k): float(v) for k, v in data["std_dev"].items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def aggregate(
    run_scores: Sequence[Mapping[str, TaskScores]],
    k_values: Sequence[int] | None = None,
) -> EvalReport:
    """Mean AP/Hit over tasks per run, then mean and population std over runs."""
    if not run_scores:
        raise ValueError("at least one run is required")
    task_ids = sorted(run_scores[0])
    if not task_ids:
        raise ValueError("at least one task is required")
    for i, run in enumerate(run_scores[1:], start=2):
        if sorted(run) != task_ids:
            raise MismatchedTaskSets(f"run {i} covers a different task set")
    if k_values is None:
        k_values = sorted(run_scores[0][task_ids[0]].ap_at_k)

    agg: dict[int, dict[str, float]] = {}
    std_dev: dict[int, float] = {}
    for k in k_values:
        run_maps = [
            float(np.mean([run[t].ap_at_k[k] for t in task_ids])) for run in run_scores
        ]
        run_hits = [
            float(np.mean([float(run[t].hit_at_k[k]) for t in task_ids]))
            for run in run_scores
        ]
        agg[k] = {"map": float(np.mean(run_maps)), "hit_rate": float(np.mean(run_hits))}
        std_dev[k] = float(np.std(run_maps))
    return EvalReport(
        per_task=dict(run_scores[0]),
        aggregate=agg,
        runs=len(run_scores),
        std_dev=std_dev,
    )


def report_table_rows(
    labelled: Sequence[tuple[str, EvalReport]],
    markers: Mapping[str, str] | None = None,
) -> list[list[str]]:
    """Rows of a configurations x (MAP@K, Hit@K) table, header row first."""
    if not labelled:
        raise ValueError("at least one report is required")
    k_values = labelled[0][1].k_values
    header = (
        ["Configuration"]
        + [f"MAP@{k}" for k in k_values]
        + [f"Hit@{k}" for k in k_values]
    )
    rows = [header]
    for label, report in labelled:
        mark = (markers or {}).get(label, "")
        row = [label + mark]
        row += [f"{report.aggregate[k]['map']:.3f}" for k in k_values]
        row += [f"{report.aggregate[k]['hit_rate']:.3f}" for k in k_values]
        rows.append(row)
    return rows


def reports_to_markdown(
    labelled: Sequence[tuple[str, EvalReport]],
    markers: Mapping[str, str] | None = None,
) -> str:
    rows = report_table_rows(labelled, markers)
    lines = [
        "| " + " | ".join(rows[0]) + " |",
        "|" + "|".join(["---"] * len(rows[0])) + "|",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in rows[1:]]
    return "\n".join(lines) + "\n"


def reports_to_csv(
    labelled: Sequence[tuple[str, EvalReport]],
    markers: Mapping[str, str] | None = None,
) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(report_table_rows(labelled, markers))
    return buffer.getvalue()
