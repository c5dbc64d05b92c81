"""Bug-localization task records and their JSONL loaders."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .reformulate import ExtractedFields


class TaskDataError(ValueError):
    """A tasks or cache file is malformed or inconsistent with the repos."""


@dataclass(frozen=True)
class BugTask:
    """One localization problem over a checked-out repository snapshot."""

    task_id: str
    repo_root: str
    bug_description: str
    ground_truth_files: frozenset[str]
    language: str = "other"

    def __post_init__(self) -> None:
        if not self.ground_truth_files:
            raise ValueError(f"task {self.task_id!r} has no ground-truth files")
        object.__setattr__(
            self, "ground_truth_files", frozenset(self.ground_truth_files)
        )


def load_tasks(tasks_file: str | Path, repos_dir: str | Path) -> list[BugTask]:
    """Load tasks from JSONL: {task_id, repo, bug_description,
    ground_truth_files[], language}.

    `repo` names a directory under `repos_dir`; every ground-truth path must
    exist beneath it.
    """
    repos = Path(repos_dir)
    tasks: list[BugTask] = []
    seen: set[str] = set()
    for line_no, line in enumerate(_lines(tasks_file), start=1):
        try:
            record = json.loads(line)
        except ValueError as exc:
            raise TaskDataError(f"{tasks_file}:{line_no}: invalid JSON: {exc}")
        try:
            task_id = str(record["task_id"])
            repo = str(record["repo"])
            description = str(record["bug_description"])
            truth = [str(p) for p in record["ground_truth_files"]]
        except KeyError as exc:
            raise TaskDataError(f"{tasks_file}:{line_no}: missing key {exc}")
        if task_id in seen:
            raise TaskDataError(f"{tasks_file}:{line_no}: duplicate task_id {task_id!r}")
        seen.add(task_id)
        repo_root = repos / repo
        if not repo_root.is_dir():
            raise TaskDataError(
                f"{tasks_file}:{line_no}: repo directory not found: {repo_root}"
            )
        for rel in truth:
            if not (repo_root / rel).is_file():
                raise TaskDataError(
                    f"{tasks_file}:{line_no}: ground-truth file missing: {rel}"
                )
        tasks.append(
            BugTask(
                task_id=task_id,
                repo_root=str(repo_root),
                bug_description=description,
                ground_truth_files=frozenset(truth),
                language=str(record.get("language", "other")),
            )
        )
    return tasks


def load_extraction_cache(path: str | Path) -> dict[str, ExtractedFields]:
    """Load cached extraction results: JSONL of {task_id, extracted_fields}."""
    cache: dict[str, ExtractedFields] = {}
    for line_no, line in enumerate(_lines(path), start=1):
        try:
            record = json.loads(line)
            task_id = str(record["task_id"])
            fields = ExtractedFields.from_json_dict(record["extracted_fields"])
        except (ValueError, KeyError) as exc:
            raise TaskDataError(f"{path}:{line_no}: bad cache record: {exc}")
        cache[task_id] = fields
    return cache


def _lines(path: str | Path):
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield line
