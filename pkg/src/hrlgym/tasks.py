"""Task definitions, difficulty split, suite file format, synthetic generation.

A task is a scripted ground-truth action sequence ending in ``meta:stop``.
Difficulty is derived from sequence length: under 8 actions is Simple,
8 or more is Hard.

Suite file format (one record per task, blank-line separated):

    task 0
    desc Press a, then stop.
    act single:a
    act meta:stop
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .actions import (
    Action,
    ActionRegistry,
    MacroAction,
    META_STOP,
    N_ACTIONS,
    all_actions,
    flatten,
    format_action,
    parse_action,
    unflatten,
)
from .errors import HrlGymError, SchemaError

SIMPLE_MAX_LEN = 7  # difficulty boundary: < 8 actions is Simple

STOP_ACTION = Action(MacroAction.META, META_STOP)


class Difficulty(Enum):
    SIMPLE = "simple"
    HARD = "hard"


@dataclass(frozen=True)
class Task:
    id: int
    description: str
    actions: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    @property
    def difficulty(self) -> Difficulty:
        return classify_difficulty(self)

    def __len__(self) -> int:
        return len(self.actions)


def classify_difficulty(task: Task) -> Difficulty:
    """Simple when the scripted sequence is shorter than 8 actions."""
    return Difficulty.SIMPLE if len(task.actions) <= SIMPLE_MAX_LEN else Difficulty.HARD


class TaskSuite:
    """An immutable collection of tasks with ids contiguous from 0."""

    def __init__(self, tasks):
        self.tasks = tuple(tasks)
        ids = [t.id for t in self.tasks]
        if ids != list(range(len(ids))):
            raise SchemaError(f"task ids must be contiguous from 0, got {ids[:10]}...")

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, task_id: int) -> Task:
        return self.tasks[task_id]

    @property
    def n_simple(self) -> int:
        return sum(1 for t in self.tasks if t.difficulty is Difficulty.SIMPLE)

    @property
    def n_hard(self) -> int:
        return sum(1 for t in self.tasks if t.difficulty is Difficulty.HARD)

    def by_difficulty(self, difficulty: Difficulty):
        return [t for t in self.tasks if t.difficulty is difficulty]


@dataclass
class ValidationReport:
    task_id: int
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_task(task: Task, registry: ActionRegistry) -> ValidationReport:
    """Check task invariants and replay the script through a fresh episode."""
    report = ValidationReport(task_id=task.id)
    if len(task.actions) < 2:
        report.issues.append(f"sequence length {len(task.actions)} is below the minimum of 2")
    if not task.actions:
        return report
    if not task.actions[-1].is_stop:
        report.issues.append("no terminal stop")
    for step, action in enumerate(task.actions):
        try:
            format_action(action, registry)
        except HrlGymError as exc:
            report.issues.append(f"step {step}: {exc}")
    for step, action in enumerate(task.actions[:-1]):
        if action.is_stop:
            report.issues.append(f"step {step}: stop before the final action")
    if report.ok:
        from .env import replay_reaches_success

        ok, why = replay_reaches_success(task)
        if not ok:
            report.issues.append(f"replay failed: {why}")
    return report


def generate_synthetic_suite(seed: int, n_simple: int, n_hard: int,
                             registry: ActionRegistry) -> TaskSuite:
    """Deterministic random suite: `n_simple` tasks of length 2-7 and
    `n_hard` of length 8-20, uniform over actions, terminal stop.

    Consecutive duplicate actions are redrawn so a verbatim replay never
    trips the repetition penalty.
    """
    rng = np.random.default_rng(seed)
    stop_flat = flatten(STOP_ACTION)
    tasks = []
    lengths = [int(rng.integers(2, SIMPLE_MAX_LEN + 1)) for _ in range(n_simple)]
    lengths += [int(rng.integers(SIMPLE_MAX_LEN + 1, 21)) for _ in range(n_hard)]
    for task_id, length in enumerate(lengths):
        actions = []
        prev = None
        for _ in range(length - 1):
            while True:
                idx = int(rng.integers(0, N_ACTIONS))
                if idx == stop_flat or idx == prev:
                    continue
                break
            actions.append(unflatten(idx))
            prev = idx
        actions.append(STOP_ACTION)
        tasks.append(Task(task_id, _describe(task_id, actions, registry), tuple(actions)))
    return TaskSuite(tasks)


def _describe(task_id: int, actions, registry: ActionRegistry) -> str:
    steps = ", then ".join(format_action(a, registry) for a in actions[:-1])
    if steps:
        return f"task {task_id}: {steps}, then stop"
    return f"task {task_id}: stop"


def save_suite(suite: TaskSuite, path, registry: ActionRegistry) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task in suite:
            fh.write(f"task {task.id}\n")
            fh.write(f"desc {task.description}\n")
            for action in task.actions:
                fh.write(f"act {format_action(action, registry)}\n")
            fh.write("\n")


def load_suite(path, registry: ActionRegistry) -> TaskSuite:
    """Strict loader; raises SchemaError (with line number) on any violation."""
    records, issues = _parse_suite_file(path, registry)
    for rep in issues:
        if not rep.ok:
            raise SchemaError(f"task {rep.task_id}: {rep.issues[0]}")
    return TaskSuite(records)


def validate_suite_file(path, registry: ActionRegistry):
    """Lenient check of a suite file: returns one ValidationReport per task.

    Structural damage (unreadable record layout, duplicate ids) still raises
    SchemaError; bad action text or invariant violations become report
    entries.
    """
    records, issues = _parse_suite_file(path, registry, lenient=True)
    reports = []
    by_id = {rep.task_id: rep for rep in issues}
    for task in records:
        rep = by_id.get(task.id)
        if rep is not None and not rep.ok:
            reports.append(rep)
        else:
            reports.append(validate_task(task, registry))
    return reports


def _parse_suite_file(path, registry, lenient=False):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    tasks = []
    reports = []
    seen_ids = set()
    i = 0
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        line = lines[i]
        if not line.startswith("task "):
            raise SchemaError(f"line {i + 1}: expected 'task <id>', got {line!r}")
        try:
            task_id = int(line[5:])
        except ValueError:
            raise SchemaError(f"line {i + 1}: bad task id in {line!r}") from None
        if task_id in seen_ids:
            raise SchemaError(f"line {i + 1}: duplicate task id {task_id}")
        seen_ids.add(task_id)
        i += 1
        if i >= n or not lines[i].startswith("desc "):
            raise SchemaError(f"line {i + 1}: expected 'desc <text>' after task header")
        description = lines[i][5:]
        i += 1
        report = ValidationReport(task_id=task_id)
        actions = []
        step = 0
        while i < n and lines[i].strip():
            if not lines[i].startswith("act "):
                raise SchemaError(f"line {i + 1}: expected 'act <action>', got {lines[i]!r}")
            text = lines[i][4:]
            try:
                actions.append(parse_action(text, registry))
            except HrlGymError as exc:
                if not lenient:
                    raise SchemaError(f"line {i + 1}: {exc}") from None
                report.issues.append(f"step {step}: {exc}")
            i += 1
            step += 1
        if len(actions) < 2 and report.ok:
            msg = f"sequence length {len(actions)} is below the minimum of 2"
            if not lenient:
                raise SchemaError(f"task {task_id}: {msg}")
            report.issues.append(msg)
        if actions and not actions[-1].is_stop and report.ok:
            if not lenient:
                raise SchemaError(f"task {task_id}: no terminal stop")
            report.issues.append("no terminal stop")
        tasks.append(Task(task_id, description, tuple(actions)))
        reports.append(report)
    tasks.sort(key=lambda t: t.id)
    return tasks, reports
