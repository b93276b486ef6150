"""Episode scoring and aggregate evaluation.

Per episode, every issued action is either a true positive (it matched the
script at the current progress index) or a false positive; unmatched script
actions are false negatives.  Precision/recall/F1 follow from the counts,
with zero denominators scored as 0.  Normalized reward is the episode total
scaled by the oracle replay total, clamped to [0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .env import Termination, is_success
from .errors import EmptyInput, IncompleteTrace
from .rewards import normalized_reward
from .tasks import Difficulty, Task


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Standard micro formulas; zero denominators give 0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class EpisodeRecord:
    task_id: int
    difficulty: Difficulty
    steps: int
    issued: int          # actions issued (equals steps; kept explicit for audits)
    tp: int
    fp: int
    fn: int
    reward: float
    norm_reward: float
    success: bool
    termination: Termination

    @property
    def precision(self) -> float:
        return precision_recall_f1(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return precision_recall_f1(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return precision_recall_f1(self.tp, self.fp, self.fn)[2]


def score_episode(trace, state, task: Task, oracle_total: float) -> EpisodeRecord:
    """Build the episode record from a finished environment trace/state."""
    if state is None or not state.done:
        raise IncompleteTrace("episode must be finished before scoring")
    tp = sum(1 for rec in trace if rec.matched)
    issued = len(trace)
    fp = issued - tp
    fn = len(task.actions) - tp
    return EpisodeRecord(
        task_id=task.id,
        difficulty=task.difficulty,
        steps=state.t,
        issued=issued,
        tp=tp,
        fp=fp,
        fn=fn,
        reward=state.cumulative_reward,
        norm_reward=normalized_reward(state.cumulative_reward, oracle_total),
        success=is_success(state),
        termination=state.termination,
    )


@dataclass(frozen=True)
class GroupStats:
    episodes: int
    tp: int
    fp: int
    fn: int
    precision: float       # micro (summed counts)
    recall: float
    f1: float
    macro_precision: float  # per-episode means
    macro_recall: float
    macro_f1: float
    mean_reward: float
    mean_norm_reward: float
    success_rate: float
    np_nt_ratio: float      # mean issued/script-length over successful episodes; nan if none


@dataclass(frozen=True)
class AggregateReport:
    overall: GroupStats
    simple: GroupStats | None
    hard: GroupStats | None


def _group_stats(records) -> GroupStats:
    tp = sum(r.tp for r in records)
    fp = sum(r.fp for r in records)
    fn = sum(r.fn for r in records)
    precision, recall, f1 = precision_recall_f1(tp, fp, fn)
    n = len(records)
    successes = [r for r in records if r.success]
    if successes:
        ratio = sum(r.issued / (r.tp + r.fn) for r in successes) / len(successes)
    else:
        ratio = float("nan")
    return GroupStats(
        episodes=n,
        tp=tp, fp=fp, fn=fn,
        precision=precision, recall=recall, f1=f1,
        macro_precision=sum(r.precision for r in records) / n,
        macro_recall=sum(r.recall for r in records) / n,
        macro_f1=sum(r.f1 for r in records) / n,
        mean_reward=sum(r.reward for r in records) / n,
        mean_norm_reward=sum(r.norm_reward for r in records) / n,
        success_rate=len(successes) / n,
        np_nt_ratio=ratio,
    )


def aggregate(records) -> AggregateReport:
    """Micro-aggregated metrics overall and split by difficulty."""
    records = list(records)
    if not records:
        raise EmptyInput("no episode records to aggregate")
    simple = [r for r in records if r.difficulty is Difficulty.SIMPLE]
    hard = [r for r in records if r.difficulty is Difficulty.HARD]
    return AggregateReport(
        overall=_group_stats(records),
        simple=_group_stats(simple) if simple else None,
        hard=_group_stats(hard) if hard else None,
    )


CSV_COLUMNS = ("episode_index", "task_id", "difficulty", "steps", "np", "tp", "fp",
               "fn", "precision", "recall", "f1", "reward", "norm_reward",
               "success", "termination")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def export_csv(records, path) -> None:
    """One row per episode in collection order, stable column set."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, r in enumerate(records):
            writer.writerow([
                i, r.task_id, r.difficulty.value, r.steps, r.issued, r.tp, r.fp, r.fn,
                _fmt(r.precision), _fmt(r.recall), _fmt(r.f1),
                _fmt(r.reward), _fmt(r.norm_reward),
                int(r.success), r.termination.value,
            ])


def load_csv(path):
    """Parse an export back into records (numeric fields at 12 significant digits)."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(EpisodeRecord(
                task_id=int(row["task_id"]),
                difficulty=Difficulty(row["difficulty"]),
                steps=int(row["steps"]),
                issued=int(row["np"]),
                tp=int(row["tp"]),
                fp=int(row["fp"]),
                fn=int(row["fn"]),
                reward=float(row["reward"]),
                norm_reward=float(row["norm_reward"]),
                success=bool(int(row["success"])),
                termination=Termination(row["termination"]),
            ))
    return out


REPORT_COLUMNS = ("split", "episodes", "tp", "fp", "fn", "precision", "recall", "f1",
                  "macro_precision", "macro_recall", "macro_f1", "mean_reward",
                  "mean_norm_reward", "success_rate", "np_nt_ratio")


def export_report_csv(report: AggregateReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for split, stats in (("overall", report.overall), ("simple", report.simple),
                             ("hard", report.hard)):
            if stats is None:
                continue
            writer.writerow([
                split, stats.episodes, stats.tp, stats.fp, stats.fn,
                _fmt(stats.precision), _fmt(stats.recall), _fmt(stats.f1),
                _fmt(stats.macro_precision), _fmt(stats.macro_recall), _fmt(stats.macro_f1),
                _fmt(stats.mean_reward), _fmt(stats.mean_norm_reward),
                _fmt(stats.success_rate), _fmt(stats.np_nt_ratio),
            ])


def format_report(report: AggregateReport) -> str:
    lines = [f"{'split':8s} {'eps':>6s} {'prec':>7s} {'rec':>7s} {'f1':>7s} "
             f"{'n.rwd':>7s} {'succ':>6s} {'np/nt':>6s}"]
    for split, stats in (("overall", report.overall), ("simple", report.simple),
                         ("hard", report.hard)):
        if stats is None:
            continue
        lines.append(
            f"{split:8s} {stats.episodes:6d} {stats.precision:7.4f} {stats.recall:7.4f} "
            f"{stats.f1:7.4f} {stats.mean_norm_reward:7.4f} {stats.success_rate:6.3f} "
            f"{stats.np_nt_ratio:6.3f}")
    return "\n".join(lines)
