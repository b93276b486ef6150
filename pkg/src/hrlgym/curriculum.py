"""Smooth-decay easy-to-hard task sampling, plus a uniform baseline.

The probability of drawing a simple task decays as 1 - (t/T)^alpha over the
training horizon.  With alpha set to the simple/hard group-size ratio, the
expected share of hard episodes is 1/(alpha+1) = Nh/(Ns+Nh), so each group
receives episodes proportional to its size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSuite
from .tasks import Difficulty, Task, TaskSuite

log = logging.getLogger(__name__)


class SamplingMode(Enum):
    CURRICULUM = "curriculum"
    RANDOM = "random"


@dataclass(frozen=True)
class CurriculumConfig:
    total_episodes: int
    alpha: float | None = None   # None: derive from suite group sizes
    mode: SamplingMode = SamplingMode.CURRICULUM
    failure_bias: bool = False   # double a task's weight after failure

    def __post_init__(self):
        if self.total_episodes < 1:
            raise DegenerateSuite("total_episodes must be >= 1")
        if self.alpha is not None and self.alpha < 0:
            raise DegenerateSuite("alpha must be >= 0")


def alpha_from_counts(n_simple: int, n_hard: int) -> float:
    """Decay rate matching group sizes: Ns / Nh."""
    if n_hard == 0:
        raise DegenerateSuite("no hard tasks; use random sampling")
    return n_simple / n_hard


def p_simple(t_norm: float, alpha: float) -> float:
    """Probability of drawing a simple task at normalized progress t in [0,1]."""
    return 1.0 - t_norm ** alpha


def expected_hard_fraction(alpha: float) -> float:
    """Mean hard-task share over the whole horizon: 1 / (alpha + 1)."""
    return 1.0 / (alpha + 1.0)


class TaskSampler:
    """Stateful sampler bound to one suite and one training run."""

    def __init__(self, suite: TaskSuite, config: CurriculumConfig, rng: np.random.Generator):
        self.suite = suite
        self.config = config
        self.rng = rng
        self._simple = suite.by_difficulty(Difficulty.SIMPLE)
        self._hard = suite.by_difficulty(Difficulty.HARD)
        self._weights = np.ones(len(suite))
        if config.mode is SamplingMode.CURRICULUM and config.alpha is None:
            if not self._hard:
                log.warning("suite has no hard tasks; falling back to random sampling")
                self.mode = SamplingMode.RANDOM
                self.alpha = 1.0
                return
            self.alpha = alpha_from_counts(len(self._simple), len(self._hard))
        else:
            self.alpha = config.alpha if config.alpha is not None else 1.0
        self.mode = config.mode

    def sample(self, episode_index: int) -> Task:
        if self.mode is SamplingMode.RANDOM:
            return self._draw(list(self.suite))
        t_norm = episode_index / self.config.total_episodes
        want_simple = self.rng.random() < p_simple(t_norm, self.alpha)
        group = self._simple if want_simple else self._hard
        if not group:
            other = self._hard if want_simple else self._simple
            log.info("empty %s group at episode %d; drawing from the other group",
                     "simple" if want_simple else "hard", episode_index)
            group = other
        return self._draw(group)

    def _draw(self, group) -> Task:
        if not group:
            raise DegenerateSuite("cannot sample from an empty suite")
        if self.config.failure_bias:
            w = np.array([self._weights[t.id] for t in group])
            idx = self.rng.choice(len(group), p=w / w.sum())
        else:
            idx = self.rng.integers(0, len(group))
        return group[int(idx)]

    def report_outcome(self, task_id: int, success: bool) -> None:
        """Feed back episode results for the optional failure-biased mode."""
        if not self.config.failure_bias:
            return
        self._weights[task_id] = 1.0 if success else self._weights[task_id] * 2.0
