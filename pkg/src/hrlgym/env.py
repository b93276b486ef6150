"""Deterministic episode state machine over a scripted task.

Each step compares the agent's action against the script at the current
progress index.  An exact match (macro and full content) advances progress;
everything else only moves counters.  Mouse actions always update the
tracked pointer pose.  Episodes end on a stop action, on the step cap, or
when cumulative reward falls through the configured floor.

Reward timing: penalties are evaluated on the post-step counters, so a
correct terminal stop (progress reaches the script length on that very
step) is never charged the early-ending penalty.

Streak accounting: both streak counters advance only on exact matches.
The manager streak is held (neither grown nor reset) on steps that pick
the right mode with the wrong content, and reset on a mode mismatch; the
subpolicy streak resets on any miss.  Growing streaks on non-advancing
steps would let an agent collect unbounded mode-level bonus without ever
executing the script.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .actions import Action, MacroAction, format_action
from .encoder import Observation, ObservationBuilder
from .errors import CalledBeforeDone, StepAfterDone
from .rewards import (
    RewardBreakdown,
    RewardConfig,
    manager_reward,
    penalty,
    subpolicy_reward,
    total_reward,
)
from .tasks import Task

DEFAULT_MAX_STEPS = 100
NEUTRAL_PRESS = 8  # distinct from the 8 interaction indices 0..7


class Termination(Enum):
    STOPPED = "stopped"
    MAX_STEPS = "max_steps"
    REWARD_FLOOR = "reward_floor"


@dataclass
class EnvState:
    task: Task
    progress: int = 0
    t: int = 0
    cumulative_reward: float = 0.0
    region: int = 0
    subregion: int = 0
    press_state: int = NEUTRAL_PRESS
    repeat_streak: int = 1
    stagnation: int = 0
    manager_streak: int = 0
    subpolicy_streak: int = 0
    last_action: Action | None = None
    done: bool = False
    termination: Termination | None = None


@dataclass(frozen=True)
class StepOutcome:
    observation: Observation | None
    reward: float
    breakdown: RewardBreakdown
    done: bool
    matched: bool


@dataclass(frozen=True)
class StepRecord:
    """One trace row: everything metrics and the trace export need."""

    t: int
    action: Action
    matched: bool
    breakdown: RewardBreakdown
    progress: int


class TaskEnv:
    """Single-episode-at-a-time environment; reset() starts a new episode.

    Pass builder=None to run without observations (script validation and
    oracle replay do not need them).
    """

    def __init__(self, builder: ObservationBuilder | None = None,
                 reward_config: RewardConfig | None = None,
                 max_steps: int = DEFAULT_MAX_STEPS):
        self.builder = builder
        self.reward_config = reward_config or RewardConfig()
        self.max_steps = max_steps
        self.state: EnvState | None = None
        self.trace: list[StepRecord] = []

    def reset(self, task: Task) -> Observation | None:
        self.state = EnvState(task=task)
        self.trace = []
        return self._observe()

    def step(self, action: Action) -> StepOutcome:
        state = self.state
        if state is None:
            raise StepAfterDone("reset() must be called before step()")
        if state.done:
            raise StepAfterDone("episode already finished")
        cfg = self.reward_config
        task_len = len(state.task.actions)
        target = state.task.actions[state.progress] if state.progress < task_len else None

        matched = target is not None and action == target
        macro_correct = target is not None and action.macro is target.macro

        state.t += 1
        state.repeat_streak = state.repeat_streak + 1 if action == state.last_action else 1
        # Streaks grow only on exact matches, so bonus payouts are earned by
        # executing the script rather than by camping on the right macro.
        # The manager streak survives a content miss (held, not reset) as
        # long as the chosen mode stays correct.
        if matched:
            state.manager_streak += 1
            state.subpolicy_streak += 1
        else:
            state.subpolicy_streak = 0
            if not macro_correct:
                state.manager_streak = 0
        if matched:
            state.progress += 1
            state.stagnation = 0
        else:
            state.stagnation += 1
        if action.macro is MacroAction.MOUSE:
            state.region, state.subregion, state.press_state = action.content

        mgr = manager_reward(action.macro, target.macro if target else None,
                             state.manager_streak, cfg)
        sub = subpolicy_reward(action, target, state.subpolicy_streak, cfg)
        breakdown = total_reward(mgr, sub, penalty(state, action, cfg), cfg)
        state.cumulative_reward += breakdown.total
        state.last_action = action

        if action.is_stop:
            state.done = True
            state.termination = Termination.STOPPED
        elif state.t >= self.max_steps:
            state.done = True
            state.termination = Termination.MAX_STEPS
        elif state.cumulative_reward < cfg.negative_stop_threshold:
            state.done = True
            state.termination = Termination.REWARD_FLOOR

        self.trace.append(StepRecord(t=state.t, action=action, matched=matched,
                                     breakdown=breakdown, progress=state.progress))
        return StepOutcome(observation=self._observe(), reward=breakdown.total,
                           breakdown=breakdown, done=state.done, matched=matched)

    def _observe(self) -> Observation | None:
        if self.builder is None:
            return None
        return self.builder.build(self.state)


def is_success(state: EnvState) -> bool:
    """Episode solved: stopped by the agent with the full script matched."""
    if not state.done:
        raise CalledBeforeDone("is_success needs a finished episode")
    return state.termination is Termination.STOPPED and state.progress == len(state.task.actions)


@dataclass(frozen=True)
class OracleRollout:
    total_reward: float
    steps: int
    success: bool


def oracle_rollout(task: Task, reward_config: RewardConfig | None = None,
                   max_steps: int = DEFAULT_MAX_STEPS) -> OracleRollout:
    """Replay the ground-truth script verbatim and report its episode total."""
    env = TaskEnv(builder=None, reward_config=reward_config, max_steps=max_steps)
    env.reset(task)
    outcome = None
    for action in task.actions:
        if env.state.done:
            break
        outcome = env.step(action)
    done = outcome is not None and outcome.done
    success = done and is_success(env.state)
    return OracleRollout(total_reward=env.state.cumulative_reward,
                         steps=env.state.t, success=success)


def replay_reaches_success(task: Task) -> tuple[bool, str]:
    """Validation hook: does a verbatim replay finish with full progress?"""
    try:
        rollout = oracle_rollout(task)
    except StepAfterDone:
        return False, "episode ended before the script ran out"
    if not rollout.success:
        return False, f"replay ended after {rollout.steps} steps without success"
    if rollout.total_reward <= 0:
        return False, f"replay total reward {rollout.total_reward} is not positive"
    return True, ""


TRACE_HEADER = ("t,action,matched,manager,subpolicy,p_repeat,p_stagnation,"
                "p_step,p_early,p_explore,total,progress")


def trace_lines(trace, registry) -> list[str]:
    """Render an episode trace as text rows under TRACE_HEADER."""
    rows = []
    for rec in trace:
        b = rec.breakdown
        rows.append(",".join([
            str(rec.t),
            format_action(rec.action, registry),
            "1" if rec.matched else "0",
            *(f"{v:.12g}" for v in (b.manager, b.subpolicy, b.p_repeat, b.p_stagnation,
                                    b.p_step, b.p_early, b.p_explore, b.total)),
            str(rec.progress),
        ]))
    return rows
