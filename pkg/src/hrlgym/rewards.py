"""Reward engine: manager/subpolicy rewards, additive penalties, composition.

Per-step reward structure:

    total = manager + alpha * subpolicy - (repeat + stagnation + step + early + explore)

The manager term pays out when the chosen macro mode matches the scripted
one, with a bonus that grows linearly with the streak of consecutive correct
mode choices.  The subpolicy term rewards content correctness: exact match
for key/hotkey/meta content, and for mouse content a positional bonus that
decays linearly with grid distance plus a flat bonus for the right
interaction type.  Penalty terms discourage action repetition, pointer
stagnation, long episodes, premature stops, and exploration past the
task's nominal horizon.

All coefficients live in RewardConfig.  Penalty magnitudes are stored
positive and applied with a negative sign during composition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .actions import Action, MacroAction, mouse_distance
from .errors import ConfigError, NonPositiveOracle


@dataclass(frozen=True)
class RewardConfig:
    """Every reward/penalty coefficient, keyed by its canonical config name."""

    alpha: float = 1.2
    manager_correct_reward: float = 2.0
    manager_streak_bonus: float = 2.0
    subpolicy_correct_reward: float = 6.0
    subpolicy_streak_bonus: float = 2.0
    mouse_region_reward: float = 3.0
    mouse_interaction_reward: float = 3.0
    distance_threshold: float = 3.0
    base_step_penalty: float = 0.5
    repeat_threshold: int = 2
    repeat_exp_base: float = 3.0
    repeat_exp_factor: float = 2.0
    pointer_unchanged_threshold: int = 3
    pointer_unchanged_penalty: float = 4.0
    short_ending_penalty: float = 2.0
    exp_penalty_base: float = 0.2
    exp_penalty_factor: float = 1.1
    negative_stop_threshold: float = -200.0
    # Grant the positional mouse bonus on near-miss (non-matching) steps.
    mouse_partial_credit: bool = True

    def __post_init__(self):
        if self.distance_threshold <= 0:
            raise ConfigError("distance_threshold must be > 0")
        if self.negative_stop_threshold >= 0:
            raise ConfigError("negative_stop_threshold must be < 0")
        for name in (
            "alpha",
            "manager_correct_reward",
            "manager_streak_bonus",
            "subpolicy_correct_reward",
            "subpolicy_streak_bonus",
            "mouse_region_reward",
            "mouse_interaction_reward",
            "base_step_penalty",
            "repeat_exp_base",
            "repeat_exp_factor",
            "pointer_unchanged_penalty",
            "short_ending_penalty",
            "exp_penalty_base",
            "exp_penalty_factor",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} is a magnitude and must be >= 0")


def soft_penalty_preset() -> RewardConfig:
    """Alternate penalty constants (step 0.05, stagnation 2.0)."""
    return RewardConfig(base_step_penalty=0.05, pointer_unchanged_penalty=2.0)


def text_streak_preset() -> RewardConfig:
    """Alternate streak bonuses (manager 5, subpolicy 1)."""
    return RewardConfig(manager_streak_bonus=5.0, subpolicy_streak_bonus=1.0)


def no_streak_preset(base: RewardConfig | None = None) -> RewardConfig:
    """Disable both streak bonuses (the streak-bonus ablation)."""
    return replace(base or RewardConfig(), manager_streak_bonus=0.0, subpolicy_streak_bonus=0.0)


PRESETS = {
    "default": RewardConfig,
    "soft_penalty": soft_penalty_preset,
    "text_streak": text_streak_preset,
    "no_streak": no_streak_preset,
}

# Reserved for a distance-to-target exploration penalty; needs a notion of
# "nearest relevant target" that scripted tasks do not define.
RESERVED_PRESETS = ("distance_explore",)


def reward_preset(name: str) -> RewardConfig:
    if name in RESERVED_PRESETS:
        raise ConfigError(f"preset {name!r} is reserved but not implemented")
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown reward preset {name!r}") from None


@dataclass(frozen=True)
class RewardBreakdown:
    """Auditable per-step reward decomposition; total is exact over the parts."""

    manager: float
    subpolicy: float
    p_repeat: float
    p_stagnation: float
    p_step: float
    p_early: float
    p_explore: float
    total: float

    def penalty_sum(self) -> float:
        return self.p_repeat + self.p_stagnation + self.p_step + self.p_early + self.p_explore


def manager_reward(macro: MacroAction, target_macro, streak: int, cfg: RewardConfig) -> float:
    """Mode-level reward: (base + bonus * streak) when the macro matches, else 0.

    ``streak`` counts consecutive correct mode choices including the
    current one.
    """
    if target_macro is None or macro is not target_macro:
        return 0.0
    return cfg.manager_correct_reward + cfg.manager_streak_bonus * streak


def mouse_subreward(chosen: tuple[int, int, int], target: tuple[int, int, int],
                    cfg: RewardConfig) -> float:
    """Positional bonus decaying linearly to zero at distance_threshold, plus
    a flat bonus for the correct interaction type."""
    d = mouse_distance(chosen[:2], target[:2])
    positional = max(0.0, 1.0 - d / cfg.distance_threshold) * cfg.mouse_region_reward
    interaction = cfg.mouse_interaction_reward if chosen[2] == target[2] else 0.0
    return positional + interaction


def key_subreward(chosen: int, target: int, cfg: RewardConfig) -> float:
    """Exact-match reward for key/hotkey/meta content."""
    return cfg.subpolicy_correct_reward if chosen == target else 0.0


def subpolicy_reward(action: Action, target: Action | None, streak: int,
                     cfg: RewardConfig) -> float:
    """Content-level reward for `action` against the scripted `target`.

    Zero when the macro modes differ (content spaces are incomparable).
    ``streak`` counts consecutive exact action matches including the current
    one; the streak bonus only applies on an exact content match.
    """
    if target is None or action.macro is not target.macro:
        return 0.0
    exact = action.content == target.content
    if action.macro is MacroAction.MOUSE:
        if exact or cfg.mouse_partial_credit:
            base = mouse_subreward(action.content, target.content, cfg)
        else:
            base = 0.0
    else:
        base = key_subreward(action.content, target.content, cfg)
    if exact:
        base += cfg.subpolicy_streak_bonus * streak
    return base


def penalty(state, action: Action, cfg: RewardConfig):
    """The five penalty magnitudes for a step, from post-step counters.

    ``state`` must already reflect the step being scored: repeat_streak,
    stagnation, t, and progress updated for `action`.  Returns
    (p_repeat, p_stagnation, p_step, p_early, p_explore), all >= 0.
    """
    n = state.repeat_streak
    if n > cfg.repeat_threshold:
        p_repeat = cfg.repeat_exp_base * (cfg.repeat_exp_factor ** (n - cfg.repeat_threshold) - 1.0)
    else:
        p_repeat = 0.0
    p_stagnation = cfg.pointer_unchanged_penalty if state.stagnation > cfg.pointer_unchanged_threshold else 0.0
    p_step = cfg.base_step_penalty
    task_len = len(state.task.actions)
    p_early = cfg.short_ending_penalty if action.is_stop and state.progress < task_len else 0.0
    p_explore = cfg.exp_penalty_base * cfg.exp_penalty_factor ** max(0, state.t - task_len)
    return p_repeat, p_stagnation, p_step, p_early, p_explore


def total_reward(manager: float, subpolicy: float, penalties, cfg: RewardConfig) -> RewardBreakdown:
    """Compose the per-step breakdown; total = manager + alpha*sub - penalties."""
    p_repeat, p_stagnation, p_step, p_early, p_explore = penalties
    total = manager + cfg.alpha * subpolicy - (p_repeat + p_stagnation + p_step + p_early + p_explore)
    return RewardBreakdown(
        manager=manager,
        subpolicy=subpolicy,
        p_repeat=p_repeat,
        p_stagnation=p_stagnation,
        p_step=p_step,
        p_early=p_early,
        p_explore=p_explore,
        total=total,
    )


def normalized_reward(episode_total: float, oracle_total: float) -> float:
    """Episode total scaled by the oracle replay total, clamped to [0, 1]."""
    if oracle_total <= 0:
        raise NonPositiveOracle(f"oracle total must be > 0, got {oracle_total}")
    return min(1.0, max(0.0, episode_total / oracle_total))
