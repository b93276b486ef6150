import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hrlgym.actions import Action, MacroAction, META_STOP, META_WAIT
from hrlgym.env import EnvState, TaskEnv
from hrlgym.errors import ConfigError, NonPositiveOracle
from hrlgym.rewards import (
    RewardConfig,
    key_subreward,
    manager_reward,
    mouse_subreward,
    no_streak_preset,
    normalized_reward,
    penalty,
    reward_preset,
    soft_penalty_preset,
    subpolicy_reward,
    text_streak_preset,
    total_reward,
)
from hrlgym.tasks import Task

CFG = RewardConfig()
STOP = Action(MacroAction.META, META_STOP)
WAIT = Action(MacroAction.META, META_WAIT)


def make_state(task_len=5, **kw):
    actions = tuple([Action(MacroAction.SINGLE_KEY, i % 92) for i in range(task_len - 1)] + [STOP])
    state = EnvState(task=Task(0, "t", actions))
    for key, value in kw.items():
        setattr(state, key, value)
    return state


class TestManagerReward:
    def test_mismatch_is_zero(self):
        assert manager_reward(MacroAction.MOUSE, MacroAction.META, 3, CFG) == 0.0
        assert manager_reward(MacroAction.MOUSE, None, 3, CFG) == 0.0

    def test_first_correct(self):
        assert manager_reward(MacroAction.MOUSE, MacroAction.MOUSE, 1, CFG) == 4.0

    def test_third_consecutive(self):
        assert manager_reward(MacroAction.META, MacroAction.META, 3, CFG) == 8.0

    def test_zero_exactly_when_indicator_zero(self):
        for macro in MacroAction:
            for target in MacroAction:
                value = manager_reward(macro, target, 2, CFG)
                assert (value == 0.0) == (macro is not target)


class TestMouseSubreward:
    def test_exact_match(self):
        assert mouse_subreward((2, 3, 5), (2, 3, 5), CFG) == 6.0

    def test_far_and_wrong_interaction(self):
        # (0,0) vs (8,8) has grid distance 8*sqrt(2) > 3
        assert mouse_subreward((0, 0, 1), (8, 8, 2), CFG) == 0.0

    def test_half_threshold_correct_interaction(self):
        # distance 1 with threshold 2: (1 - 0.5) * 3 + 3 = 4.5
        cfg = replace(CFG, distance_threshold=2.0)
        assert mouse_subreward((0, 0, 4), (0, 1, 4), cfg) == 4.5

    def test_non_increasing_in_distance(self):
        from hrlgym.actions import mouse_distance

        values = [mouse_subreward((0, 0, 0), (r, s, 1), CFG) for r in range(9) for s in range(9)]
        dist = [mouse_distance((0, 0), (r, s)) for r in range(9) for s in range(9)]
        order = sorted(range(81), key=lambda i: dist[i])
        for i, j in zip(order, order[1:]):
            assert values[i] >= values[j] - 1e-12

    def test_zero_at_and_beyond_threshold(self):
        # threshold 2.0: distance exactly 2 gives positional term 0
        cfg = replace(CFG, distance_threshold=2.0)
        assert mouse_subreward((0, 0, 1), (0, 2, 0), cfg) == 0.0


class TestKeySubreward:
    def test_match(self):
        assert key_subreward(7, 7, CFG) == 6.0

    def test_mismatch(self):
        assert key_subreward(7, 8, CFG) == 0.0

    def test_streak_composition(self):
        a = Action(MacroAction.SINGLE_KEY, 7)
        assert subpolicy_reward(a, a, 3, CFG) == 6.0 + 2.0 * 3

    def test_macro_mismatch_gives_zero(self):
        a = Action(MacroAction.SINGLE_KEY, 7)
        b = Action(MacroAction.HOTKEY, 7)
        assert subpolicy_reward(a, b, 1, CFG) == 0.0

    def test_mouse_partial_credit_switch(self):
        near = Action(MacroAction.MOUSE, (0, 0, 1))
        target = Action(MacroAction.MOUSE, (0, 1, 1))
        assert subpolicy_reward(near, target, 0, CFG) == pytest.approx((1 - 1 / 3) * 3 + 3)
        strict = replace(CFG, mouse_partial_credit=False)
        assert subpolicy_reward(near, target, 0, strict) == 0.0
        # exact match unaffected by the switch
        assert subpolicy_reward(target, target, 1, strict) == 6.0 + 2.0


class TestPenalty:
    def test_repeat_at_streak_four(self):
        state = make_state(repeat_streak=4, t=1)
        p_repeat, *_ = penalty(state, WAIT, CFG)
        assert p_repeat == 9.0

    def test_repeat_inactive_at_threshold(self):
        state = make_state(repeat_streak=2, t=1)
        assert penalty(state, WAIT, CFG)[0] == 0.0

    def test_stagnation(self):
        assert penalty(make_state(stagnation=4, t=1), WAIT, CFG)[1] == 4.0
        assert penalty(make_state(stagnation=3, t=1), WAIT, CFG)[1] == 0.0

    def test_step_constant(self):
        assert penalty(make_state(t=1), WAIT, CFG)[2] == 0.5

    def test_early_stop(self):
        state = make_state(task_len=5, progress=2, t=3)
        assert penalty(state, STOP, CFG)[3] == 2.0
        assert penalty(state, WAIT, CFG)[3] == 0.0
        done_state = make_state(task_len=5, progress=5, t=5)
        assert penalty(done_state, STOP, CFG)[3] == 0.0

    def test_explore_before_horizon(self):
        state = make_state(task_len=5, t=3)
        assert penalty(state, WAIT, CFG)[4] == pytest.approx(0.2)

    def test_explore_growth(self):
        state = make_state(task_len=5, t=9)
        assert penalty(state, WAIT, CFG)[4] == pytest.approx(0.2 * 1.1 ** 4)

    def test_fresh_advancing_step(self):
        state = make_state(task_len=5, progress=1, t=1, repeat_streak=1, stagnation=0)
        terms = penalty(state, Action(MacroAction.SINGLE_KEY, 0), CFG)
        assert terms == (0.0, 0.0, 0.5, 0.0, pytest.approx(0.2))


class TestTotalReward:
    def test_composed_first_step(self):
        terms = (0.0, 0.0, 0.5, 0.0, 0.2)
        breakdown = total_reward(4.0, 8.0, terms, CFG)
        assert breakdown.total == pytest.approx(12.9, abs=1e-12)

    def test_all_zero_parts(self):
        breakdown = total_reward(0.0, 0.0, (0.0, 0.0, 0.5, 0.0, 0.2), CFG)
        assert breakdown.total == pytest.approx(-0.7, abs=1e-12)

    def test_alpha_zero_kills_subpolicy(self):
        cfg = replace(CFG, alpha=0.0)
        breakdown = total_reward(4.0, 100.0, (0.0, 0.0, 0.0, 0.0, 0.0), cfg)
        assert breakdown.total == 4.0

    def test_breakdown_additivity_exact(self, rng):
        for _ in range(200):
            mgr, sub = rng.uniform(0, 10, 2)
            pens = tuple(rng.uniform(0, 5, 5))
            b = total_reward(mgr, sub, pens, CFG)
            resummed = b.manager + CFG.alpha * b.subpolicy - b.penalty_sum()
            assert abs(b.total - resummed) <= 1e-12

    def test_scaling_invariance(self, rng):
        scaled_fields = ("manager_correct_reward", "manager_streak_bonus",
                         "subpolicy_correct_reward", "subpolicy_streak_bonus",
                         "mouse_region_reward", "mouse_interaction_reward",
                         "base_step_penalty", "repeat_exp_base",
                         "pointer_unchanged_penalty", "short_ending_penalty",
                         "exp_penalty_base")
        c = 3.5
        cfg2 = replace(CFG, **{f: getattr(CFG, f) * c for f in scaled_fields})
        target = Action(MacroAction.SINGLE_KEY, 7)
        for _ in range(100):
            state = make_state(
                repeat_streak=int(rng.integers(1, 8)),
                stagnation=int(rng.integers(0, 8)),
                t=int(rng.integers(1, 30)),
                progress=int(rng.integers(0, 5)),
            )
            action = Action(MacroAction.SINGLE_KEY, int(rng.integers(0, 92)))
            streak = int(rng.integers(0, 5))
            for cfg, scale in ((CFG, 1.0), (cfg2, c)):
                b = total_reward(
                    manager_reward(action.macro, target.macro, streak, cfg),
                    subpolicy_reward(action, target, streak, cfg),
                    penalty(state, action, cfg), cfg)
                if scale == 1.0:
                    base_total = b.total
                else:
                    assert b.total == pytest.approx(base_total * c, rel=1e-12)


class TestNormalizedReward:
    def test_exact_oracle(self):
        assert normalized_reward(50.0, 50.0) == 1.0

    def test_clamps_negative(self):
        assert normalized_reward(-10.0, 50.0) == 0.0

    def test_half(self):
        assert normalized_reward(25.0, 50.0) == 0.5

    def test_clamps_above_one(self):
        assert normalized_reward(80.0, 50.0) == 1.0

    def test_nonpositive_oracle_rejected(self):
        with pytest.raises(NonPositiveOracle):
            normalized_reward(1.0, 0.0)


class TestPresetsAndConfig:
    def test_soft_penalty_preset(self):
        cfg = soft_penalty_preset()
        assert cfg.base_step_penalty == 0.05
        assert cfg.pointer_unchanged_penalty == 2.0
        assert cfg.repeat_exp_base == 3.0

    def test_text_streak_preset(self):
        cfg = text_streak_preset()
        assert cfg.manager_streak_bonus == 5.0
        assert cfg.subpolicy_streak_bonus == 1.0

    def test_reserved_preset_raises(self):
        with pytest.raises(ConfigError):
            reward_preset("distance_explore")
        with pytest.raises(ConfigError):
            reward_preset("nonsense")

    def test_negative_magnitude_rejected(self):
        with pytest.raises(ConfigError):
            RewardConfig(base_step_penalty=-0.5)
        with pytest.raises(ConfigError):
            RewardConfig(negative_stop_threshold=5.0)
        with pytest.raises(ConfigError):
            RewardConfig(distance_threshold=0.0)

    def test_no_streak_constant_per_step_reward(self, registry):
        # with bonuses off, every matched step of a replay pays the same
        # manager+subpolicy amount
        cfg = no_streak_preset()
        actions = (Action(MacroAction.SINGLE_KEY, 3), Action(MacroAction.SINGLE_KEY, 9),
                   Action(MacroAction.SINGLE_KEY, 3), STOP)
        task = Task(0, "t", actions)
        env = TaskEnv(reward_config=cfg)
        env.reset(task)
        gains = []
        for action in actions:
            out = env.step(action)
            gains.append(out.breakdown.manager + cfg.alpha * out.breakdown.subpolicy)
        assert all(g == pytest.approx(gains[0]) for g in gains)


@given(
    streak=st.integers(min_value=0, max_value=50),
    n=st.integers(min_value=1, max_value=12),
    c=st.integers(min_value=0, max_value=12),
    t=st.integers(min_value=1, max_value=60),
    progress=st.integers(min_value=0, max_value=4),
)
def test_penalties_nonnegative_and_total_exact(streak, n, c, t, progress):
    state = make_state(task_len=5, repeat_streak=n, stagnation=c, t=t, progress=progress)
    action = WAIT
    terms = penalty(state, action, CFG)
    assert all(p >= 0.0 for p in terms)
    mgr = manager_reward(action.macro, MacroAction.META, streak, CFG)
    sub = subpolicy_reward(action, STOP, streak, CFG)
    b = total_reward(mgr, sub, terms, CFG)
    assert b.total == mgr + CFG.alpha * sub - sum(terms)
