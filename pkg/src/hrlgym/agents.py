"""DQN / PPO / A2C agents over the hierarchical and flat policies.

Update rules:

    DQN   squared TD error on a joint value that decomposes additively over
          the decision levels: Q(s,a) = Q_mgr(s, macro) + Q_content(s, content)
          (mouse content adds its region/subregion/interaction heads).  The
          bootstrap term maximizes the same decomposition on the target
          network: max over macros of manager-Q plus that macro's content max.
    PPO   clipped surrogate against stored log-probabilities, a value
          regression term, and an entropy bonus over the decision path taken.
    A2C   n-step advantage actor-critic: -logpi * A + 0.5 * (V - R)^2 with
          bootstrapped returns.

Advantages, value targets, and old log-probabilities are computed when a
rollout is finalized and enter the loss as constants, so every loss here is
a deterministic function of the online parameters (which is what the
finite-difference gradient checks exercise).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .actions import N_ACTIONS, N_HOT, N_META, N_SINGLE
from .curriculum import TaskSampler
from .encoder import NUMERIC_REGION, NUMERIC_SUBREGION, ObservationBuilder
from .env import TaskEnv
from .errors import ConfigError, EmptyInput
from .metrics import EpisodeRecord, score_episode
from .nets import Adam, log_softmax, softmax
from .policy import (
    MACRO_ORDER,
    ObsBatch,
    Policy,
    PolicyConfig,
    Structure,
    greedy_action,
    make_policy,
    select_action,
)
from .rewards import RewardConfig
from .tasks import TaskSuite

log = logging.getLogger(__name__)

_MOUSE_BASE = N_SINGLE + N_HOT + N_META


class Algorithm(Enum):
    DQN = "dqn"
    PPO = "ppo"
    A2C = "a2c"


@dataclass(frozen=True)
class AgentConfig:
    algorithm: Algorithm = Algorithm.DQN
    structure: Structure = Structure.HIERARCHICAL
    gamma: float = 0.99
    learning_rate: float = 3e-4
    batch_size: int = 64
    replay_capacity: int = 50_000
    warmup: int = 500
    update_every: int = 1
    epsilon_start: float = 1.0
    epsilon_end: float = 0.007
    epsilon_decay: float = 8000.0
    target_update_interval: int = 50
    ppo_clip: float = 0.2
    ppo_epochs: int = 4
    rollout_length: int = 256
    a2c_n_steps: int = 5
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    a2c_entropy_coef: float = 0.0
    # Clip per-step rewards to [-c, +c] inside the learner only (0 disables).
    # Episode totals and metrics always use the exact rewards.
    reward_clip: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must be in (0, 1]")
        if self.epsilon_end > self.epsilon_start:
            raise ConfigError("epsilon_end must not exceed epsilon_start")


def epsilon(step: int, cfg: AgentConfig) -> float:
    """Exponential exploration schedule over environment steps."""
    return cfg.epsilon_end + (cfg.epsilon_start - cfg.epsilon_end) * np.exp(
        -step / cfg.epsilon_decay)


def decompose_flat(actions: np.ndarray):
    """Vectorized flat-index -> (macro index, c1, c2, c3) using the flat layout."""
    actions = np.asarray(actions)
    macros = np.empty(actions.shape, dtype=np.int64)
    c1 = np.zeros_like(macros)
    c2 = np.zeros_like(macros)
    c3 = np.zeros_like(macros)
    single = actions < N_SINGLE
    hot = (actions >= N_SINGLE) & (actions < N_SINGLE + N_HOT)
    meta = (actions >= N_SINGLE + N_HOT) & (actions < _MOUSE_BASE)
    mouse = actions >= _MOUSE_BASE
    macros[single], c1[single] = 0, actions[single]
    macros[hot], c1[hot] = 1, actions[hot] - N_SINGLE
    macros[meta], c1[meta] = 2, actions[meta] - (N_SINGLE + N_HOT)
    macros[mouse] = 3
    rest = actions[mouse] - _MOUSE_BASE
    c3[mouse] = rest % 8
    c2[mouse] = (rest // 8) % 9
    c1[mouse] = rest // 72
    return macros, c1, c2, c3


# ---------------------------------------------------------------------------
# Replay buffer (DQN)
# ---------------------------------------------------------------------------


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform no-replacement sampling."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.size = 0
        self._next = 0
        self._arrays = None

    def _allocate(self, obs):
        shape = lambda a: (self.capacity,) + a.shape  # noqa: E731
        self._arrays = {
            "vision": np.zeros(shape(obs.vision), dtype=np.float32),
            "task_vec": np.zeros(shape(obs.task_vec), dtype=np.float32),
            "ids": np.zeros(self.capacity, dtype=np.int64),
            "numeric": np.zeros(shape(obs.numeric), dtype=np.float32),
            "action": np.zeros(self.capacity, dtype=np.int64),
            "reward": np.zeros(self.capacity, dtype=np.float64),
            "next_vision": np.zeros(shape(obs.vision), dtype=np.float32),
            "next_task_vec": np.zeros(shape(obs.task_vec), dtype=np.float32),
            "next_ids": np.zeros(self.capacity, dtype=np.int64),
            "next_numeric": np.zeros(shape(obs.numeric), dtype=np.float32),
            "done": np.zeros(self.capacity, dtype=np.float64),
        }

    def push(self, obs, action_flat: int, reward: float, next_obs, done: bool) -> None:
        if self._arrays is None:
            self._allocate(obs)
        a = self._arrays
        i = self._next
        a["vision"][i] = obs.vision
        a["task_vec"][i] = obs.task_vec
        a["ids"][i] = obs.task_id
        a["numeric"][i] = obs.numeric
        a["action"][i] = action_flat
        a["reward"][i] = reward
        a["next_vision"][i] = next_obs.vision
        a["next_task_vec"][i] = next_obs.task_vec
        a["next_ids"][i] = next_obs.task_id
        a["next_numeric"][i] = next_obs.numeric
        a["done"][i] = 1.0 if done else 0.0
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> "TransitionBatch":
        idx = rng.choice(self.size, size=batch_size, replace=False)
        a = self._arrays
        return TransitionBatch(
            obs=ObsBatch(a["vision"][idx].astype(np.float64),
                         a["task_vec"][idx].astype(np.float64),
                         a["ids"][idx],
                         a["numeric"][idx].astype(np.float64)),
            actions=a["action"][idx],
            rewards=a["reward"][idx],
            next_obs=ObsBatch(a["next_vision"][idx].astype(np.float64),
                              a["next_task_vec"][idx].astype(np.float64),
                              a["next_ids"][idx],
                              a["next_numeric"][idx].astype(np.float64)),
            done=a["done"][idx],
        )


@dataclass(frozen=True)
class TransitionBatch:
    obs: ObsBatch
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: ObsBatch
    done: np.ndarray


@dataclass(frozen=True)
class RolloutBatch:
    """Policy-gradient minibatch with precomputed constants."""

    obs: ObsBatch
    actions: np.ndarray
    old_logp: np.ndarray
    advantage: np.ndarray
    value_target: np.ndarray

    def take(self, rows) -> "RolloutBatch":
        return RolloutBatch(self.obs.take(rows), self.actions[rows], self.old_logp[rows],
                            self.advantage[rows], self.value_target[rows])

    def __len__(self):
        return len(self.obs)


# ---------------------------------------------------------------------------
# DQN loss
# ---------------------------------------------------------------------------


def bootstrap_values(policy: Policy, next_obs: ObsBatch) -> np.ndarray:
    """Greedy value of the next state under the policy's decomposition."""
    if policy.structure is Structure.FLAT:
        outs, _ = policy.towers["flat"].forward(next_obs)
        return outs["flat"].max(axis=1)
    mgr, _ = policy.towers["manager"].forward(next_obs)
    q = mgr["macro"].copy()
    for col, name in ((0, "single"), (1, "hot"), (2, "meta")):
        outs, _ = policy.towers[name].forward(next_obs)
        q[:, col] += outs["key"].max(axis=1)
    q_r, q_s, q_i = policy._mouse_head_seq(next_obs)
    q[:, 3] += q_r.max(axis=1) + q_s.max(axis=1) + q_i.max(axis=1)
    return q.max(axis=1)


def dqn_loss_and_grads(policy: Policy, target_policy: Policy, batch: TransitionBatch,
                       cfg: AgentConfig) -> float:
    """Mean squared TD error; fills policy gradient buffers."""
    policy.zero_grads()
    n = len(batch.obs)
    targets = batch.rewards + cfg.gamma * (1.0 - batch.done) * bootstrap_values(
        target_policy, batch.next_obs)

    if policy.structure is Structure.FLAT:
        tower = policy.towers["flat"]
        outs, cache = tower.forward(batch.obs)
        rows = np.arange(n)
        q = outs["flat"][rows, batch.actions]
        delta = q - targets
        grad = np.zeros_like(outs["flat"])
        grad[rows, batch.actions] = 2.0 * delta / n
        tower.backward(cache, {"flat": grad})
        return float(np.mean(delta ** 2))

    macros, c1, c2, c3 = decompose_flat(batch.actions)
    mgr_tower = policy.towers["manager"]
    mgr_outs, mgr_cache = mgr_tower.forward(batch.obs)
    rows = np.arange(n)
    q_joint = mgr_outs["macro"][rows, macros].copy()

    group_passes = []
    for col, name in ((0, "single"), (1, "hot"), (2, "meta")):
        sel = np.nonzero(macros == col)[0]
        if sel.size == 0:
            continue
        tower = policy.towers[name]
        outs, cache = tower.forward(batch.obs.take(sel))
        q_joint[sel] += outs["key"][np.arange(sel.size), c1[sel]]
        group_passes.append((tower, cache, {"key": (outs["key"].shape, c1[sel])}, sel))

    mouse_sel = np.nonzero(macros == 3)[0]
    mouse_passes = []
    if mouse_sel.size:
        tower = policy.towers["mouse"]
        sub = batch.obs.take(mouse_sel)
        k = np.arange(mouse_sel.size)
        if policy.structure is Structure.MULTI_STEP_MOUSE:
            outs1, cache1 = tower.forward(sub)
            sub_r = sub.with_numeric_column(NUMERIC_REGION, c1[mouse_sel])
            outs2, cache2 = tower.forward(sub_r)
            sub_rs = sub_r.with_numeric_column(NUMERIC_SUBREGION, c2[mouse_sel])
            outs3, cache3 = tower.forward(sub_rs)
            q_joint[mouse_sel] += (outs1["region"][k, c1[mouse_sel]]
                                   + outs2["subregion"][k, c2[mouse_sel]]
                                   + outs3["interaction"][k, c3[mouse_sel]])
            mouse_passes = [(cache1, "region", outs1["region"].shape, c1[mouse_sel]),
                            (cache2, "subregion", outs2["subregion"].shape, c2[mouse_sel]),
                            (cache3, "interaction", outs3["interaction"].shape, c3[mouse_sel])]
        else:
            outs, cache = tower.forward(sub)
            q_joint[mouse_sel] += (outs["region"][k, c1[mouse_sel]]
                                   + outs["subregion"][k, c2[mouse_sel]]
                                   + outs["interaction"][k, c3[mouse_sel]])
            mouse_passes = [(cache, "region", outs["region"].shape, c1[mouse_sel]),
                            (cache, "subregion", outs["subregion"].shape, c2[mouse_sel]),
                            (cache, "interaction", outs["interaction"].shape, c3[mouse_sel])]

    delta = q_joint - targets
    dq = 2.0 * delta / n

    mgr_grad = np.zeros_like(mgr_outs["macro"])
    mgr_grad[rows, macros] = dq
    mgr_tower.backward(mgr_cache, {"macro": mgr_grad})

    for tower, cache, heads, sel in group_passes:
        grads = {}
        for head, (shape, cols) in heads.items():
            g = np.zeros(shape)
            g[np.arange(sel.size), cols] = dq[sel]
            grads[head] = g
        tower.backward(cache, grads)

    if mouse_sel.size:
        tower = policy.towers["mouse"]
        dmouse = dq[mouse_sel]
        if policy.structure is Structure.MULTI_STEP_MOUSE:
            for cache, head, shape, cols in mouse_passes:
                g = np.zeros(shape)
                g[np.arange(mouse_sel.size), cols] = dmouse
                tower.backward(cache, {head: g})
        else:
            cache = mouse_passes[0][0]
            grads = {}
            for _, head, shape, cols in mouse_passes:
                g = np.zeros(shape)
                g[np.arange(mouse_sel.size), cols] = dmouse
                grads[head] = g
            tower.backward(cache, grads)

    return float(np.mean(delta ** 2))


def dqn_update(policy: Policy, target_policy: Policy, batch: TransitionBatch,
               cfg: AgentConfig, opt: Adam) -> float:
    loss = dqn_loss_and_grads(policy, target_policy, batch, cfg)
    opt.step([policy.flat_grads])
    return loss


# ---------------------------------------------------------------------------
# Policy-gradient losses (PPO / A2C)
# ---------------------------------------------------------------------------


def _entropy(probs: np.ndarray, logp: np.ndarray) -> np.ndarray:
    return -(probs * logp).sum(axis=1)


class _SoftmaxPass:
    """One softmax head evaluation prepared for log-prob + entropy backprop."""

    def __init__(self, logits: np.ndarray, chosen: np.ndarray):
        self.probs = softmax(logits)
        self.logp_all = log_softmax(logits)
        self.chosen = chosen
        self.rows = np.arange(logits.shape[0])
        self.logp = self.logp_all[self.rows, chosen]
        self.entropy = _entropy(self.probs, self.logp_all)

    def grad(self, dlogp: np.ndarray, dent: np.ndarray) -> np.ndarray:
        """dlogp, dent: (B,) coefficients on this head's logp/entropy."""
        onehot = np.zeros_like(self.probs)
        onehot[self.rows, self.chosen] = 1.0
        g = dlogp[:, None] * (onehot - self.probs)
        g += dent[:, None] * (-self.probs * (self.logp_all + self.entropy[:, None]))
        return g


def _pg_forward(policy: Policy, obs: ObsBatch, actions: np.ndarray):
    """Forward pass for policy-gradient updates.

    Returns (logp, entropy, value, backprop) where backprop(dlogp, dent, dvalue)
    pushes gradients into the policy given per-sample loss coefficients.
    """
    n = len(obs)
    rows = np.arange(n)

    if policy.structure is Structure.FLAT:
        tower = policy.towers["flat"]
        outs, cache = tower.forward(obs)
        head = _SoftmaxPass(outs["flat"], actions)
        value = outs["value"][:, 0]

        def backprop(dlogp, dent, dvalue):
            tower.backward(cache, {"flat": head.grad(dlogp, dent),
                                   "value": dvalue[:, None]})

        return head.logp, head.entropy, value, backprop

    macros, c1, c2, c3 = decompose_flat(actions)
    mgr_tower = policy.towers["manager"]
    mgr_outs, mgr_cache = mgr_tower.forward(obs)
    mgr_head = _SoftmaxPass(mgr_outs["macro"], macros)
    value = mgr_outs["value"][:, 0]

    logp = mgr_head.logp.copy()
    ent = mgr_head.entropy.copy()

    content = []  # (tower, [(cache, head_name, _SoftmaxPass)], rows)
    for col, name in ((0, "single"), (1, "hot"), (2, "meta")):
        sel = np.nonzero(macros == col)[0]
        if sel.size == 0:
            continue
        tower = policy.towers[name]
        outs, cache = tower.forward(obs.take(sel))
        p = _SoftmaxPass(outs["key"], c1[sel])
        logp[sel] += p.logp
        ent[sel] += p.entropy
        content.append((tower, [(cache, "key", p)], sel))

    mouse_sel = np.nonzero(macros == 3)[0]
    if mouse_sel.size:
        tower = policy.towers["mouse"]
        sub = obs.take(mouse_sel)
        passes = []
        if policy.structure is Structure.MULTI_STEP_MOUSE:
            outs1, cache1 = tower.forward(sub)
            sub_r = sub.with_numeric_column(NUMERIC_REGION, c1[mouse_sel])
            outs2, cache2 = tower.forward(sub_r)
            sub_rs = sub_r.with_numeric_column(NUMERIC_SUBREGION, c2[mouse_sel])
            outs3, cache3 = tower.forward(sub_rs)
            passes = [(cache1, "region", _SoftmaxPass(outs1["region"], c1[mouse_sel])),
                      (cache2, "subregion", _SoftmaxPass(outs2["subregion"], c2[mouse_sel])),
                      (cache3, "interaction", _SoftmaxPass(outs3["interaction"], c3[mouse_sel]))]
        else:
            outs, cache = tower.forward(sub)
            passes = [(cache, "region", _SoftmaxPass(outs["region"], c1[mouse_sel])),
                      (cache, "subregion", _SoftmaxPass(outs["subregion"], c2[mouse_sel])),
                      (cache, "interaction", _SoftmaxPass(outs["interaction"], c3[mouse_sel]))]
        for _, _, p in passes:
            logp[mouse_sel] += p.logp
            ent[mouse_sel] += p.entropy
        content.append((tower, passes, mouse_sel))

    def backprop(dlogp, dent, dvalue):
        mgr_tower.backward(mgr_cache, {"macro": mgr_head.grad(dlogp, dent),
                                       "value": dvalue[:, None]})
        for tower, passes, sel in content:
            if policy.structure is Structure.MULTI_STEP_MOUSE and len(passes) == 3:
                for cache, head_name, p in passes:
                    tower.backward(cache, {head_name: p.grad(dlogp[sel], dent[sel])})
            elif len(passes) == 3:
                cache = passes[0][0]
                grads = {hn: p.grad(dlogp[sel], dent[sel]) for _, hn, p in passes}
                tower.backward(cache, grads)
            else:
                cache, head_name, p = passes[0]
                tower.backward(cache, {head_name: p.grad(dlogp[sel], dent[sel])})

    return logp, ent, value, backprop


def ppo_loss_and_grads(policy: Policy, batch: RolloutBatch, cfg: AgentConfig) -> float:
    """Clipped surrogate + value + entropy loss; fills gradient buffers."""
    policy.zero_grads()
    n = len(batch)
    logp, ent, value, backprop = _pg_forward(policy, batch.obs, batch.actions)
    ratio = np.exp(logp - batch.old_logp)
    surr1 = ratio * batch.advantage
    surr2 = np.clip(ratio, 1.0 - cfg.ppo_clip, 1.0 + cfg.ppo_clip) * batch.advantage
    policy_loss = -np.mean(np.minimum(surr1, surr2))
    v_err = value - batch.value_target
    value_loss = cfg.value_coef * np.mean(v_err ** 2)
    entropy_mean = np.mean(ent)
    loss = policy_loss + value_loss - cfg.entropy_coef * entropy_mean

    unclipped = surr1 <= surr2
    dlogp = -(batch.advantage * ratio * unclipped) / n
    dent = np.full(n, -cfg.entropy_coef / n)
    dvalue = 2.0 * cfg.value_coef * v_err / n
    backprop(dlogp, dent, dvalue)
    return float(loss)


def ppo_update(policy: Policy, rollout: RolloutBatch, cfg: AgentConfig, opt: Adam,
               rng: np.random.Generator) -> float:
    """Epochs of minibatch updates over one rollout; returns the mean loss."""
    losses = []
    n = len(rollout)
    for _ in range(cfg.ppo_epochs):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            rows = perm[start:start + cfg.batch_size]
            loss = ppo_loss_and_grads(policy, rollout.take(rows), cfg)
            opt.step([policy.flat_grads])
            losses.append(loss)
    return float(np.mean(losses))


def a2c_loss_and_grads(policy: Policy, batch: RolloutBatch, cfg: AgentConfig) -> float:
    """-logpi * A + 0.5 * (V - R)^2, meaned over the rollout."""
    policy.zero_grads()
    n = len(batch)
    logp, ent, value, backprop = _pg_forward(policy, batch.obs, batch.actions)
    v_err = value - batch.value_target
    loss = float(np.mean(-logp * batch.advantage + 0.5 * v_err ** 2)
                 - cfg.a2c_entropy_coef * np.mean(ent))
    dlogp = -batch.advantage / n
    dent = np.full(n, -cfg.a2c_entropy_coef / n)
    dvalue = v_err / n
    backprop(dlogp, dent, dvalue)
    return loss


def a2c_update(policy: Policy, rollout: RolloutBatch, cfg: AgentConfig, opt: Adam) -> float:
    loss = a2c_loss_and_grads(policy, rollout, cfg)
    opt.step([policy.flat_grads])
    return loss


def n_step_returns(rewards: np.ndarray, dones: np.ndarray, bootstrap: float,
                   gamma: float) -> np.ndarray:
    """Discounted returns over a rollout with a terminal bootstrap value."""
    n = len(rewards)
    out = np.empty(n)
    acc = bootstrap
    for i in range(n - 1, -1, -1):
        acc = rewards[i] + gamma * (1.0 - dones[i]) * acc
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# Agent shell and the training loop
# ---------------------------------------------------------------------------


class Agent:
    """Policy plus learning state for one training run."""

    def __init__(self, cfg: AgentConfig, policy_cfg: PolicyConfig, seed: int):
        self.cfg = cfg
        self.policy_cfg = policy_cfg
        self.policy = make_policy(cfg.structure, policy_cfg, seed)
        self.opt = Adam([self.policy.flat_params], lr=cfg.learning_rate)
        self.global_step = 0
        self.episode = 0
        self.target = None
        self.replay = None
        if cfg.algorithm is Algorithm.DQN:
            self.target = self.policy.clone()
            self.replay = ReplayBuffer(cfg.replay_capacity)

    def sync_target(self) -> None:
        self.target.copy_params_from(self.policy)


@dataclass
class _PgCollector:
    """Accumulates transitions until a rollout is ready."""

    horizon: int
    gamma: float
    observations: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    logps: list = field(default_factory=list)
    values: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    dones: list = field(default_factory=list)
    last_next_obs: object = None

    def push(self, obs, action_flat, logp, value, reward, done, next_obs):
        self.observations.append(obs)
        self.actions.append(action_flat)
        self.logps.append(logp)
        self.values.append(value)
        self.rewards.append(reward)
        self.dones.append(done)
        self.last_next_obs = next_obs

    def __len__(self):
        return len(self.actions)

    def finalize_td(self, tail_value: float) -> RolloutBatch:
        """One-step advantages: A = r + gamma * V(s') * (1-done) - V(s)."""
        n = len(self)
        rewards = np.array(self.rewards)
        dones = np.array(self.dones, dtype=np.float64)
        values = np.array(self.values)
        next_values = np.append(values[1:], tail_value)
        # A done transition never bootstraps; the value after a boundary
        # belongs to the next episode and is masked out here.
        adv = rewards + self.gamma * (1.0 - dones) * next_values - values
        batch = RolloutBatch(
            obs=ObsBatch.from_observations(self.observations),
            actions=np.array(self.actions, dtype=np.int64),
            old_logp=np.array(self.logps),
            advantage=adv,
            value_target=adv + values,
        )
        self._clear()
        return batch

    def finalize_nstep(self, tail_value: float) -> RolloutBatch:
        """Bootstrapped n-step returns; A = R - V(s)."""
        rewards = np.array(self.rewards)
        dones = np.array(self.dones, dtype=np.float64)
        values = np.array(self.values)
        bootstrap = tail_value if not self.dones[-1] else 0.0
        returns = n_step_returns(rewards, dones, bootstrap, self.gamma)
        batch = RolloutBatch(
            obs=ObsBatch.from_observations(self.observations),
            actions=np.array(self.actions, dtype=np.int64),
            old_logp=np.array(self.logps),
            advantage=returns - values,
            value_target=returns,
        )
        self._clear()
        return batch

    def _clear(self):
        self.observations.clear()
        self.actions.clear()
        self.logps.clear()
        self.values.clear()
        self.rewards.clear()
        self.dones.clear()
        self.last_next_obs = None


def state_value(policy: Policy, obs) -> float:
    tower = policy.towers["flat" if policy.structure is Structure.FLAT else "manager"]
    outs, _ = tower.forward(ObsBatch.single(obs))
    return float(outs["value"][0, 0])


def train(agent: Agent, suite: TaskSuite, builder: ObservationBuilder,
          sampler: TaskSampler, episodes: int, seed: int,
          reward_config: RewardConfig | None = None, max_steps: int = 100,
          on_episode=None) -> list[EpisodeRecord]:
    """Run the episode loop and return one record per episode.

    Deterministic given (agent seed, sampler rng, this seed): action
    exploration and replay sampling use generators derived from `seed`.
    """
    from .actions import flatten
    from .env import oracle_rollout

    cfg = agent.cfg
    env = TaskEnv(builder=builder, reward_config=reward_config, max_steps=max_steps)
    act_rng = np.random.default_rng([seed, 101])
    update_rng = np.random.default_rng([seed, 202])
    oracle_totals = {}
    records = []
    collector = None
    if cfg.algorithm in (Algorithm.PPO, Algorithm.A2C):
        horizon = cfg.rollout_length if cfg.algorithm is Algorithm.PPO else cfg.a2c_n_steps
        collector = _PgCollector(horizon=horizon, gamma=cfg.gamma)

    for ep in range(episodes):
        task = sampler.sample(ep)
        if task.id not in oracle_totals:
            oracle_totals[task.id] = oracle_rollout(
                task, reward_config=reward_config, max_steps=max_steps).total_reward
        obs = env.reset(task)
        done = False
        while not done:
            if cfg.algorithm is Algorithm.DQN:
                eps = epsilon(agent.global_step, cfg)
                choice = select_action(agent.policy, obs, act_rng, epsilon=eps)
            else:
                choice = select_action(agent.policy, obs, act_rng, stochastic=True)
            outcome = env.step(choice.action)
            agent.global_step += 1
            done = outcome.done
            flat = flatten(choice.action)
            learn_reward = outcome.reward
            if cfg.reward_clip > 0.0:
                learn_reward = float(np.clip(learn_reward, -cfg.reward_clip, cfg.reward_clip))
            if cfg.algorithm is Algorithm.DQN:
                agent.replay.push(obs, flat, learn_reward, outcome.observation, done)
                if (agent.replay.size >= max(cfg.warmup, cfg.batch_size)
                        and agent.global_step % cfg.update_every == 0):
                    batch = agent.replay.sample(cfg.batch_size, update_rng)
                    dqn_update(agent.policy, agent.target, batch, cfg, agent.opt)
            else:
                collector.push(obs, flat, choice.log_prob, choice.value,
                               outcome.reward, done, outcome.observation)
                if len(collector) >= collector.horizon or (
                        cfg.algorithm is Algorithm.A2C and done):
                    tail = 0.0 if done else state_value(agent.policy, outcome.observation)
                    if cfg.algorithm is Algorithm.PPO:
                        rollout = collector.finalize_td(tail)
                        ppo_update(agent.policy, rollout, cfg, agent.opt, update_rng)
                    else:
                        rollout = collector.finalize_nstep(tail)
                        a2c_update(agent.policy, rollout, cfg, agent.opt)
            obs = outcome.observation

        record = score_episode(env.trace, env.state, task, oracle_totals[task.id])
        records.append(record)
        sampler.report_outcome(task.id, record.success)
        agent.episode += 1
        if cfg.algorithm is Algorithm.DQN and agent.episode % cfg.target_update_interval == 0:
            agent.sync_target()
        if on_episode is not None:
            on_episode(ep, record)
    return records


def evaluate(policy: Policy, suite: TaskSuite, builder: ObservationBuilder,
             reward_config: RewardConfig | None = None, max_steps: int = 100,
             tasks=None) -> list[EpisodeRecord]:
    """Greedy deterministic rollout of every task (ascending id order)."""
    from .env import oracle_rollout

    env = TaskEnv(builder=builder, reward_config=reward_config, max_steps=max_steps)
    chosen = sorted(tasks if tasks is not None else suite, key=lambda t: t.id)
    if not chosen:
        raise EmptyInput("no tasks to evaluate")
    records = []
    for task in chosen:
        oracle_total = oracle_rollout(task, reward_config=reward_config,
                                      max_steps=max_steps).total_reward
        obs = env.reset(task)
        done = False
        while not done:
            action = greedy_action(policy, obs)
            outcome = env.step(action)
            obs = outcome.observation
            done = outcome.done
        records.append(score_episode(env.trace, env.state, task, oracle_total))
    return records


def oracle_records(suite: TaskSuite, reward_config: RewardConfig | None = None,
                   max_steps: int = 100) -> list[EpisodeRecord]:
    """Score a verbatim ground-truth replay of every task."""
    from .env import oracle_rollout

    env = TaskEnv(builder=None, reward_config=reward_config, max_steps=max_steps)
    records = []
    for task in suite:
        total = oracle_rollout(task, reward_config=reward_config,
                               max_steps=max_steps).total_reward
        env.reset(task)
        for action in task.actions:
            env.step(action)
        records.append(score_episode(env.trace, env.state, task, total))
    return records
