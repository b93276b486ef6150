"""Trainable policies: per-level network towers over the triple-modal state.

A *tower* is one complete network: modality encoders (vision, task-id
embedding, optional description encoder, numeric encoder), a fully
connected trunk, and one or more linear heads.

The hierarchical policy runs five towers: a manager tower scoring the four
macro modes (plus the state-value head) and one content tower per mode.
The flat baseline is a single tower with one 822-way head.  The multi-step
mouse variant shares the hierarchical layout but picks region, subregion,
and interaction in sequence, re-encoding the partially updated pointer
state between the three decisions; the three picks still form one
environment action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .actions import (
    Action,
    MacroAction,
    N_ACTIONS,
    N_HOT,
    N_INTERACTIONS,
    N_META,
    N_REGIONS,
    N_SINGLE,
    N_SUBREGIONS,
    unflatten,
)
from .encoder import NUMERIC_REGION, NUMERIC_SUBREGION, Observation, VISION_DIM
from .errors import ConfigError, ShapeError
from .nets import EmbeddingTable, MlpNet, log_softmax, softmax

MACRO_ORDER = (MacroAction.SINGLE_KEY, MacroAction.HOTKEY, MacroAction.META, MacroAction.MOUSE)
MACRO_INDEX = {m: i for i, m in enumerate(MACRO_ORDER)}
CONTENT_TOWER = {MacroAction.SINGLE_KEY: "single", MacroAction.HOTKEY: "hot",
                 MacroAction.META: "meta", MacroAction.MOUSE: "mouse"}


class Structure(Enum):
    HIERARCHICAL = "hier"
    FLAT = "flat"
    MULTI_STEP_MOUSE = "ms"


@dataclass(frozen=True)
class PolicyConfig:
    """Network dimensions; defaults follow the experimental setup."""

    n_tasks: int
    embed_dim: int = 0
    state_size: int = 5
    vision_dim: int = VISION_DIM
    vision_out: int = 1024
    id_dim: int = 32
    desc_out: int = 32
    numeric_hidden: int = 64
    numeric_out: int = 64
    trunk_width: int = 512
    trunk_depth: int = 3

    def desk_scale(self) -> "PolicyConfig":
        """Compact dimensions for laptop-budget experiments."""
        return replace(self, vision_out=64, id_dim=16, desc_out=16,
                       numeric_hidden=32, numeric_out=32, trunk_width=96)


@dataclass(frozen=True)
class ObsBatch:
    vision: np.ndarray    # (B, vision_dim)
    task_vec: np.ndarray  # (B, embed_dim)
    ids: np.ndarray       # (B,) int
    numeric: np.ndarray   # (B, state_size)

    @classmethod
    def from_observations(cls, observations) -> "ObsBatch":
        return cls(
            vision=np.stack([o.vision for o in observations]),
            task_vec=np.stack([o.task_vec for o in observations]),
            ids=np.array([o.task_id for o in observations], dtype=np.int64),
            numeric=np.stack([o.numeric for o in observations]),
        )

    @classmethod
    def single(cls, obs: Observation) -> "ObsBatch":
        return cls.from_observations([obs])

    def with_numeric_column(self, column: int, values) -> "ObsBatch":
        numeric = self.numeric.copy()
        numeric[:, column] = values
        return replace(self, numeric=numeric)

    def take(self, rows) -> "ObsBatch":
        return ObsBatch(self.vision[rows], self.task_vec[rows],
                        self.ids[rows], self.numeric[rows])

    def __len__(self) -> int:
        return self.vision.shape[0]


class Tower:
    """Encoders + trunk + linear heads for one decision level."""

    def __init__(self, cfg: PolicyConfig, head_sizes: dict, rng: np.random.Generator):
        self.cfg = cfg
        self.vision = MlpNet([cfg.vision_dim, cfg.vision_out], rng)
        self.id_embed = EmbeddingTable(cfg.n_tasks, cfg.id_dim, rng)
        self.desc = MlpNet([cfg.embed_dim, cfg.desc_out], rng) if cfg.embed_dim > 0 else None
        self.numeric = MlpNet([cfg.state_size, cfg.numeric_hidden, cfg.numeric_out], rng)
        trunk_in = cfg.vision_out + cfg.id_dim + (cfg.desc_out if self.desc else 0) + cfg.numeric_out
        self.trunk = MlpNet([trunk_in] + [cfg.trunk_width] * cfg.trunk_depth, rng,
                            relu_output=True)
        # Heads start at zero so initial value estimates and action
        # preferences are flat rather than random noise.
        self.heads = {}
        for name, size in head_sizes.items():
            head = MlpNet([cfg.trunk_width, size], rng)
            head.weights[0][...] = 0.0
            self.heads[name] = head

    def forward(self, batch: ObsBatch):
        """Returns ({head: (B, size)}, cache)."""
        if batch.numeric.shape[1] != self.cfg.state_size:
            raise ShapeError(
                f"numeric width {batch.numeric.shape[1]} != config {self.cfg.state_size}")
        v, v_cache = self.vision.forward(batch.vision)
        e = self.id_embed.forward(batch.ids)
        parts = [v, e]
        d_cache = None
        if self.desc is not None:
            d, d_cache = self.desc.forward(batch.task_vec)
            parts.append(d)
        s, s_cache = self.numeric.forward(batch.numeric)
        parts.append(s)
        h = np.concatenate(parts, axis=1)
        z, t_cache = self.trunk.forward(h)
        outs = {}
        h_caches = {}
        for name, head in self.heads.items():
            outs[name], h_caches[name] = head.forward(z)
        cache = (batch, v_cache, d_cache, s_cache, t_cache, h_caches)
        return outs, cache

    def backward(self, cache, head_grads: dict) -> None:
        """head_grads maps head name -> (B, size) gradient; missing heads get none."""
        batch, v_cache, d_cache, s_cache, t_cache, h_caches = cache
        gz = None
        for name, grad in head_grads.items():
            g = self.heads[name].backward(h_caches[name], grad)
            gz = g if gz is None else gz + g
        if gz is None:
            return
        gh = self.trunk.backward(t_cache, gz)
        o = 0
        gv = gh[:, o:o + self.cfg.vision_out]
        o += self.cfg.vision_out
        ge = gh[:, o:o + self.cfg.id_dim]
        o += self.cfg.id_dim
        if self.desc is not None:
            gd = gh[:, o:o + self.cfg.desc_out]
            o += self.cfg.desc_out
            self.desc.backward(d_cache, gd)
        gs = gh[:, o:]
        self.vision.backward(v_cache, gv)
        self.id_embed.backward(batch.ids, ge)
        self.numeric.backward(s_cache, gs)

    def modules(self):
        mods = [("vision", self.vision), ("id_embed", self.id_embed)]
        if self.desc is not None:
            mods.append(("desc", self.desc))
        mods.append(("numeric", self.numeric))
        mods.append(("trunk", self.trunk))
        for name in sorted(self.heads):
            mods.append((f"head_{name}", self.heads[name]))
        return mods

    def zero_grads(self):
        for _, m in self.modules():
            m.zero_grads()


class Policy:
    """A set of towers with a structure-specific decision procedure."""

    def __init__(self, structure: Structure, cfg: PolicyConfig, rng: np.random.Generator):
        self.structure = structure
        self.cfg = cfg
        if structure is Structure.FLAT:
            self.towers = {"flat": Tower(cfg, {"flat": N_ACTIONS, "value": 1}, rng)}
        else:
            self.towers = {
                "manager": Tower(cfg, {"macro": len(MACRO_ORDER), "value": 1}, rng),
                "single": Tower(cfg, {"key": N_SINGLE}, rng),
                "hot": Tower(cfg, {"key": N_HOT}, rng),
                "meta": Tower(cfg, {"key": N_META}, rng),
                "mouse": Tower(cfg, {"region": N_REGIONS, "subregion": N_SUBREGIONS,
                                     "interaction": N_INTERACTIONS}, rng),
            }
        self._consolidate()

    def _consolidate(self) -> None:
        """Repack every parameter/grad array as a view into one flat buffer,
        so the optimizer and zero_grads work on contiguous memory."""
        mods = []
        for tower_name in sorted(self.towers):
            mods.extend(m for _, m in self.towers[tower_name].modules())
        params, counts = [], []
        for m in mods:
            ps = m.params()
            params.extend(ps)
            counts.append(len(ps))
        total = sum(p.size for p in params)
        self.flat_params = np.empty(total)
        self.flat_grads = np.zeros(total)
        new_p, new_g = [], []
        offset = 0
        for p in params:
            n = p.size
            view = self.flat_params[offset:offset + n].reshape(p.shape)
            view[...] = p
            new_p.append(view)
            new_g.append(self.flat_grads[offset:offset + n].reshape(p.shape))
            offset += n
        i = 0
        for m, c in zip(mods, counts):
            m.adopt_storage(new_p[i:i + c], new_g[i:i + c])
            i += c

    # -- parameter plumbing ------------------------------------------------

    def named_params(self):
        out = []
        for tower_name in sorted(self.towers):
            for mod_name, mod in self.towers[tower_name].modules():
                for i, p in enumerate(mod.params()):
                    out.append((f"{tower_name}/{mod_name}/{i}", p))
        return out

    def param_arrays(self):
        return [p for _, p in self.named_params()]

    def grad_arrays(self):
        out = []
        for tower_name in sorted(self.towers):
            for _, mod in self.towers[tower_name].modules():
                out.extend(mod.grads())
        return out

    def zero_grads(self):
        self.flat_grads[...] = 0.0

    def num_params(self) -> int:
        return self.flat_params.size

    def copy_params_from(self, other: "Policy") -> None:
        self.flat_params[...] = other.flat_params

    def clone(self) -> "Policy":
        twin = Policy(self.structure, self.cfg, np.random.default_rng(0))
        twin.copy_params_from(self)
        return twin

    # -- forward surfaces --------------------------------------------------

    def forward_all(self, obs: Observation) -> dict:
        """All head outputs for one observation (1-d arrays) plus value."""
        batch = ObsBatch.single(obs)
        out = {}
        if self.structure is Structure.FLAT:
            outs, _ = self.towers["flat"].forward(batch)
            out["flat"] = outs["flat"][0]
            out["value"] = outs["value"][0]
            return out
        mgr, _ = self.towers["manager"].forward(batch)
        out["macro"] = mgr["macro"][0]
        out["value"] = mgr["value"][0]
        single, _ = self.towers["single"].forward(batch)
        out["single"] = single["key"][0]
        hot, _ = self.towers["hot"].forward(batch)
        out["hot"] = hot["key"][0]
        meta, _ = self.towers["meta"].forward(batch)
        out["meta"] = meta["key"][0]
        mouse, _ = self.towers["mouse"].forward(batch)
        out["region"] = mouse["region"][0]
        out["subregion"] = mouse["subregion"][0]
        out["interaction"] = mouse["interaction"][0]
        return out

    def _mouse_head_seq(self, batch: ObsBatch, region=None, subregion=None):
        """Mouse head outputs honoring the multi-step conditioning scheme.

        Plain structures read all three heads off one pass.  The multi-step
        variant re-encodes with the chosen region before scoring subregions,
        and with region+subregion before scoring interactions.
        """
        tower = self.towers["mouse"]
        outs, _ = tower.forward(batch)
        if self.structure is not Structure.MULTI_STEP_MOUSE:
            return outs["region"], outs["subregion"], outs["interaction"]
        q_region = outs["region"]
        r = np.argmax(q_region, axis=1) if region is None else region
        batch_r = batch.with_numeric_column(NUMERIC_REGION, r)
        outs_r, _ = tower.forward(batch_r)
        q_sub = outs_r["subregion"]
        s = np.argmax(q_sub, axis=1) if subregion is None else subregion
        batch_rs = batch_r.with_numeric_column(NUMERIC_SUBREGION, s)
        outs_rs, _ = tower.forward(batch_rs)
        return q_region, q_sub, outs_rs["interaction"]


@dataclass(frozen=True)
class ActionChoice:
    action: Action
    log_prob: float = 0.0
    value: float = 0.0


def greedy_action(policy: Policy, obs: Observation) -> Action:
    """Deterministic pick: argmax manager head, then argmax content head(s)."""
    batch = ObsBatch.single(obs)
    if policy.structure is Structure.FLAT:
        outs, _ = policy.towers["flat"].forward(batch)
        return unflatten(int(np.argmax(outs["flat"][0])))
    mgr, _ = policy.towers["manager"].forward(batch)
    macro = MACRO_ORDER[int(np.argmax(mgr["macro"][0]))]
    if macro is MacroAction.MOUSE:
        q_r, q_s, q_i = policy._mouse_head_seq(batch)
        return Action(macro, (int(np.argmax(q_r[0])), int(np.argmax(q_s[0])),
                              int(np.argmax(q_i[0]))))
    outs, _ = policy.towers[CONTENT_TOWER[macro]].forward(batch)
    return Action(macro, int(np.argmax(outs["key"][0])))


def sample_action(policy: Policy, obs: Observation, rng: np.random.Generator) -> ActionChoice:
    """Stochastic pick from the factored softmax distribution, with its
    log-probability and the state value (for PPO/A2C)."""
    batch = ObsBatch.single(obs)
    if policy.structure is Structure.FLAT:
        outs, _ = policy.towers["flat"].forward(batch)
        logp = log_softmax(outs["flat"])[0]
        idx = int(rng.choice(N_ACTIONS, p=softmax(outs["flat"])[0]))
        return ActionChoice(unflatten(idx), float(logp[idx]), float(outs["value"][0, 0]))
    mgr, _ = policy.towers["manager"].forward(batch)
    mgr_logp = log_softmax(mgr["macro"])[0]
    m_idx = int(rng.choice(len(MACRO_ORDER), p=softmax(mgr["macro"])[0]))
    macro = MACRO_ORDER[m_idx]
    total_logp = float(mgr_logp[m_idx])
    value = float(mgr["value"][0, 0])
    if macro is MacroAction.MOUSE:
        content = []
        if policy.structure is Structure.MULTI_STEP_MOUSE:
            tower = policy.towers["mouse"]
            cur = batch
            for head, col in (("region", NUMERIC_REGION), ("subregion", NUMERIC_SUBREGION),
                              ("interaction", None)):
                outs, _ = tower.forward(cur)
                logits = outs[head]
                idx = int(rng.choice(logits.shape[1], p=softmax(logits)[0]))
                total_logp += float(log_softmax(logits)[0, idx])
                content.append(idx)
                if col is not None:
                    cur = cur.with_numeric_column(col, np.array([idx]))
        else:
            outs, _ = policy.towers["mouse"].forward(batch)
            for head in ("region", "subregion", "interaction"):
                logits = outs[head]
                idx = int(rng.choice(logits.shape[1], p=softmax(logits)[0]))
                total_logp += float(log_softmax(logits)[0, idx])
                content.append(idx)
        return ActionChoice(Action(macro, tuple(content)), total_logp, value)
    outs, _ = policy.towers[CONTENT_TOWER[macro]].forward(batch)
    logits = outs["key"]
    idx = int(rng.choice(logits.shape[1], p=softmax(logits)[0]))
    total_logp += float(log_softmax(logits)[0, idx])
    return ActionChoice(Action(macro, idx), total_logp, value)


def uniform_action(rng: np.random.Generator) -> Action:
    """Uniform draw over all 822 actions."""
    return unflatten(int(rng.integers(0, N_ACTIONS)))


def select_action(policy: Policy, obs: Observation, rng: np.random.Generator,
                  epsilon: float = 0.0, stochastic: bool = False) -> ActionChoice:
    """Unified selection: epsilon-greedy for value-based agents, softmax
    sampling for policy-gradient agents."""
    if stochastic:
        return sample_action(policy, obs, rng)
    if epsilon > 0.0 and rng.random() < epsilon:
        return ActionChoice(uniform_action(rng))
    return ActionChoice(greedy_action(policy, obs))


def action_components(action: Action) -> tuple[int, tuple[int, ...]]:
    """(macro index, content index tuple) for batched updates."""
    m = MACRO_INDEX[action.macro]
    if action.macro is MacroAction.MOUSE:
        return m, tuple(action.content)
    return m, (action.content,)


def make_policy(structure: Structure, cfg: PolicyConfig, seed: int) -> Policy:
    if cfg.n_tasks < 1:
        raise ConfigError("policy needs at least one task id")
    return Policy(structure, cfg, np.random.default_rng(seed))
