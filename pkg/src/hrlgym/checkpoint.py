"""Checkpoint files: a JSON manifest line plus a flat float64 parameter blob.

The manifest echoes both configs and lists every array (name, shape) in blob
order: policy parameters, target-network parameters (value-based agents),
then Adam first/second moments.  Writing is byte-deterministic for identical
agents, which the reproducibility guarantees rely on.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .agents import Adam, Agent, AgentConfig, Algorithm, ReplayBuffer
from .errors import SchemaError
from .policy import PolicyConfig, Structure

FORMAT = 1


def _cfg_to_dict(cfg) -> dict:
    d = asdict(cfg)
    for k, v in d.items():
        if isinstance(v, (Algorithm, Structure)):
            d[k] = v.value
    return d


def _agent_cfg_from_dict(d: dict) -> AgentConfig:
    d = dict(d)
    d["algorithm"] = Algorithm(d["algorithm"])
    d["structure"] = Structure(d["structure"])
    return AgentConfig(**d)


def _named_arrays(agent: Agent):
    arrays = list(agent.policy.named_params())
    if agent.target is not None:
        arrays += [(f"target/{name}", p) for name, p in agent.target.named_params()]
    arrays += [(f"adam_m/{i}", m) for i, m in enumerate(agent.opt.m)]
    arrays += [(f"adam_v/{i}", v) for i, v in enumerate(agent.opt.v)]
    return arrays


def save_checkpoint(path, agent: Agent, extra: dict | None = None) -> None:
    arrays = _named_arrays(agent)
    header = {
        "format": FORMAT,
        "agent_cfg": _cfg_to_dict(agent.cfg),
        "policy_cfg": _cfg_to_dict(agent.policy_cfg),
        "episode": agent.episode,
        "global_step": agent.global_step,
        "adam_t": agent.opt.t,
        "arrays": [[name, list(p.shape)] for name, p in arrays],
        "extra": extra or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        for _, p in arrays:
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[Agent, dict]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"not a checkpoint file: {exc}") from None
    if header.get("format") != FORMAT:
        raise SchemaError(f"unsupported checkpoint format {header.get('format')!r}")
    agent_cfg = _agent_cfg_from_dict(header["agent_cfg"])
    policy_cfg = PolicyConfig(**header["policy_cfg"])
    agent = Agent(agent_cfg, policy_cfg, seed=0)
    agent.episode = header["episode"]
    agent.global_step = header["global_step"]
    agent.opt.t = header["adam_t"]
    arrays = _named_arrays(agent)
    names = [name for name, _ in arrays]
    if names != [name for name, _ in header["arrays"]]:
        raise SchemaError("checkpoint manifest does not match the reconstructed agent")
    offset = 0
    for _, p in arrays:
        n = p.size * 8
        chunk = np.frombuffer(blob[offset:offset + n], dtype="<f8")
        if chunk.size != p.size:
            raise SchemaError("checkpoint blob truncated")
        p[...] = chunk.reshape(p.shape)
        offset += n
    if agent.cfg.algorithm is Algorithm.DQN and agent.replay is None:
        agent.replay = ReplayBuffer(agent.cfg.replay_capacity)
    return agent, header
