"""Run configuration: dotted key=value files, flag overrides, exact dumps.

Precedence is flags > file > defaults.  Every key's default equals the
owning module's dataclass default, unknown keys are rejected, and a dumped
effective-config file reproduces the run byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .agents import AgentConfig, Algorithm
from .curriculum import CurriculumConfig, SamplingMode
from .encoder import EncoderConfig
from .errors import ConfigError
from .policy import PolicyConfig, Structure
from .rewards import RewardConfig


@dataclass
class RunSettings:
    seed: int = 0
    episodes: int = 2000
    max_steps: int = 100
    out_dir: str = "runs/latest"
    eval_interval: int = 0     # episodes between periodic eval rows; 0 disables
    suite: str = ""            # suite file path; empty generates one
    gen_simple: int = 90
    gen_hard: int = 45
    gen_seed: int = 0
    plot_window: int = 100
    desk_scale: bool = False   # shrink the policy dims for laptop budgets


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_alpha(text: str):
    if text.strip().lower() in ("auto", "none"):
        return None
    return float(text)


_POLICY_KEYS = ("vision_out", "id_dim", "desc_out", "numeric_hidden", "numeric_out",
                "trunk_width", "trunk_depth")


def _build_schema():
    """key -> (section, field, parser, default)."""
    schema = {}

    def add(section, obj, names, parsers=None):
        for f in fields(obj):
            if f.name not in names:
                continue
            default = getattr(obj, f.name)
            parser = (parsers or {}).get(f.name)
            if parser is None:
                if isinstance(default, bool):
                    parser = _parse_bool
                elif isinstance(default, int):
                    parser = int
                elif isinstance(default, float):
                    parser = float
                else:
                    parser = str
            schema[f"{section}.{f.name}"] = (section, f.name, parser, default)

    run = RunSettings()
    add("run", run, [f.name for f in fields(run)])
    reward = RewardConfig()
    add("reward", reward, [f.name for f in fields(reward)])
    agent = AgentConfig()
    agent_parsers = {"algorithm": lambda s: Algorithm(s), "structure": lambda s: Structure(s)}
    add("agent", agent, [f.name for f in fields(agent)], agent_parsers)
    schema["agent.algorithm"] = ("agent", "algorithm", agent_parsers["algorithm"],
                                 Algorithm.DQN)
    schema["agent.structure"] = ("agent", "structure", agent_parsers["structure"],
                                 Structure.HIERARCHICAL)
    policy = PolicyConfig(n_tasks=1)
    add("policy", policy, _POLICY_KEYS)
    encoder = EncoderConfig()
    add("encoder", encoder, ["embed_dim", "state_size"])
    schema["curriculum.mode"] = ("curriculum", "mode",
                                 lambda s: SamplingMode(s), SamplingMode.CURRICULUM)
    schema["curriculum.alpha"] = ("curriculum", "alpha", _parse_alpha, None)
    schema["curriculum.total_episodes"] = ("curriculum", "total_episodes", int, 0)
    schema["curriculum.failure_bias"] = ("curriculum", "failure_bias", _parse_bool, False)
    return schema


_SCHEMA = _build_schema()


class RunConfig:
    """All knobs for one run, addressable by dotted key."""

    def __init__(self):
        self._values = {key: default for key, (_, _, _, default) in _SCHEMA.items()}

    def set(self, key: str, raw) -> None:
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        _, _, parser, _ = _SCHEMA[key]
        try:
            value = parser(raw) if isinstance(raw, str) else raw
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        self._values[key] = value

    def get(self, key: str):
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        return self._values[key]

    # -- file I/O ------------------------------------------------------------

    @classmethod
    def from_file(cls, path, overrides=None) -> "RunConfig":
        cfg = cls()
        cfg.apply_file(path)
        for key, raw in overrides or []:
            cfg.set(key, raw)
        return cfg

    def apply_file(self, path) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
                key, _, value = line.partition("=")
                try:
                    self.set(key.strip(), value.strip())
                except ConfigError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from None

    def dump(self, path) -> None:
        """Write every key (sorted) with its effective value."""
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self._values):
                fh.write(f"{key} = {self._format(self._values[key])}\n")

    @staticmethod
    def _format(value) -> str:
        if value is None:
            return "auto"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (Algorithm, Structure, SamplingMode)):
            return value.value
        if isinstance(value, float):
            return f"{value:.12g}"
        return str(value)

    # -- typed views ----------------------------------------------------------

    def _section(self, section: str) -> dict:
        return {field: self._values[key]
                for key, (sec, field, _, _) in _SCHEMA.items() if sec == section}

    def run_settings(self) -> RunSettings:
        return RunSettings(**self._section("run"))

    def reward_config(self) -> RewardConfig:
        return RewardConfig(**self._section("reward"))

    def agent_config(self) -> AgentConfig:
        return AgentConfig(**self._section("agent"))

    def encoder_config(self) -> EncoderConfig:
        sec = self._section("encoder")
        run = self.run_settings()
        return EncoderConfig(embed_dim=sec["embed_dim"], state_size=sec["state_size"],
                             seed=run.seed, max_steps=run.max_steps)

    def policy_config(self, n_tasks: int) -> PolicyConfig:
        sec = self._section("policy")
        enc = self.encoder_config()
        cfg = PolicyConfig(n_tasks=n_tasks, embed_dim=enc.embed_dim,
                           state_size=enc.state_size, **sec)
        if self.run_settings().desk_scale:
            cfg = cfg.desk_scale()
        return cfg

    def curriculum_config(self) -> CurriculumConfig:
        sec = self._section("curriculum")
        total = sec["total_episodes"] or self.run_settings().episodes
        return CurriculumConfig(total_episodes=total, alpha=sec["alpha"],
                                mode=sec["mode"], failure_bias=sec["failure_bias"])
