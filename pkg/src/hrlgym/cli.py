"""Command-line surface: generate / validate / train / eval / plot.

Every command is deterministic given its flags and seed.  Seeds resolve as
flag > config file > HRLGYM_SEED environment variable > default.  Exit
codes: 0 success, 1 domain failure (invalid tasks, failed eval), 2 usage or
I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .actions import ActionRegistry
from .agents import Agent, Algorithm, evaluate, oracle_records, train
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig
from .curriculum import TaskSampler
from .encoder import ObservationBuilder
from .errors import ConfigError, HrlGymError, SchemaError
from .metrics import aggregate, export_csv, export_report_csv, format_report
from .plotting import render_curve_svg
from .policy import Structure
from .tasks import generate_synthetic_suite, load_suite, save_suite, validate_suite_file

SEED_ENV_VAR = "HRLGYM_SEED"


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    env_seed = _env_seed()
    if env_seed is not None:
        cfg.set("run.seed", env_seed)
    if getattr(args, "config", None):
        cfg.apply_file(args.config)
    for key, value in _flag_overrides(args):
        cfg.set(key, value)
    return cfg


def _flag_overrides(args):
    pairs = []
    mapping = {
        "seed": "run.seed",
        "episodes": "run.episodes",
        "out": "run.out_dir",
        "suite": "run.suite",
        "desk_scale": "run.desk_scale",
        "algo": "agent.algorithm",
        "structure": "agent.structure",
    }
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None and value is not False:
            pairs.append((key, value if isinstance(value, str) else value))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs


def cmd_generate(args) -> int:
    registry = ActionRegistry.default()
    suite = generate_synthetic_suite(args.seed, args.simple, args.hard, registry)
    save_suite(suite, args.output, registry)
    print(f"wrote {len(suite)} tasks ({suite.n_simple} simple, {suite.n_hard} hard) "
          f"to {args.output}")
    if suite.n_hard == 0:
        print("warning: suite has no hard tasks; curriculum mode will fall back to random")
    return 0


def cmd_validate(args) -> int:
    registry = ActionRegistry.default()
    reports = validate_suite_file(args.suite, registry)
    bad = [r for r in reports if not r.ok]
    for report in bad:
        for issue in report.issues:
            print(f"task {report.task_id}: {issue}")
    print(f"{len(reports) - len(bad)}/{len(reports)} tasks valid")
    return 1 if bad else 0


def _load_or_generate_suite(cfg: RunConfig, registry: ActionRegistry, out_dir: Path):
    run = cfg.run_settings()
    if run.suite:
        return load_suite(run.suite, registry)
    suite = generate_synthetic_suite(run.gen_seed, run.gen_simple, run.gen_hard, registry)
    save_suite(suite, out_dir / "suite.txt", registry)
    return suite


def cmd_train(args) -> int:
    cfg = _build_config(args)
    run = cfg.run_settings()
    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    registry = ActionRegistry.default()
    suite = _load_or_generate_suite(cfg, registry, out_dir)
    builder = ObservationBuilder(suite, cfg.encoder_config())
    reward_cfg = cfg.reward_config()
    sampler = TaskSampler(suite, cfg.curriculum_config(),
                          np.random.default_rng([run.seed, 7]))
    if args.resume:
        agent, header = load_checkpoint(args.resume)
        print(f"resumed from {args.resume} at episode {agent.episode}")
    else:
        agent = Agent(cfg.agent_config(), cfg.policy_config(len(suite)), run.seed)

    eval_rows = []

    def on_episode(ep, record):
        if run.eval_interval and (ep + 1) % run.eval_interval == 0:
            report = aggregate(evaluate(agent.policy, suite, builder, reward_cfg,
                                        run.max_steps))
            eval_rows.append((ep + 1, report.overall.mean_norm_reward,
                              report.overall.f1, report.overall.success_rate))

    records = train(agent, suite, builder, sampler, run.episodes, run.seed,
                    reward_config=reward_cfg, max_steps=run.max_steps,
                    on_episode=on_episode)
    export_csv(records, out_dir / "train_episodes.csv")
    if eval_rows:
        with open(out_dir / "eval_rows.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["episode", "mean_norm_reward", "f1", "success_rate"])
            for row in eval_rows:
                writer.writerow([row[0]] + [f"{v:.12g}" for v in row[1:]])
    save_checkpoint(out_dir / "checkpoint.bin", agent,
                    extra={"encoder_seed": run.seed, "max_steps": run.max_steps})
    cfg.dump(out_dir / "effective.cfg")
    tail = records[-min(100, len(records)):]
    mean_tail = sum(r.norm_reward for r in tail) / len(tail)
    print(f"trained {len(records)} episodes; "
          f"mean normalized reward over the last {len(tail)}: {mean_tail:.4f}")
    print(f"outputs in {out_dir}")
    return 0


def cmd_eval(args) -> int:
    cfg = _build_config(args)
    run = cfg.run_settings()
    registry = ActionRegistry.default()
    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suite = _load_or_generate_suite(cfg, registry, out_dir)
    if args.oracle:
        records = oracle_records(suite, cfg.reward_config(), run.max_steps)
    else:
        if not args.checkpoint:
            print("eval needs --checkpoint (or --oracle)", file=sys.stderr)
            return 2
        agent, header = load_checkpoint(args.checkpoint)
        extra = header.get("extra", {})
        enc = cfg.encoder_config()
        if "encoder_seed" in extra:
            from dataclasses import replace

            enc = replace(enc, seed=extra["encoder_seed"],
                          embed_dim=agent.policy_cfg.embed_dim,
                          state_size=agent.policy_cfg.state_size)
        builder = ObservationBuilder(suite, enc)
        records = evaluate(agent.policy, suite, builder, cfg.reward_config(),
                           run.max_steps)
    report = aggregate(records)
    print(format_report(report))
    export_csv(records, out_dir / "eval_episodes.csv")
    export_report_csv(report, out_dir / "eval_report.csv")
    return 0


def cmd_plot(args) -> int:
    values = []
    with open(args.csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "norm_reward" not in reader.fieldnames:
            raise SchemaError(f"{args.csv}: missing norm_reward column")
        for i, row in enumerate(reader, start=2):
            try:
                values.append(float(row["norm_reward"]))
            except (TypeError, ValueError):
                raise SchemaError(f"{args.csv}: bad norm_reward on row {i}") from None
    if not values:
        raise SchemaError(f"{args.csv}: no data rows")
    svg = render_curve_svg(values, window=args.window)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.output} ({len(values)} episodes, window {args.window})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrlgym",
                                     description="Scripted GUI-control RL workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic task suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simple", type=int, default=90)
    p.add_argument("--hard", type=int, default=45)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check every task in a suite file")
    p.add_argument("suite")
    p.set_defaults(func=cmd_validate)

    for name, fn in (("train", cmd_train), ("eval", cmd_eval)):
        p = sub.add_parser(name, help=f"{name} an agent")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--suite", help="task suite file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--desk-scale", dest="desk_scale", action="store_true",
                       default=None, help="compact network dims")
        if name == "train":
            p.add_argument("--episodes", type=int)
            p.add_argument("--algo", choices=[a.value for a in Algorithm])
            p.add_argument("--structure", choices=[s.value for s in Structure])
            p.add_argument("--resume", help="checkpoint to continue from")
        else:
            p.add_argument("--checkpoint")
            p.add_argument("--oracle", action="store_true",
                           help="score ground-truth replays instead of a policy")
        p.set_defaults(func=fn)

    p = sub.add_parser("plot", help="render a learning curve SVG from a training CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--window", type=int, default=100)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, SchemaError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HrlGymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
