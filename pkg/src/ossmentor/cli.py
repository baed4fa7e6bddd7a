"""Command-line entry points.

Subcommands: ingest, synth, fetch, weights, train, and evaluate
(table | sweep | intervene | case).
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from datetime import date
from pathlib import Path

from . import fetch as fetch_mod
from . import harness
from .ingest import aggregate_monthly, open_event_file, parse_events, save_dataset
from .policy import save_checkpoint
from .schema import DEFAULT_PARENT_MAP, DEFAULT_SCHEMA, load_parent_map, load_schema
from .synth import SynthConfig, generate_synthetic, load_synth_config
from .trainer import train
from .weighting import compute_weights, load_weights, save_weights
from .ingest import load_dataset


def _cmd_ingest(args) -> int:
    schema = load_schema(args.schema) if args.schema else list(DEFAULT_SCHEMA)
    events = []
    skipped_malformed = skipped_unmapped = 0
    paths = sorted(glob.glob(args.input))
    if not paths:
        print(f"no files match {args.input!r}", file=sys.stderr)
        return 1
    for path in paths:
        with open_event_file(path) as f:
            result = parse_events(f, schema)
        events.extend(result.events)
        skipped_malformed += result.skipped_malformed
        skipped_unmapped += result.skipped_unmapped
    dataset = aggregate_monthly(events, args.project, schema)
    save_dataset(dataset, args.out)
    print(
        f"{args.project}: {len(events)} events, {len(dataset.trajectories)} contributors "
        f"({skipped_malformed} malformed, {skipped_unmapped} unmapped lines skipped) "
        f"-> {args.out}"
    )
    return 0


def _cmd_synth(args) -> int:
    config = load_synth_config(args.config) if args.config else SynthConfig()
    dataset = generate_synthetic(config, seed=args.seed)
    save_dataset(dataset, args.out)
    print(
        f"synthetic dataset: {config.n_contributors} contributors x "
        f"{config.horizon} months (seed {args.seed}) -> {args.out}"
    )
    return 0


def _cmd_fetch(args) -> int:
    report = fetch_mod.fetch_archive(
        date.fromisoformat(getattr(args, "from")),
        date.fromisoformat(args.to),
        args.dest,
    )
    print(f"{len(report.paths)} files present ({len(report.downloaded)} downloaded)")
    for stamp, err in report.errors.items():
        print(f"  failed {stamp}: {err}", file=sys.stderr)
    return 1 if report.errors else 0


def _cmd_weights(args) -> int:
    dataset = load_dataset(args.dataset)
    if args.parents:
        parents = load_parent_map(args.parents)
    else:
        parents = {
            c: p for c, p in DEFAULT_PARENT_MAP.items()
            if c in dataset.schema and p in dataset.schema
        }
    result = compute_weights(dataset, parents, bins=args.bins)
    save_weights(result, args.out)
    for name, w, h in zip(result.schema, result.weights, result.entropies):
        print(f"  {name}: weight={w:.4f} entropy={h:.4f} bits")
    print(f"-> {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = harness.load_experiment(args.config)
    result = train(
        cfg.dataset, cfg.weights.weights, cfg.train, cfg.match_cfg, cfg.reward_params
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(result.actor, result.critic, out_dir / "checkpoint.json")
    harness.write_csv(out_dir / "learning_curve.csv", result.curve)
    final = harness.final_contribution(result)
    print(f"trained {cfg.train.episodes} episodes; final mean step contribution "
          f"{final:.4f} -> {out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = harness.load_experiment(args.config)
    if args.what == "table":
        report = harness.run_contribution_table(cfg)
    elif args.what == "sweep":
        report = harness.run_epsilon_sweep(cfg)
    elif args.what == "intervene":
        report = harness.run_intervention(cfg)
    elif args.what == "case":
        if not args.contributor:
            print("evaluate case requires --contributor", file=sys.stderr)
            return 1
        report = harness.export_case_study(cfg, args.contributor, args.horizon)
    else:  # pragma: no cover - argparse restricts choices
        raise AssertionError(args.what)
    written = harness.write_report(report, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ossmentor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="aggregate NDJSON event files into a dataset")
    p.add_argument("--input", required=True, help="glob of NDJSON(.gz) files")
    p.add_argument("--project", required=True)
    p.add_argument("--schema", help="JSON list of dimension names")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="JSON SynthConfig overrides")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fetch", help="download hourly GitHub-Archive files")
    p.add_argument("--from", required=True, metavar="DATE")
    p.add_argument("--to", required=True, metavar="DATE")
    p.add_argument("--dest", required=True)
    p.set_defaults(func=_cmd_fetch)

    p = sub.add_parser("weights", help="compute entropy weights for a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--parents", help="JSON child->parent map")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("train", help="train a policy from an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="run an experiment protocol")
    p.add_argument("what", choices=["table", "sweep", "intervene", "case"])
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--contributor", help="contributor id for case studies")
    p.add_argument("--horizon", type=int, help="case-study horizon override")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
