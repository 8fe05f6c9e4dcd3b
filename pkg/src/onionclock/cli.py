"""Command-line entry point.

Subcommands:
  capacity     closed-form capacity values and simulated window statistics
  fp-rate      clock accuracy (false positive / negative rates) over workloads
  merge-bench  clock byte-size over time and accuracy per merge strategy
  kvsim        run a key-value store scenario file, emit report CSV and log

All output is deterministic for fixed flags and seeds: rows are computed in
a fixed order and contain no timestamps.  Exit codes: 0 success, 2 bad
usage, 3 --check assertion failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dobc import (
    DobcConfig,
    capacity_stats,
    is_perfect_decay,
    serialize_clock,
    window_capacity,
)
from .hashing import HashConfig
from .kvsim import parse_scenario, run_scenario
from .objects import create, default_registry, mutate
from .workload import FpReport, WorkloadSpec, generate_workload, measure_accuracy

CHECK_FAILED = 3


def _int_list(flag: str):
    def parse(text: str) -> tuple[int, ...]:
        try:
            values = tuple(int(x) for x in text.split(",") if x.strip() != "")
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a comma-separated integer list")
        if not values:
            raise argparse.ArgumentTypeError(f"{flag} expects at least one value")
        return values

    return parse


def _clock_config(args) -> DobcConfig:
    try:
        return DobcConfig(
            HashConfig(args.n, args.m, getattr(args, "hash_seed", 0)),
            args.layers,
            args.widths,
            decay_mode=args.decay,
            merge_strategy=getattr(args, "strategy", "maxima"),
            hybrid_tracks=getattr(args, "p", 2),
        )
    except ValueError as exc:
        raise UsageError(f"--widths/--layers: {exc}") from exc


class UsageError(Exception):
    pass


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_clock_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=256, help="counters per filter")
    p.add_argument("--m", type=int, default=4, help="hash functions per update")
    p.add_argument("--layers", type=_int_list("--layers"), default=(4, 2, 1),
                   help="slots per layer, e.g. 4,2,1")
    p.add_argument("--widths", type=_int_list("--widths"), default=(1, 2, 3),
                   help="counter bit widths per layer, e.g. 1,2,3")
    p.add_argument("--decay", choices=("complete", "incomplete"), default="complete")
    p.add_argument("--hash-seed", type=int, default=0, dest="hash_seed")
    p.add_argument("--out", type=str, default=None, help="write CSV here instead of stdout")
    p.add_argument("--check", action="store_true",
                   help="assert the subcommand's invariants; exit 3 on violation")


def cmd_capacity(args) -> int:
    cfg = _clock_config(args)
    try:
        report = capacity_stats(cfg, args.ticks)
    except ValueError as exc:
        raise UsageError(f"--ticks: {exc}") from exc
    rows = [
        "n,m,layers,widths,decay,ticks,gamma_formula,k_formula,"
        "window_min,window_mean,window_max,cycle_length,perfect_decay"
    ]
    layers = "|".join(map(str, cfg.slots_per_layer))
    widths = "|".join(map(str, cfg.bit_widths))
    rows.append(
        f"{cfg.hash.n},{cfg.hash.m},{layers},{widths},{cfg.decay_mode},{args.ticks},"
        f"{report.gamma_formula},{report.k_formula},{report.window_min},"
        f"{report.window_mean},{report.window_max},{report.cycle_length},"
        f"{str(is_perfect_decay(cfg)).lower()}"
    )
    _emit(rows, args.out)
    if args.check:
        if not report.window_min <= report.window_mean <= report.window_max:
            print("check failed: window ordering", file=sys.stderr)
            return CHECK_FAILED
    return 0


def cmd_fp_rate(args) -> int:
    rows = [FpReport.csv_header()]
    failures = []
    for seed in args.seeds:
        spec = WorkloadSpec(
            nodes=args.nodes,
            events=args.events,
            merge_prob=args.merge_prob,
            fork_prob=args.fork_prob,
            seed=seed,
        )
        cfg = _clock_config(args)
        workload = generate_workload(spec, cfg)
        for kind in args.kinds:
            report = measure_accuracy(workload, kind)
            rows.append(report.csv_row(seed, kind, args.n, args.m))
            if kind in ("dobc", "bc") and report.false_negative_count:
                failures.append(f"{kind} seed {seed}: in-window false negatives")
    _emit(rows, args.out)
    if args.check and failures:
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        return CHECK_FAILED
    return 0


def cmd_merge_bench(args) -> int:
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    registry = default_registry()
    derive = registry.by_name("derive").fn_id
    mix = registry.by_name("mix_merge").fn_id
    rows = ["strategy,p,seed,step,clock_bytes,fp_rate"]
    failures = []
    for seed in args.seeds:
        cfg = _clock_config(args)
        wl_cfg = cfg
        spec = WorkloadSpec(nodes=4, events=args.events, merge_prob=0.25,
                            fork_prob=0.15, seed=seed)
        fp = measure_accuracy(generate_workload(spec, wl_cfg), "dobc").fp_rate

        # Replica-style bench: two lineages fork from a shared object and
        # reconcile by merging every round.
        base = create(b"bench:%d" % seed, cfg)
        warm = window_capacity(cfg) + 4
        for i in range(warm):
            base = mutate(registry, derive, (base,), b"warm:%d" % i)
        baseline = len(serialize_clock(base.clock))
        step = 0
        sizes = []
        a = b = base
        for rnd in range(args.rounds):
            a = mutate(registry, derive, (a,), b"a:%d" % rnd)
            b = mutate(registry, derive, (b,), b"b:%d" % rnd)
            merged = mutate(registry, mix, (a, b), b"m:%d" % rnd)
            sizes.append(len(serialize_clock(merged.clock)))
            rows.append(f"{args.strategy},{args.p},{seed},{step},{sizes[-1]},{fp:.6f}")
            step += 1
            a = b = merged
        # post-merge decay back toward a single track
        tail = merged
        for i in range(window_capacity(cfg) + 2):
            tail = mutate(registry, derive, (tail,), b"tail:%d" % i)
            rows.append(
                f"{args.strategy},{args.p},{seed},{step},{len(serialize_clock(tail.clock))},{fp:.6f}"
            )
            step += 1
        if args.check:
            final = len(serialize_clock(tail.clock))
            if args.strategy == "maxima" and any(s != baseline for s in sizes):
                failures.append(f"seed {seed}: maxima size varies")
            if final != baseline:
                failures.append(f"seed {seed}: size did not return to baseline")
    _emit(rows, args.out)
    if args.check and failures:
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        return CHECK_FAILED
    return 0


def cmd_kvsim(args) -> int:
    try:
        spec = parse_scenario(args.scenario)
    except (ValueError, KeyError, OSError) as exc:
        raise UsageError(f"scenario: {exc}") from exc
    rows = ["seed,converged,rounds_to_converge,messages,rejected_count,divergence_keys"]
    failures = []
    for seed in args.seeds if args.seeds else (spec.seed,):
        run_spec = spec if seed == spec.seed else _respec(spec, seed)
        report, world = run_scenario(run_spec)
        rows.append(report.csv_row(seed))
        if args.log:
            Path(args.log).write_text("\n".join(world.log) + "\n")
        if args.check and not report.converged:
            failures.append(f"seed {seed}: divergent keys {report.divergence_keys}")
    _emit(rows, args.out)
    if args.check and failures:
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        return CHECK_FAILED
    return 0


def _respec(spec, seed):
    from dataclasses import replace

    return replace(spec, seed=seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onionclock",
        description="Layered decaying Bloom clock experiments and key-value store simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity formulas and simulated window statistics")
    _add_clock_flags(p)
    p.add_argument("--ticks", type=int, default=650, help="transitions to simulate")
    p.set_defaults(fn=cmd_capacity)

    p = sub.add_parser("fp-rate", help="accuracy of each clock construct over random workloads")
    _add_clock_flags(p)
    p.add_argument("--seeds", type=_int_list("--seeds"), default=(1,))
    p.add_argument("--events", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=4)
    p.add_argument("--merge-prob", type=float, default=0.1, dest="merge_prob")
    p.add_argument("--fork-prob", type=float, default=0.2, dest="fork_prob")
    p.add_argument("--kinds", type=lambda s: tuple(s.split(",")), default=("dobc", "bc", "vc"))
    p.set_defaults(fn=cmd_fp_rate)

    p = sub.add_parser("merge-bench", help="clock size over time per merge strategy")
    _add_clock_flags(p)
    p.add_argument("--strategy", choices=("extending", "maxima", "hybrid"), default="maxima")
    p.add_argument("--p", type=int, default=2, help="track budget for hybrid merges")
    p.add_argument("--seeds", type=_int_list("--seeds"), default=(1,))
    p.add_argument("--rounds", type=int, default=6)
    p.add_argument("--events", type=int, default=400)
    p.set_defaults(fn=cmd_merge_bench)

    p = sub.add_parser("kvsim", help="run a key-value store scenario file")
    p.add_argument("scenario", type=str, help="scenario .ini path")
    p.add_argument("--seeds", type=_int_list("--seeds"), default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--log", type=str, default=None, help="write the per-event log here")
    p.add_argument("--check", action="store_true")
    p.set_defaults(fn=cmd_kvsim)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
