"""Command-line entry point.

Subcommands: conjecture-inv (bounds on a numeric target), conjecture-prop
(conditions for a boolean target), mixed (per-class bounds + conditions for
a categorical class), bench (benchmark dataset generation).

Every run writes conjectures.txt, report.json, manifest.json and, for
bound runs, envelope.csv into --out.  report.json carries no wall-clock
fields, so complexity-budgeted runs are byte-reproducible; timing lives in
manifest.json.

Exit codes: 0 success, 2 configuration error, 3 input/parse error,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .benchmarks import (
    BenchmarkSpec,
    gen_gravity,
    gen_interaction,
    gen_nguyen,
    gen_noise_columns,
)
from .data import (
    AugmentationSpec,
    ConstantColumn,
    Dataset,
    inject,
    load_csv,
    load_whitespace,
    save_csv,
)
from .engine import RunConfig, run_inv
from .errors import ConfigurationError, DalmatianError, InputError, ParseError
from .exprs import default_registry, preset_registry
from .metrics import build_inv_report, build_prop_report, envelope_report
from .mixed import MixedConfig, build_property_dataset, run_mixed
from .properties import NECESSARY, PropConfig, SUFFICIENT, run_prop

_INV_DIRECTIONS = ("upper", "lower")
_PROP_DIRECTIONS = (SUFFICIENT, NECESSARY)


def _add_io_flags(p: argparse.ArgumentParser, test: bool = True):
    p.add_argument("--data", required=True, help="training data file")
    if test:
        p.add_argument("--test", help="held-out data file for metrics")
    p.add_argument("--format", choices=("csv", "whitespace"), default="csv")
    p.add_argument("--constant", action="append", default=[], metavar="NAME=VALUE",
                   help="inject a constant column (repeatable)")
    p.add_argument("--augment", metavar="SPECFILE",
                   help="JSON file of derived/constant columns to inject")
    p.add_argument("--out", default="out", help="output directory")


def _add_search_flags(p: argparse.ArgumentParser):
    p.add_argument("--operators", help="comma-separated operator names")
    p.add_argument("--operator-preset", choices=("basic", "trig", "full"),
                   help="named operator subset")
    p.add_argument("--skips", type=float, default=1.0,
                   help="max missing-value fraction for an invariant to stay eligible")
    p.add_argument("--time-limit", type=float, help="seconds before the search stops")
    p.add_argument("--max-complexity", type=int, default=5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dalmatian",
        description="Conjecture nonlinear bounds and boolean conditions from tabular data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conjecture-inv", help="bounds on a numeric target")
    _add_io_flags(p)
    _add_search_flags(p)
    p.add_argument("--target", required=True)
    p.add_argument("--direction", choices=_INV_DIRECTIONS, default="upper")
    p.set_defaults(func=cmd_conjecture_inv)

    p = sub.add_parser("conjecture-prop", help="conditions for a boolean target")
    _add_io_flags(p)
    _add_search_flags(p)
    p.add_argument("--target", required=True)
    p.add_argument("--direction", choices=_PROP_DIRECTIONS, default=SUFFICIENT)
    p.set_defaults(func=cmd_conjecture_prop)

    p = sub.add_parser("mixed", help="per-class bounds plus per-class conditions")
    _add_io_flags(p)
    _add_search_flags(p)
    p.add_argument("--class", dest="class_feature", required=True, metavar="NAME")
    p.set_defaults(func=cmd_mixed)

    p = sub.add_parser("bench", help="generate benchmark datasets")
    p.add_argument("--name", required=True,
                   choices=("gravity", "gravity-noise", "nguyen", "interaction"))
    p.add_argument("--instance", type=int,
                   help="nguyen instance 1..12, or noise-column count for gravity-noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_bench)
    return parser


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load(args, path: str) -> Dataset:
    if args.format == "whitespace":
        ds = load_whitespace(path)
    else:
        ds = load_csv(path)
    constants = []
    for item in args.constant:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--constant expects NAME=VALUE, got {item!r}")
        try:
            constants.append(ConstantColumn(name, float(value)))
        except ValueError:
            raise ConfigurationError(f"--constant value {value!r} is not a number") from None
    if constants:
        ds = inject(ds, AugmentationSpec(constants=tuple(constants)))
    if args.augment:
        try:
            with open(args.augment, encoding="utf-8") as fh:
                spec = AugmentationSpec.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"cannot read augmentation spec {args.augment}: {exc}") from None
        ds = inject(ds, spec)
    return ds


def _registry(args):
    if args.operators and args.operator_preset:
        raise ConfigurationError("give either --operators or --operator-preset, not both")
    if args.operators:
        names = [n.strip() for n in args.operators.split(",") if n.strip()]
        return default_registry().subset(names)
    if args.operator_preset:
        return preset_registry(args.operator_preset)
    return default_registry()


def _manifest(args, extra: dict, wall_time: float) -> dict:
    options = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    digests = {}
    for key in ("data", "test"):
        path = options.get(key)
        if path:
            digests[key] = _sha256(path)
    return {
        "command": args.command,
        "options": options,
        "input_digests": digests,
        "wall_time_s": wall_time,
        "version": __version__,
        **extra,
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_conjecture_inv(args) -> int:
    started = time.monotonic()
    train = _load(args, args.data)
    test = _load(args, args.test) if args.test else None
    registry = _registry(args)
    config = RunConfig(
        direction=args.direction,
        max_complexity=args.max_complexity,
        time_limit=args.time_limit,
        skips=args.skips,
    )
    result = run_inv(train, args.target, registry, config, threads=args.threads)
    out = _outdir(args)

    symbol = "<=" if args.direction == "upper" else ">="
    lines = [f"{args.target} {symbol} {c.expression}" for c in result.conjectures]
    (out / "conjectures.txt").write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")

    report = build_inv_report(result, train, test)
    _write_json(out / "report.json", report)

    with open(out / "envelope.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["example", "target", "envelope", "gap", "best"])
        if result.conjectures:
            target_vals = train.column(args.target).values
            for row in envelope_report(result.conjectures, target_vals, args.direction):
                writer.writerow([row.example, repr(row.target), repr(row.envelope),
                                 repr(row.gap), row.best])

    manifest = _manifest(
        args,
        {
            "engine_config": vars(config),
            "stop_reason": result.stop_reason,
            "n_evaluated": result.n_evaluated,
            "n_valid": result.n_valid,
        },
        time.monotonic() - started,
    )
    _write_json(out / "manifest.json", manifest)
    for line in lines:
        print(line)
    return 0


def cmd_conjecture_prop(args) -> int:
    started = time.monotonic()
    train = _load(args, args.data)
    test = _load(args, args.test) if args.test else None
    config = PropConfig(
        direction=args.direction,
        max_complexity=args.max_complexity,
        time_limit=args.time_limit,
    )
    result = run_prop(train, args.target, config)
    out = _outdir(args)

    lines = []
    for c in result.conjectures:
        if args.direction == SUFFICIENT:
            lines.append(f"{c.expression} -> {args.target}")
        else:
            lines.append(f"{args.target} -> ~({c.expression})")
    (out / "conjectures.txt").write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")

    report = build_prop_report(result, test if test is not None else train)
    report["metrics_data"] = "test" if test is not None else "train"
    _write_json(out / "report.json", report)

    manifest = _manifest(
        args,
        {
            "engine_config": vars(config),
            "stop_reason": result.stop_reason,
            "n_evaluated": result.n_evaluated,
            "n_valid": result.n_valid,
        },
        time.monotonic() - started,
    )
    _write_json(out / "manifest.json", manifest)
    for line in lines:
        print(line)
    return 0


def cmd_mixed(args) -> int:
    started = time.monotonic()
    train = _load(args, args.data)
    test = _load(args, args.test) if args.test else None
    registry = _registry(args)
    config = MixedConfig(
        max_complexity=args.max_complexity,
        prop_max_complexity=args.max_complexity,
        time_limit=args.time_limit,
        skips=args.skips,
    )
    result = run_mixed(train, args.class_feature, registry, config, threads=args.threads)
    out = _outdir(args)

    lines = []
    levels_report = {}
    test_props = None
    if test is not None:
        test_props = build_property_dataset(
            test, args.class_feature, result.levels, result.derived
        )
    for level in result.levels:
        entry = {}
        for direction, runs in (("sufficient", result.sufficient), ("necessary", result.necessary)):
            if level not in runs:
                continue
            run = runs[level]
            eval_data = test_props if test_props is not None else result.property_dataset
            entry[direction] = build_prop_report(run, eval_data)
            for c in run.conjectures:
                target = f"{args.class_feature}__{level}"
                if direction == "sufficient":
                    lines.append(f"[{level}] {c.expression} -> {target}")
                else:
                    lines.append(f"[{level}] {target} -> ~({c.expression})")
        levels_report[level] = entry
    (out / "conjectures.txt").write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")

    report = {
        "class_feature": args.class_feature,
        "levels": levels_report,
        "n_native_properties": result.n_native_properties,
        "n_derived_properties": len(result.derived),
        "n_pooled_properties": len(result.pooled_property_names),
        "n_bounds_by_level": result.n_bounds_by_level,
        "metrics_data": "test" if test is not None else "train",
        "warnings": result.warnings,
    }
    _write_json(out / "report.json", report)

    manifest = _manifest(
        args,
        {
            "engine_config": vars(config),
            "n_sub_runs": result.n_sub_runs,
            "sub_run_time_limit": result.sub_run_time_limit,
        },
        time.monotonic() - started,
    )
    _write_json(out / "manifest.json", manifest)
    for line in lines:
        print(line)
    return 0


def cmd_bench(args) -> int:
    out = _outdir(args)
    name = args.name
    if name == "gravity":
        train, test = gen_gravity(args.seed)
        spec = BenchmarkSpec("gravity", args.seed, train.n_rows, test.n_rows,
                             {"k": 0.057098})
    elif name == "gravity-noise":
        k = args.instance
        if k is None or k < 0:
            raise ConfigurationError("gravity-noise needs --instance K (noise column count)")
        train, test = gen_gravity(args.seed)
        train = gen_noise_columns(train, k, args.seed)
        test = gen_noise_columns(test, k, args.seed, salt_base=200)
        spec = BenchmarkSpec("gravity-noise", args.seed, train.n_rows, test.n_rows,
                             {"k": 0.057098, "noise_columns": k})
    elif name == "nguyen":
        if args.instance is None or not 1 <= args.instance <= 12:
            raise ConfigurationError("nguyen needs --instance 1..12")
        train, test = gen_nguyen(args.instance, args.seed)
        spec = BenchmarkSpec("nguyen", args.seed, train.n_rows, test.n_rows,
                             {"instance": args.instance, "augmented": True})
    elif name == "interaction":
        train, test = gen_interaction(args.seed)
        spec = BenchmarkSpec("interaction", args.seed, train.n_rows, test.n_rows,
                             {"rounding_noise": False})
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown benchmark {name!r}")
    stem = name if args.instance is None else f"{name}{args.instance}"
    save_csv(train, out / f"{stem}_train.csv")
    save_csv(test, out / f"{stem}_test.csv")
    _write_json(out / f"{stem}_spec.json", spec.to_dict())
    print(f"wrote {stem}_train.csv ({train.n_rows} rows), {stem}_test.csv ({test.n_rows} rows)")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DalmatianError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
