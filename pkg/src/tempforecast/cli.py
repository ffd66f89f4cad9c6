"""Command line entry point: ``tempforecast {run,synth,select,train,evaluate}``.

Exit status is 0 on success, 1 when a pipeline stage fails and 2 for usage
errors (argparse's own convention).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .datamodel import SplitStrategy, build_lag_features, split, write_csv
from .errors import StageError, TempForecastError
from .pipeline import (
    PipelineConfig,
    SynthParams,
    Stage,
    dumps_report,
    evaluate,
    export_scatter,
    fit_from_report,
    generate_synthetic,
    load_observations,
    prepare,
    run_pipeline,
)
from .regression import summarize


def _unit_interval(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be >= 0, got {text}")
    return value


def _add_synth_flags(p):
    g = p.add_argument_group("synthetic data (used when --input is absent)")
    g.add_argument("--n-days", type=_positive_int, default=SynthParams.n_days)
    g.add_argument("--noise-sd", type=float, default=SynthParams.noise_sd)
    g.add_argument("--ar", type=float, default=SynthParams.ar_coefficient, help="AR(1) coefficient")
    g.add_argument("--amplitude", type=float, default=SynthParams.seasonal_amplitude)
    g.add_argument("--base-temp", type=float, default=SynthParams.base_temp)
    g.add_argument("--synth-seed", type=_seed, default=None,
                   help="generator seed (defaults to --seed)")


def _add_pipeline_flags(p, out_default=None, out_required=False):
    p.add_argument("--input", help="daily weather CSV; synthetic data is generated when omitted")
    p.add_argument("--schema", help="JSON file mapping field names to CSV column names")
    p.add_argument("--lag-depth", type=_positive_int, default=3)
    p.add_argument("--corr-threshold", type=_unit_interval, default=0.6)
    p.add_argument("--alpha", type=_unit_interval, default=0.05)
    p.add_argument("--test-fraction", type=_unit_interval, default=0.2)
    p.add_argument("--split", choices=[s.value for s in SplitStrategy], default=SplitStrategy.RANDOM.value)
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--out", default=out_default, required=out_required, help="output directory")
    _add_synth_flags(p)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tempforecast",
        description="Forecast daily mean temperature from the previous days' weather.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline; writes report.json, summary.txt, scatter.csv/svg")
    _add_pipeline_flags(p, out_default="out")

    p = sub.add_parser("synth", help="write a synthetic daily weather CSV")
    p.add_argument("--out", required=True, help="CSV file to write")
    p.add_argument("--seed", type=_seed, default=42)
    _add_synth_flags(p)

    p = sub.add_parser("select", help="print the correlation table and elimination trace")
    _add_pipeline_flags(p)

    p = sub.add_parser("train", help="select features, fit, write model.json and summary.txt")
    _add_pipeline_flags(p, out_default="out")

    p = sub.add_parser("evaluate", help="score a saved model on the test split (or every row)")
    p.add_argument("--model", required=True, help="model.json written by 'train'")
    p.add_argument("--all-rows", action="store_true", help="score every lagged row, not just the test split")
    _add_pipeline_flags(p, out_default="out")
    return parser


def _synth_params(args):
    seed = args.synth_seed if args.synth_seed is not None else args.seed
    return SynthParams(
        n_days=args.n_days,
        base_temp=args.base_temp,
        seasonal_amplitude=args.amplitude,
        ar_coefficient=args.ar,
        noise_sd=args.noise_sd,
        seed=seed,
    )


def config_from_args(args):
    schema = None
    if args.schema:
        schema = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    return PipelineConfig(
        input_path=args.input,
        synth=_synth_params(args),
        lag_depth=args.lag_depth,
        corr_threshold=args.corr_threshold,
        alpha=args.alpha,
        test_fraction=args.test_fraction,
        split_strategy=SplitStrategy(args.split),
        seed=args.seed,
        output_dir=args.out,
        schema=schema,
    )


def cmd_run(args):
    result = run_pipeline(config_from_args(args))
    print(result.summary, end="")
    print(f"test MAE: {result.evaluation.mae:.4f} °C over {result.evaluation.n_test} days")
    print(f"artifacts written to {args.out}")


def cmd_synth(args):
    with Stage("generate"):
        observations = generate_synthetic(_synth_params(args))
    with Stage("write_csv"):
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv(observations, out)
    print(f"wrote {len(observations)} days to {out}")


def cmd_select(args):
    cfg = config_from_args(args)
    prep = prepare(cfg)
    print(prep.correlation.render(), end="")
    print()
    print(prep.trace.render(), end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"correlation": prep.correlation.to_dict(), "elimination": prep.trace.to_dict()}
        (out / "selection.json").write_text(dumps_report(payload), encoding="utf-8")


def cmd_train(args):
    cfg = config_from_args(args)
    prep = prepare(cfg)
    summary = summarize(prep.fit)
    with Stage("write_artifacts"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"config": cfg.to_dict(), "fit": prep.fit.to_dict(), "elimination": prep.trace.to_dict()}
        (out / "model.json").write_text(dumps_report(payload), encoding="utf-8")
        (out / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")


def cmd_evaluate(args):
    cfg = config_from_args(args)
    with Stage("load_model"):
        fit = fit_from_report(json.loads(Path(args.model).read_text(encoding="utf-8"))["fit"])
    with Stage("ingest" if cfg.input_path is not None else "generate"):
        observations, _ = load_observations(cfg)
    with Stage("build_lag_features"):
        ds = build_lag_features(observations, cfg.lag_depth)
    with Stage("split"):
        rows = ds if args.all_rows else split(ds, cfg.test_fraction, cfg.split_strategy, cfg.seed).test
    with Stage("evaluate"):
        missing = [n for n in fit.feature_names if n not in rows.feature_names]
        if missing:
            raise StageError("evaluate", f"data lacks model features: {', '.join(missing)}")
        report = evaluate(fit, rows.select(fit.feature_names))
    with Stage("write_artifacts"):
        out = Path(args.out)
        export_scatter(report, out)
        (out / "evaluation.json").write_text(dumps_report(report.to_dict()), encoding="utf-8")
    print(f"MAE: {report.mae:.4f} °C over {report.n_test} days")


COMMANDS = {
    "run": cmd_run,
    "synth": cmd_synth,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (TempForecastError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
