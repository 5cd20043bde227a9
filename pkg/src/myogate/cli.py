"""Command-line surface.

Verbs: synth, prepare, train, evaluate, sweep-ratio, sweep-known,
cross-matrix, cross-domain, report. Every flag can also be given in a
config file (``--config path``) holding ``key = value`` lines, comma
lists, and ``#`` comments; explicit flags win. Exit codes: 0 success,
1 runtime failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments, svgplot
from .classifier import extract_features, load_cnn, save_cnn
from .data import (
    SplitPlan,
    load_canonical,
    make_split,
    save_canonical,
    segment_windows,
    synth_recording,
)
from .errors import (
    ArgumentError,
    ConfigurationError,
    MyogateError,
    ParseError,
)
from .experiments import (
    MODES,
    ExperimentSettings,
    config_hash,
    rows_to_csv,
    synth_dataset,
    write_report,
)
from .gate import GatePipeline, export_decision_log, run_stream
from .metrics import compute_report
from .opengan import load_selected, save_selected


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v != "")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v != "")


def _strs(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def load_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line_no)
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _settings_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline settings")
    g.add_argument("--channels", type=int, default=8)
    g.add_argument("--sample-rate", type=float, default=100.0)
    g.add_argument("--window-ms", type=float, default=200.0)
    g.add_argument("--windows-per-class", type=int, default=60)
    g.add_argument("--noise-floor", type=float, default=0.05)
    g.add_argument("--amplitude-jitter", type=float, default=0.15)
    g.add_argument("--fractions", type=_floats, default=(0.6, 0.15, 0.15, 0.1),
                   help="cnn_train,cnn_val,cnn_test,gan_val")
    g.add_argument("--cnn-epochs", type=int, default=20)
    g.add_argument("--cnn-batch-size", type=int, default=32)
    g.add_argument("--cnn-lr", type=float, default=1e-3)
    g.add_argument("--gan-epochs", type=int, default=60)
    g.add_argument("--gan-batch-size", type=int, default=32)
    g.add_argument("--selection-mode", choices=("fake-only", "paper-faithful"),
                   default="fake-only")


def _settings_from(args) -> ExperimentSettings:
    return ExperimentSettings(
        channels=args.channels,
        sample_rate=args.sample_rate,
        window_ms=args.window_ms,
        windows_per_class=args.windows_per_class,
        noise_floor=args.noise_floor,
        amplitude_jitter=args.amplitude_jitter,
        fractions=tuple(args.fractions),
        cnn_epochs=args.cnn_epochs,
        cnn_batch_size=args.cnn_batch_size,
        cnn_lr=args.cnn_lr,
        gan_epochs=args.gan_epochs,
        gan_batch_size=args.gan_batch_size,
        selection_mode=args.selection_mode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="myogate",
                                     description="GAN-gated open-set EMG gesture control")
    parser.add_argument("--config", default=None, help="key=value config file; flags override")
    sub = parser.add_subparsers(dest="verb", required=True)
    parser._verb_map = {}  # type: ignore[attr-defined]

    original_add_parser = sub.add_parser

    def add_parser(name, **kw):
        p = original_add_parser(name, **kw)
        p.add_argument("--config", default=None, help=argparse.SUPPRESS)
        parser._verb_map[name] = p  # type: ignore[attr-defined]
        return p

    sub.add_parser = add_parser  # type: ignore[method-assign]

    p = sub.add_parser("synth", help="write a synthetic canonical CSV dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-base", type=int, default=10, help="learnable gesture classes")
    p.add_argument("--n-mixture", type=int, default=4, help="mixture classes (unknown stand-ins)")
    p.add_argument("--subject", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    _settings_args(p)

    p = sub.add_parser("prepare", help="build a split plan from a canonical dataset")
    p.add_argument("--dataset", required=True, help="canonical CSV path")
    p.add_argument("--known-classes", type=_ints, required=True)
    p.add_argument("--unknown-classes", type=_ints, required=True)
    p.add_argument("--val-repetitions", type=_ints, default=None,
                   help="repetition indices held out for evaluation (DB1 rule: 2,5,7)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, required=True)
    _settings_args(p)

    p = sub.add_parser("train", help="train classifier, GAN, and select the discriminator")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", required=True, help="split plan from prepare")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    _settings_args(p)

    p = sub.add_parser("evaluate", help="run the gate over the open-set evaluation pool")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--models", required=True, help="directory produced by train")
    p.add_argument("--out", required=True)
    _settings_args(p)

    p = sub.add_parser("sweep-ratio", help="fixed known classes, varying unknown counts")
    p.add_argument("--out", required=True)
    p.add_argument("--n-known", type=int, default=10)
    p.add_argument("--unknown-counts", type=_ints, default=(5, 10, 15, 20, 30, 42))
    p.add_argument("--seeds", type=_ints, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--modes", type=_strs, default=MODES)
    p.add_argument("--subjects", type=_ints, default=(0,))
    _settings_args(p)

    p = sub.add_parser("sweep-known", help="varying known counts against fixed unknowns")
    p.add_argument("--out", required=True)
    p.add_argument("--known-counts", type=_ints, default=(4, 6, 8, 10, 12, 16, 20))
    p.add_argument("--unknown-counts", type=_ints, default=(4, 20))
    p.add_argument("--seeds", type=_ints, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--modes", type=_strs, default=MODES)
    p.add_argument("--subjects", type=_ints, default=(0,))
    _settings_args(p)

    p = sub.add_parser("cross-matrix", help="train-ratio vs eval-composition grid")
    p.add_argument("--out", required=True)
    p.add_argument("--n-known", type=int, default=10)
    p.add_argument("--ratio-counts", type=_ints, default=(5, 10, 15, 20, 30, 42))
    p.add_argument("--seeds", type=_ints, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--subjects", type=_ints, default=(0,))
    _settings_args(p)

    p = sub.add_parser("cross-domain", help="train on one subject, test on others")
    p.add_argument("--out", required=True)
    p.add_argument("--n-known", type=int, default=6)
    p.add_argument("--unknown-count", type=int, default=4)
    p.add_argument("--subjects", type=_ints, default=(0, 1))
    p.add_argument("--seeds", type=_ints, default=None)
    p.add_argument("--seed", type=int, required=True)
    _settings_args(p)

    p = sub.add_parser("report", help="tables and SVG plots from a sweep JSON")
    p.add_argument("--input", required=True, help="sweep .json file")
    p.add_argument("--out", required=True)

    return parser


def parse_args(argv: list[str]) -> argparse.Namespace:
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument("--config", default=None)
    pre_parser.add_argument("verb", nargs="?")
    pre, _ = pre_parser.parse_known_args(argv)

    parser = build_parser()
    chosen = parser._verb_map.get(pre.verb)  # type: ignore[attr-defined]
    if pre.config and chosen is not None:
        values = load_config_file(pre.config)
        defaults = {}
        for action in chosen._actions:
            if action.dest in values:
                raw = values[action.dest]
                defaults[action.dest] = action.type(raw) if action.type else raw
                action.required = False
        unknown = set(values) - {a.dest for a in chosen._actions}
        if unknown:
            raise ConfigurationError(f"unknown config keys for {pre.verb}: {sorted(unknown)}")
        chosen.set_defaults(**defaults)
    return parser.parse_args(argv)


def _seeds_from(args) -> tuple[int, ...]:
    if getattr(args, "seeds", None):
        return tuple(args.seeds)
    return (args.seed,)


def cmd_synth(args) -> int:
    settings = _settings_from(args)
    ds = synth_dataset(args.n_base, args.n_mixture, settings,
                       subject=args.subject, seed=args.seed)
    from .data import make_class_profiles  # same recipes, materialized as a recording
    known_specs, unknown_specs = make_class_profiles(
        args.n_base, args.n_mixture, channels=settings.channels, seed=args.seed,
        noise_floor=settings.noise_floor,
        amplitude_jitter=settings.amplitude_jitter if args.subject else 0.0,
    )
    rec = synth_recording(known_specs + unknown_specs, settings.windows_per_class,
                          settings.channels, settings.sample_rate,
                          seed=args.seed + 7919 * args.subject,
                          window_ms=settings.window_ms, subject_id=args.subject)
    save_canonical(rec, args.out)
    print(f"wrote {args.out}: {rec.channels} channels, {rec.n_samples} samples, "
          f"{args.n_base + args.n_mixture} classes")
    return 0


def cmd_prepare(args) -> int:
    settings = _settings_from(args)
    rec = load_canonical(args.dataset)
    windows = segment_windows(rec, settings.window_ms, settings.window_ms)
    plan = make_split(windows, args.known_classes, args.unknown_classes,
                      settings.fractions, seed=args.seed,
                      val_repetitions=args.val_repetitions)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    plan.save(outdir / "split.txt")
    summary = {
        "dataset": str(args.dataset),
        "windows": len(windows),
        "known_classes": list(plan.known_classes),
        "unknown_classes": list(plan.unknown_classes),
        "set_sizes": {
            name: len(getattr(plan, name))
            for name in ("cnn_train", "cnn_val", "cnn_test", "gan_val", "openset_eval")
        },
        "seed": args.seed,
    }
    (outdir / "prepare_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {outdir / 'split.txt'} ({len(windows)} windows)")
    return 0


def _load_windows_and_plan(args, settings):
    rec = load_canonical(args.dataset)
    windows = segment_windows(rec, settings.window_ms, settings.window_ms)
    plan = SplitPlan.load(Path(args.split))
    return windows, plan


def cmd_train(args) -> int:
    settings = _settings_from(args)
    rec = load_canonical(args.dataset)
    settings = replace(settings, channels=rec.channels, sample_rate=rec.sample_rate)
    windows = segment_windows(rec, settings.window_ms, settings.window_ms)
    plan = SplitPlan.load(Path(args.split))
    stack = experiments.build_known_stack(windows, plan.known_classes, args.seed, settings)
    result = experiments.run_openset(stack, windows, plan.unknown_classes, args.seed, settings)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    save_cnn(stack.cnn, outdir / "cnn")
    save_selected(result.selected, outdir / "discriminator")
    from .nn import save_model
    save_model(result.pair.generator, outdir / "gan_generator",
               meta={"model_type": "gan_generator"})
    save_model(result.pair.discriminator, outdir / "gan_discriminator",
               meta={"model_type": "gan_discriminator_final"})
    from .metrics import roc_to_csv
    (outdir / "calibration_roc.csv").write_text(roc_to_csv(result.selected.roc),
                                                encoding="utf-8")
    cnn_lines = ["epoch,train_loss,val_accuracy"]
    cnn_lines += [f"{e.epoch},{e.train_loss:.6f},{e.val_accuracy:.6f}"
                  for e in stack.cnn_history.epochs]
    (outdir / "cnn_history.csv").write_text("\n".join(cnn_lines) + "\n", encoding="utf-8")
    gan_lines = ["epoch,auc,v_d,v_g"]
    gan_lines += [f"{s.epoch},{s.auc:.6f},{s.v_d:.6f},{s.v_g:.6f}"
                  for s in result.pair.history]
    (outdir / "gan_history.csv").write_text("\n".join(gan_lines) + "\n", encoding="utf-8")
    lines = ["mode,aer,acc,arr,f1,auc"]
    for mode, rep in sorted(result.reports.items()):
        auc = "" if rep.auc is None else f"{rep.auc:.6f}"
        lines.append(f"{mode},{rep.aer:.6f},{rep.acc:.6f},{rep.arr:.6f},{rep.f1:.6f},{auc}")
    (outdir / "train_metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote models and metrics to {outdir} "
          f"(tau={result.selected.tau:.6f}, auc={result.selected.selection_auc:.6f})")
    return 0


def cmd_evaluate(args) -> int:
    settings = _settings_from(args)
    rec = load_canonical(args.dataset)
    settings = replace(settings, channels=rec.channels, sample_rate=rec.sample_rate)
    windows = segment_windows(rec, settings.window_ms, settings.window_ms)
    plan = SplitPlan.load(Path(args.split))
    models = Path(args.models)
    cnn = load_cnn(models / "cnn")
    selected = load_selected(models / "discriminator")
    pipeline = GatePipeline(cnn=cnn, discriminator=selected)
    eval_windows = [windows[i] for i in plan.openset_eval]
    state, outcomes = run_stream(pipeline, eval_windows)
    closed_acc, _ = experiments.eval_closed(cnn, [windows[i] for i in plan.cnn_test])
    report = compute_report(outcomes, closed_acc or 1e-9, "OpenGAN",
                            auc_value=selected.selection_auc)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    export_decision_log(outdir / "decisions.csv", eval_windows, state, plan.known_classes)
    (outdir / "metrics.csv").write_text(
        report.CSV_HEADER + "\n" + report.csv_row() + "\n", encoding="utf-8")
    (outdir / "metrics.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"AER={report.aer:.4f} ACC={report.acc:.4f} "
          f"accepted={report.n_accepted} rejected={report.n_rejected}")
    return 0


def _grid_check(rows, expected_cells, label):
    if len(rows) != expected_cells:
        raise ConfigurationError(
            f"{label}: expected {expected_cells} grid cells, produced {len(rows)}"
        )


def cmd_sweep_ratio(args) -> int:
    settings = _settings_from(args)
    seeds = _seeds_from(args)
    experiments._check_modes(args.modes)
    rows = []
    for subject in args.subjects:
        ds = synth_dataset(args.n_known, max(args.unknown_counts), settings,
                           subject=subject, seed=args.seed + subject)
        rows += experiments.run_ratio_sweep(ds, args.n_known, args.unknown_counts,
                                            seeds, settings, modes=args.modes,
                                            subject=subject)
    _grid_check(rows, len(args.subjects) * len(seeds) * len(args.unknown_counts) * len(args.modes),
                "sweep-ratio")
    meta = _meta(args, seeds, kind="sweep-ratio")
    paths = write_report(args.out, "sweep_ratio", rows, meta,
                         group_keys=("mode", "unknown_count"))
    _ratio_svg(args.out, rows)
    print(f"wrote {paths['json']}")
    return 0


def cmd_sweep_known(args) -> int:
    settings = _settings_from(args)
    seeds = _seeds_from(args)
    experiments._check_modes(args.modes)
    rows = []
    for subject in args.subjects:
        ds = synth_dataset(max(args.known_counts), max(args.unknown_counts), settings,
                           subject=subject, seed=args.seed + subject)
        rows += experiments.run_known_sweep(ds, args.known_counts, args.unknown_counts,
                                            seeds, settings, modes=args.modes,
                                            subject=subject)
    _grid_check(rows, len(args.subjects) * len(seeds) * len(args.known_counts)
                * len(args.unknown_counts) * len(args.modes), "sweep-known")
    meta = _meta(args, seeds, kind="sweep-known")
    paths = write_report(args.out, "sweep_known", rows, meta,
                         group_keys=("mode", "known_count", "unknown_count"))
    _known_svg(args.out, rows)
    print(f"wrote {paths['json']}")
    return 0


def cmd_cross_matrix(args) -> int:
    settings = _settings_from(args)
    seeds = _seeds_from(args)
    rows = []
    for subject in args.subjects:
        ds = synth_dataset(args.n_known, max(args.ratio_counts), settings,
                           subject=subject, seed=args.seed + subject)
        rows += experiments.run_cross_matrix(ds, args.n_known, args.ratio_counts,
                                             seeds, settings, subject=subject)
    _grid_check(rows, len(args.subjects) * len(seeds) * len(args.ratio_counts) ** 2 * 2,
                "cross-matrix")
    meta = _meta(args, seeds, kind="cross-matrix")
    meta["column_argmin"] = _column_argmin(rows, args.ratio_counts)
    paths = write_report(args.out, "cross_matrix", rows, meta,
                         group_keys=("mode", "train_unknown_count", "eval_unknown_count"))
    _matrix_svg(args.out, rows, args.ratio_counts)
    print(f"wrote {paths['json']}")
    return 0


def cmd_cross_domain(args) -> int:
    settings = _settings_from(args)
    seeds = _seeds_from(args)
    if len(args.subjects) < 1:
        raise ConfigurationError("cross-domain needs at least one subject")
    datasets = {
        s: synth_dataset(args.n_known, args.unknown_count, settings,
                         subject=s, seed=args.seed + s)
        for s in args.subjects
    }
    rows = experiments.run_cross_domain(datasets, args.n_known, args.unknown_count,
                                        seeds, settings)
    _grid_check(rows, len(seeds) * len(args.subjects) ** 2 * 2, "cross-domain")
    meta = _meta(args, seeds, kind="cross-domain")
    paths = write_report(args.out, "cross_domain", rows, meta,
                         group_keys=("mode", "subject", "test_subject"))
    _domain_svg(args.out, rows, args.subjects)
    print(f"wrote {paths['json']}")
    return 0


def _meta(args, seeds, kind: str) -> dict:
    payload = {k: v for k, v in sorted(vars(args).items())
               if k not in ("config", "out", "verb")}
    return {
        "kind": kind,
        "seeds": list(seeds),
        "config_hash": config_hash(payload),
        "aer_denominator": "accepted (executed) actions",
        "selection_mode": getattr(args, "selection_mode", "fake-only"),
    }


def _column_argmin(rows, ratio_counts):
    flags = {}
    for eval_count in ratio_counts:
        cells = [(r["train_unknown_count"], r["aer"]) for r in rows
                 if r["mode"] == "OpenGAN" and r["eval_unknown_count"] == eval_count]
        best = min(cells, key=lambda c: c[1])
        flags[str(eval_count)] = best[0]
    return flags


def _mean_by(rows, mode, key):
    values = {}
    for r in rows:
        if r["mode"] != mode:
            continue
        values.setdefault(r[key], []).append(r["aer"])
    return {k: float(np.mean(v)) for k, v in values.items()}


def _ratio_svg(outdir, rows):
    counts = sorted({r["unknown_count"] for r in rows})
    series = {}
    for mode in MODES:
        by = _mean_by(rows, mode, "unknown_count")
        if by:
            series[mode] = [by[c] for c in counts]
    svg = svgplot.bar_chart([str(c) for c in counts], series,
                            "Mean AER by unknown-class count", "AER", y_max=1.0)
    svgplot.write_svg(Path(outdir) / "sweep_ratio_aer.svg", svg)


def _known_svg(outdir, rows):
    kcs = sorted({r["known_count"] for r in rows})
    ucs = sorted({r["unknown_count"] for r in rows})
    grid = []
    annot = []
    for uc in ucs:
        line = []
        aline = []
        for kc in kcs:
            cells = [r["acc"] for r in rows
                     if r["mode"] == "OpenGAN" and r["known_count"] == kc
                     and r["unknown_count"] == uc]
            stds = float(np.std(cells, ddof=1)) if len(cells) > 1 else 0.0
            line.append(float(np.mean(cells)) if cells else None)
            aline.append(f"{stds:.3f}" if cells else "")
        grid.append(line)
        annot.append(aline)
    svg = svgplot.heatmap([f"unk {u}" for u in ucs], [f"kn {k}" for k in kcs], grid,
                          "Mean OpenGAN accuracy (std annotated)", annotations=annot)
    svgplot.write_svg(Path(outdir) / "sweep_known_acc.svg", svg)


def _matrix_svg(outdir, rows, ratio_counts):
    grid = []
    for train_count in ratio_counts:
        line = []
        for eval_count in ratio_counts:
            cells = [r["aer"] for r in rows
                     if r["mode"] == "OpenGAN" and r["train_unknown_count"] == train_count
                     and r["eval_unknown_count"] == eval_count]
            line.append(float(np.mean(cells)) if cells else None)
        grid.append(line)
    svg = svgplot.heatmap([f"train {t}" for t in ratio_counts],
                          [f"eval {e}" for e in ratio_counts], grid,
                          "Mean OpenGAN AER: train ratio vs eval composition")
    svgplot.write_svg(Path(outdir) / "cross_matrix_aer.svg", svg)


def _domain_svg(outdir, rows, subjects):
    grid = []
    for train_subject in subjects:
        line = []
        for test_subject in subjects:
            cells = [r["arr"] for r in rows
                     if r["mode"] == "OpenGAN" and r["subject"] == train_subject
                     and r["test_subject"] == test_subject]
            line.append(float(np.mean(cells)) if cells else None)
        grid.append(line)
    svg = svgplot.heatmap([f"train s{t}" for t in subjects],
                          [f"test s{t}" for t in subjects], grid,
                          "Mean ARR (OpenGAN acc / Close acc)")
    svgplot.write_svg(Path(outdir) / "cross_domain_arr.svg", svg)


def cmd_report(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigurationError(f"report file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        rows = payload["rows"]
        meta = payload.get("meta", {})
    except (json.JSONDecodeError, KeyError) as exc:
        raise ConfigurationError(f"unrecognized report schema in {path}: {exc}")
    if not rows:
        raise ConfigurationError("empty report grid")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "cells.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    kind = meta.get("kind", "")
    if "unknown_count" in rows[0] and "known_count" not in rows[0] and kind != "cross-matrix":
        agg = experiments.aggregate_rows(rows, ("mode", "unknown_count"))
        _ratio_svg(outdir, rows)
    elif "known_count" in rows[0]:
        agg = experiments.aggregate_rows(rows, ("mode", "known_count", "unknown_count"))
        _known_svg(outdir, rows)
    elif "train_unknown_count" in rows[0]:
        agg = experiments.aggregate_rows(rows, ("mode", "train_unknown_count", "eval_unknown_count"))
        _matrix_svg(outdir, rows, sorted({r["train_unknown_count"] for r in rows}))
    elif "test_subject" in rows[0]:
        agg = experiments.aggregate_rows(rows, ("mode", "subject", "test_subject"))
        _domain_svg(outdir, rows, sorted({r["subject"] for r in rows}))
    else:
        agg = experiments.aggregate_rows(rows, ("mode",))
    (outdir / "aggregate.csv").write_text(rows_to_csv(agg), encoding="utf-8")
    print(f"wrote tables and plots to {outdir}")
    return 0


HANDLERS = {
    "synth": cmd_synth,
    "prepare": cmd_prepare,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep-ratio": cmd_sweep_ratio,
    "sweep-known": cmd_sweep_known,
    "cross-matrix": cmd_cross_matrix,
    "cross-domain": cmd_cross_domain,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return HANDLERS[args.verb](args)
    except (ConfigurationError, ArgumentError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MyogateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
