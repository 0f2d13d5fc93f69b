"""``npmixer`` command line: train, eval, forecast, ablate, inspect.

Exit codes: 0 success, 2 user or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint
from .config import RunConfig, apply_overrides, load_config
from .data import DatasetSpec, load_csv, load_dataset
from .errors import DivergenceError, NPMixerError
from .model import ABLATION_FLAGS, _dtype, count_params_flops, create_model
from .plot import forecast_svg
from .train import evaluate, train_run

log = logging.getLogger("npmixer")

METRIC_FIELDS = ("dataset", "horizon", "seed", "mse", "mae")
VARIANTS = ("full",) + ABLATION_FLAGS


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _append_csv(path: Path, header, row) -> None:
    new = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(header)
        w.writerow([_fmt(v) for v in row])


def _run_config(args) -> RunConfig:
    run = apply_overrides(load_config(args.config), args.set)
    if args.seed is not None:
        run.model["seed"] = args.seed
        run.train["seed"] = args.seed
    return run


def _out_dir(args, run: RunConfig) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        seed = run.train.get("seed", 0)
        out = Path("runs") / f"{run.dataset_name}_H{run.model.get('horizon', 96)}_s{seed}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_one(run: RunConfig, data_dir, out: Path | None, log_name="train_log.csv"):
    splits = load_dataset(run.dataset_spec(), data_dir)
    mcfg = run.model_config(channels=len(splits.channels))
    model = create_model(mcfg)
    result = train_run(model, splits, run.train_config(),
                       log_path=None if out is None else out / log_name,
                       max_batches=run.max_batches)
    return model, splits, result


def cmd_train(args) -> int:
    run = _run_config(args)
    out = _out_dir(args, run)
    effective = run.to_ini()
    print(effective, end="")
    (out / "effective_config.ini").write_text(effective, encoding="utf-8")
    model, splits, result = _train_one(run, args.data_dir, out)
    spec = run.dataset_spec()
    checkpoint.save(out / "best.ckpt", model, result.optimizer, extra={
        "dataset": run.dataset_name, "channels": list(splits.channels),
        "date_column": spec.date_column, "mean": splits.mean.tolist(), "std": splits.std.tolist(),
        "best_epoch": result.best_epoch, "best_val_mse": result.best_val_mse,
    })
    H = model.config.horizon
    metrics = evaluate(model, splits.test, model.config.lookback, H)
    row = (run.dataset_name, H, model.config.seed, metrics["mse"], metrics["mae"])
    _append_csv(out / "metrics.csv", METRIC_FIELDS, row)
    print(",".join(METRIC_FIELDS))
    print(",".join(_fmt(v) for v in row))
    return 0


def cmd_eval(args) -> int:
    run = _run_config(args)
    splits = load_dataset(run.dataset_spec(), args.data_dir)
    expect = run.model_config(channels=len(splits.channels))
    model, _ = checkpoint.load(args.checkpoint, expect=expect)
    cfg = model.config
    metrics = evaluate(model, splits.get(args.split), cfg.lookback, cfg.horizon)
    row = (run.dataset_name, cfg.horizon, cfg.seed, metrics["mse"], metrics["mae"])
    print(",".join(METRIC_FIELDS))
    print(",".join(_fmt(v) for v in row))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _append_csv(out / "metrics.csv", METRIC_FIELDS, row)
    return 0


def cmd_forecast(args) -> int:
    model, meta = checkpoint.load(args.checkpoint)
    extra = meta.get("extra", {})
    cfg = model.config
    channels = extra.get("channels")
    with open(args.input, newline="", encoding="utf-8") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    date_col = extra.get("date_column", "date")
    spec = DatasetSpec(path=args.input, date_column=date_col if date_col in header else "",
                       channels=tuple(channels) if channels else None)
    window, names = load_csv(args.input, spec)
    if window.shape != (cfg.channels, cfg.lookback):
        raise NPMixerError(
            f"input window has {window.shape[1]} rows of {window.shape[0]} channels; "
            f"expected L={cfg.lookback} rows of C={cfg.channels} channels")
    mean = np.asarray(extra.get("mean", np.zeros(cfg.channels)))
    std = np.asarray(extra.get("std", np.ones(cfg.channels)))
    with _dtype(cfg.precision):
        pred = model((window - mean[:, None]) / std[:, None], training=False).data
    pred = pred * std[:, None] + mean[:, None]
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("step",) + tuple(names))
        for h in range(cfg.horizon):
            w.writerow([h + 1] + [_fmt(v) for v in pred[:, h]])
    if args.svg:
        forecast_svg(window, pred, names, out.with_suffix(".svg"))
    print(out)
    return 0


def _parse_list(text: str, kind=str) -> list:
    items = [kind(t.strip()) for t in text.split(",") if t.strip()]
    if len(set(items)) != len(items):
        raise NPMixerError(f"duplicate entries in {text!r}")
    return items


def cmd_ablate(args) -> int:
    variants = _parse_list(args.variants)
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise NPMixerError(f"unknown variants {unknown}; choose from {', '.join(VARIANTS)}")
    seeds = _parse_list(args.seeds, int)
    base = _run_config(args)
    out = _out_dir(args, base)
    rows = []
    for variant in variants:
        runs = []
        for seed in seeds:
            run = apply_overrides(load_config(args.config), args.set)
            run.model["seed"] = run.train["seed"] = seed
            run.ablation = {flag: flag == variant for flag in ABLATION_FLAGS}
            model, splits, _ = _train_one(run, args.data_dir, None)
            m = evaluate(model, splits.test, model.config.lookback, model.config.horizon)
            runs.append((m["mse"], m["mae"]))
            _append_csv(out / "ablation_runs.csv", ("variant", "seed", "mse", "mae"),
                        (variant, seed, m["mse"], m["mae"]))
        arr = np.asarray(runs)
        rows.append((variant, len(seeds), *arr.mean(axis=0), *arr.std(axis=0)))
    header = ("variant", "n_seeds", "mse", "mae", "mse_std", "mae_std")
    path = out / "ablation.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    print(path.read_text(encoding="utf-8"), end="")
    return 0


def cmd_inspect(args) -> int:
    run = _run_config(args)
    cfg = run.model_config(channels=run.channel_count(args.data_dir))
    model = create_model(cfg)
    stats = count_params_flops(model, args.batch)
    print(f"batch,{args.batch}")
    print(f"param_count,{stats['param_count']}")
    print(f"flops,{stats['flops']}")
    print(f"gflops,{stats['flops'] / 1e9!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="npmixer", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="run config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override, e.g. train.lr=0.001 (repeatable)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--data-dir", default=None,
                        help="dataset root (default: $NPMIXER_DATA_DIR)")

    sp = sub.add_parser("train", help="train and write checkpoint, log and metrics")
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--split", default="test", choices=("train", "val", "test"))
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("forecast", help="forecast from a CSV window")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--input", required=True, help="CSV with exactly L rows")
    sp.add_argument("--out", required=True, help="forecast CSV path")
    sp.add_argument("--svg", action="store_true", help="also write <out>.svg")
    sp.set_defaults(func=cmd_forecast)

    sp = sub.add_parser("ablate", help="train/evaluate ablation variants over seeds")
    common(sp)
    sp.add_argument("--variants", default=",".join(VARIANTS))
    sp.add_argument("--seeds", default="1,2,3")
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("inspect", help="report parameter count and forward FLOPs")
    common(sp)
    sp.add_argument("--batch", type=int, default=1)
    sp.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DivergenceError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NPMixerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
