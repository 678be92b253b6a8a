"""Benchmark command line: generate data, run methods, compare, and plot.

Commands
--------
gen      write synthetic dataset CSVs (one spec id or all 48)
run      fit all methods on one dataset and write curves plus a summary
compare  aggregate selection results over a list of specs
plot     render SVG figures from previously written curve files

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure. Result files are deterministic for a fixed (config, seed); measured
timings live in comment lines and in dedicated ``*_timings`` files, since
wall-clock values cannot be reproducible.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import synthetic
from .data import (
    Dataset,
    load_csv,
    read_dataset_csv,
    read_error_curve_csv,
    split,
    write_dataset_csv,
    write_error_curve_csv,
)
from .errors import ConfigError, DataError, NumericalError
from .pipeline import METHODS, BenchmarkResult, run_benchmark
from .svgplot import render_benchmark_svg

log = logging.getLogger(__name__)

THREADS_ENV = "ENRELM_THREADS"


@dataclass
class RunConfig:
    """Parsed harness configuration for one command invocation."""

    command: str
    spec_ids: list[int] = field(default_factory=list)
    csv_path: str | None = None
    target: str | None = None
    categoricals: list[str] = field(default_factory=list)
    n_max: int | None = None
    eps: float = 0.1
    toll: float = 1e-4
    ridge_lambda: float | None = None
    realizations: int = 20
    seed: int = 0
    outdir: Path = Path(".")
    literal_s_centering: bool = False
    fresh_w_per_n: bool = False
    drop_first: bool = False
    emit_svg: bool = False
    threads: int = 1
    time_repeats: int = 3
    methods: tuple[str, ...] = METHODS


def _resolve_threads(arg_value):
    if arg_value is not None:
        return max(1, arg_value)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _parse_spec_list(text: str) -> list[int]:
    if text.strip().lower() == "all":
        return list(range(1, 49))
    ids = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            ids.append(int(tok))
        except ValueError as exc:
            raise ConfigError(f"bad spec id {tok!r}") from exc
    if not ids:
        raise ConfigError("empty spec list")
    for i in ids:
        if not 1 <= i <= 48:
            raise ConfigError(f"spec id {i} out of range 1..48")
    return ids


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.seed = args.seed
    cfg.outdir = Path(args.outdir)
    if getattr(args, "spec", None):
        cfg.spec_ids = _parse_spec_list(args.spec)
    if getattr(args, "csv", None):
        cfg.csv_path = args.csv
    if getattr(args, "target", None):
        cfg.target = args.target
    if getattr(args, "categoricals", None):
        cfg.categoricals = [c.strip() for c in args.categoricals.split(",") if c.strip()]
    for name in (
        "n_max",
        "eps",
        "toll",
        "realizations",
        "time_repeats",
        "literal_s_centering",
        "fresh_w_per_n",
        "drop_first",
        "emit_svg",
    ):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "ridge_lambda", None) is not None:
        cfg.ridge_lambda = args.ridge_lambda
    if hasattr(args, "threads"):
        cfg.threads = _resolve_threads(args.threads)
    if getattr(args, "methods", None):
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
        unknown = set(methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        cfg.methods = methods
    return cfg


def _load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.csv_path and cfg.spec_ids:
        raise ConfigError("give either --spec or --csv, not both")
    if cfg.csv_path:
        if not cfg.target:
            raise ConfigError("--csv requires --target")
        return load_csv(
            cfg.csv_path,
            target=cfg.target,
            categoricals=cfg.categoricals,
            drop_first=cfg.drop_first,
            name=Path(cfg.csv_path).stem,
        )
    if len(cfg.spec_ids) != 1:
        raise ConfigError("run needs exactly one --spec id or a --csv path")
    return synthetic.generate(synthetic.get_spec(cfg.spec_ids[0], cfg.seed))


def _run_one(dataset: Dataset, cfg: RunConfig) -> BenchmarkResult:
    train, test = split(dataset, seed=cfg.seed)
    return run_benchmark(
        train,
        test,
        n_max=cfg.n_max,
        eps=cfg.eps,
        toll=cfg.toll,
        ridge_lambda=cfg.ridge_lambda,
        realizations=cfg.realizations,
        seed=cfg.seed,
        center_s=not cfg.literal_s_centering,
        nested_elm=not cfg.fresh_w_per_n,
        time_repeats=cfg.time_repeats,
        threads=cfg.threads,
        methods=cfg.methods,
    )


def _fmt(v) -> str:
    return repr(float(v))


def _write_run_outputs(result: BenchmarkResult, cfg: RunConfig):
    outdir = cfg.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    name = result.dataset_name
    written = []
    for method, res in result.methods.items():
        band = None
        sweep = result.elm_sweep
        if method == "elm" and sweep is not None:
            band = (sweep.test_mean, sweep.test_min, sweep.test_max)
        timings = dict(res.timings_ms)
        timings["total"] = res.total_ms
        extra_comment = {}
        if method == "ienr":
            extra_comment["stop_index"] = float(res.extra.get("stop_index") or 0)
        path = outdir / f"{name}_{method}.csv"
        write_error_curve_csv(
            path,
            res.train_curve.errs,
            res.test_curve.errs,
            elm_band=band,
            timings={**extra_comment, **timings},
        )
        written.append(path)
        band_raw = None
        if method == "elm" and sweep is not None:
            ratio = res.extra["raw_ratio_test"]
            band_raw = (
                sweep.test_mean * ratio,
                sweep.test_min * ratio,
                sweep.test_max * ratio,
            )
        raw_path = outdir / f"{name}_{method}_rawnorm.csv"
        write_error_curve_csv(
            raw_path,
            res.train_curve.errs_raw,
            res.test_curve.errs_raw,
            elm_band=band_raw,
            timings={**extra_comment, **timings},
        )
        written.append(raw_path)
    summary_path = outdir / f"{name}_summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "method",
                "selected_n",
                "min_test_err",
                "test_err_std",
                "curvature_n",
                "total_ms",
                "per_run_ms",
            ]
        )
        for method in METHODS:
            if method not in result.methods:
                continue
            res = result.methods[method]
            writer.writerow(
                [
                    method,
                    res.selected_n,
                    _fmt(res.selected_err),
                    _fmt(res.extra.get("std", 0.0)) if method == "elm" else "",
                    res.curvature_n if res.curvature_n is not None else "",
                    _fmt(res.total_ms),
                    _fmt(res.extra["per_run_ms"]) if method == "elm" else _fmt(res.total_ms),
                ]
            )
    written.append(summary_path)
    if cfg.emit_svg:
        written.append(_render_result_svg(result, outdir))
    return written


def _render_result_svg(result: BenchmarkResult, outdir: Path):
    curves = {}
    stop_index = None
    for method, res in result.methods.items():
        curves[method] = (res.train_curve.errs, res.test_curve.errs)
        if method == "ienr":
            stop_index = res.extra.get("stop_index")
    if result.elm_sweep is not None and "elm" in result.methods:
        curves["elm_band"] = (result.elm_sweep.test_min, result.elm_sweep.test_max)
    path = outdir / f"{result.dataset_name}.svg"
    render_benchmark_svg(path, result.dataset_name, curves, result.n_max, stop_index)
    return path


def cmd_gen(cfg: RunConfig) -> int:
    if not cfg.spec_ids:
        raise ConfigError("gen requires --spec (an id or 'all')")
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    for spec_id in cfg.spec_ids:
        spec = synthetic.get_spec(spec_id, cfg.seed)
        dataset = synthetic.generate(spec)
        path = cfg.outdir / f"{dataset.name}.csv"
        write_dataset_csv(path, dataset)
        log.info("wrote %s (T=%d, n0=%d)", path, spec.t, spec.n0)
    return 0


def cmd_run(cfg: RunConfig) -> int:
    dataset = _load_dataset(cfg)
    result = _run_one(dataset, cfg)
    written = _write_run_outputs(result, cfg)
    for path in written:
        log.info("wrote %s", path)
    for method in METHODS:
        if method in result.methods:
            res = result.methods[method]
            print(
                f"{result.dataset_name} {method}: n={res.selected_n} "
                f"min_test_err={res.selected_err:.4f} total_ms={res.total_ms:.2f}"
            )
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    if not cfg.spec_ids:
        raise ConfigError("compare requires --spec (a comma list or 'all')")
    cfg.outdir.mkdir(parents=True, exist_ok=True)

    def one(spec_id):
        dataset = synthetic.generate(synthetic.get_spec(spec_id, cfg.seed))
        return spec_id, _run_one(dataset, cfg)

    if cfg.threads > 1 and len(cfg.spec_ids) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(one, cfg.spec_ids))
    else:
        results = [one(s) for s in cfg.spec_ids]

    table_path = cfg.outdir / "compare.csv"
    with open(table_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "method", "selected_n", "min_test_err", "test_err_std"])
        for spec_id, result in results:
            for method in METHODS:
                if method not in result.methods:
                    continue
                res = result.methods[method]
                writer.writerow(
                    [
                        result.dataset_name,
                        method,
                        res.selected_n,
                        _fmt(res.selected_err),
                        _fmt(res.extra["std"]) if method == "elm" else "",
                    ]
                )
    timing_path = cfg.outdir / "compare_timings.csv"
    with open(timing_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "aenr_ms", "ienr_ms", "elm_total_ms", "elm_single_ms"])
        for spec_id, result in results:
            row = [result.dataset_name]
            for method in ("aenr", "ienr"):
                res = result.methods.get(method)
                row.append(_fmt(res.total_ms) if res else "")
            elm = result.methods.get("elm")
            row.append(_fmt(elm.total_ms) if elm else "")
            row.append(_fmt(elm.extra["per_run_ms"]) if elm else "")
            writer.writerow(row)
    log.info("wrote %s and %s", table_path, timing_path)
    print(f"compared {len(results)} dataset(s) -> {table_path}")
    return 0


def cmd_plot(cfg: RunConfig) -> int:
    outdir = cfg.outdir
    bases = sorted(
        p.name.removesuffix("_aenr.csv")
        for p in outdir.glob("*_aenr.csv")
        if not p.name.endswith("_rawnorm.csv")
    )
    if not bases:
        log.warning("no curve files found in %s; nothing to plot", outdir)
        return 0
    for base in bases:
        curves = {}
        stop_index = None
        n_max = 1
        for method in METHODS:
            path = outdir / f"{base}_{method}.csv"
            if not path.exists():
                continue
            cols, comments = read_error_curve_csv(path)
            curves[method] = (cols["train_err"], cols["test_err"])
            n_max = max(n_max, len(cols["train_err"]))
            if method == "ienr" and "stop_index" in comments:
                stop_index = int(comments["stop_index"])
            if method == "elm" and "elm_min" in cols:
                curves["elm_band"] = (cols["elm_min"], cols["elm_max"])
        path = outdir / f"{base}.svg"
        render_benchmark_svg(path, base, curves, n_max, stop_index)
        log.info("wrote %s", path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enrelm",
        description="Benchmark harness for eigenbasis and random-feature regressors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--outdir", default="out")

    def add_fit_options(p):
        p.add_argument("--spec", help="synthetic spec id (1..48), comma list, or 'all'")
        p.add_argument("--csv", help="path to a dataset CSV")
        p.add_argument("--target", help="target column name for --csv")
        p.add_argument("--categoricals", help="comma list of categorical columns")
        p.add_argument("--n-max", dest="n_max", type=int, default=None)
        p.add_argument("--eps", type=float, default=0.1)
        p.add_argument("--toll", type=float, default=1e-4)
        p.add_argument("--lambda", dest="ridge_lambda", type=float, default=None)
        p.add_argument("--realizations", type=int, default=20)
        p.add_argument("--methods", help="comma subset of aenr,ienr,elm")
        p.add_argument("--literal-s-centering", action="store_true")
        p.add_argument("--fresh-w-per-n", action="store_true")
        p.add_argument("--drop-first", action="store_true")
        p.add_argument("--emit-svg", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--time-repeats", dest="time_repeats", type=int, default=3)

    p_gen = sub.add_parser("gen", help="write synthetic dataset CSVs")
    p_gen.add_argument("--spec", required=True, help="spec id (1..48), comma list, or 'all'")
    add_common(p_gen)

    p_run = sub.add_parser("run", help="run all methods on one dataset")
    add_fit_options(p_run)
    add_common(p_run)

    p_cmp = sub.add_parser("compare", help="aggregate results over several specs")
    add_fit_options(p_cmp)
    add_common(p_cmp)

    p_plot = sub.add_parser("plot", help="render SVGs from curve files")
    add_common(p_plot)
    return parser


_DISPATCH = {"gen": cmd_gen, "run": cmd_run, "compare": cmd_compare, "plot": cmd_plot}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
