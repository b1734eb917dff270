"""Command-line interface.

Exit status: 0 on success, 1 on usage or configuration errors, 2 on data or
fitting errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, is_dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import artifact_path, load_artifact, save_artifact
from .config import AppConfig, load_config, preset_params
from .errors import ConfigurationError, ForecastError
from .evaluation import (
    SEARCH_GRIDS,
    grid_search,
    leaderboard_csv,
    make_folds,
    run_cv,
)
from .forecaster import fit, forecast_business_days, forecast_json, predict
from .ingest import category_totals, parse_event_log
from .models.base import ModelFamily, ModelSpec
from .series import ContainerCategory, StockSeries, floor_hour, make_hourly_index
from .stats import adf_test, correlogram, log_difference
from .synth import REFERENCE_SPEC, generate_event_log, generate_series

logger = logging.getLogger("ecforecast")


class UsageError(Exception):
    """Bad command-line usage; exits with status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- helpers ---------------------------------------------------------------

def _read_series(path) -> StockSeries:
    if path is None:
        raise UsageError("--data is required (or set [paths] data in the config)")
    return StockSeries.from_csv(Path(path).read_text())


def _families(text: str) -> list:
    try:
        return [ModelFamily.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"unknown model family: {exc}") from None


def _spec(cfg: AppConfig, family: ModelFamily, args) -> ModelSpec:
    seed = cfg.seed if args.seed is None else args.seed
    if getattr(args, "preset", None):
        return ModelSpec(family, preset_params(family, args.preset), seed)
    return cfg.model_spec(family, seed)


def _out_dir(args, cfg: AppConfig) -> Path:
    out = Path(args.out) if args.out else cfg.reports_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _jsonable(value):
    if is_dataclass(value):
        return {k: _jsonable(v) for k, v in asdict(value).items()}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value") and not isinstance(value, (int, float, str)):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    return value


# -- subcommands -------------------------------------------------------------

def cmd_ingest(args, cfg: AppConfig) -> int:
    data = args.data or cfg.data_path
    if data is None:
        raise UsageError("--data is required")
    log = parse_event_log(Path(data).read_text(), tz=args.tz or cfg.timezone)
    if not log.events:
        raise ForecastError("event log has no events")
    start = floor_hour(args.start) if args.start else floor_hour(min(e.gate_in for e in log.events))
    end = (floor_hour(args.end) if args.end
           else floor_hour(log.observation_end) + np.timedelta64(1, "h"))
    index = make_hourly_index(start, end)
    cats = ([ContainerCategory.parse(args.category)] if args.category != "all"
            else [c for c in ContainerCategory if c is not ContainerCategory.UNKNOWN])
    out = _out_dir(args, cfg)
    for cat, series in category_totals(log, index, cfg.classification, cats).items():
        path = out / f"stock_{cat.value}.csv"
        path.write_text(series.to_csv())
        print(f"{cat.value}: {len(series)} hours, mean {series.values.mean():.1f} -> {path}")
    return 0


def cmd_analyze(args, cfg: AppConfig) -> int:
    series = _read_series(args.data or cfg.data_path)
    out = _out_dir(args, cfg)
    levels = {}
    for d in (0, 1):
        w, _ = log_difference(series.values, d)
        res = adf_test(w)
        levels[f"log_diff{d}"] = {"statistic": res.statistic, "p_value": res.p_value,
                                  "lags": res.lags_used, "n": res.n_obs}
        verdict = "stationary" if res.p_value < 0.05 else "non-stationary"
        print(f"ADF on log series, d={d}: stat={res.statistic:.4f} p={res.p_value:.3g} "
              f"({verdict} at 5%)")
    w, _ = log_difference(series.values, 1)
    rho, phi = correlogram(w, args.lags)
    lines = ["lag,acf,pacf"] + [f"{k},{rho[k]!r},{phi[k]!r}" for k in range(len(rho))]
    (out / "correlogram.csv").write_text("\n".join(lines) + "\n")
    (out / "adf.json").write_text(json.dumps(levels, indent=1, sort_keys=True) + "\n")
    print(f"wrote {out / 'correlogram.csv'} and {out / 'adf.json'}")
    return 0


def cmd_evaluate(args, cfg: AppConfig) -> int:
    from .plots import error_bar_plot, fold_forecast_plot

    families = _families(args.model)
    series = _read_series(args.data or cfg.data_path)
    folds = make_folds(series.index, args.folds)
    out = _out_dir(args, cfg)
    reports, summary = [], {}
    for family in families:
        spec = _spec(cfg, family, args)
        report = run_cv(series, spec, folds, cfg.calendar)
        reports.append(report)
        name = family.value
        (out / f"cv_{name}.csv").write_text(report.to_csv())
        (out / f"cv_{name}_business.csv").write_text(report.to_csv(business=True))
        summary[name] = {"all_hours": report.summary(), "business_days": report.business_summary(),
                         "folds_ok": report.n_ok}
        if not args.no_plots:
            fold_forecast_plot(report, out / f"folds_{name}.svg")
        print(f"{name}: MAE {report.mean_mae:.3f} ± {report.std_mae:.3f}  "
              f"RMSE {report.mean_rmse:.3f} ± {report.std_rmse:.3f}  ({report.n_ok} folds)")
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    if not args.no_plots:
        error_bar_plot(reports, out / "errorbars.svg")
    return 0


def _load_grid(text: str, family: ModelFamily) -> dict:
    if text == "paper":
        if family not in SEARCH_GRIDS:
            raise UsageError(f"no built-in grid for {family.value}")
        return SEARCH_GRIDS[family]
    path = Path(text)
    if not path.exists():
        raise UsageError(f"grid file {path} not found (use 'paper' or a JSON path)")
    grid = json.loads(path.read_text())
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise UsageError("grid JSON must map parameter names to lists of values")
    return grid


def cmd_tune(args, cfg: AppConfig) -> int:
    families = _families(args.model)
    if len(families) != 1:
        raise UsageError("tune takes exactly one --model")
    family = families[0]
    grid = _load_grid(args.grid, family)
    series = _read_series(args.data or cfg.data_path)
    folds = make_folds(series.index, args.folds)
    base = _spec(cfg, family, args)
    evaluate = run_cv
    if args.dry_run:
        # Enumerate and rank without fitting: every configuration scores NaN.
        from .evaluation import CvReport
        evaluate = lambda s, spec, f, c: CvReport(spec, [])  # noqa: E731
    try:
        best, entries = grid_search(series, family, grid, folds, base.params, base.seed,
                                    cfg.calendar, evaluate=evaluate)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"grid does not fit {family.value} parameters: {exc}") from None
    out = _out_dir(args, cfg)
    path = out / f"leaderboard_{family.value}.csv"
    path.write_text(leaderboard_csv(entries))
    (out / f"best_{family.value}.json").write_text(json.dumps(_jsonable(best), indent=1) + "\n")
    print(f"{len(entries)} configurations ranked -> {path}")
    print(f"best: {best}")
    return 0


def cmd_forecast(args, cfg: AppConfig) -> int:
    family = _families(args.model)[0]
    category = ContainerCategory.parse(args.category)
    store = artifact_path(cfg.artifacts_dir, category, family)
    data = args.data or cfg.data_path
    if args.artifact or (data is None and store.exists()):
        artifact = load_artifact(args.artifact or store,
                                 _read_series(data) if data is not None else None)
        fitted = artifact.fit
    else:
        series = _read_series(data)
        if series.category is not category:
            series = StockSeries(series.index, series.values, category)
        fitted = fit(_spec(cfg, family, args), series, cfg.calendar)
        if not args.no_save:
            save_artifact(fitted, store, series)
            print(f"saved artifact -> {store}", file=sys.stderr)
    if args.hours:
        result = predict(fitted, args.hours).with_calendar(cfg.calendar)
    else:
        result = forecast_business_days(fitted, args.days, cfg.calendar)
    text = forecast_json(result)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"forecast_{result.category.value}_{family.value}"
        (out / f"{stem}.json").write_text(text + "\n")
        rows = ["timestamp,mean,business_day"] + [
            f"{p['ts']},{p['mean']!r},{int(p['business_day'])}" for p in result.to_dict()["points"]]
        (out / f"{stem}.csv").write_text("\n".join(rows) + "\n")
        print(f"{result.horizon_hours} hourly points ({result.to_dict()['business_hours']} on "
              f"business days) -> {out / stem}.json/.csv")
    else:
        print(text)
    return 0


def cmd_serve(args, cfg: AppConfig) -> int:
    from .service import serve

    if args.host:
        cfg.host = args.host
    if args.port is not None:
        cfg.port = args.port
    if args.artifacts:
        cfg.artifacts_dir = Path(args.artifacts)
    serve(cfg)
    return 0


def cmd_synth(args, cfg: AppConfig) -> int:
    spec = REFERENCE_SPEC
    changes = {k: getattr(args, k) for k in ("start", "end", "base_level", "daily_amp",
                                              "weekly_amp", "yearly_amp", "noise_sigma")
               if getattr(args, k) is not None}
    changes["seed"] = cfg.seed if args.seed is None else args.seed
    try:
        spec = replace(spec, **changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    if args.kind in ("series", "both"):
        series = generate_series(spec)
        (out / "synthetic_stock.csv").write_text(series.to_csv())
        print(f"series: {len(series)} hours -> {out / 'synthetic_stock.csv'}")
    if args.kind in ("log", "both"):
        log = generate_event_log(spec, args.dwell)
        (out / "synthetic_events.csv").write_text(log.to_csv())
        print(f"event log: {len(log)} events -> {out / 'synthetic_events.csv'}")
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--data", help="input CSV (event log for ingest, stock series otherwise)")
    common.add_argument("--tz", help="zone for zoneless timestamps (overrides config)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="ecforecast", description="Empty-container stock forecasting")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="gate-event log -> hourly stock CSVs")
    p.add_argument("--category", default="all",
                   choices=["all"] + [c.value for c in ContainerCategory])
    p.add_argument("--start", help="first hour of the series (default: earliest gate-in)")
    p.add_argument("--end", help="hour after the last one (default: after observation end)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", parents=[common], help="ADF test and correlogram")
    p.add_argument("--lags", type=int, default=48)
    p.set_defaults(func=cmd_analyze)

    for name, helptext, func in (("evaluate", "monthly sliding-window cross-validation",
                                  cmd_evaluate),
                                 ("tune", "grid search ranked by mean RMSE", cmd_tune)):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--model", default="naive" if name == "evaluate" else "decomposable",
                       help="family or comma-separated families")
        p.add_argument("--preset", choices=["paper", "default", "reduced"],
                       help="parameter preset (default: config file, else paper)")
        p.add_argument("--folds", type=int, default=5)
        if name == "evaluate":
            p.add_argument("--no-plots", action="store_true")
        else:
            p.add_argument("--grid", default="paper", help="'paper' or a JSON grid file")
            p.add_argument("--dry-run", action="store_true",
                           help="enumerate the grid without fitting")
        p.set_defaults(func=func)

    p = sub.add_parser("forecast", parents=[common], help="fit or load a model and forecast")
    p.add_argument("--model", default="lstm")
    p.add_argument("--preset", choices=["paper", "default", "reduced"])
    p.add_argument("--category", default="standard",
                   choices=[c.value for c in ContainerCategory])
    p.add_argument("--days", type=int, default=5, help="business days to cover")
    p.add_argument("--hours", type=int, help="fixed horizon in hours instead of --days")
    p.add_argument("--artifact", help="load this artifact instead of fitting")
    p.add_argument("--no-save", action="store_true", help="do not store the fitted artifact")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("serve", parents=[common], help="HTTP forecast endpoint")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--artifacts", help="artifact directory (overrides config)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic test data")
    p.add_argument("--kind", choices=["series", "log", "both"], default="both")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--base-level", type=float)
    p.add_argument("--daily-amp", type=float)
    p.add_argument("--weekly-amp", type=float)
    p.add_argument("--yearly-amp", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--dwell", type=float, default=12.0, help="mean dwell hours for the log")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        cfg = load_config(args.config)
        if args.tz:
            cfg.timezone = args.tz
            cfg.validate()
        if getattr(args, "days", 1) is not None and getattr(args, "days", 1) < 1:
            raise UsageError("--days must be at least 1")
        if getattr(args, "hours", None) is not None and args.hours < 1:
            raise UsageError("--hours must be at least 1")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (ForecastError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
