"""Run experiments and write their reports.

A report is two files sharing a stem: ``<stem>.json`` with the full record
and ``<stem>.csv`` with one row per plotted number. CSV columns::

    x,y,metric,value,error

``x``/``y`` are the horizons ``T``/``S`` (or the scanned parameters for
``lemma-integral`` and the argument for ``bessel-check``). ``error`` is a
standard error or spread where one exists and empty otherwise. Numbers use
17 significant digits, which round-trips doubles exactly.

Wall-clock time is returned on the report object but kept out of both files,
so identical configs give byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chaos import chaos_diagnostics, mean_denominator, normalized_mean_denominator, scaled_variance
from .config import ExperimentConfig
from .errors import ExperimentError, FouSheetError
from .estimator import lse_oracle, lse_pathwise, mc_consistency
from .fbs import GridSpec, HurstPair, increment_cov, sample_increments
from .ou_sheet import solve_by_kernel
from .rng import substream
from .singular import finiteness_scan
from .specfun import j0_integral, j0_series

log = logging.getLogger(__name__)

SCHEMA = "fou-sheet-report/1"
COLUMNS = ("x", "y", "metric", "value", "error")
WORKERS_ENV = "FOU_SHEET_WORKERS"


@dataclass
class RunReport:
    config: dict
    config_hash: str
    rows: list
    summary: dict
    warnings: list
    version: str = __version__
    wall_clock: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA,
            "version": self.version,
            "config": self.config,
            "config_hash": self.config_hash,
            "warnings": list(self.warnings),
            "summary": self.summary,
            "columns": list(COLUMNS),
            "rows": [[_json_num(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for x, y, metric, value, error in self.rows:
            w.writerow([_fmt(x), _fmt(y), metric, _fmt(value), _fmt(error)])
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def config_hash(cfg: dict) -> str:
    """Git blob hash of the canonical JSON form of ``cfg``."""
    data = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            log.warning("ignoring %s=%r (not an integer)", WORKERS_ENV, raw)
        else:
            if n >= 1:
                return n
            log.warning("ignoring %s=%r (must be >= 1)", WORKERS_ENV, raw)
    return os.cpu_count() or 1


def _grids(cfg: ExperimentConfig):
    for t, s in cfg.horizons:
        nt, ns = cfg.cells((t, s))
        yield GridSpec(t, s, nt, ns)


def _run_simulate(cfg, pool):
    hurst = HurstPair(cfg.alpha, cfg.beta)
    rows, summary = [], {}
    for b, grid in enumerate(_grids(cfg)):
        cov = increment_cov(grid, hurst)
        cov.factors()
        draws = list(pool.map(lambda r: sample_increments(cov, cfg.seed, r, block=b).sum(), range(cfg.replications)))
        corner = np.array(draws)
        emp = float(np.mean(corner**2))
        se = float(np.std(corner**2, ddof=1) / math.sqrt(len(corner))) if len(corner) > 1 else None
        exact = grid.horizon_t ** (2 * cfg.alpha) * grid.horizon_s ** (2 * cfg.beta)
        rows.append([grid.horizon_t, grid.horizon_s, "corner_second_moment", emp, se])
        rows.append([grid.horizon_t, grid.horizon_s, "corner_variance_exact", exact, None])
    return rows, summary


def _run_estimate(cfg, pool):
    hurst = HurstPair(cfg.alpha, cfg.beta)
    rows = []
    for b, grid in enumerate(_grids(cfg)):
        cov = increment_cov(grid, hurst)
        for r in range(cfg.replications):
            d = sample_increments(cov, cfg.seed, r, block=b)
            res = lse_oracle(d, grid, hurst, cfg.theta, cov=cov, seed=cfg.seed)
            path = lse_pathwise(solve_by_kernel(d, grid, cfg.theta), grid)
            t, s = grid.horizon_t, grid.horizon_s
            rows.append([t, s, f"theta_hat_oracle[{r}]", res.theta_hat, None])
            rows.append([t, s, f"theta_hat_pathwise[{r}]", path.theta_hat, None])
            rows.append([t, s, f"nominator[{r}]", res.nominator, None])
            rows.append([t, s, f"denominator[{r}]", res.denominator, None])
    return rows, {}


def _run_consistency(cfg, pool):
    hurst = HurstPair(cfg.alpha, cfg.beta)
    rep = mc_consistency(list(_grids(cfg)), hurst, cfg.theta, cfg.replications, cfg.seed, executor=pool)
    rows = []
    for s in rep.summaries:
        rows.append([s.horizon_t, s.horizon_s, "median_abs_error", s.median_abs_error, s.iqr])
        rows.append([s.horizon_t, s.horizon_s, "mean_error", s.mean_error, None])
        rows.append([s.horizon_t, s.horizon_s, "failures", float(s.failures), None])
    meds = [s.median_abs_error for s in rep.summaries]
    summary = {
        "median_abs_error_strictly_decreasing": all(b < a for a, b in zip(meds, meds[1:])),
        "failures": sum(s.failures for s in rep.summaries),
    }
    return rows, summary


def _run_chaos(cfg, pool):
    hurst = HurstPair(cfg.alpha, cfg.beta)
    rows = []
    series = {"scaled0": [], "scaled_eps": [], "gap": [], "den": []}
    for grid in _grids(cfg):
        t, s = grid.horizon_t, grid.horizon_s
        cov = increment_cov(grid, hurst)
        if cfg.kind == "denominator-growth":
            raw = mean_denominator(grid, cfg.theta, cov)
            norm = normalized_mean_denominator(grid, cfg.theta, cov, hurst, cfg.epsilon)
            rows.append([t, s, "mean_denominator", raw, None])
            rows.append([t, s, "normalized_mean_denominator", norm, None])
            series["den"].append(norm)
            continue
        d = chaos_diagnostics(grid, hurst, cfg.theta, cov)
        rows.append([t, s, "sigma2", d.sigma2, None])
        if cfg.kind == "variance-scaling":
            s0 = scaled_variance(d, hurst, 0.0)
            se = scaled_variance(d, hurst, cfg.epsilon)
            rows.append([t, s, "scaled_variance_eps0", s0, None])
            rows.append([t, s, "scaled_variance_eps", se, None])
            series["scaled0"].append(s0)
            series["scaled_eps"].append(se)
        else:
            rows.append([t, s, "kappa4", d.kappa4, None])
            rows.append([t, s, "normality_gap", d.normality_gap, None])
            series["gap"].append(d.normality_gap)
    summary = {}
    if series["scaled0"]:
        v = series["scaled0"]
        summary["max_consecutive_ratio_eps0"] = max((b / a for a, b in zip(v, v[1:])), default=None)
        e = series["scaled_eps"]
        summary["eps_strictly_decreasing"] = all(b < a for a, b in zip(e, e[1:]))
    if series["gap"]:
        g = series["gap"]
        summary["gap_last_over_first"] = g[-1] / g[0]
    if series["den"]:
        v = series["den"]
        summary["normalized_strictly_increasing"] = all(b > a for a, b in zip(v, v[1:]))
    return rows, summary


def _run_lemma(cfg, pool):
    table = finiteness_scan(cfg.lemma_alphas, cfg.lemma_betas, cfg.samples, cfg.seed)
    rows, failed = [], 0
    for a, row in zip(cfg.lemma_alphas, table):
        for b, res in zip(cfg.lemma_betas, row):
            if isinstance(res, Exception):
                failed += 1
                rows.append([a, b, "integral_I_failed", float("nan"), None])
            else:
                rows.append([a, b, "integral_I", res.estimate, res.standard_error])
    return rows, {"failed_cells": failed}


def _run_bessel(cfg, pool):
    xs = np.sort(substream(cfg.seed).uniform(0.0, 25.0, size=cfg.samples))
    ser = j0_series(xs)
    itg = j0_integral(xs)
    diff = np.abs(ser - itg)
    rows = []
    for x, a, b, d in zip(xs, ser, itg, diff):
        rows.append([float(x), None, "series", float(a), None])
        rows.append([float(x), None, "integral", float(b), None])
        rows.append([float(x), None, "abs_diff", float(d), None])
    return rows, {"max_abs_diff": float(diff.max())}


_RUNNERS = {
    "simulate": _run_simulate,
    "estimate": _run_estimate,
    "consistency": _run_consistency,
    "variance-scaling": _run_chaos,
    "denominator-growth": _run_chaos,
    "normality-gap": _run_chaos,
    "lemma-integral": _run_lemma,
    "bessel-check": _run_bessel,
}


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Run ``cfg`` and return its report.

    Errors raised by the numerical modules are re-raised as
    :class:`ExperimentError` naming the experiment.
    """
    conf = cfg.to_dict()
    start = time.perf_counter()
    n = worker_count() if workers is None else workers
    try:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows, summary = _RUNNERS[cfg.kind](cfg, pool)
    except (FouSheetError, ArithmeticError, ValueError) as exc:
        raise ExperimentError(f"{cfg.kind} failed: {exc}") from exc
    return RunReport(
        config=conf,
        config_hash=config_hash(conf),
        rows=rows,
        summary=summary,
        warnings=list(cfg.warnings),
        wall_clock=time.perf_counter() - start,
    )


def report_paths(path) -> tuple[Path, Path]:
    p = Path(path)
    stem = p.with_suffix("") if p.suffix in (".json", ".csv") else p
    return stem.with_name(stem.name + ".json"), stem.with_name(stem.name + ".csv")


def write_report(report: RunReport, path) -> tuple[Path, Path]:
    """Write ``<stem>.json`` and ``<stem>.csv``; returns both paths."""
    jpath, cpath = report_paths(path)
    for target, text in ((jpath, report.to_json()), (cpath, report.to_csv())):
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write report to {target}: {exc.strerror}") from exc
    return jpath, cpath


def read_report(path) -> dict:
    with open(report_paths(path)[0], encoding="utf-8") as fh:
        return json.load(fh)


__all__ = ["RunReport", "config_hash", "read_report", "run_experiment", "write_report"]
