"""Parameter sweeps: approximation penalty and aggregated/non-aggregated delay ratio.

Each sweep varies one of lambda, mu, b1, b2 around the base point while N runs
over ``n_values``; every cell shares the run's master seed.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .analytic import agg_split_ratio_approx, nonagg_optimal_alpha
from .model import SystemParams, ValidationError
from .sim import AggregatedObjective, RunConfig, optimize_alpha_simulated, simulate_aggregated

CSV_HEADER = ("metric", "varied_param", "varied_value", "n", "value", "ci_halfwidth", "status")


class Varied(enum.Enum):
    LAMBDA = "lambda"
    MU = "mu"
    B1 = "b1"
    B2 = "b2"

    @property
    def field_name(self) -> str:
        return "lam" if self is Varied.LAMBDA else self.value


class Metric(enum.Enum):
    APPROX_PENALTY_PERCENT = "approx_penalty_percent"
    AGG_OVER_NONAGG_RATIO = "agg_over_nonagg_ratio"


BASE_PARAMS = SystemParams(lam=0.5, mu=90.0, b1=50.0, b2=100.0, n=1)

DEFAULT_GRIDS: dict[Varied, tuple[float, ...]] = {
    Varied.LAMBDA: tuple(round(0.1 * k, 10) for k in range(1, 11)),
    Varied.MU: tuple(float(v) for v in range(30, 121, 10)),
    Varied.B1: tuple(float(v) for v in range(10, 91, 10)),
    Varied.B2: tuple(float(v) for v in range(60, 201, 20)),
}
DEFAULT_N_VALUES = tuple(range(1, 11))


@dataclass(frozen=True)
class SweepSpec:
    varied: Varied
    values: tuple[float, ...]
    metric: Metric
    base: SystemParams = BASE_PARAMS
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    run: RunConfig = field(default_factory=RunConfig)
    search_tolerance: float = 1e-3


@dataclass(frozen=True)
class SweepRow:
    varied_value: float
    n: int
    metric_value: float
    ci_halfwidth: float
    status: str  # "ok" or "skipped_infeasible"


@dataclass(frozen=True)
class SweepTable:
    metric: Metric
    varied: Varied
    rows: tuple[SweepRow, ...]

    def ok_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status == "ok"]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in self.rows:
                ok = row.status == "ok"
                writer.writerow([
                    self.metric.value,
                    self.varied.value,
                    _fmt(row.varied_value),
                    row.n,
                    _fmt(row.metric_value) if ok else "",
                    _fmt(row.ci_halfwidth) if ok else "",
                    row.status,
                ])
        return path


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def read_csv(path) -> SweepTable:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        records = list(csv.DictReader(fh))
    if not records:
        raise ValueError(f"{path}: no rows")
    rows = tuple(
        SweepRow(
            float(r["varied_value"]),
            int(r["n"]),
            float(r["value"]) if r["value"] else math.nan,
            float(r["ci_halfwidth"]) if r["ci_halfwidth"] else math.nan,
            r["status"],
        )
        for r in records
    )
    return SweepTable(Metric(records[0]["metric"]), Varied(records[0]["varied_param"]), rows)


def default_specs(metric: Metric, run: RunConfig | None = None, n_values=DEFAULT_N_VALUES) -> list[SweepSpec]:
    run = run or RunConfig()
    return [SweepSpec(v, DEFAULT_GRIDS[v], metric, n_values=tuple(n_values), run=run) for v in Varied]


def _cell_params(spec: SweepSpec, value: float, n: int) -> SystemParams | None:
    try:
        return spec.base.replace(**{spec.varied.field_name: value, "n": n})
    except ValidationError:
        return None


def _paired_halfwidth(a: Sequence[float], b: Sequence[float]) -> float:
    diff = np.asarray(a) - np.asarray(b)
    if diff.size < 2:
        return math.inf
    return float(stats.t.ppf(0.975, diff.size - 1) * diff.std(ddof=1) / math.sqrt(diff.size))


def penalty_cell(params: SystemParams, run: RunConfig, search_tolerance: float = 1e-3) -> tuple[float, float]:
    """Percent extra simulated delay at the approximate split over the
    simulated optimum, with a paired 95% half-width."""
    obj = AggregatedObjective(params, run)
    _, best = optimize_alpha_simulated(params, run, search_tolerance, objective=obj)
    approx = obj.stats(agg_split_ratio_approx(params).alpha_approx.alpha)
    value = 100.0 * (approx.mean - best.mean) / best.mean
    half = 100.0 * _paired_halfwidth(approx.replication_means, best.replication_means) / best.mean
    return value, half


def ratio_cell(params: SystemParams, run: RunConfig) -> tuple[float, float]:
    """Simulated aggregated delay at the approximate split over the analytic
    non-aggregated minimum."""
    agg = simulate_aggregated(params, agg_split_ratio_approx(params).alpha_approx.alpha, run)
    denom = nonagg_optimal_alpha(params).min_delay
    return agg.mean / denom, agg.ci_halfwidth_95 / denom


def _sweep(spec: SweepSpec, compute, workers: int) -> SweepTable:
    cells = [(v, n) for v in spec.values for n in spec.n_values]

    def job(cell) -> SweepRow:
        value, n = cell
        params = _cell_params(spec, value, n)
        if params is None:
            return SweepRow(value, n, math.nan, math.nan, "skipped_infeasible")
        metric_value, half = compute(params)
        return SweepRow(value, n, metric_value, half, "ok")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, cells))
    else:
        rows = [job(c) for c in cells]
    return SweepTable(spec.metric, spec.varied, tuple(rows))


def approx_penalty_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.metric is not Metric.APPROX_PENALTY_PERCENT:
        raise ValueError("approx_penalty_sweep needs metric APPROX_PENALTY_PERCENT")
    return _sweep(spec, lambda p: penalty_cell(p, spec.run, spec.search_tolerance), workers)


def agg_ratio_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.metric is not Metric.AGG_OVER_NONAGG_RATIO:
        raise ValueError("agg_ratio_sweep needs metric AGG_OVER_NONAGG_RATIO")
    return _sweep(spec, lambda p: ratio_cell(p, spec.run), workers)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    if spec.metric is Metric.APPROX_PENALTY_PERCENT:
        return approx_penalty_sweep(spec, workers)
    return agg_ratio_sweep(spec, workers)
