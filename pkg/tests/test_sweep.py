import csv
import math

import pytest

from hybrid_delay.model import SystemParams
from hybrid_delay.sim import RunConfig
from hybrid_delay.sweep import (
    CSV_HEADER,
    DEFAULT_GRIDS,
    Metric,
    SweepSpec,
    Varied,
    agg_ratio_sweep,
    approx_penalty_sweep,
    default_specs,
    read_csv,
    run_sweep,
)

TINY = RunConfig.with_requests(5_000, replications=4, master_seed=3)


def test_default_grids():
    assert DEFAULT_GRIDS[Varied.LAMBDA] == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    assert DEFAULT_GRIDS[Varied.MU][0] == 30 and DEFAULT_GRIDS[Varied.MU][-1] == 120
    assert DEFAULT_GRIDS[Varied.B1] == tuple(float(v) for v in range(10, 100, 10))
    assert DEFAULT_GRIDS[Varied.B2] == (60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0)
    specs = default_specs(Metric.AGG_OVER_NONAGG_RATIO)
    assert [s.varied for s in specs] == list(Varied)
    assert all(s.n_values == tuple(range(1, 11)) for s in specs)
    assert specs[0].base == SystemParams(0.5, 90, 50, 100, 1)


def test_ratio_sweep_completeness_and_skips():
    spec = SweepSpec(Varied.B1, (30.0, 100.0, 120.0), Metric.AGG_OVER_NONAGG_RATIO, n_values=(1, 3), run=TINY)
    table = agg_ratio_sweep(spec)
    assert len(table.rows) == 6
    assert [(r.varied_value, r.n) for r in table.rows] == [
        (30.0, 1), (30.0, 3), (100.0, 1), (100.0, 3), (120.0, 1), (120.0, 3)]
    statuses = [r.status for r in table.rows]
    assert statuses == ["ok", "ok"] + ["skipped_infeasible"] * 4
    for r in table.ok_rows():
        assert 0 < r.metric_value < 1 and r.ci_halfwidth > 0


def test_infeasible_load_is_skipped():
    spec = SweepSpec(Varied.LAMBDA, (0.5, 2.0), Metric.AGG_OVER_NONAGG_RATIO, n_values=(1, 2), run=TINY)
    rows = agg_ratio_sweep(spec).rows
    # 2.0 * 90 = 180 >= 50 + 1 * 100 but < 50 + 2 * 100
    assert [r.status for r in rows] == ["ok", "ok", "skipped_infeasible", "ok"]


def test_penalty_sweep_small():
    spec = SweepSpec(Varied.LAMBDA, (0.3, 0.5), Metric.APPROX_PENALTY_PERCENT, n_values=(1, 4), run=TINY)
    table = approx_penalty_sweep(spec)
    assert len(table.rows) == 4
    for r in table.rows:
        assert r.status == "ok"
        assert r.metric_value > -1.0 and math.isfinite(r.ci_halfwidth)
    single_ap = [r for r in table.rows if r.n == 1]
    assert all(abs(r.metric_value) <= max(r.ci_halfwidth, 0.1) for r in single_ap)


def test_metric_mismatch():
    spec = SweepSpec(Varied.MU, (90.0,), Metric.AGG_OVER_NONAGG_RATIO, n_values=(1,), run=TINY)
    with pytest.raises(ValueError):
        approx_penalty_sweep(spec)
    with pytest.raises(ValueError):
        agg_ratio_sweep(SweepSpec(Varied.MU, (90.0,), Metric.APPROX_PENALTY_PERCENT, n_values=(1,), run=TINY))


def test_rerun_and_threads_reproduce(tmp_path):
    spec = SweepSpec(Varied.B2, (80.0, 160.0), Metric.APPROX_PENALTY_PERCENT, n_values=(2, 5), run=TINY)
    a = run_sweep(spec).to_csv(tmp_path / "a.csv").read_bytes()
    b = run_sweep(spec).to_csv(tmp_path / "b.csv").read_bytes()
    c = run_sweep(spec, workers=3).to_csv(tmp_path / "c.csv").read_bytes()
    assert a == b == c


def test_csv_format(tmp_path):
    spec = SweepSpec(Varied.B1, (30.0, 110.0), Metric.AGG_OVER_NONAGG_RATIO, n_values=(2,), run=TINY)
    table = agg_ratio_sweep(spec)
    path = table.to_csv(tmp_path / "ratio.csv")
    raw = path.read_text(encoding="utf-8")
    lines = raw.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    rows = list(csv.reader(lines[1:]))
    assert rows[0][:4] == ["agg_over_nonagg_ratio", "b1", "30", "2"]
    assert rows[0][6] == "ok" and rows[0][4] == f"{table.rows[0].metric_value:.9g}"
    assert rows[1] == ["agg_over_nonagg_ratio", "b1", "110", "2", "", "", "skipped_infeasible"]
    back = read_csv(path)
    assert back.metric is Metric.AGG_OVER_NONAGG_RATIO and back.varied is Varied.B1
    assert back.rows[0].metric_value == pytest.approx(table.rows[0].metric_value, rel=1e-8)
    assert back.rows[1].status == "skipped_infeasible"
