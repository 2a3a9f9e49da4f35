"""Command-line entry point: ``hybrid-delay {analyze,simulate,sweep}``.

Scenario and sweep files are flat ``key = value`` text; ``#`` starts a comment.
Exit codes: 0 success, 2 input/validation error, 3 queue instability.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analytic
from .model import (
    ModelError,
    SystemParams,
    UnstableQueue,
    ValidationError,
    feasible_alpha_interval,
)
from .sim import RunConfig, simulate_aggregated, simulate_nonaggregated
from .sweep import BASE_PARAMS, DEFAULT_GRIDS, DEFAULT_N_VALUES, Metric, SweepSpec, Varied, run_sweep

PARAM_KEYS = ("lambda", "mu", "b1", "b2", "n")
RUN_KEYS = ("requests", "warmup", "replications", "seed")
SCENARIO_KEYS = set(PARAM_KEYS) | set(RUN_KEYS) | {"alpha"}
SWEEP_KEYS = {"lambda", "mu", "b1", "b2"} | set(RUN_KEYS) | {
    "metric", "varied", "values", "n_values", "search_tolerance",
}
METRIC_ALIASES = {
    "penalty": Metric.APPROX_PENALTY_PERCENT,
    "ratio": Metric.AGG_OVER_NONAGG_RATIO,
    **{m.value: m for m in Metric},
}


class InputError(Exception):
    pass


def read_keyvalue(path, allowed: set[str]) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split(sep, 1))
        key = key.lower()
        if key not in allowed:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise InputError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _number(values, key, kind=float):
    try:
        return kind(values[key])
    except ValueError as exc:
        raise InputError(f"{key}: cannot parse {values[key]!r} as {kind.__name__}") from exc


def _run_config(values: dict, args) -> RunConfig:
    overrides = {
        "requests": args.requests, "warmup": args.warmup,
        "replications": args.replications, "seed": args.seed,
    }
    merged = {k: _number(values, k, int) for k in RUN_KEYS if k in values}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    if "warmup" in merged:
        kwargs["warmup_requests"] = merged["warmup"]
    if "replications" in merged:
        kwargs["replications"] = merged["replications"]
    if "seed" in merged:
        kwargs["master_seed"] = merged["seed"]
    try:
        if "requests" in merged:
            return RunConfig.with_requests(merged["requests"], **kwargs)
        return RunConfig(**kwargs)
    except ValueError as exc:
        raise InputError(f"run configuration: {exc}") from exc


def _params(values: dict) -> SystemParams:
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise InputError(f"scenario is missing {', '.join(missing)}")
    return SystemParams(
        _number(values, "lambda"), _number(values, "mu"), _number(values, "b1"),
        _number(values, "b2"), _number(values, "n", int),
    )


def cmd_analyze(args) -> int:
    params = _params(read_keyvalue(args.scenario, SCENARIO_KEYS))
    lo, hi = feasible_alpha_interval(params)
    non = analytic.nonagg_optimal_alpha(params)
    agg = analytic.agg_split_ratio_approx(params)
    lines = [
        f"lambda                  {params.lam:.6f}",
        f"mu                      {params.mu:.6f}",
        f"b1                      {params.b1:.6f}",
        f"b2                      {params.b2:.6f}",
        f"n                       {params.n}",
        f"beta                    {params.beta:.6f}",
        f"feasible_alpha          ({lo:.6f}, {hi:.6f})",
        f"nonagg_branch           {non.branch.value}{' (clamped)' if non.clamped else ''}",
        f"nonagg_alpha_opt        {non.alpha_opt.alpha:.6f}",
        f"nonagg_min_delay_s      {non.min_delay:.6f}",
        f"agg_alpha_approx        {agg.alpha_approx.alpha:.6f}",
        f"agg_wifi_mean_delay_s   {agg.wifi_mean_delay:.6f}",
        f"agg_vlc_mean_delay_s    {agg.vlc_mean_delay:.6f}",
    ]
    print("\n".join(lines))
    return 0


def cmd_simulate(args) -> int:
    values = read_keyvalue(args.scenario, SCENARIO_KEYS)
    params = _params(values)
    config = _run_config(values, args)
    if args.alpha is not None:
        alpha = args.alpha
    elif "alpha" in values:
        alpha = _number(values, "alpha")
    else:
        raise InputError("no alpha given (use --alpha or an 'alpha' scenario key)")
    if args.out is not None and not Path(args.out).parent.is_dir():
        raise InputError(f"output directory {Path(args.out).parent} does not exist")

    simulate = simulate_aggregated if args.system == "agg" else simulate_nonaggregated
    result = simulate(params, alpha, config, workers=args.workers)
    print(f"system                  {args.system}")
    print(f"alpha                   {float(alpha):.6f}")
    print(f"mean_delay_s            {result.mean:.6f}")
    print(f"ci95_halfwidth_s        {result.ci_halfwidth_95:.6f}")
    print(f"ci95                    ({result.ci[0]:.6f}, {result.ci[1]:.6f})")
    print(f"variance_s2             {result.variance:.6f}")
    print(f"count                   {result.count}")
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write("system,alpha,mean,variance,count,ci_halfwidth\n")
            fh.write(
                f"{args.system},{float(alpha):.9g},{result.mean:.9g},{result.variance:.9g},"
                f"{result.count},{result.ci_halfwidth_95:.9g}\n"
            )
    return 0


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc


def sweep_specs_from_file(path, args) -> list[SweepSpec]:
    values = read_keyvalue(path, SWEEP_KEYS)
    metric_name = values.get("metric", "penalty").lower()
    if metric_name not in METRIC_ALIASES:
        raise InputError(f"unknown metric {metric_name!r}")
    metric = METRIC_ALIASES[metric_name]
    varied_name = values.get("varied", "all").lower()
    if varied_name == "all":
        varied = list(Varied)
        if "values" in values:
            raise InputError("'values' requires a single varied parameter")
    else:
        try:
            varied = [Varied(varied_name)]
        except ValueError as exc:
            raise InputError(f"unknown varied parameter {varied_name!r}") from exc

    base_kwargs = {}
    for key in ("lambda", "mu", "b1", "b2"):
        if key in values:
            base_kwargs["lam" if key == "lambda" else key] = _number(values, key)
    base = BASE_PARAMS.replace(**base_kwargs)
    n_values = (
        tuple(int(v) for v in _float_list(values["n_values"])) if "n_values" in values else DEFAULT_N_VALUES
    )
    tol = _number(values, "search_tolerance") if "search_tolerance" in values else 1e-3
    run = _run_config(values, args)
    return [
        SweepSpec(
            v,
            _float_list(values["values"]) if "values" in values else DEFAULT_GRIDS[v],
            metric,
            base=base,
            n_values=n_values,
            run=run,
            search_tolerance=tol,
        )
        for v in varied
    ]


def cmd_sweep(args) -> int:
    out = Path(args.out)
    if not out.is_dir():
        raise InputError(f"output directory {out} does not exist")
    specs = sweep_specs_from_file(args.spec, args)
    if args.plot:
        from .plotting import plot_sweep
    for spec in specs:
        table = run_sweep(spec, workers=args.workers)
        stem = f"{spec.metric.value}_{spec.varied.value}"
        csv_path = table.to_csv(out / f"{stem}.csv")
        print(f"wrote {csv_path.name} ({len(table.ok_rows())}/{len(table.rows)} ok)")
        if args.plot:
            fig_path = plot_sweep(table, out / f"{stem}.png")
            print(f"wrote {fig_path.name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-delay", description="Delay analysis of a hybrid WiFi/VLC downlink."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--requests", type=int, help="requests per replication")
        p.add_argument("--warmup", type=int, help="requests discarded per replication")
        p.add_argument("--replications", type=int)
        p.add_argument("--workers", type=int, default=1, help="parallel worker threads")

    p = sub.add_parser("analyze", help="closed-form optimum and approximate split")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulate one system at a given alpha")
    p.add_argument("scenario")
    p.add_argument("--system", choices=("nonagg", "agg"), default="agg")
    p.add_argument("--alpha", type=float)
    p.add_argument("--out", help="optional CSV file for the statistics")
    run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a penalty or ratio sweep to CSV")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="existing output directory")
    p.add_argument("--plot", action="store_true", help="also render a PNG per sweep")
    run_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValidationError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except UnstableQueue as exc:
        print(f"error: UnstableQueue: {exc}", file=sys.stderr)
        return 3
    except ModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
