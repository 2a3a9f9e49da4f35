"""Replicated simulation of the non-aggregated and aggregated systems.

Every FIFO queue is a single server, so per-job delays come straight from the
Lindley recursion; no event calendar is needed. Replication ``r`` draws from a
PCG64 stream seeded by ``SeedSequence(master_seed, spawn_key=(r,))``, which
makes results independent of execution order and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy import stats

from .model import SystemParams, UnstableQueue, check_alpha, closed_endpoints, feasible_alpha_interval

DEFAULT_REQUESTS = 200_000
DEFAULT_REPLICATIONS = 20
DEFAULT_WARMUP_FRACTION = 0.1


@dataclass(frozen=True)
class RunConfig:
    num_requests: int = DEFAULT_REQUESTS
    warmup_requests: int = int(DEFAULT_REQUESTS * DEFAULT_WARMUP_FRACTION)
    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = 12345

    def __post_init__(self):
        if self.num_requests < 1:
            raise ValueError("num_requests must be positive")
        if not 0 <= self.warmup_requests < self.num_requests:
            raise ValueError("warmup_requests must lie in [0, num_requests)")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @classmethod
    def with_requests(cls, num_requests: int, **kwargs) -> "RunConfig":
        """Config whose warm-up defaults to 10% of ``num_requests``."""
        kwargs.setdefault("warmup_requests", int(num_requests * DEFAULT_WARMUP_FRACTION))
        return cls(num_requests=num_requests, **kwargs)


@dataclass(frozen=True)
class RequestSample:
    arrival_time: float
    size: float
    vlc_index: int


@dataclass(frozen=True)
class Workload:
    """Column-wise request trace of one replication.

    ``route_draw`` holds one U(0,1) variate per request; the non-aggregated
    system sends request i to WiFi iff ``route_draw[i] < alpha`` so that every
    alpha sees the same random numbers.
    """

    arrival_time: np.ndarray
    size: np.ndarray
    vlc_index: np.ndarray
    route_draw: np.ndarray

    def __len__(self) -> int:
        return len(self.arrival_time)

    def __getitem__(self, i: int) -> RequestSample:
        return RequestSample(float(self.arrival_time[i]), float(self.size[i]), int(self.vlc_index[i]))


@dataclass(frozen=True)
class DelayStats:
    mean: float
    variance: float
    count: int
    ci_halfwidth_95: float
    replication_means: tuple[float, ...] = ()

    @property
    def ci(self) -> tuple[float, float]:
        return (self.mean - self.ci_halfwidth_95, self.mean + self.ci_halfwidth_95)


def replication_rng(master_seed: int, replication_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(replication_index,))
    return np.random.Generator(np.random.PCG64(seq))


def generate_workload(params: SystemParams, config: RunConfig, replication_index: int) -> Workload:
    rng = replication_rng(config.master_seed, replication_index)
    m = config.num_requests
    arrivals = np.cumsum(rng.exponential(1.0 / params.lam, m))
    sizes = rng.exponential(params.mu, m)
    vlc_index = rng.integers(0, params.n, m, dtype=np.int64)
    route = rng.random(m)
    return Workload(arrivals, sizes, vlc_index, route)


@njit(cache=True, nogil=True)
def _lindley(arrivals, services, out):
    w = 0.0
    for i in range(arrivals.shape[0]):
        if i > 0:
            w = w + services[i - 1] - (arrivals[i] - arrivals[i - 1])
            if w < 0.0:
                w = 0.0
        out[i] = w + services[i]


@njit(cache=True, nogil=True)
def _lindley_multi(arrivals, services, queue, n_queues, out):
    # one pass over interleaved jobs, Lindley state kept per queue
    last_arrival = np.zeros(n_queues)
    last_wait = np.zeros(n_queues)
    last_service = np.zeros(n_queues)
    seen = np.zeros(n_queues, dtype=np.bool_)
    for i in range(arrivals.shape[0]):
        q = queue[i]
        if seen[q]:
            w = last_wait[q] + last_service[q] - (arrivals[i] - last_arrival[q])
            if w < 0.0:
                w = 0.0
        else:
            w = 0.0
            seen[q] = True
        last_arrival[q] = arrivals[i]
        last_wait[q] = w
        last_service[q] = services[i]
        out[i] = w + services[i]


def lindley_fifo_delays(arrivals, service_times) -> np.ndarray:
    """System delay (wait + service) of each job at a FIFO single server."""
    a = np.ascontiguousarray(arrivals, dtype=np.float64)
    s = np.ascontiguousarray(service_times, dtype=np.float64)
    if a.shape != s.shape or a.ndim != 1:
        raise ValueError("arrivals and service_times must be 1-D and of equal length")
    if a.size > 1 and not np.all(np.diff(a) > 0):
        raise ValueError("arrival times must be strictly increasing")
    out = np.empty_like(a)
    _lindley(a, s, out)
    return out


def multi_queue_delays(arrivals, service_times, queue_index, n_queues: int) -> np.ndarray:
    """Per-job delays for jobs spread over ``n_queues`` independent FIFO servers."""
    out = np.empty(len(arrivals))
    _lindley_multi(
        np.ascontiguousarray(arrivals, dtype=np.float64),
        np.ascontiguousarray(service_times, dtype=np.float64),
        np.ascontiguousarray(queue_index, dtype=np.int64),
        int(n_queues),
        out,
    )
    return out


def nonaggregated_delays(params: SystemParams, alpha: float, workload: Workload) -> np.ndarray:
    to_wifi = workload.route_draw < alpha
    # WiFi is queue n, VLC APs are 0..n-1
    queue = np.where(to_wifi, params.n, workload.vlc_index)
    service = np.where(to_wifi, workload.size / params.b1, workload.size / params.b2)
    return multi_queue_delays(workload.arrival_time, service, queue, params.n + 1)


def aggregated_delays(params: SystemParams, alpha: float, workload: Workload) -> np.ndarray:
    wifi = np.empty(len(workload))
    _lindley(workload.arrival_time, alpha * workload.size / params.b1, wifi)
    vlc = multi_queue_delays(
        workload.arrival_time, (1.0 - alpha) * workload.size / params.b2, workload.vlc_index, params.n
    )
    return np.maximum(wifi, vlc)


def summarize(per_replication: Sequence[np.ndarray]) -> DelayStats:
    """Pool post-warm-up delays; CI from the spread of replication means."""
    means = np.array([d.mean() for d in per_replication])
    pooled = np.concatenate(per_replication)
    r = len(means)
    if r > 1:
        t = stats.t.ppf(0.975, r - 1)
        half = float(t * means.std(ddof=1) / math.sqrt(r))
    else:
        half = math.inf
    var = float(pooled.var(ddof=1)) if pooled.size > 1 else 0.0
    return DelayStats(float(pooled.mean()), var, int(pooled.size), half, tuple(means.tolist()))


def _run(config: RunConfig, one_replication: Callable[[int], np.ndarray], workers: int) -> DelayStats:
    def job(r: int) -> np.ndarray:
        return one_replication(r)[config.warmup_requests:]

    indices = range(config.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, indices))
    else:
        results = [job(r) for r in indices]
    return summarize(results)


def simulate_nonaggregated(params: SystemParams, alpha, config: RunConfig, workers: int = 1) -> DelayStats:
    a = check_alpha(params, alpha)
    return _run(
        config, lambda r: nonaggregated_delays(params, a, generate_workload(params, config, r)), workers
    )


def simulate_aggregated(params: SystemParams, alpha, config: RunConfig, workers: int = 1) -> DelayStats:
    a = check_alpha(params, alpha)
    return _run(
        config, lambda r: aggregated_delays(params, a, generate_workload(params, config, r)), workers
    )


def simulate_mm1(arrival_rate: float, service_rate: float, config: RunConfig) -> DelayStats:
    """Plain M/M/1 queue with exponential service of the given rate."""
    if arrival_rate >= service_rate:
        raise UnstableQueue(f"arrival rate {arrival_rate:g} >= service rate {service_rate:g}")

    def one(r: int) -> np.ndarray:
        rng = replication_rng(config.master_seed, r)
        arrivals = np.cumsum(rng.exponential(1.0 / arrival_rate, config.num_requests))
        service = rng.exponential(1.0 / service_rate, config.num_requests)
        return lindley_fifo_delays(arrivals, service)

    return _run(config, one, 1)


class AggregatedObjective:
    """Simulated mean aggregated delay as a function of alpha, with the
    workloads generated once and reused for every alpha (common random numbers)."""

    def __init__(self, params: SystemParams, config: RunConfig):
        self.params = params
        self.config = config
        self.workloads = [generate_workload(params, config, r) for r in range(config.replications)]
        self._cache: dict[float, DelayStats] = {}

    def stats(self, alpha: float) -> DelayStats:
        alpha = check_alpha(self.params, alpha)
        if alpha not in self._cache:
            w = self.config.warmup_requests
            self._cache[alpha] = summarize(
                [aggregated_delays(self.params, alpha, wl)[w:] for wl in self.workloads]
            )
        return self._cache[alpha]

    def __call__(self, alpha: float) -> float:
        return self.stats(alpha).mean

    @property
    def evaluated(self) -> dict[float, DelayStats]:
        return dict(self._cache)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_search(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Minimise a unimodal ``f`` on [lo, hi] until the bracket is at most ``tol`` wide.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    best = min((f1, x1), (f2, x2))
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
            best = min(best, (f1, x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
            best = min(best, (f2, x2))
    return best[1], best[0]


def optimize_alpha_simulated(
    params: SystemParams,
    config: RunConfig,
    search_tolerance: float = 1e-3,
    grid_points: int = 9,
    objective: AggregatedObjective | None = None,
) -> tuple[float, DelayStats]:
    """Alpha minimising the simulated mean aggregated delay.

    A coarse grid over the feasible interval picks the bracket around its best
    point, so a non-unimodal sample objective cannot trap the golden-section
    refinement in the wrong basin.
    """
    if search_tolerance <= 0:
        raise ValueError("search_tolerance must be positive")
    obj = objective if objective is not None else AggregatedObjective(params, config)
    lo, hi = feasible_alpha_interval(params)
    margin = 1e-6 * (hi - lo)
    zero_ok, one_ok = closed_endpoints(params)
    lo_e = lo if zero_ok else lo + margin
    hi_e = hi if one_ok else hi - margin

    grid = np.linspace(lo_e, hi_e, grid_points)
    values = [obj(float(a)) for a in grid]
    k = int(np.argmin(values))
    a, b = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, grid_points - 1)])
    if b - a > search_tolerance:
        golden_section_search(obj, a, b, search_tolerance)

    alpha_star = min(obj.evaluated.items(), key=lambda kv: kv[1].mean)[0]
    return alpha_star, obj.stats(alpha_star)
