"""Closed-form delay formulas for the non-aggregated and aggregated systems."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    AllocationRatio,
    ModelError,
    SystemParams,
    UnstableQueue,
    check_alpha,
    closed_endpoints,
    feasible_alpha_interval,
)


class Branch(enum.Enum):
    BOUNDARY_ALL_VLC = "BoundaryAllVlc"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class NonAggSolution:
    alpha_opt: AllocationRatio
    min_delay: float
    branch: Branch
    # True when the analytic stationary point fell outside the feasible
    # interval and an endpoint/clamped value was returned instead.
    clamped: bool = False


@dataclass(frozen=True)
class AggApproxSolution:
    alpha_approx: AllocationRatio
    wifi_mean_delay: float
    vlc_mean_delay: float


def mm1_mean_delay(arrival_rate: float, service_rate: float) -> float:
    """Mean sojourn time of an M/M/1 queue."""
    if service_rate <= 0 or arrival_rate < 0:
        raise ValueError("rates must be non-negative and service_rate positive")
    if arrival_rate >= service_rate:
        raise UnstableQueue(
            f"arrival rate {arrival_rate:g} >= service rate {service_rate:g}", queue="mm1"
        )
    return 1.0 / (service_rate - arrival_rate)


def nonagg_mean_delay(params: SystemParams, alpha) -> float:
    """Average delay when a fraction ``alpha`` of whole requests goes to WiFi
    and the rest is spread evenly over the VLC APs."""
    a = check_alpha(params, alpha)
    lam, mu = params.lam, params.mu
    wifi = a / (params.b1 / mu - a * lam)
    vlc = (1.0 - a) / (params.b2 / mu - (1.0 - a) * lam / params.n)
    return wifi + vlc


def _nonagg_condition(params: SystemParams) -> float:
    n, b2 = params.n, params.b2
    return (b2 * n / params.load) * (1.0 - math.sqrt(params.beta * n))


def nonagg_interior_alpha(params: SystemParams) -> float:
    """Stationary point of the non-aggregated objective (may lie outside [0, 1])."""
    b1, b2, n, load = params.b1, params.b2, params.n, params.load
    num = math.sqrt(b1) * (load + n * math.sqrt(b1 * b2) - b2 * n)
    return num / (load * (math.sqrt(b1) + n * math.sqrt(b2)))


def nonagg_interior_alpha_textbook(params: SystemParams) -> float:
    """Same stationary point written in terms of beta = b1 / (b2 n)."""
    beta, n, b2, load = params.beta, params.n, params.b2, params.load
    sb = math.sqrt(beta)
    num = load * sb / (b2 * n) + sb * (math.sqrt(beta * n) - 1.0)
    return num / (load * (sb + math.sqrt(n)) / (b2 * n))


def _nonagg_interior_delay(params: SystemParams) -> float:
    beta, n, b2, lam, load = params.beta, params.n, params.b2, params.lam, params.load
    num = load * (1 + n) - b2 * n * (1.0 - math.sqrt(beta * n)) ** 2
    return num / (lam * (b2 * n * (beta + 1.0) - load))


def nonagg_optimal_alpha(params: SystemParams) -> NonAggSolution:
    lo, hi = feasible_alpha_interval(params)
    if _nonagg_condition(params) >= 1.0:
        delay = params.mu * params.n / (params.b2 * params.n - params.load)
        return NonAggSolution(AllocationRatio(0.0, lo, hi), delay, Branch.BOUNDARY_ALL_VLC)

    alpha = nonagg_interior_alpha(params)
    if lo < alpha < hi:
        delay = _nonagg_interior_delay(params)
        return NonAggSolution(AllocationRatio(alpha, lo, hi), delay, Branch.INTERIOR)

    # Stationary point outside the stable region: compare the clamped point
    # with any closed endpoint carrying zero load on one side.
    width = hi - lo
    candidates = [min(max(alpha, lo + 1e-12 * width), hi - 1e-12 * width)]
    zero_ok, one_ok = closed_endpoints(params)
    if zero_ok:
        candidates.append(0.0)
    if one_ok:
        candidates.append(1.0)
    best = min(candidates, key=lambda a: nonagg_mean_delay(params, a))
    branch = Branch.BOUNDARY_ALL_VLC if best == 0.0 else Branch.INTERIOR
    return NonAggSolution(
        AllocationRatio(best, lo, hi), nonagg_mean_delay(params, best), branch, clamped=True
    )


def nonagg_bruteforce_min(params: SystemParams, grid_step: float = 1e-6) -> NonAggSolution:
    """Minimise the non-aggregated objective on a uniform alpha grid.

    Independent check of :func:`nonagg_optimal_alpha`; evaluates the delay
    expression directly, vectorised over the grid.
    """
    lo, hi = feasible_alpha_interval(params)
    if not 0 < grid_step < hi - lo:
        raise ValueError(f"grid_step must lie in (0, {hi - lo:g})")
    m = int(math.ceil((hi - lo) / grid_step)) + 1
    grid = np.linspace(lo, hi, m)
    # open ends are unstable unless the queue on that side is idle
    keep = np.ones(m, dtype=bool)
    keep[0], keep[-1] = closed_endpoints(params)
    grid = grid[keep]

    lam, mu, n = params.lam, params.mu, params.n
    values = grid / (params.b1 / mu - grid * lam)
    values += (1.0 - grid) / (params.b2 / mu - (1.0 - grid) * lam / n)
    i = int(np.argmin(values))
    alpha = float(grid[i])
    branch = Branch.BOUNDARY_ALL_VLC if alpha == 0.0 else Branch.INTERIOR
    return NonAggSolution(AllocationRatio(alpha, lo, hi), float(values[i]), branch)


def agg_per_queue_mean_delays(params: SystemParams, alpha) -> tuple[float, float]:
    """Mean WiFi-piece and VLC-piece delays when each request is split with
    WiFi share ``alpha``."""
    a = check_alpha(params, alpha)
    mu, load = params.mu, params.load
    wifi = a * mu / (params.b1 - a * load)
    vlc = (1.0 - a) * mu / (params.b2 - (1.0 - a) * load / params.n)
    return wifi, vlc


def split_ratio_root(load: float, b1: float, b2: float, n: float) -> float:
    """Smaller root of a x^2 - (a + b1 + b2) x + b1 = 0 with a = load (1 - 1/n).

    Written as 2c / (-b + sqrt(b^2 - 4ac)) so that a -> 0 (n -> 1) is exact;
    at a == 0 it reduces to b1 / (b1 + b2).
    """
    a = load * (1.0 - 1.0 / n)
    b = -(b1 + b2 + a)
    c = b1
    disc = b * b - 4.0 * a * c
    if disc <= 0:
        raise ModelError(f"non-positive discriminant {disc!r} in split-ratio quadratic")
    return 2.0 * c / (-b + math.sqrt(disc))


def split_ratio_roots_textbook(load: float, b1: float, b2: float, n: float) -> tuple[float, float]:
    """Both roots in the (-b -/+ sqrt(disc)) / 2a form; requires n > 1."""
    a = load * (1.0 - 1.0 / n)
    b = -(b1 + b2 + a)
    c = b1
    root = math.sqrt(b * b - 4.0 * a * c)
    return (-b - root) / (2.0 * a), (-b + root) / (2.0 * a)


def agg_split_ratio_approx(params: SystemParams) -> AggApproxSolution:
    """Splitting ratio that equalises the mean WiFi and VLC piece delays."""
    if params.n == 1:
        alpha = params.b1 / (params.b1 + params.b2)
    else:
        alpha = split_ratio_root(params.load, params.b1, params.b2, params.n)
    lo, hi = feasible_alpha_interval(params)
    if not lo < alpha < hi:
        raise ModelError(f"split ratio {alpha!r} outside feasible interval ({lo!r}, {hi!r})")
    wifi, vlc = agg_per_queue_mean_delays(params, alpha)
    return AggApproxSolution(AllocationRatio(alpha, lo, hi), wifi, vlc)


def agg_analytic_lower_bound(params: SystemParams, alpha) -> float:
    """max(E[D_wifi], E[D_vlc]); never exceeds E[max(D_wifi, D_vlc)]."""
    return max(agg_per_queue_mean_delays(params, alpha))


def agg_analytic_upper_bound(params: SystemParams, alpha) -> float:
    """E[D_wifi] + E[D_vlc]; never below E[max(D_wifi, D_vlc)]."""
    return sum(agg_per_queue_mean_delays(params, alpha))
