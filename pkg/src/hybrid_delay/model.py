"""Scenario parameters for the hybrid WiFi/VLC downlink and their feasibility rules.

Units throughout the package: seconds, megabits, megabits per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ModelError(ValueError):
    """Base class for every model-level error raised by the package."""


class ValidationError(ModelError):
    """Scenario values violate a modelling assumption."""


class NonPositiveParameter(ValidationError):
    pass


class CapacityOrderViolation(ValidationError):
    pass


class InfeasibleLoad(ValidationError):
    pass


class UnstableQueue(ModelError):
    """Offered load to a queue is not strictly below its service capacity."""

    def __init__(self, message: str, queue: str = ""):
        super().__init__(message)
        self.queue = queue


@dataclass(frozen=True)
class DerivedQuantities:
    beta: float
    traffic_intensity: float
    wifi_utilization: float
    vlc_utilization: float


@dataclass(frozen=True)
class SystemParams:
    """Arrival rate ``lam`` (1/s), mean request size ``mu`` (Mb), WiFi capacity
    ``b1`` (Mb/s), per-AP VLC capacity ``b2`` (Mb/s) and VLC AP count ``n``.

    Validated on construction. ``enforce_order=False`` lifts the ``b1 < b2``
    requirement (used for symmetric-capacity checks only).
    """

    lam: float
    mu: float
    b1: float
    b2: float
    n: int
    enforce_order: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        for name in ("lam", "mu", "b1", "b2"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)) or value <= 0:
                raise NonPositiveParameter(f"{name} must be a positive finite number, got {value!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise NonPositiveParameter(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.enforce_order and self.b1 >= self.b2:
            raise CapacityOrderViolation(
                f"WiFi capacity b1={self.b1:g} must be below VLC capacity b2={self.b2:g}"
            )
        load = self.lam * self.mu
        if load >= self.b1 + self.n * self.b2:
            raise InfeasibleLoad(
                f"offered load lam*mu={load:g} is not below total capacity "
                f"b1+n*b2={self.b1 + self.n * self.b2:g}"
            )

    @property
    def load(self) -> float:
        """Offered load lam*mu in Mb/s."""
        return self.lam * self.mu

    @property
    def beta(self) -> float:
        return self.b1 / (self.b2 * self.n)

    @property
    def derived(self) -> DerivedQuantities:
        return DerivedQuantities(
            beta=self.beta,
            traffic_intensity=self.load,
            wifi_utilization=self.load / self.b1,
            vlc_utilization=self.load / (self.n * self.b2),
        )

    def replace(self, **changes) -> "SystemParams":
        values = dict(lam=self.lam, mu=self.mu, b1=self.b1, b2=self.b2, n=self.n,
                      enforce_order=self.enforce_order)
        values.update(changes)
        return SystemParams(**values)


@dataclass(frozen=True)
class AllocationRatio:
    """A WiFi share ``alpha`` together with the open interval of stabilising shares."""

    alpha: float
    alpha_lo: float
    alpha_hi: float

    def __float__(self) -> float:
        return float(self.alpha)

    @property
    def feasible_interval(self) -> tuple[float, float]:
        return (self.alpha_lo, self.alpha_hi)


def validate_params(lam, mu, b1, b2, n, *, enforce_order: bool = True) -> SystemParams:
    return SystemParams(lam, mu, b1, b2, n, enforce_order=enforce_order)


def feasible_alpha_interval(params: SystemParams) -> tuple[float, float]:
    """Return ``(alpha_lo, alpha_hi)`` such that both technologies are stable
    for every alpha strictly between them."""
    load = params.load
    lo = max(0.0, 1.0 - params.n * params.b2 / load)
    hi = min(1.0, params.b1 / load)
    return lo, hi


def closed_endpoints(params: SystemParams) -> tuple[bool, bool]:
    """Whether alpha = 0 and alpha = 1 are themselves stable allocations."""
    return params.load / params.n < params.b2, params.load < params.b1


def check_alpha(params: SystemParams, alpha: float) -> float:
    """Return ``alpha`` as float if both queues are stable under it.

    A closed endpoint is accepted only when the queue on that side carries no
    load (alpha == 0 for WiFi, alpha == 1 for VLC).
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise UnstableQueue(f"alpha={alpha!r} outside [0, 1]", queue="alpha")
    if alpha > 0.0 and alpha * params.load >= params.b1:
        raise UnstableQueue(
            f"WiFi queue unstable at alpha={alpha:g}: load {alpha * params.load:g} >= b1={params.b1:g}",
            queue="wifi",
        )
    if alpha < 1.0 and (1.0 - alpha) * params.load / params.n >= params.b2:
        raise UnstableQueue(
            f"VLC queue unstable at alpha={alpha:g}: per-AP load "
            f"{(1.0 - alpha) * params.load / params.n:g} >= b2={params.b2:g}",
            queue="vlc",
        )
    return alpha


def make_ratio(params: SystemParams, alpha: float) -> AllocationRatio:
    lo, hi = feasible_alpha_interval(params)
    return AllocationRatio(check_alpha(params, alpha), lo, hi)
