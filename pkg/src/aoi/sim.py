"""Discrete-event simulation of G/G/1/1 under dropping and preemption.

The system holds at most one update: under *dropping* an arrival that finds
the server busy is discarded; under *preemption in service* it replaces the
update being served, which restarts service with a fresh draw.  A delivery
resets the instantaneous age to the sojourn time of the delivered update,
so the age follows a sawtooth.

Cycles are delimited by *successful arrivals* (arrivals whose update is
eventually delivered).  Measurement starts at the first delivery; the
reported value is the exact sawtooth time-average over the window from the
first delivery to the delivery closing the last cycle, accumulated one
inter-delivery trapezoid at a time.  Every cycle record satisfies
``g == w + busy`` where ``busy`` is the service time of the delivered
update and ``w`` is the gap from that delivery to the next successful
arrival (pure idle time under dropping; idle plus preempted work under
preemption).

Tie rule: a completion scheduled at exactly an arrival instant is processed
first, so the completion succeeds and the arrival finds an idle server.
This matches the strict ccdf convention used by the analytic estimators.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Literal, NamedTuple, Optional, Sequence

import numpy as np

from .distributions import Distribution
from .errors import DivergentAge

__all__ = [
    "Discipline",
    "SimConfig",
    "CycleRecord",
    "AgeEstimate",
    "CycleStatistics",
    "Moment",
    "run_simulation",
    "cycle_statistics",
    "Z95",
]

Z95 = 1.959963984540054  # 97.5% standard normal quantile
_BATCHES = 30
_CHUNK = 8192


class Discipline(str, Enum):
    DROPPING = "dropping"
    PREEMPTION = "preemption"


@dataclass(frozen=True)
class SimConfig:
    """One simulation run, fully determined by its fields."""

    interarrival: Distribution
    service: Distribution
    discipline: Discipline
    target_cycles: int
    seed: int = 0
    max_events: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "discipline", Discipline(self.discipline))
        if self.target_cycles < 1:
            raise ValueError(f"target_cycles must be >= 1, got {self.target_cycles}")
        if self.max_events is not None and self.max_events < self.target_cycles:
            raise ValueError("max_events must be >= target_cycles")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")

    @property
    def effective_max_events(self) -> int:
        return self.max_events if self.max_events is not None \
            else 1000 * self.target_cycles


@dataclass(frozen=True)
class CycleRecord:
    """Per-cycle observables between consecutive successful arrivals.

    g     effective interarrival time (sum of the k arrival gaps)
    w     gap from this cycle's delivery to the next successful arrival
    busy  service time of the delivered update
    k     number of arrivals consumed by the cycle
    """

    g: float
    w: float
    busy: float
    k: int


@dataclass(frozen=True)
class AgeEstimate:
    """Point estimate of the time-average age with a 95% half-width."""

    value: float
    ci_half_width: float
    cycles_used: int
    method: Literal["simulation", "analytic", "bound"]


class Moment(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True)
class CycleStatistics:
    """Empirical cycle moments with standard errors.

    ``p_hat = 1 / E[k]`` estimates the per-arrival success probability,
    which is meaningful under preemption where k is geometric.
    """

    g_mean: Moment
    g_second_moment: Moment
    k_mean: Moment
    k_second_moment: Moment
    w_mean: Moment
    busy_mean: Moment
    p_hat: Moment


class _Stream:
    """Chunked sampler: per-draw cost stays low inside the event loop."""

    __slots__ = ("dist", "rng", "buf", "pos")

    def __init__(self, dist: Distribution, rng: np.random.Generator):
        self.dist = dist
        self.rng = rng
        self.buf: list[float] = []
        self.pos = 0

    def next(self) -> float:
        if self.pos >= len(self.buf):
            self.buf = self.dist.sample_array(self.rng, _CHUNK).tolist()
            self.pos = 0
        v = self.buf[self.pos]
        self.pos += 1
        return v


class _Trace:
    def __init__(self, path):
        self.fh = open(path, "w", newline="")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(["time", "event", "age_after_event"])

    def row(self, time: float, event: str, age: float):
        self.writer.writerow([repr(time), event, repr(age)])

    def close(self):
        self.fh.close()


def run_simulation(config: SimConfig, trace_path=None
                   ) -> tuple[AgeEstimate, list[CycleRecord]]:
    """Simulate until ``target_cycles`` cycles close and return the
    time-average age plus the per-cycle records.

    The run needs ``target_cycles + 1`` deliveries (a cycle closes at the
    *next* successful arrival).  Raises :class:`DivergentAge` if the event
    budget is exhausted first.  With ``trace_path`` set, every event is
    appended to a CSV ``(time, event, age_after_event)``; the age before
    the first delivery is measured from a virtual age zero at time 0.
    """
    trace = _Trace(trace_path) if trace_path is not None else None
    try:
        return _simulate(config, trace)
    finally:
        if trace is not None:
            trace.close()


def _simulate(config, trace):
    rng = np.random.default_rng(config.seed)
    arrivals = _Stream(config.interarrival, rng)
    services = _Stream(config.service, rng)
    preemptive = config.discipline is Discipline.PREEMPTION
    need = config.target_cycles + 1
    max_events = config.effective_max_events

    t_arr = arrivals.next()     # absolute time of the next arrival
    n_arrivals = 1              # arrivals drawn so far (t_arr included)
    busy = False
    svc_end = svc_gen = 0.0
    svc_idx = 0                 # arrival index of the update in service
    newest_gen = 0.0            # generation time feeding the age (trace)

    # Previous successful arrival (dropping closes cycles at arrivals).
    prev_gen = 0.0
    prev_idx = 0
    prev_busy = 0.0
    prev_delivery = 0.0
    have_prev = False

    n_deliveries = 0
    last_delivery = 0.0
    records: list[CycleRecord] = []
    areas: list[float] = []
    lengths: list[float] = []
    events = 0

    while n_deliveries < need:
        events += 1
        if events > max_events:
            raise DivergentAge(
                f"no {need} deliveries within {max_events} events "
                f"({n_deliveries} seen); success probability may be zero")
        if busy and svc_end <= t_arr:
            # Completion first on ties: the delivery succeeds and the
            # simultaneous arrival will find an idle server.
            d, g = svc_end, svc_gen
            n_deliveries += 1
            if n_deliveries >= 2:
                dt = d - last_delivery
                areas.append(0.5 * ((last_delivery - newest_gen)
                                    + (d - newest_gen)) * dt)
                lengths.append(dt)
            if preemptive:
                if have_prev:
                    records.append(CycleRecord(
                        g=g - prev_gen, w=g - prev_delivery,
                        busy=prev_busy, k=svc_idx - prev_idx))
                prev_gen, prev_idx, prev_busy = g, svc_idx, d - g
                prev_delivery = d
                have_prev = True
            newest_gen = g
            last_delivery = d
            busy = False
            if trace:
                trace.row(d, "departure", d - newest_gen)
        else:
            # Arrival event.
            if busy:
                if preemptive:
                    svc_gen, svc_idx = t_arr, n_arrivals
                    svc_end = t_arr + services.next()
                    if trace:
                        trace.row(t_arr, "arrival_preempt", t_arr - newest_gen)
                else:
                    if trace:
                        trace.row(t_arr, "arrival_dropped", t_arr - newest_gen)
            else:
                svc_gen, svc_idx = t_arr, n_arrivals
                svc_end = t_arr + services.next()
                busy = True
                if not preemptive:
                    # Arrival at an idle server is the successful arrival.
                    if have_prev:
                        records.append(CycleRecord(
                            g=t_arr - prev_gen, w=t_arr - prev_delivery,
                            busy=prev_busy, k=n_arrivals - prev_idx))
                    prev_gen, prev_idx = t_arr, n_arrivals
                    prev_busy = svc_end - t_arr
                    prev_delivery = svc_end
                    have_prev = True
                if trace:
                    trace.row(t_arr, "arrival_success", t_arr - newest_gen)
            t_arr += arrivals.next()
            n_arrivals += 1

    value = sum(areas) / sum(lengths)
    ci = _batch_ci(areas, lengths, value)
    estimate = AgeEstimate(value=value, ci_half_width=ci,
                           cycles_used=len(records), method="simulation")
    return estimate, records


def _batch_ci(areas: Sequence[float], lengths: Sequence[float],
              value: float) -> float:
    """95% half-width by batch means over cycles.

    Cycles are i.i.d. regenerative, so grouping them into up to 30 batches
    and using the spread of the batch ratios is conservative.
    """
    n = len(areas)
    b = min(_BATCHES, n)
    if b < 2:
        return math.inf
    bounds = np.linspace(0, n, b + 1).astype(int)
    a = np.asarray(areas)
    ln = np.asarray(lengths)
    ratios = np.array([a[lo:hi].sum() / ln[lo:hi].sum()
                       for lo, hi in zip(bounds[:-1], bounds[1:])])
    var = np.sum((ratios - value) ** 2) / (b - 1)
    return Z95 * math.sqrt(var / b)


def _moment(xs: np.ndarray) -> Moment:
    n = len(xs)
    return Moment(float(xs.mean()), float(xs.std(ddof=1) / math.sqrt(n)))


def cycle_statistics(records: Iterable[CycleRecord]) -> CycleStatistics:
    """Sample means and second moments of the cycle observables."""
    recs = list(records)
    if len(recs) < 2:
        raise ValueError(f"need at least 2 cycle records, got {len(recs)}")
    g = np.array([r.g for r in recs])
    k = np.array([float(r.k) for r in recs])
    w = np.array([r.w for r in recs])
    busy = np.array([r.busy for r in recs])
    k_mean = _moment(k)
    return CycleStatistics(
        g_mean=_moment(g),
        g_second_moment=_moment(g * g),
        k_mean=k_mean,
        k_second_moment=_moment(k * k),
        w_mean=_moment(w),
        busy_mean=_moment(busy),
        p_hat=Moment(1.0 / k_mean.value,
                     k_mean.stderr / k_mean.value**2),
    )
