"""Parameter-sweep harness comparing simulation, exact formulas and bounds.

A sweep fixes the service law and a template for the interarrival law with
one swept parameter, then evaluates a chosen set of estimators at every
grid point.  Results land in a flat row table that serializes to CSV
(``param,estimator,value,ci,applicability``) and renders to a simple SVG
line chart with confidence bands.  Per-point seeds derive from
``(base_seed, point_index)``, so appending grid points never perturbs
existing ones, and identical specs reproduce byte-identical outputs.

Estimator tags: ``simulate``, ``exact``, ``corollary1`` (general dropping
bound from the K moments), ``gm11`` (dropping bound for exponential
service), ``mg11`` (mean-matched exponential-arrival ordering bound, upper
for DMRL interarrivals, reversed under IMRL), ``corollary2`` (preemption
bound).  Points where an estimator raises a domain error are recorded as
divergent rather than aborting the sweep.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import analytic, bounds
from .analytic import DEFAULT_OPTIONS, EstimatorOptions
from .distributions import Distribution, Exponential, classify_mrl, from_dict
from .errors import AoiError
from .sim import Discipline, SimConfig, run_simulation

__all__ = [
    "ESTIMATOR_TAGS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "emit_chart",
]

ESTIMATOR_TAGS = ("simulate", "exact", "corollary1", "gm11", "mg11", "corollary2")
_DROPPING_ONLY = {"corollary1", "gm11", "mg11"}
_PREEMPTION_ONLY = {"corollary2"}
CSV_HEADER = ("param", "estimator", "value", "ci", "applicability")


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep of the interarrival law."""

    name: str
    discipline: Discipline
    interarrival_template: Mapping[str, object]
    swept_param: str
    grid: tuple[float, ...]
    service: Distribution
    estimators: tuple[str, ...]
    options: EstimatorOptions = DEFAULT_OPTIONS
    sim_cycles: int = 20_000
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "discipline", Discipline(self.discipline))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "interarrival_template",
                           dict(self.interarrival_template))
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError(f"grid must be strictly increasing, got {self.grid}")
        if not self.estimators:
            raise ValueError("need at least one estimator")
        for tag in self.estimators:
            if tag not in ESTIMATOR_TAGS:
                raise ValueError(f"unknown estimator tag {tag!r}")
            if tag in _DROPPING_ONLY and self.discipline is not Discipline.DROPPING:
                raise ValueError(f"estimator {tag!r} applies to dropping only")
            if tag in _PREEMPTION_ONLY and self.discipline is not Discipline.PREEMPTION:
                raise ValueError(f"estimator {tag!r} applies to preemption only")
        if "gm11" in self.estimators and not isinstance(self.service, Exponential):
            raise ValueError("gm11 needs an exponential service law")
        if self.swept_param in self.interarrival_template:
            raise ValueError(f"swept parameter {self.swept_param!r} must not "
                             "appear in the template")
        if self.sim_cycles < 1:
            raise ValueError("sim_cycles must be >= 1")
        self.point_distribution(self.grid[0])  # validate the template early

    def point_distribution(self, value: float) -> Distribution:
        spec = dict(self.interarrival_template)
        spec[self.swept_param] = value
        return from_dict(spec)

    def to_dict(self) -> dict:
        opts = self.options
        return {
            "name": self.name,
            "discipline": self.discipline.value,
            "interarrival": dict(self.interarrival_template),
            "swept_param": self.swept_param,
            "grid": list(self.grid),
            "service": self.service.to_dict(),
            "estimators": list(self.estimators),
            "options": {
                "mc_samples": opts.mc_samples,
                "k_truncation_epsilon": opts.k_truncation_epsilon,
                "quadrature_rel_tol": opts.quadrature_rel_tol,
                "seed": opts.seed,
                "force_generic": opts.force_generic,
            },
            "sim_cycles": self.sim_cycles,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SweepSpec":
        opts = EstimatorOptions(**data.get("options", {}))
        return cls(
            name=data["name"],
            discipline=Discipline(data["discipline"]),
            interarrival_template=data["interarrival"],
            swept_param=data["swept_param"],
            grid=tuple(data["grid"]),
            service=from_dict(data["service"]),
            estimators=tuple(data["estimators"]),
            options=opts,
            sim_cycles=int(data.get("sim_cycles", 20_000)),
            base_seed=int(data.get("base_seed", 0)),
        )

    @classmethod
    def from_json_file(cls, path) -> "SweepSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class SweepRow:
    """One (grid point, estimator) cell; ``value is None`` marks a
    divergent point."""

    param: float
    estimator: str
    value: Optional[float]
    ci: Optional[float]
    applicability: str = ""


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def column(self, estimator: str) -> list[SweepRow]:
        return [r for r in self.rows if r.estimator == estimator]


def _point_seeds(base_seed: int, index: int) -> tuple[int, int]:
    """(simulation seed, estimator seed), stable in the point index."""
    ss = np.random.SeedSequence((base_seed, index))
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)


def _evaluate(tag: str, spec: SweepSpec, param: float,
              interarrival: Distribution,
              sim_seed: int, mc_seed: int) -> SweepRow:
    service = spec.service
    opts = EstimatorOptions(
        mc_samples=spec.options.mc_samples,
        k_truncation_epsilon=spec.options.k_truncation_epsilon,
        quadrature_rel_tol=spec.options.quadrature_rel_tol,
        seed=mc_seed,
        force_generic=spec.options.force_generic,
    )
    if tag == "simulate":
        est, _ = run_simulation(SimConfig(
            interarrival=interarrival, service=service,
            discipline=spec.discipline, target_cycles=spec.sim_cycles,
            seed=sim_seed))
        return SweepRow(param, tag, est.value, est.ci_half_width)
    if tag == "exact":
        if spec.discipline is Discipline.DROPPING:
            est = analytic.exact_age_dropping(interarrival, service, opts)
        else:
            est = analytic.exact_age_preemption(interarrival, service, opts)
        return SweepRow(param, tag, est.value, est.ci_half_width)
    if tag == "corollary1":
        k_mean, k_second = analytic.moments_of_K_dropping(interarrival, service, opts)
        report = bounds.ub_dropping_general(interarrival, service,
                                            (k_mean, k_second))
        # Propagate the Monte Carlo error of the K moments linearly.
        d_k2 = interarrival.mean() / (2.0 * k_mean.value)
        d_k1 = -interarrival.mean() * k_second.value / (2.0 * k_mean.value**2)
        ci = analytic.Z95 * math.hypot(d_k2 * k_second.stderr,
                                       d_k1 * k_mean.stderr)
        return SweepRow(param, tag, report.value, ci,
                        report.applicability.value)
    if tag == "gm11":
        report = bounds.ub_dropping_gm(interarrival, service.rate)  # type: ignore[attr-defined]
        return SweepRow(param, tag, report.value, 0.0,
                        report.applicability.value)
    if tag == "mg11":
        verdict = classify_mrl(interarrival).verdict
        report = bounds.mg11_ordering_bound(interarrival.mean(), service,
                                            interarrival_verdict=verdict)
        return SweepRow(param, tag, report.value, 0.0,
                        report.applicability.value)
    if tag == "corollary2":
        report = bounds.ub_preemption(interarrival, service, opts)
        return SweepRow(param, tag, report.value, 0.0,
                        report.applicability.value)
    raise ValueError(f"unknown estimator tag {tag!r}")


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every requested estimator at every grid point.

    Domain errors at a point mark that cell divergent instead of failing
    the sweep.
    """
    rows: list[SweepRow] = []
    for index, value in enumerate(spec.grid):
        interarrival = spec.point_distribution(value)
        sim_seed, mc_seed = _point_seeds(spec.base_seed, index)
        for tag in spec.estimators:
            try:
                row = _evaluate(tag, spec, value, interarrival, sim_seed, mc_seed)
            except AoiError:
                row = SweepRow(value, tag, None, None)
            rows.append(row)
    return SweepResult(rows=tuple(rows))


def emit_csv(result: SweepResult, path) -> None:
    """Write ``param,estimator,value,ci,applicability`` rows; floats use
    ``repr`` so re-reading reproduces them exactly."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in result.rows:
                writer.writerow([
                    repr(r.param),
                    r.estimator,
                    "divergent" if r.value is None else repr(r.value),
                    "" if r.ci is None else repr(r.ci),
                    r.applicability,
                ])
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    """Inverse of :func:`emit_csv`."""
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header!r} in {path}")
            for param, estimator, value, ci, applicability in reader:
                rows.append(SweepRow(
                    param=float(param),
                    estimator=estimator,
                    value=None if value == "divergent" else float(value),
                    ci=None if ci == "" else float(ci),
                    applicability=applicability,
                ))
    except OSError as exc:
        raise OSError(f"cannot read sweep CSV from {path}: {exc}") from exc
    return SweepResult(rows=tuple(rows))


# ----------------------------------------------------------------------
# SVG rendering. Hand-rolled so identical inputs give identical bytes.

_PALETTE = {
    "simulate": "#1f77b4",
    "exact": "#d62728",
    "corollary1": "#2ca02c",
    "gm11": "#9467bd",
    "mg11": "#ff7f0e",
    "corollary2": "#8c564b",
}
_W, _H = 840, 520
_ML, _MR, _MT, _MB = 72, 28, 46, 54


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _series(result: SweepResult) -> dict[str, list[SweepRow]]:
    out: dict[str, list[SweepRow]] = {}
    for r in result.rows:
        out.setdefault(r.estimator, []).append(r)
    return out


def _scales(series: Mapping[str, list[SweepRow]]):
    xs = [r.param for rows in series.values() for r in rows]
    ys, bands = [], []
    for rows in series.values():
        for r in rows:
            if r.value is not None:
                ys.append(r.value)
                if r.ci:
                    bands.extend((r.value - r.ci, r.value + r.ci))
    ys.extend(bands)
    if not xs:
        raise ValueError("cannot chart an empty sweep result")
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        pad = max(abs(x_lo) * 0.5, 0.5)
        x_lo, x_hi = x_lo - pad, x_hi + pad
    if not ys:
        y_lo, y_hi = 0.0, 1.0
    else:
        y_lo, y_hi = min(ys), max(ys)
        if y_hi == y_lo:
            pad = max(abs(y_lo) * 0.1, 0.5)
            y_lo, y_hi = y_lo - pad, y_hi + pad
        else:
            pad = 0.06 * (y_hi - y_lo)
            y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    return sx, sy, (x_lo, x_hi), (y_lo, y_hi)


def _finite_segments(rows: Sequence[SweepRow]):
    seg: list[SweepRow] = []
    for r in rows:
        if r.value is None:
            if seg:
                yield seg
            seg = []
        else:
            seg.append(r)
    if seg:
        yield seg


def _local_minimum(rows: Sequence[SweepRow]) -> Optional[SweepRow]:
    pts = [r for r in rows if r.value is not None]
    if len(pts) < 3:
        return None
    values = [r.value for r in pts]
    i = int(np.argmin(values))
    if 0 < i < len(pts) - 1 and values[0] > values[i] < values[-1]:
        return pts[i]
    return None


def render_chart_svg(result: SweepResult, title: str = "",
                     xlabel: str = "swept parameter",
                     ylabel: str = "average age") -> str:
    """Line chart with CI bands; an interior minimum of any series gets a
    marker with id ``local-minimum-<estimator>``."""
    series = _series(result)
    sx, sy, (x_lo, x_hi), (y_lo, y_hi) = _scales(series)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#cccccc"/>',
    ]
    if title:
        parts.append(f'<text x="{_W // 2}" y="26" text-anchor="middle" '
                     f'font-size="16">{title}</text>')
    for tick in np.linspace(x_lo, x_hi, 5):
        x = sx(tick)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_H - _MB}" x2="{_fmt(x)}" '
                     f'y2="{_H - _MB + 5}" stroke="#444444"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_H - _MB + 20}" '
                     f'text-anchor="middle" font-size="11">{tick:.4g}</text>')
    for tick in np.linspace(y_lo, y_hi, 5):
        y = sy(tick)
        parts.append(f'<line x1="{_ML - 5}" y1="{_fmt(y)}" x2="{_ML}" '
                     f'y2="{_fmt(y)}" stroke="#444444"/>')
        parts.append(f'<text x="{_ML - 9}" y="{_fmt(y + 4)}" '
                     f'text-anchor="end" font-size="11">{tick:.4g}</text>')
    parts.append(f'<text x="{_W // 2}" y="{_H - 14}" text-anchor="middle" '
                 f'font-size="13">{xlabel}</text>')
    parts.append(f'<text x="20" y="{_H // 2}" text-anchor="middle" '
                 f'font-size="13" transform="rotate(-90 20 {_H // 2})">'
                 f'{ylabel}</text>')

    legend_y = _MT + 14
    for tag, rows in series.items():
        color = _PALETTE.get(tag, "#555555")
        banded = [r for r in rows if r.value is not None and r.ci]
        if len(banded) >= 2:
            upper = " ".join(f"{_fmt(sx(r.param))},{_fmt(sy(r.value + r.ci))}"
                             for r in banded)
            lower = " ".join(f"{_fmt(sx(r.param))},{_fmt(sy(r.value - r.ci))}"
                             for r in reversed(banded))
            parts.append(f'<polygon points="{upper} {lower}" fill="{color}" '
                         f'fill-opacity="0.15" stroke="none"/>')
        for seg in _finite_segments(rows):
            if len(seg) == 1:
                r = seg[0]
                parts.append(f'<circle cx="{_fmt(sx(r.param))}" '
                             f'cy="{_fmt(sy(r.value))}" r="3.5" fill="{color}"/>')
            else:
                pts = " ".join(f"{_fmt(sx(r.param))},{_fmt(sy(r.value))}"
                               for r in seg)
                parts.append(f'<polyline points="{pts}" fill="none" '
                             f'stroke="{color}" stroke-width="1.8"/>')
        minimum = _local_minimum(rows)
        if minimum is not None:
            parts.append(
                f'<circle id="local-minimum-{tag}" '
                f'cx="{_fmt(sx(minimum.param))}" cy="{_fmt(sy(minimum.value))}" '
                f'r="5" fill="#ffdd33" stroke="black"/>')
        parts.append(f'<rect x="{_W - _MR - 150}" y="{legend_y - 9}" '
                     f'width="18" height="4" fill="{color}"/>')
        parts.append(f'<text x="{_W - _MR - 126}" y="{legend_y - 3}" '
                     f'font-size="12">{tag}</text>')
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_chart(result: SweepResult, path, title: str = "",
               xlabel: str = "swept parameter",
               ylabel: str = "average age") -> None:
    """Render the sweep to an SVG file (deterministic bytes)."""
    svg = render_chart_svg(result, title=title, xlabel=xlabel, ylabel=ylabel)
    try:
        Path(path).write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write chart to {path}: {exc}") from exc
