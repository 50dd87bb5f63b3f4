"""Classical entropies and divergences on discrete distributions and gridded densities.

Discrete distributions are probability vectors over real outcome labels.
Densities live on uniform grids with either open-line or circular topology;
line integrals use the trapezoid rule, circular ones the rectangle rule
(exact for trigonometric polynomials when the grid resolves them).
Divergences return ``math.inf`` on support violations; infinity is a value
here, not an error.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ValidationError

PROB_SUM_ATOL = 1e-10
DENSITY_NORM_ATOL = 1e-6
CIRCLE_PERIOD_ATOL = 1e-9
NEGATIVE_CLAMP = 1e-12
# densities below this count as exact zeros for support comparisons
ZERO_DENSITY = 1e-300

_TOPOLOGIES = ("line", "circle")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > ZERO_DENSITY
    out[mask] = p[mask] * np.log(p[mask])
    return out


@dataclass
class DiscreteDistribution:
    """Probability vector over distinct real outcomes, kept sorted ascending.

    Entries may carry tiny negative dust (>= -1e-12) from upstream numerics;
    it is clamped to zero. The total must be 1 within 1e-10.
    """

    outcomes: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        outcomes = np.asarray(self.outcomes, dtype=float).reshape(-1)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if outcomes.size == 0:
            raise ValidationError("distribution needs at least one outcome")
        if outcomes.size != probs.size:
            raise ValidationError(
                f"{outcomes.size} outcomes but {probs.size} probabilities"
            )
        order = np.argsort(outcomes, kind="stable")
        outcomes = outcomes[order]
        probs = probs[order]
        if outcomes.size > 1 and np.any(np.diff(outcomes) <= 0):
            raise ValidationError("outcome labels must be distinct")
        if probs.min(initial=0.0) < -NEGATIVE_CLAMP:
            raise ValidationError(
                f"probability below clamp threshold: {probs.min():.3e}"
            )
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if abs(total - 1.0) > PROB_SUM_ATOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        self.outcomes = _freeze(outcomes)
        self.probs = _freeze(probs)

    def __len__(self) -> int:
        return int(self.outcomes.size)

    def mean(self) -> float:
        return float(self.probs @ self.outcomes)

    def moment(self, degree: int) -> float:
        return float(self.probs @ self.outcomes**degree)


@dataclass
class GriddedDensity:
    """Probability density sampled on a uniform grid.

    ``topology`` is "line" (trapezoid quadrature over [start, start+(n-1)*spacing])
    or "circle" (rectangle quadrature, n*spacing must equal 2*pi). The sampled
    values must be nonnegative and integrate to 1 within 1e-6.
    """

    start: float
    spacing: float
    values: np.ndarray
    topology: str = "line"

    def __post_init__(self) -> None:
        if self.topology not in _TOPOLOGIES:
            raise ValidationError(f"unknown topology {self.topology!r}")
        if not (self.spacing > 0.0 and math.isfinite(self.spacing)):
            raise ValidationError("grid spacing must be positive and finite")
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size < 2:
            raise ValidationError("density needs at least two grid points")
        if values.min() < -NEGATIVE_CLAMP:
            raise ValidationError(f"density value below clamp: {values.min():.3e}")
        values = np.clip(values, 0.0, None)
        if self.topology == "circle":
            period = values.size * self.spacing
            if abs(period - 2.0 * math.pi) > CIRCLE_PERIOD_ATOL:
                raise ValidationError(
                    f"circle grid spans {period!r}, expected 2*pi"
                )
        self.start = float(self.start)
        self.spacing = float(self.spacing)
        self.values = _freeze(values)
        total = self.integral()
        if abs(total - 1.0) > DENSITY_NORM_ATOL:
            raise ValidationError(f"density integrates to {total!r}, not 1")

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.values.size)

    def quadrature(self, integrand: np.ndarray) -> float:
        """Integrate sampled values over this grid with the native rule."""
        integrand = np.asarray(integrand, dtype=float)
        if integrand.shape != self.values.shape:
            raise GridMismatchError("integrand shape does not match grid")
        if self.topology == "circle":
            return float(integrand.sum() * self.spacing)
        edges = 0.5 * (integrand[0] + integrand[-1])
        return float((integrand.sum() - edges) * self.spacing)

    def integral(self) -> float:
        return self.quadrature(self.values)


def same_grid(f: GriddedDensity, g: GriddedDensity) -> bool:
    return (
        f.topology == g.topology
        and f.values.size == g.values.size
        and math.isclose(f.start, g.start, rel_tol=0.0, abs_tol=1e-12)
        and math.isclose(f.spacing, g.spacing, rel_tol=1e-12, abs_tol=0.0)
    )


def _require_same_grid(f: GriddedDensity, g: GriddedDensity) -> None:
    if not same_grid(f, g):
        raise GridMismatchError("densities live on different grids")


def _require_same_outcomes(p: DiscreteDistribution, q: DiscreteDistribution) -> None:
    if len(p) != len(q) or not np.array_equal(p.outcomes, q.outcomes):
        raise GridMismatchError("distributions have different outcome sets")


def shannon_entropy(p: DiscreteDistribution) -> float:
    """Shannon entropy in nats; 0*log 0 counts as 0."""
    return float(-_xlogx(p.probs).sum())


def relative_entropy_discrete(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Kullback-Leibler divergence S(p || q) in nats.

    Returns math.inf when p puts mass where q has none. Outcome sets must
    be identical.
    """
    _require_same_outcomes(p, q)
    pv, qv = p.probs, q.probs
    support = pv > ZERO_DENSITY
    if np.any(support & (qv <= ZERO_DENSITY)):
        return math.inf
    ratio = pv[support] / qv[support]
    return float(np.sum(pv[support] * np.log(ratio)))


def cross_entropy(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Cross entropy -sum p log q; math.inf on support violation."""
    _require_same_outcomes(p, q)
    pv, qv = p.probs, q.probs
    support = pv > ZERO_DENSITY
    if np.any(support & (qv <= ZERO_DENSITY)):
        return math.inf
    return float(-np.sum(pv[support] * np.log(qv[support])))


def differential_entropy(f: GriddedDensity) -> float:
    """Differential entropy -int f ln f by the grid's native quadrature."""
    return -f.quadrature(_xlogx(f.values))


def relative_entropy_continuous(f: GriddedDensity, g: GriddedDensity) -> float:
    """Kullback-Leibler divergence between densities on one shared grid.

    math.inf when f carries density where g vanishes. Quadrature can make
    the result dip a few 1e-9 below zero for nearly equal densities; values
    are returned unclamped.
    """
    _require_same_grid(f, g)
    fv, gv = f.values, g.values
    support = fv > ZERO_DENSITY
    if np.any(support & (gv <= ZERO_DENSITY)):
        return math.inf
    integrand = np.zeros_like(fv)
    integrand[support] = fv[support] * np.log(fv[support] / gv[support])
    return f.quadrature(integrand)


def distribution_mean(p: DiscreteDistribution) -> float:
    return p.mean()


def density_mean(f: GriddedDensity) -> float:
    return f.quadrature(f.values * f.grid)


def density_variance(f: GriddedDensity) -> float:
    mu = density_mean(f)
    return f.quadrature(f.values * (f.grid - mu) ** 2)


def circular_moment(f: GriddedDensity) -> complex:
    """First circular moment <e^{i phi}> of a density on the circle."""
    if f.topology != "circle":
        raise ValidationError("circular moment requires circle topology")
    phi = f.grid
    re = f.quadrature(f.values * np.cos(phi))
    im = f.quadrature(f.values * np.sin(phi))
    return complex(re, im)


def rescale_density(f: GriddedDensity, scale: float) -> GriddedDensity:
    """Push a line density through x -> x / scale (values pick up a factor scale)."""
    if f.topology != "line":
        raise ValidationError("only line densities can be rescaled")
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ValidationError("scale must be positive and finite")
    return GriddedDensity(
        start=f.start / scale,
        spacing=f.spacing / scale,
        values=f.values * scale,
        topology="line",
    )


def bin_density(f: GriddedDensity, bin_width: float) -> DiscreteDistribution:
    """Coarse-grain a density into equal-width bins.

    The bin width must be an integer multiple of the grid spacing, and the
    grid must tile into whole bins; otherwise a non-commensurate error is
    raised. Bin masses are integrated with the grid's native rule and then
    normalized by the total observed mass, so the output is a proper
    probability vector conditional on the covered window. Outcome labels sit
    at bin centers.
    """
    if not (bin_width > 0.0 and math.isfinite(bin_width)):
        raise ValidationError("bin width must be positive and finite")
    ratio = bin_width / f.spacing
    per_bin = int(round(ratio))
    if per_bin < 1 or abs(ratio - per_bin) > 1e-9 * max(1.0, ratio):
        raise ValidationError(
            f"bin width {bin_width!r} is not commensurate with spacing {f.spacing!r}"
        )
    n = f.values.size
    intervals = n if f.topology == "circle" else n - 1
    if intervals % per_bin != 0:
        raise ValidationError(
            f"{intervals} grid intervals do not tile into bins of {per_bin}"
        )
    n_bins = intervals // per_bin
    masses = np.empty(n_bins)
    if f.topology == "circle":
        chunks = f.values.reshape(n_bins, per_bin)
        masses[:] = chunks.sum(axis=1) * f.spacing
    else:
        for i in range(n_bins):
            seg = f.values[i * per_bin : i * per_bin + per_bin + 1]
            masses[i] = (seg.sum() - 0.5 * (seg[0] + seg[-1])) * f.spacing
    total = masses.sum()
    if total <= 0.0:
        raise ValidationError("density has no mass to bin")
    centers = f.start + (np.arange(n_bins) + 0.5) * per_bin * f.spacing
    return DiscreteDistribution(outcomes=centers, probs=masses / total)


def continuum_limit_check(
    f: GriddedDensity, widths: list[float]
) -> list[tuple[float, float]]:
    """Binned entropies corrected by + ln(width), for a decreasing width ladder.

    Returns (width, shannon_entropy(binned) + ln width) pairs; the corrected
    values converge to the differential entropy of f as widths shrink.
    """
    if len(widths) == 0:
        raise ValidationError("need at least one bin width")
    if any(b >= a for a, b in zip(widths, widths[1:])):
        raise ValidationError("bin widths must be strictly decreasing")
    rows = []
    for width in widths:
        p = bin_density(f, width)
        rows.append((float(width), shannon_entropy(p) + math.log(width)))
    return rows


def read_histogram_csv(path: str) -> DiscreteDistribution:
    """Read a two-column CSV of (outcome, weight) rows into a distribution.

    Weights may be counts or probabilities; they are normalized by their sum
    either way. A single header row is skipped if it is non-numeric.
    """
    outcomes: list[float] = []
    weights: list[float] = []
    with open(path, newline="") as handle:
        for row in csv.reader(handle):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ValidationError(f"histogram row needs two columns: {row!r}")
            try:
                x = float(row[0])
                w = float(row[1])
            except ValueError:
                if not outcomes:  # header line
                    continue
                raise ValidationError(f"non-numeric histogram row: {row!r}") from None
            outcomes.append(x)
            weights.append(w)
    if not outcomes:
        raise ValidationError("histogram file contains no data rows")
    warr = np.asarray(weights, dtype=float)
    if warr.min() < 0.0:
        raise ValidationError("histogram weights must be nonnegative")
    total = warr.sum()
    if total <= 0.0:
        raise ValidationError("histogram weights sum to zero")
    return DiscreteDistribution(outcomes=np.asarray(outcomes), probs=warr / total)


def read_density_json(path: str) -> GriddedDensity:
    """Read a gridded density from JSON with keys grid_start, spacing, topology, values."""
    with open(path) as handle:
        payload = json.load(handle)
    return density_from_dict(payload)


def density_from_dict(payload: dict) -> GriddedDensity:
    if not isinstance(payload, dict):
        raise ValidationError("density payload must be a JSON object")
    missing = {"grid_start", "spacing", "topology", "values"} - set(payload)
    if missing:
        raise ValidationError(f"density payload missing keys: {sorted(missing)}")
    return GriddedDensity(
        start=float(payload["grid_start"]),
        spacing=float(payload["spacing"]),
        values=np.asarray(payload["values"], dtype=float),
        topology=str(payload["topology"]),
    )


def density_to_dict(f: GriddedDensity) -> dict:
    return {
        "grid_start": f.start,
        "spacing": f.spacing,
        "topology": f.topology,
        "values": [float(v) for v in f.values],
    }
