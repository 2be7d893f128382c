"""X-bar/R control charts, Western Electric run rules and capability.

The chart constants are derived from the distribution of the range of
``n`` independent standard normals instead of being copied from tables:

    d2 = E[R] = integral of 1 - Phi(x)^n - (1 - Phi(x))^n dx
    E[R^2] = 2 * double integral over x < y of
             1 - Phi(y)^n - (1 - Phi(x))^n + (Phi(y) - Phi(x))^n
    d3 = sqrt(E[R^2] - d2^2)

Both integrals use Gauss-Legendre quadrature on [-9, 9], where the
integrands are smooth and negligible outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from qproc.errors import (
    InsufficientData,
    InvalidLimits,
    InvalidSubgroupSize,
    ZeroDispersion,
)

_HALF_WIDTH = 9.0
_NODES = 160


@dataclass(frozen=True)
class SpcConstants:
    n: int
    d2: float
    d3: float
    A2: float
    D3: float
    D4: float


def _check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 2 <= n <= 10:
        raise InvalidSubgroupSize(f"subgroup size must be an integer in 2..10, got {n!r}")
    return int(n)


def range_moments(n: int) -> tuple[float, float]:
    """Mean and standard deviation of the range of ``n`` standard normals."""
    t, w = leggauss(_NODES)
    x, wx = _HALF_WIDTH * t, _HALF_WIDTH * w
    cdf = ndtr(x)
    mean = float(np.sum(wx * (1.0 - cdf**n - (1.0 - cdf) ** n)))
    # y = x + gap; the integrand vanishes once y leaves the support
    gap, wg = _HALF_WIDTH * (t + 1.0), _HALF_WIDTH * w
    fx = ndtr(x)[:, None]
    fy = ndtr(x[:, None] + gap[None, :])
    inner = 1.0 - fy**n - (1.0 - fx) ** n + (fy - fx) ** n
    second = 2.0 * float(wx @ inner @ wg)
    return mean, math.sqrt(second - mean * mean)


def _exact_a2(d2: float, n: int) -> float:
    """3 / (d2 sqrt n), nudged by at most a few ulps so A2 * d2 * sqrt(n) == 3.0."""
    root = math.sqrt(n)
    a2 = 3.0 / (d2 * root)
    candidates = [a2]
    lo = hi = a2
    for _ in range(8):
        lo, hi = math.nextafter(lo, 0.0), math.nextafter(hi, math.inf)
        candidates += [lo, hi]
    for c in candidates:
        if c * d2 * root == 3.0:
            return c
    return a2


@lru_cache(maxsize=None)
def _constants(n: int) -> SpcConstants:
    d2, d3 = range_moments(n)
    spread = 3.0 * d3 / d2
    return SpcConstants(n, d2, d3, _exact_a2(d2, n), max(0.0, 1.0 - spread), 1.0 + spread)


def spc_constants(n: int) -> SpcConstants:
    return _constants(_check_n(n))


@dataclass(frozen=True)
class SubgroupSeries:
    subgroups: np.ndarray  # shape (k, n)
    characteristic_ref: str | None = None

    def __init__(self, subgroups, characteristic_ref: str | None = None):
        rows = [list(map(float, row)) for row in subgroups]
        sizes = {len(r) for r in rows}
        if len(sizes) > 1:
            raise InvalidSubgroupSize(f"subgroups have different sizes {sorted(sizes)}")
        data = np.asarray(rows, dtype=float).reshape(len(rows), -1 if rows else 0)
        if rows:
            _check_n(data.shape[1])
        if not np.all(np.isfinite(data)):
            raise ValueError("measurements must be finite")
        object.__setattr__(self, "subgroups", data)
        object.__setattr__(self, "characteristic_ref", characteristic_ref)

    @property
    def n(self) -> int:
        return int(self.subgroups.shape[1])

    @property
    def k(self) -> int:
        return int(self.subgroups.shape[0])

    def means(self) -> np.ndarray:
        return self.subgroups.mean(axis=1)

    def ranges(self) -> np.ndarray:
        return np.ptp(self.subgroups, axis=1)


@dataclass(frozen=True)
class ControlChart:
    kind: str  # "xbar" | "range"
    center: float
    ucl: float
    lcl: float
    constants: SpcConstants

    def to_dict(self) -> dict:
        c = self.constants
        return {"kind": self.kind, "center": self.center, "ucl": self.ucl, "lcl": self.lcl,
                "n": c.n, "A2": c.A2, "D3": c.D3, "D4": c.D4, "d2": c.d2}


@dataclass(frozen=True)
class Charts:
    xbar: ControlChart
    range: ControlChart


def build_charts(series: SubgroupSeries) -> Charts:
    if series.k < 2:
        raise InsufficientData(f"need at least 2 subgroups, got {series.k}")
    c = spc_constants(series.n)
    grand = float(series.means().mean())
    rbar = float(series.ranges().mean())
    spread = c.A2 * rbar
    xbar = ControlChart("xbar", grand, grand + spread, grand - spread, c)
    rng = ControlChart("range", rbar, c.D4 * rbar, c.D3 * rbar, c)
    return Charts(xbar, rng)


@dataclass(frozen=True, order=True)
class Violation:
    index: int  # 1-based subgroup number
    rule: str  # WE-1 | WE-2 | WE-3
    chart: str = "xbar"


def detect_violations(charts: Charts, series: SubgroupSeries) -> list[Violation]:
    """Western Electric rules 1-3, ordered by subgroup index.

    WE-1 flags a point beyond either chart's limits.  On the x-bar chart,
    WE-2 flags the ninth point of a run on one side of the center line (a
    point on the line breaks the run) and WE-3 the sixth point of a
    strictly monotone run.
    """
    if charts.xbar.constants.n != series.n:
        raise InvalidSubgroupSize(
            f"charts were built for n={charts.xbar.constants.n}, series has n={series.n}"
        )
    found: list[Violation] = []
    means, ranges = series.means(), series.ranges()
    for chart, values in ((charts.xbar, means), (charts.range, ranges)):
        for i, v in enumerate(values, start=1):
            if v > chart.ucl or v < chart.lcl:
                found.append(Violation(i, "WE-1", chart.kind))
    side = np.sign(means - charts.xbar.center)
    run = 0
    for i in range(len(means)):
        run = run + 1 if i > 0 and side[i] != 0 and side[i] == side[i - 1] else (1 if side[i] else 0)
        if run >= 9:
            found.append(Violation(i + 1, "WE-2"))
    step = np.sign(np.diff(means))
    trend = 0
    for i in range(len(step)):
        trend = trend + 1 if i > 0 and step[i] != 0 and step[i] == step[i - 1] else (1 if step[i] else 0)
        if trend >= 5:  # five equal-signed steps span six points
            found.append(Violation(i + 2, "WE-3"))
    return sorted(found, key=lambda v: (v.index, v.rule, v.chart))


@dataclass(frozen=True)
class CapabilityResult:
    usl: float
    lsl: float
    mean: float
    sigma_hat: float
    cp: float
    cpk: float

    def to_dict(self) -> dict:
        return {"usl": self.usl, "lsl": self.lsl, "mean": self.mean,
                "sigma_hat": self.sigma_hat, "cp": self.cp, "cpk": self.cpk}


def capability(series: SubgroupSeries, usl: float, lsl: float) -> CapabilityResult:
    """Cp and Cpk with sigma estimated as R-bar / d2."""
    if not usl > lsl:
        raise InvalidLimits(f"upper limit {usl} must exceed lower limit {lsl}")
    charts = build_charts(series)
    rbar = charts.range.center
    if rbar <= 0:
        raise ZeroDispersion("all subgroup ranges are zero; sigma cannot be estimated")
    sigma = rbar / charts.range.constants.d2
    mean = charts.xbar.center
    cp = (usl - lsl) / (6 * sigma)
    cpk = min(usl - mean, mean - lsl) / (3 * sigma)
    return CapabilityResult(float(usl), float(lsl), mean, sigma, cp, cpk)


def read_series(text: str) -> SubgroupSeries:
    """One subgroup per line, whitespace-separated values, ``#`` comments."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.split()])
        except ValueError:
            raise ValueError(f"line {lineno}: not a list of numbers") from None
    return SubgroupSeries(rows)
