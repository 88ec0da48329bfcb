"""Confidence intervals and threshold crossings for WER curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy.stats import norm


def confidence_interval(failures: int, trials: int, level: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0 or not 0 <= failures <= trials:
        raise ValueError("need 0 <= failures <= trials and trials > 0")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = norm.ppf(0.5 + level / 2.0)
    phat = failures / trials
    z2n = z * z / trials
    centre = (phat + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    low = 0.0 if failures == 0 else max(0.0, centre - half)
    high = 1.0 if failures == trials else min(1.0, centre + half)
    return low, high


def intervals_disjoint(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[1] < b[0] or b[1] < a[0]


@dataclass(frozen=True)
class ThresholdBracket:
    """Grid interval holding the crossings; ``estimate`` is the interpolated mean.

    ``low = 0`` or ``high = inf`` mark a crossing below or above the grid.
    """

    low: float
    high: float
    estimate: float | None
    crossings: tuple[float, ...] = ()

    def contains(self, p: float) -> bool:
        return self.low <= p <= self.high

    def overlaps(self, lo: float, hi: float) -> bool:
        return self.low < hi and lo < self.high


def _log_wer(failures: int, trials: int) -> float:
    # half a failure stands in for an empty cell so logs stay finite
    return math.log(max(failures, 0.5) / trials)


def estimate_threshold(curves: Mapping[int, Sequence[tuple[float, float]]] | Mapping[int, Sequence[tuple[float, int, int]]]) -> ThresholdBracket:
    """Crossing of WER curves ordered by block size.

    ``curves`` maps block size to points ``(p, wer)`` or ``(p, failures,
    trials)`` on a shared p grid.  For every pair of sizes the sign of
    log WER(larger) - log WER(smaller) is followed along the grid; where it
    turns from negative (larger code better) to non-negative, the crossing
    is found by linear interpolation in (p, log WER).
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves of different block sizes")
    sizes = sorted(curves)
    grids = {}
    for size in sizes:
        pts = sorted(curves[size])
        grids[size] = {pt[0]: _point_log(pt) for pt in pts}
    common = sorted(set.intersection(*(set(g) for g in grids.values())))
    if not common:
        raise ValueError("curves share no p values")

    crossings: list[float] = []
    lows: list[float] = []
    highs: list[float] = []
    for i, small in enumerate(sizes):
        for large in sizes[i + 1:]:
            diff = [grids[large][p] - grids[small][p] for p in common]
            found = False
            for k in range(len(common) - 1):
                if diff[k] < 0 <= diff[k + 1]:
                    p0, p1 = common[k], common[k + 1]
                    t = diff[k] / (diff[k] - diff[k + 1])
                    crossings.append(p0 + t * (p1 - p0))
                    lows.append(p0)
                    highs.append(p1)
                    found = True
                    break
            if not found:
                if all(d < 0 for d in diff):
                    lows.append(common[-1])
                    highs.append(math.inf)
                elif diff[0] >= 0 and all(d >= 0 for d in diff):
                    lows.append(0.0)
                    highs.append(common[0])
                else:
                    # ordering flips back and forth without a clean crossing
                    lows.append(common[0])
                    highs.append(common[-1])
    estimate = sum(crossings) / len(crossings) if crossings else None
    return ThresholdBracket(min(lows), max(highs), estimate, tuple(crossings))


def _point_log(pt) -> float:
    if len(pt) == 3:
        return _log_wer(int(pt[1]), int(pt[2]))
    wer = float(pt[1])
    return math.log(wer) if wer > 0 else -math.inf
