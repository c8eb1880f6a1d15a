"""Valley of the potential that traps the walk, and the deep-site diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import PotentialProfile
from .errors import DomainError, ValleyNotClosedError
from .walk import WalkStats


def valley_depth(n: float) -> float:
    """Depth ``log n + sqrt(log n)`` of the valley relevant at horizon ``n``."""
    ln = np.log(n)
    return float(ln + np.sqrt(ln))


def find_valley(prof: PotentialProfile, h: float) -> tuple[int, int]:
    """Bottom ``b`` and right border ``c`` of the first valley of depth ``h``.

    ``c`` is the first site where ``V`` rises ``h`` above its running minimum;
    ``b`` is the first site attaining the minimum of ``V`` on ``[0, c]``.
    """
    if h <= 0:
        raise DomainError("valley depth must be positive")
    v = prof.v
    running_min = np.minimum.accumulate(v)
    hits = np.flatnonzero(v - running_min >= h)
    if hits.size == 0:
        raise ValleyNotClosedError(
            f"no rise of {h:.3f} above the running minimum within {prof.x_max} sites"
        )
    c = int(hits[0])
    b = int(np.argmin(v[: c + 1]))
    return b, c


@dataclass(frozen=True, eq=False)
class ValleyDecomposition:
    """Valley markers and deep-site sets for one horizon.

    ``g_delta`` holds sites ``x <= b`` separated from ``b`` by a barrier of
    at least ``delta log n`` above ``V(x)``; ``d_delta`` is the interval
    ``(b, c_delta]`` of sites right of ``b`` reachable without climbing more
    than ``(1 - delta) log n`` above ``V(b)``.
    """

    b: int
    c: int | None
    threshold: float
    delta: float
    g_delta: np.ndarray
    d_delta: np.ndarray

    @property
    def r_delta(self) -> np.ndarray:
        return np.union1d(self.g_delta, self.d_delta)

    @property
    def c_delta(self) -> int:
        return int(self.d_delta[-1]) if self.d_delta.size else self.b


def deep_sites(
    prof: PotentialProfile, b: int, n: float, delta: float, c: int | None = None
) -> ValleyDecomposition:
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    v = prof.v
    ln = np.log(n)
    # max of V over [x, b], scanned right to left
    left = v[: b + 1]
    suffix_max = np.maximum.accumulate(left[::-1])[::-1]
    g = np.flatnonzero(suffix_max - left >= delta * ln)
    # max of V over [b, x] is nondecreasing in x, so D is an interval
    prefix_max = np.maximum.accumulate(v[b:])
    ok = prefix_max - v[b] <= (1.0 - delta) * ln
    stop = np.flatnonzero(~ok)
    end = b + (int(stop[0]) if stop.size else ok.size)
    d = np.arange(b + 1, end)
    return ValleyDecomposition(b, c, valley_depth(n), delta, g, d)


def valley_decomposition(prof: PotentialProfile, n: float, delta: float) -> ValleyDecomposition:
    """``find_valley`` at depth ``log n + sqrt(log n)`` followed by ``deep_sites``."""
    b, c = find_valley(prof, valley_depth(n))
    return deep_sites(prof, b, n, delta, c)


def deep_site_event(stats: WalkStats, decomp: ValleyDecomposition, n: float, delta: float) -> bool:
    """True when every deep site has been visited at least ``n ** (delta / 2)`` times."""
    sites = decomp.r_delta
    if sites.size == 0:
        return True
    xi = np.zeros(sites.max() + 1, dtype=np.int64)
    m = min(xi.size, stats.xi.size)
    xi[:m] = stats.xi[:m]
    return bool(np.all(xi[sites] >= n ** (delta / 2.0)))


def undeep_range_ratio(stats: WalkStats, decomp: ValleyDecomposition) -> float:
    """``|range \\ deep sites| / log^2 n``."""
    outside = np.setdiff1d(stats.range_set, decomp.r_delta)
    return outside.size / np.log(stats.n) ** 2
