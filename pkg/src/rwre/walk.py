"""Quenched simulation of the reflected walk and its local-time counters.

Conventions (for a horizon ``n``):

* ``xi[x]`` is the number of times ``t`` in ``0..n-1`` with ``X_t = x``;
* ``xi_plus[x]`` / ``xi_minus[x]`` count the right / left departures from
  ``x`` among those times, so ``xi == xi_plus + xi_minus`` exactly;
* the range is ``{x > 0 : xi[x] >= 1}``.  A site entered for the first time
  at time ``n`` is not part of it.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from numba import njit

from .environment import Environment
from .errors import DomainError, EnvironmentExhaustedError, MalformedPathError

_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class WalkStats:
    """Local-time counters of a walk stopped at time ``n``.

    Arrays are indexed by site ``0..max_site``.
    """

    n: int
    xi: np.ndarray
    xi_plus: np.ndarray
    xi_minus: np.ndarray
    max_site: int

    def __post_init__(self):
        for name in ("xi", "xi_plus", "xi_minus"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def range_set(self) -> np.ndarray:
        """Visited positive sites, in increasing order."""
        sites = np.flatnonzero(self.xi >= 1)
        return sites[sites > 0]

    @property
    def range_size(self) -> int:
        return int(np.count_nonzero(self.xi[1:] >= 1))

    def range_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """``(xi_plus, xi_minus)`` restricted to the range."""
        sites = self.range_set
        return self.xi_plus[sites], self.xi_minus[sites]

    @property
    def nu_plus(self) -> np.ndarray:
        return self.xi_plus / self.n

    @property
    def nu_minus(self) -> np.ndarray:
        return self.xi_minus / self.n

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,xi,xi_plus,xi_minus\n")
        for x in range(self.xi.size):
            buf.write(f"{x},{self.xi[x]},{self.xi_plus[x]},{self.xi_minus[x]}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n: int | None = None, max_site: int | None = None) -> "WalkStats":
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "x,xi,xi_plus,xi_minus":
            raise ValueError("expected header 'x,xi,xi_plus,xi_minus'")
        table = np.array([[int(c) for c in line.split(",")] for line in lines[1:]], dtype=np.int64)
        xi, xp, xm = table[:, 1], table[:, 2], table[:, 3]
        if n is None:
            n = int(xi.sum())
        if max_site is None:
            max_site = int(table[:, 0].max())
        return cls(n, xi, xp, xm, max_site)


@dataclass(frozen=True, eq=False)
class Walk:
    """Output of ``simulate_walk``: the counters and, optionally, the path."""

    stats: WalkStats
    path: np.ndarray | None = None


@njit(cache=True)
def _advance(omega, u, x, xi_plus, xi_minus, max_site, path, offset, record):
    """Run ``u.size`` steps from site ``x``; returns (x, max_site, steps_done)."""
    x_max = omega.size
    for k in range(u.size):
        if record:
            path[offset + k] = x
        if x == 0:
            xi_plus[0] += 1
            x = 1
        elif u[k] < omega[x - 1]:
            xi_plus[x] += 1
            x += 1
        else:
            xi_minus[x] += 1
            x -= 1
        if x > max_site:
            max_site = x
            if x > x_max:
                return x, max_site, k + 1
    return x, max_site, u.size


def simulate_walk(
    env: Environment, n: int, rng: np.random.Generator, record_path: bool = False
) -> Walk:
    """Simulate ``X_0 = 0, ..., X_n`` in the fixed environment ``env``.

    From ``x > 0`` the walk steps right with probability ``omega_x``; from 0
    it steps right surely.

    Raises
    ------
    EnvironmentExhaustedError
        The walk stepped beyond ``env.x_max``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    omega = np.ascontiguousarray(env.omega, dtype=np.float64)
    size = min(env.x_max, n) + 2
    xi_plus = np.zeros(size, dtype=np.int64)
    xi_minus = np.zeros(size, dtype=np.int64)
    path = np.zeros(n + 1 if record_path else 1, dtype=np.int64)
    x, max_site, done = 0, 0, 0
    while done < n:
        u = rng.random(min(_CHUNK, n - done))
        x, max_site, k = _advance(omega, u, x, xi_plus, xi_minus, max_site, path, done, record_path)
        done += k
        if x > env.x_max:
            raise EnvironmentExhaustedError(
                f"walk reached site {x} > x_max={env.x_max} at time {done}; enlarge the window"
            )
    if record_path:
        path[n] = x
    xi_plus = xi_plus[: max_site + 1]
    xi_minus = xi_minus[: max_site + 1]
    stats = WalkStats(n, xi_plus + xi_minus, xi_plus, xi_minus, max_site)
    return Walk(stats, path if record_path else None)


def stats_from_path(path) -> WalkStats:
    """Counters of a recorded path ``(X_0, ..., X_n)``, computed in bulk."""
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 1 or path.size < 2:
        raise MalformedPathError("path must contain at least two sites")
    if path[0] != 0:
        raise MalformedPathError("path must start at 0")
    if np.any(path < 0):
        raise MalformedPathError("path must stay nonnegative")
    steps = np.diff(path)
    if np.any(np.abs(steps) != 1):
        raise MalformedPathError("consecutive sites must be nearest neighbours")
    n = path.size - 1
    max_site = int(path.max())
    origin = path[:-1]
    xi_plus = np.bincount(origin[steps > 0], minlength=max_site + 1)
    xi_minus = np.bincount(origin[steps < 0], minlength=max_site + 1)
    return WalkStats(n, xi_plus + xi_minus, xi_plus, xi_minus, max_site)


def check_invariants(stats: WalkStats) -> None:
    """Assert the counter identities that every finished walk satisfies."""
    xi, xp, xm = stats.xi, stats.xi_plus, stats.xi_minus
    assert np.array_equal(xi, xp + xm)
    assert np.all(np.abs(xm[1:] - xp[:-1]) <= 1)
    assert xi.sum() == stats.n
    assert xp.sum() + xm.sum() == stats.n
    assert stats.range_size == stats.range_set.size
