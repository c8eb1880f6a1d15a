"""Derivative-free maximizers on intervals and boxes.

The criteria maximized in this package are only piecewise smooth in the
support (the inner ``max`` over atoms switches branch), so both routines
avoid gradients.  ``maximize_1d`` runs bounded Brent search (golden section
with parabolic steps), optionally after a coarse grid scan; ``maximize_box``
runs bounded Nelder-Mead from several starting points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import qmc

from .errors import DomainError, OptimizationError

MAX_EVALS_1D = 500


@dataclass(frozen=True, eq=False)
class OptimResult:
    argmax: np.ndarray
    value: float
    evaluations: int
    converged: bool


class _Counted:
    """Objective wrapper that counts calls and rejects non-finite values."""

    def __init__(self, f, context=""):
        self.f = f
        self.context = context
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        val = float(self.f(x))
        if not np.isfinite(val):
            raise OptimizationError(x, val, self.context)
        return val


def maximize_1d(f, lo: float, hi: float, tol: float = 1e-6, grid: int = 0) -> OptimResult:
    """Maximize a scalar function on ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Objective; must be finite on the interval.
    lo, hi : float
        Interval ends, ``lo < hi``.
    tol : float
        Absolute tolerance on the abscissa.
    grid : int
        If positive, scan ``grid`` equispaced points first and refine with
        Brent inside the cell pair around the best one.  Guards against
        multimodal objectives.

    Returns
    -------
    OptimResult
        ``argmax`` is a length-1 array.  The interval ends are always
        evaluated so boundary maxima are returned exactly.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    obj = _Counted(f)
    a, b = lo, hi
    candidates = [(obj(lo), lo), (obj(hi), hi)]
    if grid > 2:
        xs = np.linspace(lo, hi, grid)
        vals = [obj(x) for x in xs[1:-1]]
        k = int(np.argmax(vals)) + 1
        candidates.append((vals[k - 1], float(xs[k])))
        a, b = float(xs[k - 1]), float(xs[k + 1])
    budget = max(MAX_EVALS_1D - obj.calls, 10)
    res = minimize_scalar(
        lambda x: -obj(x), bounds=(a, b), method="bounded",
        options={"xatol": tol, "maxiter": budget},
    )
    candidates.append((-float(res.fun), float(res.x)))
    value, x = max(candidates, key=lambda c: c[0])
    return OptimResult(np.array([x]), value, obj.calls, bool(res.success))


def _initial_simplex(x0, lo, hi, scale=0.1):
    dim = x0.size
    width = hi - lo
    simplex = np.tile(x0, (dim + 1, 1))
    for j in range(dim):
        step = scale * width[j]
        # step inward so every vertex stays in the box
        simplex[j + 1, j] = x0[j] + step if x0[j] + step <= hi[j] else x0[j] - step
    return simplex


def start_points(box, restarts: int, seed: int = 0) -> np.ndarray:
    """Scrambled Sobol points mapped into the box (the centre comes first)."""
    lo, hi = np.array(box, dtype=float).T
    pts = [0.5 * (lo + hi)]
    if restarts > 1:
        sampler = qmc.Sobol(d=lo.size, scramble=True, seed=seed)
        # draw a power of two to keep the sequence balanced, keep the first ones
        m = int(np.ceil(np.log2(restarts - 1))) if restarts > 2 else 0
        pts.extend(qmc.scale(sampler.random_base2(m)[: restarts - 1], lo, hi))
    return np.array(pts)


def maximize_box(
    f, box, tol: float = 1e-6, restarts: int = 5, x0s=None, seed: int = 0, max_evals: int = 4000
) -> OptimResult:
    """Multistart bounded Nelder-Mead maximization of ``f`` over ``box``.

    Parameters
    ----------
    f : callable
        Objective on vectors of length ``len(box)``.
    box : sequence of (lo, hi)
    tol : float
        Each run stops once the simplex spread in every coordinate is below ``tol``.
    restarts : int
        Number of Sobol starting points (the box centre included).
    x0s : array_like, optional
        Extra starting points, clipped into the box.
    """
    lo, hi = np.array(box, dtype=float).T
    if np.any(lo > hi):
        raise DomainError(f"empty box {box}")
    obj = _Counted(f)
    starts = list(start_points(box, max(restarts, 1), seed))
    if x0s is not None:
        starts = [np.clip(np.asarray(x, dtype=float), lo, hi) for x in np.atleast_2d(x0s)] + starts
    best_x, best_val, converged = None, -np.inf, True
    for x0 in starts:
        v0 = obj(x0)
        if v0 > best_val:
            best_x, best_val = np.array(x0, dtype=float), v0
        res = minimize(
            lambda x: -obj(np.clip(x, lo, hi)), x0, method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={
                "xatol": tol, "fatol": 1e-12, "maxfev": max_evals,
                "initial_simplex": _initial_simplex(np.asarray(x0, dtype=float), lo, hi),
            },
        )
        converged &= bool(res.success)
        x = np.clip(res.x, lo, hi)
        val = -float(res.fun)
        if val > best_val:
            best_x, best_val = x, val
    # report the value at the returned point itself
    best_val = obj(best_x)
    return OptimResult(best_x, best_val, obj.calls, converged)
