"""Estimators of the environment law from a single trajectory.

* ``mple``: maximize the support criterion ``L_n``, then read the
  probabilities off the site classification.
* ``mle``: maximize the annealed log-likelihood over the family's box,
  warm-started at the MPLE.
* ``ae_estimator_temkin``: moment estimator from the first two departures
  of each visited site (Temkin family only).
* ``naive_estimator``: per-site empirical right-step frequencies.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoSolutionError, UndefinedCriterionError
from .likelihood import classify_sites, log_likelihood, pseudo_likelihood_L
from .model import FamilyKind, ModelFamily, ThetaParams, family_to_theta, theta_to_free
from .optimize import maximize_1d, maximize_box
from .walk import WalkStats, stats_from_path

GRID_1D = 41


class Method(enum.Enum):
    MLE = "MLE"
    MPLE = "MPLE"
    AE = "AE"
    NAIVE = "Naive"


@dataclass(frozen=True, eq=False)
class Estimate:
    """Result of one estimation call.

    ``params`` maps the family's parameter names to the estimated values
    (raw, before any projection onto the box); ``theta_hat`` is the
    parameter inside the family, when one can be formed.
    """

    method: Method
    params: dict
    theta_hat: ThetaParams | None
    criterion_value: float
    evaluations: int = 0
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)


def _require_range(stats: WalkStats):
    if stats.range_size == 0:
        raise UndefinedCriterionError("the walk has an empty range; nothing to estimate")


def _argmax_support(family: ModelFamily, objective, tol, restarts, x0s=None):
    box = family.support_box
    if len(box) == 1:
        res = maximize_1d(lambda s: objective(np.array([s])), *box[0], tol=tol, grid=GRID_1D)
        if x0s is not None:
            for x in np.atleast_2d(x0s):
                val = objective(x)
                if val > res.value:
                    res = type(res)(np.asarray(x, dtype=float), val, res.evaluations + 1, res.converged)
        return res
    return maximize_box(objective, box, tol=tol, restarts=restarts, x0s=x0s)


def mple(stats: WalkStats, family: ModelFamily, tol: float = 1e-6, restarts: int = 5) -> Estimate:
    """Maximum pseudo-likelihood estimate.

    The support maximizes ``L_n`` over the family's support box; the raw
    probabilities are the class frequencies ``R_n(a, i) / R_n``.  For
    families whose probabilities are tied to the support or to one scalar,
    ``theta_hat`` is the family member at the estimated free parameters and
    the raw frequencies are kept in ``extras['p_bar']``.
    """
    _require_range(stats)
    t0 = time.perf_counter()

    def objective(s):
        a = np.sort(family.support_from_free(s))
        return pseudo_likelihood_L(a, stats)

    res = _argmax_support(family, objective, tol, restarts)
    s_hat = res.argmax
    a_hat = family.support_from_free(s_hat)
    order = np.argsort(a_hat, kind="stable")
    cls = classify_sites(a_hat[order], stats)
    p_bar = np.empty(a_hat.size)
    p_bar[order] = cls.counts / cls.range_size
    params = dict(zip(family.param_names, s_hat.tolist()))
    theta_hat = None
    kind = family.kind
    if kind is FamilyKind.LAZY_TEMKIN:
        params["r"] = float(p_bar[1])
        lo, hi = family.box[1]
        theta_hat = family_to_theta(family, [s_hat[0], min(max(p_bar[1], lo), hi)])
    elif kind is FamilyKind.GENERAL:
        params.update({f"p{i + 1}": float(p_bar[order][i]) for i in range(family.d - 1)})
        for i, name in enumerate(family.param_names[: family.d]):
            params[name] = float(a_hat[order][i])
    else:
        theta_hat = family_to_theta(family, s_hat)
    return Estimate(
        Method.MPLE, params, theta_hat, res.value, res.evaluations,
        time.perf_counter() - t0, {"p_bar": p_bar, "classification": cls},
    )


def mle(
    stats: WalkStats, family: ModelFamily, tol: float = 1e-6, restarts: int = 5,
    warm_start: Estimate | None = None,
) -> Estimate:
    """Maximum likelihood estimate over the family's free-parameter box."""
    _require_range(stats)
    if family.kind is FamilyKind.GENERAL:
        raise DomainError("MLE is only provided for the Temkin, two-point and lazy Temkin families")
    t0 = time.perf_counter()
    if warm_start is None:
        warm_start = mple(stats, family, tol=tol, restarts=restarts)
    x_warm = theta_to_free(family, warm_start.theta_hat)

    def objective(free):
        return log_likelihood(family_to_theta(family, free), stats)

    if family.n_free == 1:
        res = maximize_1d(lambda s: objective([s]), *family.box[0], tol=tol, grid=GRID_1D)
        warm_val = objective(x_warm)
        if warm_val > res.value:
            res = type(res)(x_warm, warm_val, res.evaluations + 1, res.converged)
    else:
        res = maximize_box(objective, family.box, tol=tol, restarts=restarts, x0s=[x_warm])
    theta_hat = family_to_theta(family, res.argmax)
    params = dict(zip(family.param_names, res.argmax.tolist()))
    return Estimate(
        Method.MLE, params, theta_hat, res.value, res.evaluations,
        time.perf_counter() - t0, {"warm_start": x_warm},
    )


def ae_invert(w: float) -> float:
    """Root in ``(0, 1/2]`` of ``a^2 + (1 - a)^2 = w``."""
    if w < 0.5:
        raise NoSolutionError(f"w={w:.4f} < 1/2: a^2 + (1-a)^2 = w has no real root")
    if w > 1.0:
        raise NoSolutionError(f"w={w:.4f} > 1 is not a frequency")
    return 0.5 * (1.0 - np.sqrt(2.0 * w - 1.0))


def first_two_departures(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every positive site left at least once: site, first and second move.

    Moves are +1 / -1; the second move is 0 for sites left only once.
    """
    path = np.asarray(path, dtype=np.int64)
    origin = path[:-1]
    step = np.diff(path)
    keep = origin > 0
    origin, step = origin[keep], step[keep]
    order = np.argsort(origin, kind="stable")
    origin, step = origin[order], step[order]
    sites, first_idx, counts = np.unique(origin, return_index=True, return_counts=True)
    first = step[first_idx]
    second = np.where(counts >= 2, step[np.minimum(first_idx + 1, step.size - 1)], 0)
    return sites, first, second


def ae_estimator_temkin(path) -> Estimate:
    """Moment estimator of ``a`` for the Temkin family.

    Among visited sites whose first departure was to the right and that
    were left at least twice, the fraction whose second departure was also
    to the right estimates ``a^2 + (1 - a)^2``.

    Raises
    ------
    NoSolutionError
        No eligible site, or the estimated moment is below 1/2.
    """
    t0 = time.perf_counter()
    stats_from_path(path)  # validates the path
    _, first, second = first_two_departures(path)
    eligible = (first > 0) & (second != 0)
    total = int(eligible.sum())
    if total == 0:
        raise NoSolutionError("no site with a rightward first move was left twice")
    w_hat = float(np.count_nonzero(eligible & (second > 0))) / total
    a_hat = ae_invert(w_hat)
    extras = {"w_hat": w_hat, "eligible_sites": total, "boundary": w_hat == 0.5}
    return Estimate(Method.AE, {"a": a_hat}, None, w_hat, 0, time.perf_counter() - t0, extras)


@dataclass(frozen=True, eq=False)
class NaiveEstimate:
    """Per-site right-step frequencies over the range.

    The empirical mixture puts mass ``1 / R_n`` on each ``omega_hat``;
    ``projection`` holds a moment-matched family parameter when available.
    """

    sites: np.ndarray
    omega_hat: np.ndarray
    projection: dict

    def mixture(self) -> tuple[np.ndarray, np.ndarray]:
        values, counts = np.unique(self.omega_hat, return_counts=True)
        return values, counts / max(self.omega_hat.size, 1)

    def mass_below_half(self) -> float:
        if self.omega_hat.size == 0:
            return float("nan")
        return float(np.mean(self.omega_hat < 0.5))


def naive_estimator(stats: WalkStats, family: ModelFamily | None = None) -> NaiveEstimate:
    sites = stats.range_set
    omega_hat = stats.xi_plus[sites] / stats.xi[sites]
    projection = {}
    if family is not None and omega_hat.size:
        kind = family.kind
        if kind is FamilyKind.TEMKIN:
            # E[(omega - 1/2)^2] = (1/2 - a)^2
            lo, hi = family.box[0]
            a = 0.5 - np.sqrt(np.mean((omega_hat - 0.5) ** 2))
            projection["a"] = float(np.clip(a, lo, hi))
        elif kind is FamilyKind.TWO_POINT:
            low, high = omega_hat[omega_hat < 0.5], omega_hat[omega_hat > 0.5]
            if low.size and high.size:
                projection["a1"] = float(low.mean())
                projection["a2"] = float(high.mean())
    return NaiveEstimate(sites, omega_hat, projection)
