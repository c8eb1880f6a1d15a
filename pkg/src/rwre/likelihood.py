"""Annealed log-likelihood, pseudo-likelihood and the pieces of its expansion.

For a finished walk and a parameter ``theta = (a, p)`` the log-likelihood
splits exactly as::

    loglik(theta) = n * L_n(a) + R_n * K_n(theta) + r_n(theta)

where ``L_n`` depends on the support only, ``K_n`` is the average
log-probability of the atoms the visited sites are assigned to and
``r_n >= 0`` is a remainder.  Site assignment uses the ratio of right to left
departures against the thresholds returned by ``beta_thresholds``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, UndefinedCriterionError
from .model import ThetaParams, entropy_vec, kl_vec
from .walk import WalkStats

# relative slack for ratios that equal a threshold in exact arithmetic
_TIE_RTOL = 1e-12


def _site_scores(a, xp, xm) -> np.ndarray:
    """Matrix ``xi_plus * log a_i + xi_minus * log(1 - a_i)`` of shape (sites, d)."""
    a = np.asarray(a, dtype=float)
    return np.outer(xp, np.log(a)) + np.outer(xm, np.log1p(-a))


def log_likelihood(theta: ThetaParams, stats: WalkStats) -> float:
    """Annealed log-likelihood of the walk, evaluated by log-sum-exp over atoms."""
    xp, xm = stats.range_counts()
    if xp.size == 0:
        return 0.0
    terms = _site_scores(theta.a, xp, xm) + np.log(theta.p)
    return float(logsumexp(terms, axis=1).sum())


@dataclass(frozen=True, eq=False)
class BetaThresholds:
    """Ratio cut points ``(-inf, beta_1, ..., beta_{d-1}, +inf)``."""

    beta: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.beta[1:-1]


def beta_thresholds(a) -> BetaThresholds:
    """Cut points ``log((1-a_i)/(1-a_{i+1})) / log(a_{i+1}/a_i)`` between consecutive atoms."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or np.any(a <= 0) or np.any(a >= 1):
        raise DomainError("support must be a vector in (0, 1)")
    if a.size > 1 and np.any(np.diff(a) <= 0):
        raise DomainError(f"support {a} is not strictly increasing")
    inner = np.log1p(-a[:-1]) - np.log1p(-a[1:])
    inner = inner / (np.log(a[1:]) - np.log(a[:-1]))
    beta = np.concatenate([[-np.inf], inner, [np.inf]])
    return BetaThresholds(beta)


@dataclass(frozen=True, eq=False)
class SiteClassification:
    """Atom assigned to each visited site.

    ``labels[k]`` is the 0-based atom index for ``sites[k]``; ``counts[i]``
    is the number of visited sites assigned to atom ``i``.
    """

    sites: np.ndarray
    labels: np.ndarray
    counts: np.ndarray

    @property
    def range_size(self) -> int:
        return int(self.counts.sum())


def departure_ratio(xp, xm) -> np.ndarray:
    """``xi_plus / xi_minus`` with ``+inf`` when there was no left departure."""
    xp = np.asarray(xp, dtype=float)
    xm = np.asarray(xm, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xm > 0, xp / np.where(xm > 0, xm, 1.0), np.inf)
    return ratio


def classify_counts(a, xp, xm) -> np.ndarray:
    """0-based atom index ``i`` with ``beta_{i} < ratio <= beta_{i+1}`` (1-based thresholds)."""
    beta = beta_thresholds(a)
    ratio = departure_ratio(xp, xm)
    # thresholds are positive; widen them by a few ulps so exact ties such as
    # beta = 1 for a symmetric support stay in the lower class
    return np.searchsorted(beta.interior * (1.0 + _TIE_RTOL), ratio, side="left")


def classify_sites(a, stats: WalkStats) -> SiteClassification:
    sites = stats.range_set
    xp, xm = stats.xi_plus[sites], stats.xi_minus[sites]
    labels = classify_counts(a, xp, xm)
    counts = np.bincount(labels, minlength=np.size(a))
    return SiteClassification(sites, labels, counts)


def criterion_L(a, pi_plus, pi_minus) -> float:
    """``sum_x max_i {pi_plus(x) log a_i + pi_minus(x) log(1 - a_i)}``."""
    return float(_site_scores(a, pi_plus, pi_minus).max(axis=1).sum())


def pseudo_likelihood_L(a, stats: WalkStats) -> float:
    """The support criterion ``L_n(a)``; zero on an empty range."""
    xp, xm = stats.range_counts()
    if xp.size == 0:
        return 0.0
    return criterion_L(a, xp, xm) / stats.n


def criterion_K(theta: ThetaParams, classification: SiteClassification) -> float:
    """Average log-probability of the assigned atoms.

    Computed as ``sum_i (R_i / R) log p_i`` and cross-checked against
    ``-H(R_./R) - KL(R_./R | p)``.
    """
    total = classification.range_size
    if total == 0:
        raise UndefinedCriterionError("K_n needs at least one visited site")
    freq = classification.counts / total
    direct = float(np.dot(freq, np.log(theta.p)))
    via_entropy = -entropy_vec(freq) - kl_vec(freq, theta.p)
    if abs(direct - via_entropy) > 1e-10 * (1.0 + abs(direct)):
        raise ArithmeticError(f"K_n forms disagree: {direct} vs {via_entropy}")
    return direct


def remainder(theta: ThetaParams, stats: WalkStats) -> float:
    """Remainder ``r_n(theta) >= 0`` of the likelihood expansion."""
    sites = stats.range_set
    if sites.size == 0:
        raise UndefinedCriterionError("r_n needs at least one visited site")
    xp = stats.xi_plus[sites].astype(float)
    xm = stats.xi_minus[sites].astype(float)
    xi = xp + xm
    a = theta.a
    best = classify_counts(a, xp, xm)
    a_best = a[best][:, None]
    # exponent of U_i, then raised to the local time
    log_u = (xp / xi)[:, None] * np.log(a[None, :] / a_best)
    log_u += (xm / xi)[:, None] * (np.log1p(-a[None, :]) - np.log1p(-a_best))
    log_ratio_p = np.log(theta.p)[None, :] - np.log(theta.p[best])[:, None]
    log_terms = log_ratio_p + xi[:, None] * log_u
    log_terms[np.arange(sites.size), best] = -np.inf
    inner = np.exp(logsumexp(log_terms, axis=1)) if theta.d > 1 else np.zeros(sites.size)
    return float(np.log1p(inner).sum())


@dataclass(frozen=True)
class Expansion:
    loglik: float
    n_L: float
    R_K: float
    r: float

    @property
    def residual(self) -> float:
        return self.loglik - self.n_L - self.R_K - self.r


def expansion(theta: ThetaParams, stats: WalkStats) -> Expansion:
    """All four terms of the likelihood expansion for one instance."""
    cls = classify_sites(theta.a, stats)
    return Expansion(
        log_likelihood(theta, stats),
        stats.n * pseudo_likelihood_L(theta.a, stats),
        cls.range_size * criterion_K(theta, cls),
        remainder(theta, stats),
    )
