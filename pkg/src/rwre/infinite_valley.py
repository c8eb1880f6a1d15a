"""Monte Carlo for the infinite-valley limit of the support criterion.

A sample of the infinite valley is the potential conditioned to stay
nonnegative to the right of 0 and positive to its left, truncated to the
window ``[-M, M]``.  Conditioning is done by rejection on each branch.
From the landscape we form the stationary law ``nu`` of the walk in the
valley, its split ``nu = nu_plus + nu_minus`` into right and left
departures, and the local environment ``omega_tilde = nu_plus / nu``.

The limit criterion is ``L_inf(a) = L(a, nu_plus, nu_minus)``; it is
available both in its direct form and through the entropy decomposition
``-sum nu H(omega_tilde) - sum nu min_i KL(omega_tilde | a_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SamplerExhaustedError
from .likelihood import criterion_L
from .model import FamilyKind, ModelFamily, ThetaParams, entropy, kl

DEFAULT_M = 100
DEFAULT_ATTEMPT_CAP = 10**6
# slack for exact-zero partial sums computed in floating point
_ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class InfiniteValleySample:
    """One truncated infinite valley on sites ``x = -M..M``.

    ``v_tilde`` covers ``-M-1..M`` (the extra left site enters ``nu(-M)``);
    the other arrays cover ``-M..M``.  ``atom_index[k]`` identifies the atom
    equal to ``omega_tilde`` at site ``k - M``.
    """

    M: int
    v_tilde: np.ndarray
    nu: np.ndarray
    nu_plus: np.ndarray
    nu_minus: np.ndarray
    omega_tilde: np.ndarray
    atom_index: np.ndarray
    truncation_mass_bound: float
    attempts: int

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def v_at(self, x: int) -> float:
        return float(self.v_tilde[x + self.M + 1])

    def atom_mass(self, n_atoms: int) -> np.ndarray:
        """``nu`` mass carried by the sites where ``omega_tilde`` equals each atom."""
        return np.bincount(self.atom_index, weights=self.nu, minlength=n_atoms)

    def drift(self) -> float:
        return float(np.sum(self.nu * (2.0 * self.omega_tilde - 1.0)))


def _conditioned_branch(steps, probs, length, strict, rng, cap, batch=256):
    """Atom indices of ``length`` i.i.d. steps whose partial sums stay >= 0 (> 0 if strict).

    Returns ``(indices, attempts)``.
    """
    attempts = 0
    while attempts < cap:
        size = min(batch, cap - attempts)
        idx = rng.choice(steps.size, size=(size, length), p=probs)
        sums = np.cumsum(steps[idx], axis=1)
        ok = np.all(sums > _ZERO_TOL, axis=1) if strict else np.all(sums >= -_ZERO_TOL, axis=1)
        hit = np.flatnonzero(ok)
        if hit.size:
            attempts += int(hit[0]) + 1
            return idx[hit[0]], attempts
        attempts += size
    raise SamplerExhaustedError(f"no conditioned branch of length {length} in {cap} attempts")


def sample_infinite_valley(
    theta_star: ThetaParams, M: int = DEFAULT_M, rng: np.random.Generator | None = None,
    attempt_cap: int = DEFAULT_ATTEMPT_CAP,
) -> InfiniteValleySample:
    """Draw one truncated infinite valley for the environment law ``theta_star``.

    The right branch uses the potential increments ``log((1-a_i)/a_i)`` and is
    kept if all partial sums on ``1..M`` are nonnegative; the left branch
    (``V(-k)``, ``k = 1..M+1``) is kept if all its values are positive.

    Raises
    ------
    SamplerExhaustedError
        Either branch was rejected ``attempt_cap`` times.
    """
    if M < 10:
        raise DomainError("window radius M must be >= 10")
    rng = np.random.default_rng() if rng is None else rng
    a = theta_star.a
    log_rho = np.log1p(-a) - np.log(a)
    right_idx, n_right = _conditioned_branch(log_rho, theta_star.p, M, False, rng, attempt_cap)
    # V(-k) = -(log rho_0 + ... + log rho_{-k+1})
    left_idx, n_left = _conditioned_branch(-log_rho, theta_star.p, M + 1, True, rng, attempt_cap)

    v_right = np.cumsum(log_rho[right_idx])                 # V(1..M)
    v_left = np.cumsum(-log_rho[left_idx])                  # V(-1..-M-1)
    v_tilde = np.concatenate([v_left[::-1], [0.0], v_right])  # V(-M-1..M)
    # site x has increment V(x) - V(x-1) = log rho_x; x <= 0 reads the left branch
    atom_index = np.concatenate([left_idx[:M + 1][::-1], right_idx])  # x = -M..M
    return valley_from_landscape(v_tilde, atom_index, a, n_right + n_left)


def valley_from_landscape(v_tilde, atom_index, a, attempts: int = 0) -> InfiniteValleySample:
    """Stationary masses of a landscape ``v_tilde`` given on ``-M-1..M``.

    ``atom_index`` (length ``2M + 1``) names the atom of ``a`` read at each
    site ``-M..M``.
    """
    v_tilde = np.asarray(v_tilde, dtype=float)
    M = (v_tilde.size - 2) // 2
    atom_index = np.asarray(atom_index)
    shift = v_tilde.min()
    weight = np.exp(-(v_tilde - shift))
    w_here = weight[1:]        # exp(-V(x)),   x = -M..M
    w_prev = weight[:-1]       # exp(-V(x-1)), x = -M..M
    z = w_here.sum() + w_prev.sum()
    nu_plus = w_here / z
    nu_minus = w_prev / z
    nu = nu_plus + nu_minus
    omega_tilde = np.asarray(a, dtype=float)[atom_index]
    # neglected mass beyond the window, measured by the Boltzmann weights at its edges
    tmb = float((weight[-1] + weight[0]) / z)
    return InfiniteValleySample(
        M, v_tilde, nu, nu_plus, nu_minus, omega_tilde, atom_index, tmb, attempts,
    )


def sample_valleys(theta_star: ThetaParams, M: int, samples: int, rng, attempt_cap=DEFAULT_ATTEMPT_CAP):
    return [sample_infinite_valley(theta_star, M, rng, attempt_cap) for _ in range(samples)]


def l_infinity(sample: InfiniteValleySample, a) -> float:
    """Direct form ``sum_x max_i {nu_plus log a_i + nu_minus log(1 - a_i)}``."""
    return criterion_L(np.atleast_1d(a), sample.nu_plus, sample.nu_minus)


def l_infinity_entropy(sample: InfiniteValleySample, a) -> float:
    """Entropy form ``-sum nu H(omega_tilde) - sum nu min_i KL(omega_tilde | a_i)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    w = sample.omega_tilde
    penalty = kl(w[:, None], a[None, :]).min(axis=1)
    return float(-np.dot(sample.nu, entropy(w)) - np.dot(sample.nu, penalty))


# floating-point floor for variances of quantities of order one
_ROUNDOFF_FLOOR = 1e-24


@dataclass(frozen=True, eq=False)
class LInfinitySamples:
    """Per-sample values of ``L_inf(a)`` on a set of valleys.

    ``spread`` is the range of the per-unit-mass contribution
    ``-H(w) - min_i KL(w | a_i)`` over the atoms ``w`` met in the valleys:
    moving a mass ``m`` between sites changes ``L_inf`` by at most
    ``m * spread``.
    """

    direct: np.ndarray
    via_entropy: np.ndarray
    truncation: np.ndarray
    spread: float = 0.0

    @property
    def mean(self) -> float:
        return float(self.direct.mean())

    @property
    def se(self) -> float:
        k = self.direct.size
        return float(self.direct.std(ddof=1) / np.sqrt(k)) if k > 1 else float("nan")

    @property
    def var(self) -> float:
        return float(self.direct.var(ddof=1)) if self.direct.size > 1 else 0.0

    @property
    def noise_floor(self) -> float:
        """Variance scale attributable to the window truncation and round-off."""
        return float(np.mean((self.truncation * self.spread) ** 2)) + _ROUNDOFF_FLOOR

    def to_csv(self) -> str:
        lines = ["sample_id,L_inf"]
        lines += [f"{i},{v!r}" for i, v in enumerate(self.direct.tolist())]
        return "\n".join(lines) + "\n"


def evaluate_l_infinity(valleys, a) -> LInfinitySamples:
    """Both forms of ``L_inf(a)`` on pre-drawn valleys; they must agree to 1e-9."""
    direct = np.array([l_infinity(v, a) for v in valleys])
    ent = np.array([l_infinity_entropy(v, a) for v in valleys])
    gap = np.max(np.abs(direct - ent)) if direct.size else 0.0
    if gap > 1e-9:
        raise ArithmeticError(f"L_inf direct and entropy forms differ by {gap:.3e}")
    atoms = np.unique(np.concatenate([v.omega_tilde for v in valleys])) if valleys else np.array([])
    spread = 0.0
    if atoms.size:
        cand = np.atleast_1d(np.asarray(a, dtype=float))
        g = -entropy(atoms) - kl(atoms[:, None], cand[None, :]).min(axis=1)
        spread = float(g.max() - g.min())
    truncation = np.array([v.truncation_mass_bound for v in valleys])
    return LInfinitySamples(direct, ent, truncation, spread)


def l_infinity_mc(
    a, theta_star: ThetaParams, M: int = DEFAULT_M, samples: int = 1000, rng=None,
    attempt_cap: int = DEFAULT_ATTEMPT_CAP,
) -> LInfinitySamples:
    if samples < 1:
        raise DomainError("samples must be >= 1")
    valleys = sample_valleys(theta_star, M, samples, rng, attempt_cap)
    return evaluate_l_infinity(valleys, a)


def lazy_threshold(a_star: float, tol: float = 1e-10) -> float:
    """Unique ``a' in (0, a_star)`` with ``KL(a_star | a') = log 2 - H(a_star)``, by bisection."""
    if not 0.0 < a_star < 0.5:
        raise DomainError("a_star must lie in (0, 1/2)")
    target = np.log(2.0) - entropy(a_star)
    lo, hi = np.finfo(float).tiny, a_star
    # KL(a_star | .) decreases on (0, a_star): above target at lo, below at hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kl(a_star, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def two_point_weights(a_star) -> np.ndarray:
    """Masses ``nu^(1), nu^(2)`` fixed by total mass one and zero mean drift."""
    a1, a2 = a_star
    return np.array([(a2 - 0.5) / (a2 - a1), (0.5 - a1) / (a2 - a1)])


@dataclass(frozen=True)
class AffineInHalfMass:
    """Random limit ``slope * nu_half + intercept``, ``nu_half`` the mass on sites with omega = 1/2."""

    slope: float
    intercept: float

    def __call__(self, nu_half):
        return self.slope * np.asarray(nu_half) + self.intercept


def l_infinity_closed(family: ModelFamily, a, theta_star: ThetaParams):
    """Closed form of ``L_inf`` for the Temkin, two-point and lazy Temkin families.

    ``a`` is the candidate free support parameter (``a`` for Temkin and lazy
    Temkin, ``(a1, a2)`` for two-point).  Returns a float, or an
    ``AffineInHalfMass`` when the limit is random.
    """
    kind = family.kind
    if kind is FamilyKind.TEMKIN:
        a_st = theta_star.a[0]
        return -(entropy(a_st) + kl(a_st, float(np.atleast_1d(a)[0])))
    if kind is FamilyKind.TWO_POINT:
        cand = np.atleast_1d(np.asarray(a, dtype=float))
        weights = two_point_weights(theta_star.a)
        terms = [entropy(aj) + min(kl(aj, ai) for ai in cand) for aj in theta_star.a]
        return -float(np.dot(weights, terms))
    if kind is FamilyKind.LAZY_TEMKIN:
        a_st = theta_star.a[0]
        x = float(np.atleast_1d(a)[0])
        cand = (x, 0.5, 1.0 - x)
        base = entropy(a_st) + min(kl(a_st, c) for c in cand)
        slope = base - np.log(2.0)
        if x <= lazy_threshold(a_st) or abs(slope) < 1e-15:
            return -np.log(2.0)
        return AffineInHalfMass(slope, -base)
    raise DomainError(f"no closed form for family {kind.value}")
