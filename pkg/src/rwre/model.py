"""Parameter space, model families and entropy / Kullback-Leibler helpers.

The environment law is a finitely supported distribution
``sum_i p_i * delta(a_i)`` on (0, 1).  A parameter ``ThetaParams`` holds the
ordered support ``a`` and probability vector ``p`` together with the
separation margin ``eps0`` that keeps the parameter space compact.

All logarithms are natural.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr, rel_entr

from .errors import ConstraintError, DomainError

DEFAULT_EPS0 = 0.02
RECURRENCE_TOL = 1e-10
# round-off slack on the eps0 margins
_MARGIN_SLACK = 1e-12


def _readonly(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_open_unit(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"{name} must lie in (0, 1), got {x!r}")
    return arr


@dataclass(frozen=True, eq=False)
class ThetaParams:
    """Support ``a`` (strictly increasing) and probabilities ``p`` of the environment law."""

    a: np.ndarray
    p: np.ndarray
    eps0: float = DEFAULT_EPS0

    def __post_init__(self):
        a = _readonly(self.a)
        p = _readonly(self.p)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", p)
        eps0 = float(self.eps0)
        d = a.size
        if a.ndim != 1 or p.shape != a.shape or d < 1:
            raise DomainError("a and p must be 1-d vectors of equal length")
        if not 0.0 < eps0 < 1.0 / (2 * d):
            raise DomainError(f"eps0 must lie in (0, 1/(2d)), got {eps0}")
        _check_open_unit(a, "a")
        floor = eps0 - _MARGIN_SLACK
        if a[0] < floor or 1.0 - a[-1] < floor:
            raise DomainError(f"support {a} closer than eps0={eps0} to the boundary")
        if d > 1 and np.min(np.diff(a)) < floor:
            raise DomainError(f"support {a} not increasing with gaps >= eps0={eps0}")
        if np.any(p < floor):
            raise DomainError(f"probabilities {p} below eps0={eps0}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise DomainError(f"probabilities {p} do not sum to 1")

    @property
    def d(self) -> int:
        return self.a.size

    def __repr__(self):
        return f"ThetaParams(a={self.a.tolist()}, p={self.p.tolist()}, eps0={self.eps0})"


def recurrence_defect(a, p) -> float:
    """Return ``sum_i p_i log((1 - a_i) / a_i)``; zero for a recurrent environment."""
    a = _check_open_unit(a, "a")
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p > 1.0):
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    if a.shape != p.shape:
        raise DomainError("a and p must have the same length")
    return float(np.sum(p * np.log((1.0 - a) / a)))


def two_point_probabilities(a1: float, a2: float) -> tuple[float, float]:
    """Probabilities making the two-atom law on ``a1 < 1/2 < a2`` recurrent.

    ``p1 * log((1-a1)/a1) + p2 * log((1-a2)/a2) = 0`` with ``p1 + p2 = 1``
    gives ``p1 = B / (A + B)`` and ``p2 = A / (A + B)`` where
    ``A = log((1-a1)/a1)`` and ``B = log(a2/(1-a2))``.
    """
    if not 0.0 < a1 < 0.5 < a2 < 1.0:
        raise DomainError(f"need 0 < a1 < 1/2 < a2 < 1, got ({a1}, {a2})")
    big_a = np.log((1.0 - a1) / a1)
    big_b = np.log(a2 / (1.0 - a2))
    return float(big_b / (big_a + big_b)), float(big_a / (big_a + big_b))


class FamilyKind(enum.Enum):
    TEMKIN = "temkin"
    TWO_POINT = "two_point"
    LAZY_TEMKIN = "lazy_temkin"
    GENERAL = "general"
    SINGLE = "single"


@dataclass(frozen=True)
class ModelFamily:
    """A parametric family of recurrent environment laws.

    Attributes
    ----------
    kind : FamilyKind
    box : tuple of (lo, hi) pairs
        Closed bounds for each free coordinate.
    eps0 : float
        Margin passed to every ``ThetaParams`` the family builds.
    d : int
        Number of atoms.
    """

    kind: FamilyKind
    box: tuple
    eps0: float = DEFAULT_EPS0
    d: int = 2
    param_names: tuple = field(default=())

    @classmethod
    def temkin(cls, eps0: float = DEFAULT_EPS0) -> "ModelFamily":
        return cls(FamilyKind.TEMKIN, ((eps0, 0.5 - eps0),), eps0, 2, ("a",))

    @classmethod
    def two_point(cls, eps0: float = DEFAULT_EPS0) -> "ModelFamily":
        box = ((eps0, 0.5 - eps0), (0.5 + eps0, 1.0 - eps0))
        fam = cls(FamilyKind.TWO_POINT, box, eps0, 2, ("a1", "a2"))
        # smallest p1 sits at the lower corner, smallest p2 at the upper one
        for corner in ((box[0][0], box[1][0]), (box[0][1], box[1][1])):
            if min(two_point_probabilities(*corner)) < eps0:
                raise DomainError(
                    f"eps0={eps0} too small: two-point box corner {corner} "
                    "maps to a probability below eps0"
                )
        return fam

    @classmethod
    def lazy_temkin(cls, eps0: float = DEFAULT_EPS0) -> "ModelFamily":
        box = ((eps0, 0.5 - eps0), (eps0, 1.0 - 2.0 * eps0))
        return cls(FamilyKind.LAZY_TEMKIN, box, eps0, 3, ("a", "r"))

    @classmethod
    def general(cls, d: int, eps0: float = DEFAULT_EPS0) -> "ModelFamily":
        if d < 2:
            raise DomainError("general family needs d >= 2")
        box = tuple((eps0, 1.0 - eps0) for _ in range(2 * d - 1))
        names = tuple(f"a{i + 1}" for i in range(d)) + tuple(f"p{i + 1}" for i in range(d - 1))
        return cls(FamilyKind.GENERAL, box, eps0, d, names)

    @classmethod
    def single(cls, eps0: float = DEFAULT_EPS0) -> "ModelFamily":
        """One-atom law ``delta(a)``.  Not recurrent unless ``a = 1/2``; kept for checks."""
        return cls(FamilyKind.SINGLE, ((eps0, 1.0 - eps0),), eps0, 1, ("a",))

    @classmethod
    def from_name(cls, name: str, eps0: float = DEFAULT_EPS0, d: int | None = None) -> "ModelFamily":
        kind = FamilyKind(name)
        if kind is FamilyKind.TEMKIN:
            return cls.temkin(eps0)
        if kind is FamilyKind.TWO_POINT:
            return cls.two_point(eps0)
        if kind is FamilyKind.LAZY_TEMKIN:
            return cls.lazy_temkin(eps0)
        if kind is FamilyKind.SINGLE:
            return cls.single(eps0)
        return cls.general(d or 2, eps0)

    @property
    def n_free(self) -> int:
        return len(self.box)

    @property
    def support_box(self) -> tuple:
        """Bounds of the free coordinates that determine the support alone."""
        if self.kind is FamilyKind.GENERAL:
            return self.box[: self.d]
        if self.kind is FamilyKind.LAZY_TEMKIN:
            return self.box[:1]
        return self.box

    def support_from_free(self, free) -> np.ndarray:
        """Map the support-only coordinates to the full support vector."""
        free = np.atleast_1d(np.asarray(free, dtype=float))
        if self.kind is FamilyKind.TEMKIN:
            return np.array([free[0], 1.0 - free[0]])
        if self.kind is FamilyKind.LAZY_TEMKIN:
            return np.array([free[0], 0.5, 1.0 - free[0]])
        return free[: self.d].copy()

    def in_box(self, free) -> bool:
        free = np.atleast_1d(np.asarray(free, dtype=float))
        if free.size != self.n_free:
            return False
        lo, hi = np.array(self.box).T
        return bool(np.all(free >= lo) and np.all(free <= hi))

    def to_theta(self, free) -> ThetaParams:
        return family_to_theta(self, free)


def family_to_theta(family: ModelFamily, free) -> ThetaParams:
    """Build the ``ThetaParams`` that a free-parameter vector stands for.

    Raises
    ------
    DomainError
        ``free`` is outside the family's box or has the wrong length.
    ConstraintError
        A general-family vector is not recurrent.
    """
    free = np.atleast_1d(np.asarray(free, dtype=float))
    if not family.in_box(free):
        raise DomainError(f"free parameters {free.tolist()} outside box {family.box}")
    kind = family.kind
    if kind is FamilyKind.TEMKIN:
        (a,) = free
        return ThetaParams([a, 1.0 - a], [0.5, 0.5], family.eps0)
    if kind is FamilyKind.TWO_POINT:
        a1, a2 = free
        return ThetaParams([a1, a2], two_point_probabilities(a1, a2), family.eps0)
    if kind is FamilyKind.LAZY_TEMKIN:
        a, r = free
        return ThetaParams([a, 0.5, 1.0 - a], [(1.0 - r) / 2.0, r, (1.0 - r) / 2.0], family.eps0)
    if kind is FamilyKind.SINGLE:
        return ThetaParams(free, [1.0], family.eps0)
    d = family.d
    a = free[:d]
    p = np.append(free[d:], 1.0 - free[d:].sum())
    if p[-1] <= 0.0:
        raise DomainError(f"probabilities {p.tolist()} do not normalize")
    defect = recurrence_defect(a, p)
    if abs(defect) > RECURRENCE_TOL:
        raise ConstraintError(f"recurrence defect {defect:.3e} exceeds {RECURRENCE_TOL}")
    return ThetaParams(a, p, family.eps0)


def theta_to_free(family: ModelFamily, theta: ThetaParams) -> np.ndarray:
    """Inverse of ``family_to_theta`` (no validation beyond shape)."""
    kind = family.kind
    if kind is FamilyKind.TEMKIN:
        return np.array([theta.a[0]])
    if kind in (FamilyKind.TWO_POINT, FamilyKind.SINGLE):
        return theta.a.copy()
    if kind is FamilyKind.LAZY_TEMKIN:
        return np.array([theta.a[0], theta.p[1]])
    return np.concatenate([theta.a, theta.p[:-1]])


def entropy(q):
    """Binary entropy ``-[q log q + (1-q) log(1-q)]``, elementwise on arrays."""
    q = _check_open_unit(q, "q")
    out = entr(q) + entr(1.0 - q)
    return float(out) if out.ndim == 0 else out


def entropy_vec(q) -> float:
    """Multinomial entropy ``-sum q_i log q_i`` (zero entries contribute 0)."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise DomainError(f"entries of q must lie in [0, 1], got {q}")
    return float(entr(q).sum())


def kl(q, q2):
    """Binary Kullback-Leibler divergence ``d_KL(q | q2)``, elementwise."""
    q = _check_open_unit(q, "q")
    q2 = _check_open_unit(q2, "q2")
    out = rel_entr(q, q2) + rel_entr(1.0 - q, 1.0 - q2)
    return float(out) if out.ndim == 0 else out


def kl_vec(q, q2) -> float:
    """Kullback-Leibler divergence between probability vectors."""
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q.shape != q2.shape:
        raise DomainError("q and q2 must have the same shape")
    if np.any(q2 <= 0.0) or np.any(q < 0.0):
        raise DomainError("q2 must be strictly positive and q nonnegative")
    return float(rel_entr(q, q2).sum())
