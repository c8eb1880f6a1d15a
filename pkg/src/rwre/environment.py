"""Random environments on a finite window of sites and their potential."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ThetaParams

DEFAULT_X_MAX = 100_000


@dataclass(frozen=True, eq=False)
class Environment:
    """Transition probabilities to the right at sites ``1..x_max``.

    ``omega[k]`` is the value at site ``k + 1``; site 0 reflects and
    carries no value.  ``atom_index[k]`` is the atom of the generating law,
    or -1 when the environment was built by hand.
    """

    omega: np.ndarray
    atom_index: np.ndarray | None = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        if omega.ndim != 1 or omega.size < 1:
            raise DomainError("omega must be a nonempty 1-d array")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        if self.atom_index is None:
            idx = np.full(omega.size, -1, dtype=np.int64)
        else:
            idx = np.array(self.atom_index, dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "atom_index", idx)

    @property
    def x_max(self) -> int:
        return self.omega.size

    def at(self, x: int) -> float:
        if not 1 <= x <= self.x_max:
            raise IndexError(f"site {x} outside [1, {self.x_max}]")
        return float(self.omega[x - 1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,omega\n")
        for x, w in enumerate(self.omega.tolist(), start=1):
            buf.write(f"{x},{w!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Environment":
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "x,omega":
            raise ValueError("expected header 'x,omega'")
        rows = [line.split(",") for line in lines[1:]]
        xs = [int(r[0]) for r in rows]
        if xs != list(range(1, len(xs) + 1)):
            raise ValueError("sites must be 1..x_max in order")
        return cls(np.array([float(r[1]) for r in rows]))


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Potential ``v[x] = sum_{y<=x} log((1 - omega_y) / omega_y)``, ``v[0] = 0``."""

    v: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def x_max(self) -> int:
        return self.v.size - 1


def sample_environment(theta: ThetaParams, x_max: int, rng: np.random.Generator) -> Environment:
    """Draw i.i.d. ``omega_x`` from the law ``theta`` at sites ``1..x_max``."""
    if x_max < 1:
        raise DomainError("x_max must be >= 1")
    idx = rng.choice(theta.d, size=x_max, p=theta.p)
    return Environment(theta.a[idx], idx)


def potential(env: Environment) -> PotentialProfile:
    log_rho = np.log1p(-env.omega) - np.log(env.omega)
    return PotentialProfile(np.concatenate([[0.0], np.cumsum(log_rho)]))


def reversible_measure(prof: PotentialProfile, x: int) -> float:
    """``exp(-V(x-1)) + exp(-V(x))``, the reversible measure of the walk at site ``x``."""
    if not 1 <= x <= prof.x_max:
        raise IndexError(f"site {x} outside [1, {prof.x_max}]")
    return float(np.exp(-prof.v[x - 1]) + np.exp(-prof.v[x]))
