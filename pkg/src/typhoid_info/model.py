"""Typhoid transmission model with information-modulated incidence.

Humans are split into susceptible (S), infectious (I) and recovered (R);
environmental bacteria (B) are tracked as a concentration. Public
information cuts both transmission routes by a factor ``1 - rho`` and the
person-to-person route saturates as ``1 / (1 + nu_b * I)``.

Time is measured in weeks throughout.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "PARAMETER_NAMES",
    "STATE_NAMES",
    "ModelError",
    "DegeneratePopulationError",
    "Parameters",
    "State",
    "Derivative",
    "gamma",
    "force_of_infection",
    "rhs",
    "vector_field",
    "total_population",
    "conservation_residual",
]

PARAMETER_NAMES = (
    "pi1", "pi2", "pi3",
    "lambda1", "lambda2", "lambda3",
    "theta1", "theta2",
    "rho", "nu_b", "cc",
    "eta1", "eta2",
)
STATE_NAMES = ("s", "i", "r", "b")


class ModelError(ValueError):
    """Invalid parameters, states or arguments."""


class DegeneratePopulationError(ModelError):
    """Raised when the human population N = S + I + R is zero."""


@dataclass(frozen=True)
class Parameters:
    """The thirteen model constants.

    Rates are per week. ``cc`` is the half-saturation bacterial
    concentration of the environmental dose-response ``B / (B + cc)``.
    """

    pi1: float = 0.92        # recruitment of humans
    pi2: float = 0.005       # natural death
    pi3: float = 0.015       # disease-induced death
    lambda1: float = 0.048   # recovery
    lambda2: float = 0.1255  # loss of immunity
    lambda3: float = 0.025   # bacteria removal
    theta1: float = 0.95     # contact rate with the environment
    theta2: float = 0.0021   # contact rate with infectious humans
    rho: float = 0.07        # information-induced behaviour response
    nu_b: float = 0.025      # saturation of person-to-person incidence
    cc: float = 50000.0      # half-saturation concentration
    eta1: float = 0.95       # environmental recruitment of bacteria
    eta2: float = 0.95       # shedding by infectious humans

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ModelError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise ModelError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise ModelError(f"{name} must be >= 0, got {value!r}")
        for name in ("pi2", "lambda3", "cc"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.rho > 1:
            raise ModelError(f"rho must lie in [0,1], got {self.rho!r}")

    @classmethod
    def baseline(cls) -> Parameters:
        return cls()

    def replace(self, **changes) -> Parameters:
        unknown = set(changes) - set(PARAMETER_NAMES)
        if unknown:
            raise ModelError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    @property
    def exit_rate(self) -> float:
        """Total rate of leaving I: recovery plus both death rates."""
        return self.lambda1 + self.pi2 + self.pi3


@dataclass(frozen=True)
class State:
    """A point (S, I, R, B) of the phase space."""

    s: float
    i: float
    r: float
    b: float

    def __post_init__(self):
        for name in STATE_NAMES:
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise ModelError(f"state component {name} must be finite, got {value!r}")
            if value < 0:
                raise ModelError(f"state component {name} must be >= 0, got {value!r}")

    @classmethod
    def from_array(cls, y) -> State:
        s, i, r, b = (float(v) for v in y)
        return cls(s, i, r, b)

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.i, self.r, self.b])

    def __iter__(self):
        return iter((self.s, self.i, self.r, self.b))


class Derivative(NamedTuple):
    ds: float
    di: float
    dr: float
    db: float


def gamma(b: float, cc: float) -> float:
    """Probability of infection from the environment, ``b / (b + cc)``."""
    if cc <= 0:
        raise ModelError(f"cc must be > 0, got {cc!r}")
    if b < 0:
        raise ModelError(f"bacteria concentration must be >= 0, got {b!r}")
    return b / (b + cc)


def _chi(s, i, b, p: Parameters):
    # no domain checks; integrators call this on slightly negative undershoot
    damp = 1.0 - p.rho
    return p.theta1 * damp * b / (b + p.cc) * s + p.theta2 * damp * i * s / (1.0 + p.nu_b * i)


def force_of_infection(state: State, p: Parameters) -> float:
    """Rate of new infections, environmental plus saturated contact."""
    return _chi(state.s, state.i, state.b, p)


def vector_field(y, p: Parameters) -> np.ndarray:
    """Right-hand side on a raw ``(S, I, R, B)`` array.

    Used by the integrators, which step through states that may fall a hair
    below zero and so cannot be wrapped in :class:`State`.
    """
    s, i, r, b = y
    n = s + i + r
    if n == 0:
        raise DegeneratePopulationError("I/N is undefined for N = 0")
    chi = _chi(s, i, b, p)
    return np.array([
        p.pi1 + p.lambda2 * r - chi - p.pi2 * s,
        chi - p.exit_rate * i,
        p.lambda1 * i - (p.pi2 + p.lambda2) * r,
        p.eta1 + p.eta2 * i / n - p.lambda3 * b,
    ])


def rhs(state: State, p: Parameters) -> Derivative:
    return Derivative(*(float(v) for v in vector_field(tuple(state), p)))


def total_population(state: State) -> float:
    return state.s + state.i + state.r


def conservation_residual(state: State, p: Parameters) -> float:
    """``dN/dt`` from the vector field minus ``pi1 - pi2*N - pi3*I``.

    Zero up to round-off because the incidence cancels between S and I.
    """
    ds, di, dr, _ = rhs(state, p)
    n = total_population(state)
    return (ds + di + dr) - (p.pi1 - p.pi2 * n - p.pi3 * state.i)
