"""Equilibria, reproduction number and stability of the typhoid model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .integrate import SolverConfig, run_to_steady_state
from .linalg import eigenvalues4
from .model import (
    DegeneratePopulationError,
    Derivative,
    ModelError,
    Parameters,
    State,
    rhs,
    vector_field,
)

__all__ = [
    "LOCALLY_STABLE",
    "UNSTABLE",
    "INCONCLUSIVE",
    "InconsistentModelError",
    "NoEndemicEquilibrium",
    "NewtonError",
    "NgmPair",
    "StabilityReport",
    "MetzlerDecomposition",
    "disease_free_equilibrium",
    "r0_closed_form",
    "ngm_matrices",
    "r0_ngm",
    "jacobian",
    "spectral_abscissa",
    "dfe_local_stability",
    "metzler_decomposition",
    "endemic_equilibrium",
    "lyapunov_value",
    "lyapunov_along",
    "lyapunov_gap",
    "r0_sensitivity",
    "SENSITIVITY_PARAMETERS",
]

LOCALLY_STABLE = "locally_stable"
UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"

ABSCISSA_BAND = 1e-8
DFE_RESIDUAL_TOL = 1e-9


class InconsistentModelError(ModelError):
    """The disease-free point is not stationary for these parameters."""


class NoEndemicEquilibrium(ModelError):
    pass


class NewtonError(ArithmeticError):
    pass


class NgmPair(NamedTuple):
    f: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class StabilityReport:
    r0_closed: float
    r0_ngm: float
    dfe: State
    dfe_residual: Derivative
    eigenvalues: np.ndarray
    spectral_abscissa: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "r0_closed": self.r0_closed,
            "r0_ngm": self.r0_ngm,
            "dfe": dict(zip("SIRB", self.dfe)),
            "dfe_residual": dict(zip(("dS", "dI", "dR", "dB"), self.dfe_residual)),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "spectral_abscissa": self.spectral_abscissa,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class MetzlerDecomposition:
    """Blocks of the split into non-transmitting (S, R) and transmitting (I, B) parts.

    ``a1`` acts on ``(S - S0, R)``, ``a2`` couples ``(I, B)`` into it and
    ``a3`` is the linearised transmitting block.
    """

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a1_eigenvalues: np.ndarray
    a3_eigenvalues: np.ndarray
    a1_negative: bool
    a3_metzler: bool
    a3_stable: bool
    r0: float

    @property
    def consistent_with_r0(self) -> bool:
        return self.a3_stable == (self.r0 < 1)

    def checks(self) -> dict[str, bool]:
        return {
            "a1_eigenvalues_negative": self.a1_negative,
            "a3_off_diagonal_nonnegative": self.a3_metzler,
            "a3_stable": self.a3_stable,
            "a3_stable_iff_r0_below_one": self.consistent_with_r0,
        }


def disease_free_equilibrium(p: Parameters) -> tuple[State, Derivative]:
    """``(pi1/pi2, 0, 0, 0)`` together with the vector field there.

    The residual is ``(0, 0, 0, eta1)``: the point is only stationary when
    there is no environmental recruitment of bacteria.
    """
    dfe = State(p.pi1 / p.pi2, 0.0, 0.0, 0.0)
    if p.pi1 == 0:
        return dfe, Derivative(0.0, 0.0, 0.0, p.eta1)
    return dfe, rhs(dfe, p)


def _check_r0_domain(p: Parameters):
    if p.exit_rate <= 0:
        raise ModelError("lambda1 + pi2 + pi3 must be > 0")


def r0_closed_form(p: Parameters) -> float:
    _check_r0_domain(p)
    num = (1 - p.rho) * (p.cc * p.pi1 * p.lambda3 * p.theta2 + p.pi2 * p.eta2 * p.theta1)
    return num / (p.pi2 * p.exit_rate * p.cc * p.lambda3)


def ngm_matrices(p: Parameters) -> NgmPair:
    """New-infection (F) and transfer (V) matrices over (I, B) at the DFE."""
    if p.pi1 <= 0:
        raise ModelError("pi1 must be > 0: the DFE population pi1/pi2 appears in a denominator")
    damp = 1 - p.rho
    s0 = p.pi1 / p.pi2
    f = np.array([
        [p.theta2 * damp * s0, p.theta1 * damp * s0 / p.cc],
        [0.0, 0.0],
    ])
    v = np.array([
        [p.exit_rate, 0.0],
        [-p.eta2 * p.pi2 / p.pi1, p.lambda3],
    ])
    return NgmPair(f, v)


def _eig2(m):
    if m[0, 1] == 0 or m[1, 0] == 0:
        return complex(m[0, 0]), complex(m[1, 1])
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = complex(tr * tr / 4 - det) ** 0.5
    return tr / 2 + disc, tr / 2 - disc


def r0_ngm(p: Parameters) -> float:
    """Spectral radius of the next-generation matrix ``F V^-1``."""
    _check_r0_domain(p)
    f, v = ngm_matrices(p)
    det_v = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    if det_v == 0:
        raise ModelError("transfer matrix V is singular")
    v_inv = np.array([[v[1, 1], -v[0, 1]], [-v[1, 0], v[0, 0]]]) / det_v
    return float(max(abs(z) for z in _eig2(f @ v_inv)))


def jacobian(state: State, p: Parameters) -> np.ndarray:
    """Analytic Jacobian of the vector field, rows and columns ordered S, I, R, B."""
    s, i, r, b = state
    n = s + i + r
    if n == 0:
        raise DegeneratePopulationError("Jacobian undefined for N = 0")
    damp = 1 - p.rho
    sat = 1 + p.nu_b * i
    chi_s = p.theta1 * damp * b / (b + p.cc) + p.theta2 * damp * i / sat
    chi_i = p.theta2 * damp * s / sat ** 2
    chi_b = p.theta1 * damp * s * p.cc / (b + p.cc) ** 2
    shed_n = -p.eta2 * i / n ** 2
    return np.array([
        [-chi_s - p.pi2, -chi_i, p.lambda2, -chi_b],
        [chi_s, chi_i - p.exit_rate, 0.0, chi_b],
        [0.0, p.lambda1, -(p.pi2 + p.lambda2), 0.0],
        [shed_n, p.eta2 * (n - i) / n ** 2, shed_n, -p.lambda3],
    ])


def spectral_abscissa(eigenvalues) -> float:
    return float(max(z.real for z in eigenvalues))


def _verdict(abscissa):
    if abs(abscissa) < ABSCISSA_BAND:
        return INCONCLUSIVE
    return LOCALLY_STABLE if abscissa < 0 else UNSTABLE


def dfe_local_stability(p: Parameters) -> StabilityReport:
    """Classify the DFE by the eigenvalues of the Jacobian there.

    Raises :class:`InconsistentModelError` when ``eta1 > 0``, since the DFE
    is then not a stationary point.
    """
    dfe, residual = disease_free_equilibrium(p)
    worst = max(abs(x) for x in residual)
    if worst > DFE_RESIDUAL_TOL:
        raise InconsistentModelError(
            f"DFE is not stationary (max |rhs| = {worst:.3g} from eta1 = {p.eta1:g}); "
            "set eta1 = 0 for DFE analysis"
        )
    eig = eigenvalues4(jacobian(dfe, p)).values
    abscissa = spectral_abscissa(eig)
    return StabilityReport(
        r0_closed=r0_closed_form(p),
        r0_ngm=r0_ngm(p),
        dfe=dfe,
        dfe_residual=residual,
        eigenvalues=eig,
        spectral_abscissa=abscissa,
        verdict=_verdict(abscissa),
    )


def metzler_decomposition(p: Parameters) -> MetzlerDecomposition:
    damp = 1 - p.rho
    s0 = p.pi1 / p.pi2
    env = p.theta1 * damp * s0 / p.cc
    a1 = np.array([[-p.pi2, p.lambda2], [0.0, -(p.pi2 + p.lambda2)]])
    a2 = np.array([[-p.theta2 * damp * s0, -env], [p.lambda1, 0.0]])
    a3 = np.array([
        [p.theta2 * damp * s0 - p.exit_rate, env],
        [p.eta2 * p.pi2 / p.pi1 if p.pi1 > 0 else 0.0, -p.lambda3],
    ])
    # both 2x2 blocks are small enough for the closed form
    a1_eig = np.array(_eig2(a1))
    a3_eig = np.array(_eig2(a3))
    return MetzlerDecomposition(
        a1=a1,
        a2=a2,
        a3=a3,
        a1_eigenvalues=a1_eig,
        a3_eigenvalues=a3_eig,
        a1_negative=bool(np.all(a1_eig.real < 0) and np.all(a1_eig.imag == 0)),
        a3_metzler=bool(a3[0, 1] >= 0 and a3[1, 0] >= 0),
        a3_stable=bool(np.all(a3_eig.real < 0)),
        r0=r0_closed_form(p),
    )


def _seed_state(p: Parameters) -> State:
    n0 = p.pi1 / p.pi2
    return State(0.9 * n0, 0.1 * n0, 0.0, (p.eta1 + 0.1 * p.eta2) / p.lambda3)


def endemic_equilibrium(
    p: Parameters,
    guess: State | None = None,
    *,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> State:
    """Positive equilibrium by damped Newton on the vector field.

    Without ``guess``, the starting point is the steady state of a long
    adaptive integration started from an infected population.
    """
    damp = 1 - p.rho
    env_driven = p.eta1 > 0 and p.theta1 * damp > 0
    if p.pi1 == 0 or damp == 0 or (p.theta1 == 0 and p.theta2 == 0):
        raise NoEndemicEquilibrium("no transmission is possible; only the disease-free state is stationary")
    if not env_driven and r0_closed_form(p) <= 1:
        raise NoEndemicEquilibrium(f"R0 = {r0_closed_form(p):.6g} <= 1 without environmental recruitment")
    if guess is None:
        cfg = SolverConfig(method="rk45", rtol=1e-9, atol=1e-12, steady_tol=1e-7, max_steps=2_000_000)
        guess, _ = run_to_steady_state(_seed_state(p), p, cfg)
    y = guess.as_array()
    f = vector_field(y, p)
    norm = np.max(np.abs(f))
    for _ in range(max_iter):
        if norm < tol:
            break
        step = np.linalg.solve(jacobian(State.from_array(y), p), -f)
        lam = 1.0
        for _ in range(31):
            trial = y + lam * step
            if np.all(trial > 0):
                f_trial = vector_field(trial, p)
                n_trial = np.max(np.abs(f_trial))
                if n_trial < norm:
                    break
            lam *= 0.5
        else:
            raise NewtonError(f"line search failed with |rhs| = {norm:.3g}")
        y, f, norm = trial, f_trial, n_trial
    else:
        if norm >= tol:
            raise NewtonError(f"Newton did not converge in {max_iter} steps, |rhs| = {norm:.3g}")
    if not np.all(y > 0):
        raise NoEndemicEquilibrium("Newton converged to a boundary point")
    return State.from_array(y)


def lyapunov_value(state: State, eq: State, weights=(1.0, 1.0, 1.0, 1.0)) -> float:
    """``sum_k w_k * (y_k - y*_k ln y_k)`` over S, I, R, B."""
    weights = tuple(float(w) for w in weights)
    if len(weights) != 4 or min(weights) <= 0:
        raise ModelError("need four positive weights")
    total = 0.0
    for w, y, y_eq in zip(weights, state, eq):
        if y <= 0 or y_eq <= 0:
            raise ModelError("Lyapunov function needs strictly positive components")
        total += w * (y - y_eq * math.log(y))
    return total


def lyapunov_along(states, eq: State, weights=(1.0, 1.0, 1.0, 1.0)) -> np.ndarray:
    """Vectorised :func:`lyapunov_value` over an ``(n, 4)`` array of states."""
    states = np.asarray(states, dtype=float)
    w = np.asarray(weights, dtype=float)
    y_eq = eq.as_array()
    if np.any(states <= 0):
        raise ModelError("Lyapunov function needs strictly positive components")
    return (w * (states - y_eq * np.log(states))).sum(axis=1)


def lyapunov_gap(states, eq: State, weights=(1.0, 1.0, 1.0, 1.0)) -> np.ndarray:
    """``V(state) - V(eq)`` without cancellation.

    Each term is ``w * y* * (u - 1 - ln u)`` with ``u = y/y*``, which is
    non-negative term by term; differencing :func:`lyapunov_along` values
    loses about ``eps * |V|`` near the equilibrium.
    """
    states = np.asarray(states, dtype=float)
    w = np.asarray(weights, dtype=float)
    y_eq = eq.as_array()
    if np.any(states <= 0) or np.any(y_eq <= 0):
        raise ModelError("Lyapunov function needs strictly positive components")
    u = states / y_eq
    d = (states - y_eq) / y_eq
    # log1p near the equilibrium, where u - 1 - ln(u) cancels; the ratio form elsewhere
    excess = np.where(np.abs(d) < 0.5, d - np.log1p(d), u - 1 - np.log(u))
    return (w * y_eq * excess).sum(axis=1)


SENSITIVITY_PARAMETERS = ("rho", "theta1", "theta2", "cc", "lambda3", "eta2", "pi1", "pi2", "pi3", "lambda1")


def r0_sensitivity(p: Parameters) -> dict[str, float]:
    """Partial derivatives of R0 with respect to the parameters it depends on."""
    if p.rho >= 1:
        raise ModelError("R0 sensitivity is degenerate at rho = 1")
    _check_r0_domain(p)
    damp = 1 - p.rho
    k = p.exit_rate
    r0 = r0_closed_form(p)
    # R0 = human + environment
    human = damp * p.theta2 * p.pi1 / (p.pi2 * k)
    env = damp * p.eta2 * p.theta1 / (k * p.cc * p.lambda3)
    return {
        "rho": -r0 / damp,
        "theta1": damp * p.eta2 / (k * p.cc * p.lambda3),
        "theta2": damp * p.pi1 / (p.pi2 * k),
        "cc": -env / p.cc,
        "lambda3": -env / p.lambda3,
        "eta2": damp * p.theta1 / (k * p.cc * p.lambda3),
        "pi1": damp * p.theta2 / (p.pi2 * k),
        "pi2": -human / p.pi2 - r0 / k,
        "pi3": -r0 / k,
        "lambda1": -r0 / k,
    }
