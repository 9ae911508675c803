"""Time stepping: fixed-step RK4 and adaptive Dormand-Prince 5(4).

Every accepted step is checked against the model's positivity and
invariant-region bounds; a breach aborts the run instead of clamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Parameters, State, vector_field

__all__ = [
    "METHODS",
    "IntegrationError",
    "BlowUpError",
    "StepBudgetExceeded",
    "InvariantViolation",
    "SolverConfig",
    "Trajectory",
    "step_rk4",
    "integrate",
    "run_to_steady_state",
]

METHODS = ("rk4", "rk45")
_METHOD_ALIASES = {"rk4-fixed": "rk4", "rk45-adaptive": "rk45"}

# relative slack on the invariant-region bounds
_BOUND_SLACK = 1e-9


class IntegrationError(RuntimeError):
    """Base class for numerical failures during time stepping."""


class BlowUpError(IntegrationError):
    pass


class StepBudgetExceeded(IntegrationError):
    pass


class InvariantViolation(IntegrationError):
    def __init__(self, message, time, component):
        super().__init__(f"t={time:.17g}: {message}")
        self.time = time
        self.component = component


@dataclass(frozen=True)
class SolverConfig:
    method: str = "rk4"
    dt: float = 0.01
    t_end: float = 200.0
    rtol: float = 1e-8
    atol: float = 1e-10
    max_steps: int = 1_000_000
    steady_tol: float = 1e-9
    record_every: int = 1
    stop_on_steady: bool = False

    def __post_init__(self):
        method = _METHOD_ALIASES.get(self.method, self.method)
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "method", method)
        for name in ("dt", "t_end", "rtol", "atol", "steady_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite number > 0, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("max_steps", "record_every"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))


@dataclass(frozen=True)
class Trajectory:
    """Recorded time series. ``states`` has one ``(S, I, R, B)`` row per time."""

    times: np.ndarray
    states: np.ndarray
    terminated_by: str = "horizon"
    steps: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.times)

    def state_at(self, k: int) -> State:
        return State.from_array(np.maximum(self.states[k], 0.0))

    @property
    def final(self) -> State:
        return self.state_at(-1)

    @property
    def S(self):
        return self.states[:, 0]

    @property
    def I(self):  # noqa: E743
        return self.states[:, 1]

    @property
    def R(self):
        return self.states[:, 2]

    @property
    def B(self):
        return self.states[:, 3]

    @property
    def N(self):
        return self.states[:, :3].sum(axis=1)


def _rk4(y, p, dt):
    k1 = vector_field(y, p)
    k2 = vector_field(y + 0.5 * dt * k1, p)
    k3 = vector_field(y + 0.5 * dt * k2, p)
    k4 = vector_field(y + dt * k3, p)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(state: State, p: Parameters, dt: float) -> State:
    """One classical fourth-order Runge-Kutta step."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    y = _rk4(state.as_array(), p, dt)
    if not np.all(np.isfinite(y)):
        raise BlowUpError(f"non-finite state after RK4 step of size {dt}")
    return State.from_array(np.maximum(y, 0.0))


# Dormand-Prince 5(4) tableau
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def _dopri_step(y, k1, p, h):
    """Returns (y5, error estimate, derivative at y5)."""
    ks = [k1]
    for a in _DP_A[1:]:
        yi = y + h * sum(aj * kj for aj, kj in zip(a, ks) if aj != 0.0)
        ks.append(vector_field(yi, p))
    # the last stage is evaluated at y5 (first-same-as-last)
    y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks[:6]) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_DP_E, ks) if e != 0.0)
    return y5, err, ks[6]


class _Guard:
    """Positivity and invariant-region checks for one run."""

    def __init__(self, y0, p: Parameters, atol):
        n0 = float(y0[:3].sum())
        self.p = p
        self.floor = -atol
        self.n_max = max(n0, p.pi1 / p.pi2) * (1 + _BOUND_SLACK) + atol
        self.b_max = max(float(y0[3]), (p.eta1 + p.eta2) / p.lambda3) * (1 + _BOUND_SLACK) + atol

    def check(self, t, y):
        if not np.all(np.isfinite(y)):
            raise BlowUpError(f"non-finite state at t={t:.17g}: {y}")
        k = int(np.argmin(y))
        if y[k] < self.floor:
            raise InvariantViolation(f"component {'SIRB'[k]} = {y[k]:.6g} is negative", t, "SIRB"[k])
        n = y[0] + y[1] + y[2]
        if n > self.n_max:
            raise InvariantViolation(f"N = {n:.17g} exceeds bound {self.n_max:.17g}", t, "N")
        if y[3] > self.b_max:
            raise InvariantViolation(f"B = {y[3]:.17g} exceeds bound {self.b_max:.17g}", t, "B")


def _is_steady(y, p, tol):
    return float(np.max(np.abs(vector_field(y, p)))) < tol


def integrate(state0: State, p: Parameters, cfg: SolverConfig | None = None) -> Trajectory:
    """Integrate from ``state0`` to ``cfg.t_end`` (or to steady state).

    Step 0 and every ``record_every``-th accepted step are recorded. When
    ``cfg.stop_on_steady`` is set, the run ends at the first recorded state
    whose vector field has infinity norm below ``cfg.steady_tol``.
    """
    cfg = cfg or SolverConfig()
    y = state0.as_array()
    vector_field(y, p)  # fail fast on N = 0
    guard = _Guard(y, p, cfg.atol)
    times, states = [0.0], [y]
    if cfg.stop_on_steady and _is_steady(y, p, cfg.steady_tol):
        return Trajectory(np.array(times), np.array(states), "steady_state", 0)
    if cfg.method == "rk4":
        stepper = _run_rk4
    else:
        stepper = _run_dopri
    terminated_by, steps = stepper(y, p, cfg, guard, times, states)
    return Trajectory(np.array(times), np.array(states), terminated_by, steps)


def _record(k, t, y, p, cfg, times, states):
    """Record step k if due; returns True when the run should stop at steady state."""
    if k % cfg.record_every:
        return False
    times.append(t)
    states.append(y)
    return cfg.stop_on_steady and _is_steady(y, p, cfg.steady_tol)


def _run_rk4(y, p, cfg, guard, times, states):
    dt = cfg.dt
    if math.isinf(cfg.t_end):
        n_steps = cfg.max_steps + 1
    else:
        n_steps = math.ceil(cfg.t_end / dt - 1e-9)
    for k in range(1, n_steps + 1):
        if k > cfg.max_steps:
            raise StepBudgetExceeded(f"step budget of {cfg.max_steps} exhausted at t={(k - 1) * dt:.17g}")
        if k == n_steps:
            t, h = cfg.t_end, cfg.t_end - (k - 1) * dt
        else:
            t, h = k * dt, dt
        y = _rk4(y, p, h)
        guard.check(t, y)
        if _record(k, t, y, p, cfg, times, states):
            return "steady_state", k
    return "horizon", n_steps


def _run_dopri(y, p, cfg, guard, times, states):
    t, h = 0.0, min(cfg.dt, cfg.t_end)
    k1 = vector_field(y, p)
    attempts = accepted = 0
    while t < cfg.t_end:
        if attempts >= cfg.max_steps:
            raise StepBudgetExceeded(f"step budget of {cfg.max_steps} exhausted at t={t:.17g}")
        attempts += 1
        last = t + h >= cfg.t_end
        if last:
            h = cfg.t_end - t
        y_new, err, k_new = _dopri_step(y, k1, p, h)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
        if not math.isfinite(err_norm):
            if h < 1e-14:
                raise BlowUpError(f"non-finite state at t={t:.17g}")
            h *= 0.2
            continue
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
        factor = min(5.0, max(0.2, factor))
        if err_norm > 1.0:
            h *= factor
            if t + h == t:
                raise IntegrationError(f"step size underflow at t={t:.17g}")
            continue
        t = cfg.t_end if last else t + h
        y, k1 = y_new, k_new
        accepted += 1
        guard.check(t, y)
        if _record(accepted, t, y, p, cfg, times, states):
            return "steady_state", accepted
        h *= factor
    return "horizon", accepted


def run_to_steady_state(state0: State, p: Parameters, cfg: SolverConfig | None = None):
    """Integrate until the vector field's infinity norm drops below ``steady_tol``.

    The horizon is ignored; only ``max_steps`` bounds the run. Returns the
    steady state and the time it was reached.
    """
    cfg = cfg or SolverConfig(method="rk45")
    traj = integrate(state0, p, _unbounded(cfg))
    if traj.terminated_by != "steady_state":
        raise StepBudgetExceeded("no steady state reached")
    return traj.final, float(traj.times[-1])


def _unbounded(cfg: SolverConfig) -> SolverConfig:
    # SolverConfig rejects infinite t_end, so bypass validation for this internal copy
    run_cfg = SolverConfig(
        method=cfg.method, dt=cfg.dt, t_end=1.0, rtol=cfg.rtol, atol=cfg.atol,
        max_steps=cfg.max_steps, steady_tol=cfg.steady_tol, record_every=cfg.record_every,
        stop_on_steady=True,
    )
    object.__setattr__(run_cfg, "t_end", math.inf)
    return run_cfg
