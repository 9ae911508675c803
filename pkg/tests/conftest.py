import numpy as np
import pytest
from hypothesis import strategies as st

from typhoid_info import Parameters, State

BASELINE_INITIAL = State(184.0, 1.0, 0.0, 100.0)


def random_parameters(rng, *, eta1=None, spread=1.0, transmission_spread=None):
    """Log-uniform draw around the baseline; rho uniform on [0, 1)."""
    base = Parameters().as_dict()
    out = {}
    for name, value in base.items():
        if name == "rho":
            out[name] = rng.uniform(0.0, 0.99)
            continue
        width = transmission_spread if (transmission_spread and name in ("theta1", "theta2")) else spread
        out[name] = value * 10 ** rng.uniform(-width, width)
    if eta1 is not None:
        out["eta1"] = eta1
    return Parameters(**out)


def random_state(rng, p=None, scale=200.0):
    """Uniform draw; with ``p``, from twice the invariant region of ``p``."""
    if p is None:
        s, i, r = rng.uniform(0, scale, 3)
        b = rng.uniform(0, 1e5) if rng.random() < 0.5 else rng.uniform(0, 200)
        return State(s + 1e-3, i, r, b)
    n_max = 2 * p.pi1 / p.pi2
    s, i, r = rng.dirichlet(np.ones(3)) * rng.uniform(1e-3, 1) * n_max
    b = rng.uniform(0, 2 * (p.eta1 + p.eta2) / p.lambda3)
    return State(s, i, r, b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def baseline():
    return Parameters()


positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
nonneg = st.floats(min_value=0.0, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def parameters_st(draw):
    base = Parameters().as_dict()
    out = {}
    for name, value in base.items():
        if name == "rho":
            out[name] = draw(st.floats(0.0, 1.0))
        else:
            out[name] = value * 10 ** draw(st.floats(-1.5, 1.5))
    return Parameters(**out)


@st.composite
def states_st(draw):
    s = draw(positive)
    i, r = draw(nonneg), draw(nonneg)
    b = draw(st.floats(0.0, 1e6))
    return State(s, i, r, b)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store one verdict per acceptance criterion and fail the test if it did not pass."""
    def _record(number, ok, detail):
        ACCEPTANCE_RESULTS[number] = (bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
