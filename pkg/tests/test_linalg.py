import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from typhoid_info.linalg import charpoly, durand_kerner, eigenvalues4


def companion(roots):
    c = np.poly(roots).real
    n = len(roots)
    m = np.zeros((n, n))
    m[0, :] = -c[1:]
    m[1:, :-1] = np.eye(n - 1)
    return m


def test_identity():
    res = eigenvalues4(np.eye(4))
    np.testing.assert_allclose(res.values, np.ones(4), atol=1e-12)


def test_diagonal_sorted():
    res = eigenvalues4(np.diag([-3.0, -1.0, -4.0, -2.0]))
    np.testing.assert_allclose(res.values, [-1, -2, -3, -4], atol=1e-12)
    assert np.all(res.values.imag == 0)


def test_companion_of_pure_imaginary_roots():
    res = eigenvalues4(companion([1j, -1j, 2j, -2j]))
    np.testing.assert_allclose(sorted(res.values, key=lambda z: z.imag), [-2j, -1j, 1j, 2j], atol=1e-12)


def test_two_by_two():
    res = eigenvalues4(np.array([[0.0, 1.0], [-2.0, -3.0]]))
    np.testing.assert_allclose(res.values, [-1.0, -2.0], atol=1e-13)


def test_charpoly_matches_numpy():
    m = np.arange(16.0).reshape(4, 4) ** 0.5
    np.testing.assert_allclose(charpoly(m), np.poly(m), rtol=1e-12, atol=1e-10)


def test_charpoly_rejects_nonfinite():
    with pytest.raises(ValueError):
        charpoly(np.full((2, 2), np.nan))


def test_durand_kerner_known_roots():
    roots = durand_kerner(np.poly([3.0, -1.0, 0.5, 2.0]))
    np.testing.assert_allclose(np.sort(roots.real), [-1.0, 0.5, 2.0, 3.0], atol=1e-12)


def _matched_error(got, want):
    # greedy matching is enough for 4 values
    want = list(want)
    worst = 0.0
    for z in got:
        k = int(np.argmin([abs(z - w) for w in want]))
        worst = max(worst, abs(z - want.pop(k)))
    return worst


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.just(0.0) | st.floats(1e-6, 1e3) | st.floats(-1e3, -1e-6)))
def test_residuals_and_numpy_agreement(m):
    res = eigenvalues4(m)
    norm = np.abs(m).sum(axis=1).max()
    assert np.all(res.residuals <= 1e-8 * max(norm, 1e-300) ** 4 + 1e-300)
    assert np.all(np.diff(res.values.real) <= 0)
    # multiple eigenvalues lose accuracy like eps**(1/multiplicity); allow for that
    assert _matched_error(res.values, np.linalg.eigvals(m)) <= 1e-3 * max(norm, 1.0)


def test_random_matrices_agree_with_numpy():
    rng = np.random.default_rng(5)
    for _ in range(300):
        m = rng.standard_normal((4, 4)) * 10 ** rng.uniform(-3, 3)
        res = eigenvalues4(m)
        assert _matched_error(res.values, np.linalg.eigvals(m)) <= 1e-10 * np.abs(m).max()
