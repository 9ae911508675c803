"""Eigenvalues of small dense matrices.

The characteristic polynomial comes from the Faddeev-LeVerrier recursion and
its roots from Durand-Kerner (Weierstrass) simultaneous iteration. This is
meant for the 2x2 and 4x4 matrices of the stability analysis, not for
general use.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = ["EigenResult", "RootFindingError", "charpoly", "durand_kerner", "eigenvalues4"]

MAX_ITER = 500


class RootFindingError(ArithmeticError):
    pass


class EigenResult(NamedTuple):
    values: np.ndarray      # complex, sorted by real part descending
    residuals: np.ndarray   # |det(m - value * I)| per value


def charpoly(m) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    ``det(x I - m) = x^n + c[1] x^(n-1) + ... + c[n]``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    aux = np.zeros_like(m)
    eye = np.eye(n)
    for k in range(1, n + 1):
        aux = m @ aux + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(m @ aux) / k
    return coeffs


def _root_bound(coeffs):
    # Fujiwara bound on the moduli of the roots of a monic polynomial
    n = len(coeffs) - 1
    terms = [abs(coeffs[k]) ** (1.0 / k) for k in range(1, n)]
    terms.append(abs(coeffs[n] / 2) ** (1.0 / n))
    return 2 * max(terms) if terms else 1.0


def durand_kerner(coeffs, tol=1e-14, max_iter=MAX_ITER, rng=None) -> np.ndarray:
    """All complex roots of a monic polynomial.

    Restarts from randomly perturbed starting points if the first attempt
    does not converge within ``max_iter`` sweeps.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n = len(coeffs) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([-coeffs[1]])
    radius = max(_root_bound(coeffs), 1e-300)
    rng = rng if rng is not None else np.random.default_rng(0)
    seed = 0.4 + 0.9j
    start = radius * seed ** np.arange(n) / abs(seed) ** np.arange(n)
    for _ in range(4):
        roots = start.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            converged = _iterate(coeffs, roots, tol, max_iter)
        if converged:
            return _polish(coeffs, roots)
        start = start * (1 + 0.1 * rng.standard_normal(n)) + 0.1 * radius * rng.standard_normal(n) * 1j
    raise RootFindingError(f"Durand-Kerner did not converge in {max_iter} iterations")


def _iterate(coeffs, roots, tol, max_iter):
    """Weierstrass sweeps on ``roots`` in place; True once converged."""
    n = len(roots)
    for _ in range(max_iter):
        shift = np.empty(n, dtype=complex)
        for k in range(n):
            others = roots[k] - np.delete(roots, k)
            denom = np.prod(others)
            if denom == 0:
                denom = 1e-300
            shift[k] = np.polyval(coeffs, roots[k]) / denom
        roots -= shift
        if not np.all(np.isfinite(roots)):
            return False
        if np.all(np.abs(shift) <= tol * np.maximum(1.0, np.abs(roots))) or _at_roundoff(coeffs, roots):
            return True
    return False


def _at_roundoff(coeffs, roots):
    # backward-error test: |p(z)| no larger than the rounding error of evaluating it
    n = len(coeffs) - 1
    mags = np.abs(coeffs)
    for z in roots:
        bound = 8 * n * np.finfo(float).eps * np.polyval(mags, abs(z))
        if not abs(np.polyval(coeffs, z)) <= bound:
            return False
    return True


def _polish(coeffs, roots):
    """Newton polishing, then averaging of clusters of a multiple root.

    The mean of a cluster approximating an m-fold root is far better
    conditioned than its members; it is kept only if it lowers the residual.
    """
    deriv = np.polyder(coeffs)
    out = roots.copy()
    for k in range(len(out)):
        for _ in range(3):
            d = np.polyval(deriv, out[k])
            if d == 0:
                break
            step = np.polyval(coeffs, out[k]) / d
            if not np.isfinite(step) or abs(step) > 1e-6 * max(1.0, abs(out[k])):
                break
            out[k] -= step
    scale = max(1.0, float(np.max(np.abs(out))))
    unused = list(range(len(out)))
    while unused:
        k = unused.pop(0)
        group = [k] + [j for j in unused if abs(out[j] - out[k]) < 1e-3 * scale]
        if len(group) > 1:
            mean = _multiple_root(coeffs, out[group].mean(), len(group))
            if abs(np.polyval(coeffs, mean)) <= max(abs(np.polyval(coeffs, out[j])) for j in group):
                out[group] = mean
            unused = [j for j in unused if j not in group]
    # snap imaginary round-off on real roots
    tiny = np.abs(out.imag) <= 1e-14 * np.maximum(1.0, np.abs(out.real))
    out[tiny] = out[tiny].real
    return out


def _multiple_root(coeffs, z, mult):
    # an m-fold root of p is a simple root of its (m-1)-th derivative
    d0 = np.polyder(coeffs, mult - 1)
    d1 = np.polyder(d0)
    for _ in range(5):
        slope = np.polyval(d1, z)
        if slope == 0:
            break
        z = z - np.polyval(d0, z) / slope
    return z


def eigenvalues4(m) -> EigenResult:
    """Eigenvalues of a small square matrix (sized for 2x2 and 4x4)."""
    m = np.asarray(m, dtype=float)
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        roots = np.zeros(m.shape[0], dtype=complex) if scale == 0.0 else durand_kerner(charpoly(m))
    else:
        # eigenvalues scale linearly; work at unit magnitude
        coeffs = charpoly(m / scale)
        # below eps**4 a coefficient moves no root by more than ~eps
        coeffs[np.abs(coeffs) < np.finfo(float).eps ** 4] = 0.0
        zeros = 0
        while coeffs[-1 - zeros] == 0.0:
            zeros += 1
        roots = durand_kerner(coeffs[:len(coeffs) - zeros])
        roots = np.concatenate([roots, np.zeros(zeros, dtype=complex)]) * scale
    order = np.lexsort((-roots.imag, -roots.real))
    roots = roots[order]
    eye = np.eye(m.shape[0])
    residuals = np.array([abs(np.linalg.det(m - lam * eye)) for lam in roots])
    return EigenResult(roots, residuals)
