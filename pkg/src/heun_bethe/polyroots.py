"""All-roots polynomial solver (Aberth-Ehrlich) with a deterministic start."""

from __future__ import annotations

import cmath
import math

import numpy as np


def _horner_with_derivative(c, z):
    p = 0j
    dp = 0j
    for a in c[::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def poly_roots(coeffs, tol: float = 1e-15, max_iter: int = 500) -> list:
    """Return all complex roots of a polynomial.

    Parameters
    ----------
    coeffs : sequence of complex
        Ascending coefficients ``c_0 + c_1 z + ... + c_n z^n``; trailing zeros
        are stripped.

    Returns
    -------
    list of complex
        Roots sorted by argument, then modulus.
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(np.abs(c) > 0)[0]
    if len(nz) == 0:
        raise ValueError("zero polynomial")
    c = c[: nz[-1] + 1]
    n = len(c) - 1
    if n == 0:
        return []
    # roots at the origin
    k0 = int(nz[0])
    zeros = [0j] * k0
    c = c[k0:]
    n = len(c) - 1
    if n == 0:
        return _sorted(zeros)
    c = c / c[-1]
    # starting circle from the Fujiwara bound, rotated off the axes
    rad = 2 * max(abs(c[n - k]) ** (1.0 / k) for k in range(1, n + 1))
    rad = max(rad, 1e-300)
    z = np.array([rad * 0.5 * cmath.exp(1j * (2 * math.pi * k / n + 0.4)) for k in range(n)])
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        for i in range(n):
            if done[i]:
                continue
            p, dp = _horner_with_derivative(c, z[i])
            if p == 0:
                done[i] = True
                continue
            ratio = p / dp if dp != 0 else complex(rad)
            s = 0j
            for j in range(n):
                if j != i:
                    d = z[i] - z[j]
                    s += 1.0 / d if d != 0 else 0
            w = ratio / (1 - ratio * s)
            z[i] -= w
            if abs(w) <= tol * max(abs(z[i]), 1e-300):
                done[i] = True
        if done.all():
            break
    # Newton polish
    for i in range(n):
        for _ in range(3):
            p, dp = _horner_with_derivative(c, z[i])
            if dp == 0:
                break
            step = p / dp
            if not np.isfinite(step):
                break
            z[i] -= step
    return _sorted(zeros + [complex(v) for v in z])


def _sorted(roots):
    return sorted(roots, key=lambda r: (round(cmath.phase(r), 12) if r != 0 else -4.0, abs(r)))


def poly_from_roots(roots) -> np.ndarray:
    """Ascending coefficients of the monic polynomial with the given roots."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0]))
    return c
