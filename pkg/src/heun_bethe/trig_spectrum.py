"""Trigonometric Hamiltonian, its Jacobi-polynomial eigenmodes and inner products.

Polynomials in ``w = (1 - cos 2 pi x)/2 = sin^2(pi x)`` are ascending lists of
``Fraction``.  Operator eigenvalues are returned in units of ``pi^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .elliptic import PI
from .errors import DomainError, NotProportional

WPoly = list


def _alpha_beta(l0: int, l1: int) -> tuple:
    return Fraction(l0 + l1 + 2), Fraction(2 * l0 + 3, 2)


@dataclass(frozen=True)
class JacobiMode:
    """``psi_m`` as an exact w-polynomial with constant term 1."""

    m: int
    l0: int
    l1: int
    coeffs: tuple

    @property
    def eigenvalue_pi2(self) -> int:
        return (2 * self.m + self.l0 + self.l1 + 2) ** 2

    @property
    def eigenvalue(self) -> float:
        return PI ** 2 * self.eigenvalue_pi2

    def __call__(self, x: complex) -> complex:
        w = (1 - cmath.cos(2 * PI * x)) / 2
        return sum(complex(float(a)) * w ** k for k, a in enumerate(self.coeffs))


def jacobi_mode(l0: int, l1: int, m: int) -> JacobiMode:
    """``psi_m = 2F1(-m, alpha + m; beta; w)`` with ``alpha = l0+l1+2``, ``beta = (2 l0 + 3)/2``."""
    if m < 0 or m > 200:
        raise DomainError("m must lie in 0..200", m=m)
    a, b = _alpha_beta(l0, l1)
    coeffs = [Fraction(1)]
    for k in range(m):
        coeffs.append(coeffs[-1] * (k - m) * (a + m + k) / ((b + k) * (k + 1)))
    return JacobiMode(m, l0, l1, tuple(coeffs))


def apply_trig_hamiltonian(f: WPoly, l0: int, l1: int) -> WPoly:
    """Gauge-transformed trig Hamiltonian on a w-polynomial, in units of pi^2.

    ``H = -4 [w(1-w) D^2 + (beta - (alpha+1) w) D] + alpha^2``.
    """
    if len(f) > 301:
        raise DomainError("degree above 300", degree=len(f) - 1)
    a, b = _alpha_beta(l0, l1)
    f = [Fraction(v) for v in f]
    n = len(f)
    out = [a * a * v for v in f] + [Fraction(0)]
    for k in range(n):
        fk = f[k]
        if fk == 0:
            continue
        # w(1-w) k(k-1) w^(k-2) = k(k-1) (w^(k-1) - w^k)
        if k >= 2:
            out[k - 1] += -4 * k * (k - 1) * fk
        out[k] += 4 * k * (k - 1) * fk
        # (beta - (alpha+1) w) k w^(k-1)
        if k >= 1:
            out[k - 1] += -4 * b * k * fk
        out[k] += 4 * (a + 1) * k * fk
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def hamiltonian_monomial_matrix(l0: int, l1: int, n: int) -> list:
    """Matrix (units pi^2) in the w-monomial basis ``1..w^(n-1)``; column k = image of w^k."""
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(n):
        img = apply_trig_hamiltonian([0] * k + [1], l0, l1)
        for r, v in enumerate(img):
            if r < n:
                M[r][k] = v
    return M


# ---------------------------------------------------------------------------
# inner product


def _moment_ratios(l0: int, l1: int, n: int) -> list:
    """``mu_k / mu_0`` with ``mu_k = int_0^1 w^(l0+1/2+k) (1-w)^(l1+1/2) dw``."""
    a = Fraction(2 * l0 + 1, 2)
    b = Fraction(2 * l1 + 1, 2)
    out = [Fraction(1)]
    for k in range(n):
        out.append(out[-1] * (a + k + 1) / (a + b + k + 2))
    return out


def norm_constant(l0: int, l1: int) -> Fraction:
    """``int_0^1 Phi(x)^2 dx`` (exactly rational)."""
    # (1/pi) B(l0 + 3/2, l1 + 3/2); the gamma values at half integers carry sqrt(pi)
    def g(k):  # Gamma(k + 3/2) / sqrt(pi)
        return Fraction(math.prod(range(1, 2 * k + 3, 2)), 2 ** (k + 1))

    return g(l0) * g(l1) / math.factorial(l0 + l1 + 2)


def inner_product(f: WPoly, g: WPoly, l0: int, l1: int) -> Fraction:
    """``<Phi f, Phi g> = int_0^1 Phi^2 f g dx`` for real w-polynomials (exact)."""
    n = len(f) + len(g)
    mu = _moment_ratios(l0, l1, n)
    tot = Fraction(0)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            if b:
                tot += Fraction(a) * Fraction(b) * mu[i + j]
    return tot * norm_constant(l0, l1)


def inner_product_quadrature(f: WPoly, g: WPoly, l0: int, l1: int, n: int = 400) -> float:
    """Gauss-Legendre evaluation of the same integral (verification path)."""
    xs, ws = np.polynomial.legendre.leggauss(n)
    x = (xs + 1) / 2
    w = np.sin(PI * x) ** 2
    phi2 = np.sin(PI * x) ** (2 * l0 + 2) * np.cos(PI * x) ** (2 * l1 + 2)
    fv = np.polyval([float(v) for v in f[::-1]], w)
    gv = np.polyval([float(v) for v in g[::-1]], w)
    return float(np.sum(ws * phi2 * fv * gv) / 2)


def phi(x: complex, l0: int, l1: int) -> complex:
    return cmath.sin(PI * x) ** (l0 + 1) * cmath.cos(PI * x) ** (l1 + 1)


def lambda_sym_ratio(l0: int, l1: int, m: int, npts: int = 10) -> tuple:
    """Ratio ``Lambda_T^sym / (Phi psi_m)`` sampled at ``npts`` points.

    Returns
    -------
    (B, spread)
        Mean ratio and maximal relative deviation of the samples.

    Raises
    ------
    NotProportional
        If the spread exceeds 1e-6.
    """
    from .trig_bethe import lambda_trig_sym, trig_bethe_state

    st = trig_bethe_state(l0, l1, m)
    mode = jacobi_mode(l0, l1, m)
    xs = [0.05 + 0.4 * k / max(npts - 1, 1) + 0.013j * (k % 3) for k in range(npts)]
    ratios = np.array([lambda_trig_sym(x, st) / (phi(x, l0, l1) * mode(x)) for x in xs])
    B = complex(np.mean(ratios))
    spread = float(np.max(np.abs(ratios - B)) / abs(B))
    if spread > 1e-6:
        raise NotProportional("Lambda_T^sym is not proportional to the Jacobi mode", spread=spread)
    return B, spread
