"""Trigonometric Bethe equations: exact elementary symmetric values and roots."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .elliptic import PI
from .errors import DenominatorZero, DomainError, ResidualTooLarge, RootCollision
from .polyroots import poly_roots


def _prod(a: int, b: int, f: Callable[[int], Fraction]) -> Fraction:
    """``prod_{j=a}^{b} f(j)`` with the signed empty-range convention.

    For ``b < a - 1`` the product is ``1 / prod_{j=b+1}^{a-1} f(j)``.
    """
    out = Fraction(1)
    if b >= a:
        for j in range(a, b + 1):
            out *= f(j)
    elif b < a - 1:
        for j in range(b + 1, a):
            out /= f(j)
    return out


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def sigma_recursion(l0: int, l1: int, c) -> list:
    """sigma_0..sigma_l from the three-term recursion (exact)."""
    c = _frac(c)
    n = l0 + l1
    L = l0 + l1
    sig = [Fraction(1)]
    if n == 0:
        return sig
    if c + 1 == 0:
        raise DenominatorZero("c = -1", c=str(c))
    sig.append(Fraction((l0 - l1)) * (c - L) / (c + 1))
    for i in range(2, n + 1):
        den = i * (i + c)
        if den == 0:
            raise DenominatorZero("i (i + c) = 0", i=i, c=str(c))
        sig.append(((l0 - l1) * (c + 2 * i - 2 - L) * sig[i - 1]
                    + (i - 2 - L) * (c + i - 2 - L) * sig[i - 2]) / den)
    return sig


def closed_form_case(l0: int, l1: int):
    """Name of the applicable closed form, or None."""
    if l1 == 0:
        return "i"
    if l1 == 1:
        return "ii"
    if l1 == 2:
        return "iii"
    if l1 == l0:
        return "iv"
    if l1 == l0 - 1:
        return "v"
    if l1 == l0 - 2:
        return "vi"
    return None


def _closed_sigma(case: str, l0: int, c: Fraction, n: int) -> Fraction:
    fac = Fraction(math.factorial(n))
    if case == "i":
        return _prod(0, n - 1, lambda j: Fraction((l0 - j) * (c + j - l0)) / ((j + 1) * (c + j + 1)))
    if case == "ii":
        m = n
        num = _prod(0, m - 2, lambda j: Fraction(l0 - j)) * _prod(1, m - 2, lambda j: c + j - l0)
        den = fac * _prod(0, m - 1, lambda j: c + j + 1)
        tail = (c - l0 - 1) * ((l0 - 2 * m + 1) * c - l0 * l0 - l0 + 2 * m * l0 + 2 * m - 2 * m * m)
        return num / den * tail
    if case == "iii":
        m = n
        num = _prod(0, m - 3, lambda j: Fraction(l0 - j)) * _prod(2, m - 3, lambda j: c + j - l0)
        den = fac * _prod(0, m - 1, lambda j: c + j + 1)
        poly = (c * c * (l0 ** 2 - (4 * m - 3) * l0 + 4 * m * m - 8 * m + 2)
                + 2 * c * (-l0 ** 3 + (4 * m - 3) * l0 ** 2 - (6 * m * m - 10 * m + 2) * l0
                           + 4 * m ** 3 - 12 * m * m + 8 * m)
                + l0 ** 4 - (4 * m - 3) * l0 ** 3 + (8 * m * m - 12 * m + 1) * l0 ** 2
                - (8 * m ** 3 - 20 * m * m + 8 * m + 3) * l0 + 4 * m ** 4 - 16 * m ** 3
                + 16 * m * m - 2)
        return num / den * (c - l0) * (c - l0 - 2) * poly
    m, odd = (n + 1) // 2, n % 2 == 1
    if case == "iv":
        if odd:
            return Fraction(0)
        return _prod(0, m - 1, lambda j: (j - l0) * (c + 2 * j - 2 * l0) / ((j + 1) * (c + 2 * j + 2)))
    if case == "v":
        core = _prod(0, m - 1, lambda j: c + 2 * j + 1 - 2 * l0) / _prod(0, m - 1, lambda j: c + 2 * j + 1)
        if odd:
            return _prod(1, m - 1, lambda j: Fraction(j - l0)) * core / math.factorial(m - 1)
        return _prod(1, m, lambda j: Fraction(j - l0)) * core / math.factorial(m)
    if case == "vi":
        if odd:
            num = 2 * _prod(2, m, lambda j: Fraction(j - l0)) * _prod(0, m - 1, lambda j: c + 2 * j + 2 - 2 * l0)
            den = math.factorial(m - 1) * (c + 1) * _prod(0, m - 2, lambda j: c + 2 * j + 2)
            return num / den
        num = _prod(2, m, lambda j: Fraction(j - l0)) * _prod(0, m - 1, lambda j: c + 2 * j + 2 - 2 * l0)
        den = math.factorial(m) * (c + 1) * _prod(0, m - 1, lambda j: c + 2 * j + 2)
        return -num / den * (c * (l0 - 2 * m - 1) + (4 * m + 1) * l0 - (2 * m + 1) ** 2)
    raise DomainError("unknown closed-form case", case=case)


def trig_sigma_coefficients(l0: int, l1: int, c, method: str = "recursion") -> list:
    """Exact elementary symmetric values sigma_0..sigma_(l0+l1) of the trig roots.

    Parameters
    ----------
    method : {"recursion", "closed_form"}
        ``closed_form`` covers ``l1`` in {0, 1, 2, l0, l0-1, l0-2}.

    Raises
    ------
    DenominatorZero
        If ``c`` hits a pole of the recursion or closed form.
    """
    c = _frac(c)
    if method == "recursion":
        return sigma_recursion(l0, l1, c)
    if method != "closed_form":
        raise DomainError("method must be recursion or closed_form", method=method)
    case = closed_form_case(l0, l1)
    if case is None:
        raise DomainError("no closed form for these couplings", l0=l0, l1=l1)
    try:
        return [Fraction(1)] + [_closed_sigma(case, l0, c, n) for n in range(1, l0 + l1 + 1)]
    except ZeroDivisionError as exc:
        raise DenominatorZero("closed form has a vanishing denominator", c=str(c)) from exc


@dataclass(frozen=True)
class TrigBetheState:
    """Exact trig Bethe data for mode ``m`` (``c = l0 + l1 + 2 + 2m``)."""

    l0: int
    l1: int
    m: int
    c: Fraction
    sigma: tuple
    T: tuple
    E: float
    residual: float

    def t_values(self) -> list:
        """``t_j`` with ``T_j = exp(2 pi i t_j)``, real part in (-1/2, 1/2]."""
        return [cmath.log(T) / (2j * PI) for T in self.T]


def trig_rows(T, c, l0: int, l1: int) -> list:
    """Residuals of the trig Bethe equations and their constraint rows (complex)."""
    c = complex(c)
    rows = []
    for j, Tj in enumerate(T):
        r = c + l0 * (Tj + 1) / (Tj - 1) + l1 * (Tj - 1) / (Tj + 1)
        for k, Tk in enumerate(T):
            if k != j:
                r += (Tk + Tj) / (Tk - Tj)
        rows.append(r)
    if l0:
        rows.append(c + sum((Tj + 1) / (Tj - 1) for Tj in T))
    if l1:
        rows.append(c + sum((Tj - 1) / (Tj + 1) for Tj in T))
    return rows


def trig_bethe_state(l0: int, l1: int, m: int, tol: float = 1e-10) -> TrigBetheState:
    """Solve the trig Bethe equations in closed form for mode ``m``.

    Raises
    ------
    RootCollision
        If two roots coincide or a root hits 0 or +-1.
    ResidualTooLarge
        If the residual exceeds ``tol``.
    """
    if min(l0, l1, m) < 0:
        raise DomainError("l0, l1, m must be non-negative", l0=l0, l1=l1, m=m)
    c = Fraction(l0 + l1 + 2 + 2 * m)
    sig = sigma_recursion(l0, l1, c)
    n = l0 + l1
    E = PI ** 2 * float(c) ** 2
    if n == 0:
        return TrigBetheState(l0, l1, m, c, tuple(sig), (), E, 0.0)
    # T_j are the roots of sum_j (-1)^j sigma_j X^(n-j)
    coeffs = [float((-1) ** j * sig[j]) for j in range(n, -1, -1)]
    T = poly_roots(coeffs)
    for i, a in enumerate(T):
        if abs(a) < 1e-12 or abs(a - 1) < 1e-8 or abs(a + 1) < 1e-8:
            raise RootCollision("trig root at 0 or +-1", T=a)
        for b in T[i + 1:]:
            if abs(a - b) < 1e-8:
                raise RootCollision("coinciding trig roots", T=a)
    res = max(abs(r) for r in trig_rows(T, c, l0, l1))
    if res > tol:
        raise ResidualTooLarge("trig Bethe residual too large", residual=res)
    return TrigBetheState(l0, l1, m, c, tuple(sig), tuple(complex(v) for v in T), E, float(res))


def lambda_trig(x: complex, st: TrigBetheState) -> complex:
    """``prod (1 - X T_j) / ((X-1)^l0 (X+1)^l1) X^(c/2)`` with ``X = exp(2 pi i x)``."""
    X = cmath.exp(2j * PI * x)
    val = cmath.exp(1j * PI * float(st.c) * x)
    for T in st.T:
        val *= 1 - X * T
    return val / ((X - 1) ** st.l0 * (X + 1) ** st.l1)


def lambda_trig_sym(x: complex, st: TrigBetheState) -> complex:
    """``Lambda_T(x) - (-1)^l0 Lambda_T(-x)``."""
    return lambda_trig(x, st) - (-1) ** st.l0 * lambda_trig(-x, st)
