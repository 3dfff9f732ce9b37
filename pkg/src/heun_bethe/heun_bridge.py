"""Couplings, Riemann scheme, the map to standard Heun form, and local series."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .elliptic import Lattice, LatticeConstants, lattice_constants
from .errors import DegenerateLattice, DomainError


@dataclass(frozen=True)
class Couplings:
    """Four non-negative integer couplings ``l0..l3``."""

    l0: int
    l1: int
    l2: int = 0
    l3: int = 0

    def __post_init__(self):
        for v in self.as_tuple():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise DomainError("couplings must be non-negative integers", l=list(self.as_tuple()))

    def as_tuple(self) -> tuple:
        return (self.l0, self.l1, self.l2, self.l3)

    def __getitem__(self, i: int) -> int:
        return self.as_tuple()[i]

    def __iter__(self):
        return iter(self.as_tuple())

    @property
    def l(self) -> int:
        return sum(self.as_tuple())

    @property
    def k(self) -> tuple:
        """Non-increasing rearrangement ``(k0, k1, k2, k3)``."""
        return tuple(sorted(self.as_tuple(), reverse=True))

    def strengths(self) -> tuple:
        """Pole strengths ``l_i (l_i + 1)``."""
        return tuple(v * (v + 1) for v in self.as_tuple())

    @classmethod
    def parse(cls, text: str) -> "Couplings":
        parts = [int(s) for s in str(text).split(",")]
        if len(parts) > 4 or not parts:
            raise DomainError("expected up to four comma separated integers", text=text)
        return cls(*parts)


@dataclass(frozen=True)
class RiemannScheme:
    """Singular points and their exponent pairs (upper, lower)."""

    points: tuple
    exponents: tuple

    def fuchs_sum(self) -> Fraction:
        return sum((a + b for a, b in self.exponents), Fraction(0))


@dataclass(frozen=True)
class HeunParameters:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    epsilon: complex
    q: complex
    t: complex

    def fuchs_defect(self) -> float:
        return abs(self.alpha + self.beta + 1 - self.gamma - self.delta - self.epsilon)


def riemann_scheme(c: Couplings, lc: LatticeConstants) -> RiemannScheme:
    """Exponents of the algebraic form at ``e1, e2, e3`` and infinity.

    Exponents are exact fractions: ``((l_i+1)/2, -l_i/2)`` at ``e_i`` and
    ``((l0+1)/2, -l0/2)`` at infinity.
    """
    ex = [(Fraction(c[i] + 1, 2), Fraction(-c[i], 2)) for i in (1, 2, 3)]
    ex.append((Fraction(c.l0 + 1, 2), Fraction(-c.l0, 2)))
    return RiemannScheme((lc.e1, lc.e2, lc.e3, "inf"), tuple(ex))


def _algebraic_S(z, c: Couplings, lc: LatticeConstants, E):
    """Coefficient of ``g`` times ``prod(z - e_i)`` after the index shift."""
    e = lc.e
    L = c.strengths()
    A = [(e[0] - e[1]) * (e[0] - e[2]), (e[1] - e[0]) * (e[1] - e[2]), (e[2] - e[0]) * (e[2] - e[1])]
    kap = [-c[i] / 2 for i in (1, 2, 3)]
    d = [z - ei for ei in e]
    P = d[0] * d[1] * d[2]
    K = sum(kap[i] / d[i] for i in range(3))
    dK = -sum(kap[i] / d[i] ** 2 for i in range(3))
    p1 = 0.5 * sum(1 / d[i] for i in range(3))
    Ct = -E + sum(L[i + 1] * e[i] for i in range(3))
    R = Ct + L[0] * z + sum(L[i + 1] * A[i] / d[i] for i in range(3))
    return (dK + K * K + p1 * K) * P - R / 4


def to_heun_parameters(c: Couplings, lc: LatticeConstants, E: complex) -> HeunParameters:
    """Parameters of the standard Heun equation equivalent to the elliptic form.

    The map is ``w = (z - e1)/(e2 - e1)`` followed by the shift
    ``f = prod (z - e_i)^(-l_i/2) g``.

    Raises
    ------
    DegenerateLattice
        If two of the ``e_i`` coincide within 1e-10.
    """
    e1, e2, e3 = lc.e
    for a, b in ((e1, e2), (e1, e3), (e2, e3)):
        if abs(a - b) < 1e-10:
            raise DegenerateLattice("coinciding e_i", e=[e1, e2, e3])
    E = complex(E)
    gamma = 0.5 - c.l1
    delta = 0.5 - c.l2
    eps = 0.5 - c.l3
    s = (c.l1 + c.l2 + c.l3) / 2
    alpha = (c.l0 + 1) / 2 - s
    beta = -c.l0 / 2 - s
    # the shifted coefficient is exactly linear in z: S(z) = ab (z-e1) - q (e2-e1)
    span = abs(e1) + abs(e2) + abs(e3)
    z1 = e1 + (0.37 + 0.61j) * span
    z2 = e1 + (-0.53 + 0.29j) * span
    S1 = _algebraic_S(z1, c, lc, E)
    S2 = _algebraic_S(z2, c, lc, E)
    slope = (S1 - S2) / (z1 - z2)
    S_at_e1 = S1 - slope * (z1 - e1)
    q = -S_at_e1 / (e2 - e1)
    return HeunParameters(complex(alpha), complex(beta), complex(gamma), complex(delta),
                          complex(eps), complex(q), complex((e3 - e1) / (e2 - e1)))


# ---------------------------------------------------------------------------
# local Frobenius series


def laurent_wp(g2: complex, g3: complex, n: int) -> list:
    """Coefficients ``c_1..c_n`` with ``wp(s) = s^-2 + sum_k c_k s^(2k)``."""
    # classical recurrence in the s^(2k-2) indexing, shifted by one
    cc = {2: g2 / 20, 3: g3 / 28}
    for k in range(4, n + 2):
        cc[k] = 3 / ((2 * k + 1) * (k - 3)) * sum(cc[m] * cc[k - m] for m in range(2, k - 1))
    return [cc[k + 1] for k in range(1, n + 1)]


def taylor_wp_half(ek: complex, g2: complex, n: int) -> list:
    """Even Taylor coefficients ``b_0..b_n`` of ``wp(omega_k + s)`` in ``s^2``."""
    b = [complex(ek)]
    for m in range(n):
        conv = sum(b[a] * b[m - a] for a in range(m + 1))
        rhs = 6 * conv - (g2 / 2 if m == 0 else 0)
        b.append(rhs / (2 * (m + 1) * (2 * m + 1)))
    return b


def local_potential(c: Couplings, lc: LatticeConstants, i: int, n: int) -> tuple:
    """Expansion of the potential at ``omega_i``: ``L_i s^-2 + sum_k w_k s^(2k)``."""
    L = c.strengths()
    e = (None,) + tuple(lc.e)
    lau = laurent_wp(lc.g2, lc.g3, n)
    w = [0j] * (n + 1)
    for k in range(1, n + 1):
        w[k] += L[i] * lau[k - 1]
    for j in range(4):
        if j == i or L[j] == 0:
            continue
        tay = taylor_wp_half(e[i ^ j], lc.g2, n)
        for k in range(n + 1):
            w[k] += L[j] * tay[k]
    return L[i], w


def frobenius_series(c: Couplings, lat: Lattice, i: int, exponent_choice: str, E: complex,
                     N: int) -> list:
    """Local Frobenius coefficients at the half-period ``omega_i``.

    Parameters
    ----------
    c : Couplings
    lat : Lattice
    i : int
        Singular index 0..3.
    exponent_choice : {"lower", "upper"}
        Leading exponent ``-l_i`` or ``l_i + 1``.
    E : complex
        Energy.
    N : int
        Number of coefficients beyond the leading one (``N <= 200``).

    Returns
    -------
    list of complex
        ``a_0..a_N`` with ``f = sum_k a_k s^(rho + k)``, ``s = x - omega_i``;
        odd-index entries are exactly zero.
    """
    if not (0 <= i <= 3) or N > 200 or N < 0:
        raise DomainError("invalid index or order", i=i, N=N)
    li = c[i]
    if exponent_choice == "lower":
        rho = -li
    elif exponent_choice == "upper":
        rho = li + 1
    else:
        raise DomainError("exponent_choice must be lower or upper", choice=exponent_choice)
    lc = lattice_constants(lat)
    Li, w = local_potential(c, lc, i, N // 2 + 1)
    w = list(w)
    w[0] -= complex(E)
    a = [0j] * (N + 1)
    a[0] = 1 + 0j
    for k in range(2, N + 1, 2):
        rhs = 0j
        for nn in range(0, (k - 2) // 2 + 1):
            rhs += w[nn] * a[k - 2 - 2 * nn]
        a[k] = rhs / ((rho + k) * (rho + k - 1) - Li)
    return a


def frobenius_eval(coeffs: list, rho: int, s: complex) -> tuple:
    """Value and first two derivatives of ``sum a_k s^(rho+k)``."""
    f = d1 = d2 = 0j
    for k, ak in enumerate(coeffs):
        if ak == 0:
            continue
        p = rho + k
        f += ak * s ** p
        d1 += ak * p * s ** (p - 1)
        d2 += ak * p * (p - 1) * s ** (p - 2)
    return f, d1, d2
