"""Theta and Weierstrass functions evaluated through rapidly convergent theta series.

Conventions
-----------
The lattice is ``2*omega1*Z + 2*omega3*Z`` with ``tau = omega3/omega1`` and
nome ``p = exp(2*pi*i*tau)``.  The odd theta function is

    theta(x) = 2 * sum_{n>=1} (-1)^(n-1) exp(pi*i*tau*(n-1/2)^2) sin((2n-1)*pi*x)

and every Weierstrass function is routed through it with ``x = z/(2*omega1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .errors import DomainError, NoConvergence, NonConvergent, PoleAt

PI = math.pi
TWO_PI_I = 2j * math.pi

_TERM_REL = 1e-18
_MAX_TERMS = 500
_POLE_RADIUS = 1e-10

KINDS = ("wp", "wp_prime", "wp_second", "zeta", "sigma", "cosigma1", "cosigma2", "cosigma3")


@dataclass(frozen=True)
class Lattice:
    """Period lattice given by two half-periods.

    Parameters
    ----------
    omega1, omega3 : complex
        Half-periods with ``Im(omega3/omega1) > 0``.
    """

    omega1: complex
    omega3: complex

    def __post_init__(self):
        object.__setattr__(self, "omega1", complex(self.omega1))
        object.__setattr__(self, "omega3", complex(self.omega3))
        if self.omega1 == 0 or not (self.tau.imag > 0):
            raise DomainError("Im(tau) must be positive", tau=self.tau if self.omega1 else None)

    @property
    def tau(self) -> complex:
        return self.omega3 / self.omega1

    @property
    def p(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)

    @property
    def omega2(self) -> complex:
        return -self.omega1 - self.omega3

    def half_period(self, i: int) -> complex:
        """Return omega_i for i in 0..3 (omega_0 = 0)."""
        return (0j, self.omega1, self.omega2, self.omega3)[i]

    @classmethod
    def normalized(cls, tau: complex) -> "Lattice":
        """Lattice with ``omega1 = 1/2`` and ``omega3 = tau/2``."""
        return cls(0.5, complex(tau) / 2)

    @classmethod
    def from_nome(cls, p: complex) -> "Lattice":
        """Normalized lattice with the given nome ``p = exp(2 pi i tau)``."""
        p = complex(p)
        if p == 0 or abs(p) >= 1:
            raise DomainError("nome must satisfy 0 < |p| < 1", p=p)
        tau = cmath.log(p) / TWO_PI_I
        return cls.normalized(tau)


@dataclass(frozen=True)
class LatticeConstants:
    """Half-period values ``e_i``, ``eta_i`` and the invariants ``g2``, ``g3``."""

    e1: complex
    e2: complex
    e3: complex
    eta1: complex
    eta2: complex
    eta3: complex
    g2: complex
    g3: complex
    lattice: Lattice = field(repr=False, compare=False, default=None)

    @property
    def e(self) -> tuple:
        return (self.e1, self.e2, self.e3)

    @property
    def eta(self) -> tuple:
        return (self.eta1, self.eta2, self.eta3)


# ---------------------------------------------------------------------------
# theta series


def _reduce(x: complex, tau: complex):
    """Write x = y + m + n*tau with y in the centred cell."""
    n = round(x.imag / tau.imag)
    y = x - n * tau
    m = round(y.real)
    return y - m, m, n


def _theta_reduced(y: complex, tau: complex, kmax: int) -> list:
    """Derivatives 0..kmax of the raw sine series at a reduced argument."""
    out = [0j] * (kmax + 1)
    bound_sum = 0.0
    aim = abs(y.imag)
    for n in range(1, _MAX_TERMS + 1):
        h = n - 0.5
        w = (2 * n - 1) * PI
        qn = cmath.exp(1j * PI * tau * h * h)
        bound = abs(qn) * math.exp(w * aim) * w ** kmax
        bound_sum += bound
        arg = w * y
        s, c = cmath.sin(arg), cmath.cos(arg)
        sign = 2.0 if n % 2 else -2.0
        base = sign * qn
        wk = 1.0
        for k in range(kmax + 1):
            r = k % 4
            trig = s if r == 0 else c if r == 1 else -s if r == 2 else -c
            out[k] += base * wk * trig
            wk *= w
        if bound < _TERM_REL * bound_sum:
            return out
    raise NonConvergent("theta series did not converge", terms=_MAX_TERMS)


def _check_tau(tau: complex):
    if not tau.imag > 0:
        raise DomainError("Im(tau) must be positive", tau=tau)
    if abs(cmath.exp(TWO_PI_I * tau)) >= 0.99:
        raise NonConvergent("nome too close to the unit circle", tau=tau)


def theta_eval(x: complex, tau: complex, order: int = 0) -> complex:
    """Evaluate the odd theta function or one of its first three derivatives.

    Parameters
    ----------
    x : complex
        Argument.
    tau : complex
        Modular parameter, ``Im(tau) > 0``.
    order : int
        Derivative order in 0..3.

    Returns
    -------
    complex
    """
    if order not in (0, 1, 2, 3):
        raise DomainError("order must be in 0..3", order=order)
    x, tau = complex(x), complex(tau)
    _check_tau(tau)
    y, m, n = _reduce(x, tau)
    vals = _theta_reduced(y, tau, order)
    if n == 0:
        pref = -1.0 if m % 2 else 1.0
        return pref * vals[order]
    a = -TWO_PI_I * n
    pref = (-1) ** ((m + n) % 2) * cmath.exp(a * x + 1j * PI * n * n * tau)
    return pref * sum(math.comb(order, j) * a ** (order - j) * vals[j] for j in range(order + 1))


def theta_log_ratios(x: complex, tau: complex):
    """Return ``(theta'/theta, theta''/theta, theta'''/theta)`` at ``x``.

    Raises
    ------
    PoleAt
        If ``x`` lies within the pole guard of a zero of theta.
    """
    y, _, n = _reduce(complex(x), complex(tau))
    if abs(y) < _POLE_RADIUS:
        raise PoleAt("argument on the period lattice", z=complex(x))
    v = _theta_reduced(y, tau, 3)
    r1, r2, r3 = v[1] / v[0], v[2] / v[0], v[3] / v[0]
    if n == 0:
        return r1, r2, r3
    a = -TWO_PI_I * n
    return a + r1, a * a + 2 * a * r1 + r2, a ** 3 + 3 * a * a * r1 + 3 * a * r2 + r3


# ---------------------------------------------------------------------------
# lattice constants


@lru_cache(maxsize=256)
def _theta_zero_data(tau: complex):
    v = _theta_reduced(0j, tau, 3)
    return v[1], v[3]


def _eta1(lat: Lattice) -> complex:
    t1, t3 = _theta_zero_data(lat.tau)
    return -t3 / (12 * lat.omega1 * t1)


def _wp_raw(z: complex, lat: Lattice, eta1: complex) -> tuple:
    w1 = lat.omega1
    L, r2, r3 = theta_log_ratios(z / (2 * w1), lat.tau)
    wp = (L * L - r2) / (4 * w1 * w1) - eta1 / w1
    wpp = (3 * L * r2 - 2 * L ** 3 - r3) / (8 * w1 ** 3)
    return wp, wpp, L


@lru_cache(maxsize=256)
def _constants_cached(omega1: complex, omega3: complex) -> LatticeConstants:
    lat = Lattice(omega1, omega3)
    _check_tau(lat.tau)
    eta1 = _eta1(lat)
    e = [_wp_raw(lat.half_period(i), lat, eta1)[0] for i in (1, 2, 3)]
    eta3 = eta1 * lat.tau - 1j * PI / (2 * omega1)
    eta2 = -eta1 - eta3
    s = sum(e) / 3
    e = [ei - s for ei in e]  # remove rounding drift; the exact sum is zero
    e1, e2, e3 = e
    g2 = -4 * (e1 * e2 + e1 * e3 + e2 * e3)
    g3 = 4 * e1 * e2 * e3
    return LatticeConstants(e1, e2, e3, eta1, eta2, eta3, g2, g3, lat)


def lattice_constants(lat: Lattice) -> LatticeConstants:
    """Compute ``e_i = wp(omega_i)``, ``eta_i = zeta(omega_i)``, ``g2`` and ``g3``.

    Raises
    ------
    NonConvergent
        If ``|p| >= 0.99``.
    """
    return _constants_cached(lat.omega1, lat.omega3)


# ---------------------------------------------------------------------------
# Weierstrass family


def wp_family(z: complex, lat: Lattice, kind: str = "wp") -> complex:
    """Evaluate a member of the Weierstrass family.

    Parameters
    ----------
    z : complex
        Argument.
    lat : Lattice
    kind : str
        One of ``wp``, ``wp_prime``, ``wp_second``, ``zeta``, ``sigma``,
        ``cosigma1``, ``cosigma2``, ``cosigma3``.

    Raises
    ------
    PoleAt
        For pole-bearing kinds when ``z`` is within 1e-10 of the lattice.
    """
    z = complex(z)
    lc = lattice_constants(lat)
    w1 = lat.omega1
    if kind in ("wp", "wp_prime", "wp_second"):
        wp, wpp, _ = _wp_raw(z, lat, lc.eta1)
        if kind == "wp":
            return wp
        if kind == "wp_prime":
            return wpp
        return 6 * wp * wp - lc.g2 / 2
    if kind == "zeta":
        x = z / (2 * w1)
        L = theta_log_ratios(x, lat.tau)[0]
        return 2 * lc.eta1 * x + L / (2 * w1)
    if kind == "sigma":
        return _sigma(z, lat, lc)
    if kind.startswith("cosigma") and kind[-1] in "123":
        i = int(kind[-1])
        wi = lat.half_period(i)
        return cmath.exp(-lc.eta[i - 1] * z) * _sigma(z + wi, lat, lc) / _sigma(wi, lat, lc)
    raise DomainError(f"unknown kind {kind!r}", kind=kind)


def _sigma(z: complex, lat: Lattice, lc: LatticeConstants) -> complex:
    w1 = lat.omega1
    x = z / (2 * w1)
    t1, _ = _theta_zero_data(lat.tau)
    return 2 * w1 * cmath.exp(2 * lc.eta1 * w1 * x * x) * theta_eval(x, lat.tau, 0) / t1


def wp_and_prime(z: complex, lat: Lattice) -> tuple:
    """Return ``(wp(z), wp'(z))`` from a single theta evaluation."""
    wp, wpp, _ = _wp_raw(complex(z), lat, lattice_constants(lat).eta1)
    return wp, wpp


def wp_zeta(z: complex, lat: Lattice) -> tuple:
    """Return ``(wp, wp', zeta)`` at ``z`` from one theta evaluation."""
    lc = lattice_constants(lat)
    w1 = lat.omega1
    wp, wpp, L = _wp_raw(complex(z), lat, lc.eta1)
    x = complex(z) / (2 * w1)
    return wp, wpp, 2 * lc.eta1 * x + L / (2 * w1)


def reduce_to_cell(z: complex, lat: Lattice) -> complex:
    """Reduce ``z`` modulo the period lattice to the centred cell."""
    x = complex(z) / (2 * lat.omega1)
    y, _, _ = _reduce(x, lat.tau)
    return y * 2 * lat.omega1


def lattice_distance(z: complex, lat: Lattice) -> float:
    """Distance from ``z`` to the lattice in units where ``2*omega1 = 1``."""
    return abs(_reduce(complex(z) / (2 * lat.omega1), lat.tau)[0])


# ---------------------------------------------------------------------------
# inverse


def wp_inverse(a: complex, lat: Lattice, grid: int = 12) -> complex:
    """Solve ``wp(t) = a`` by multi-start Newton.

    The returned ``t`` lies in the centred cell; the sign of ``t`` is not
    fixed.

    Raises
    ------
    DomainError
        If ``a`` is (numerically) one of the branch values ``e_i``.
    NoConvergence
        If no seed of the grid converges.
    """
    a = complex(a)
    lc = lattice_constants(lat)
    tol = 1e-11 * (1 + abs(a))
    for ei in lc.e:
        if abs(a - ei) <= 1e-10 * (1 + abs(a)):
            raise DomainError("wp_inverse at a branch value", a=a)
    w1, w3 = lat.omega1, lat.omega3
    seeds = []
    for iu in range(grid):
        for iv in range(grid):
            u = (iu + 0.5) / grid - 0.5
            v = (iv + 0.5) / (2 * grid)
            t = 2 * w1 * u + 2 * w3 * v
            try:
                seeds.append((abs(_wp_raw(t, lat, lc.eta1)[0] - a), t))
            except PoleAt:
                continue
    seeds.sort(key=lambda s: s[0])
    # near the pole wp(t) ~ t^-2, which beats any grid seed
    if abs(a) * abs(w1) ** 2 > 4:
        seeds.insert(0, (0.0, 1 / cmath.sqrt(a)))
    for _, t in seeds:
        res = _newton_wp(t, a, lat, lc, tol)
        if res is not None:
            return reduce_to_cell(res, lat)
    raise NoConvergence("wp_inverse exhausted its seed grid", a=a)


def _newton_wp(t, a, lat, lc, tol):
    scale = abs(lat.omega1) + abs(lat.omega3)
    for _ in range(60):
        try:
            wp, wpp, _ = _wp_raw(t, lat, lc.eta1)
        except PoleAt:
            return None
        f = wp - a
        if abs(f) <= tol:
            return t
        if wpp == 0:
            return None
        step = f / wpp
        if abs(step) > 0.25 * scale:
            step *= 0.25 * scale / abs(step)
        t = t - step
    return None


# ---------------------------------------------------------------------------
# nome expansion


def wp_p_expansion(x: complex, K: int, shifted: bool = False) -> list:
    """Coefficients ``c_0..c_K`` of the nome expansion of ``wp(x)`` (omega1 = 1/2).

    Parameters
    ----------
    x : complex
        Argument, not an integer.
    K : int
        Highest order.
    shifted : bool
        If true, expand ``wp(x + 1/2)`` instead.
    """
    x = complex(x)
    if not shifted and abs(x - round(x.real)) < 1e-14:
        raise DomainError("x must not be an integer", x=x)
    if shifted and abs(x - 0.5 - round((x - 0.5).real)) < 1e-14:
        raise DomainError("x + 1/2 must not be an integer", x=x)
    pi2 = PI * PI
    if shifted:
        c0 = pi2 / cmath.cos(PI * x) ** 2 - pi2 / 3
    else:
        c0 = pi2 / cmath.sin(PI * x) ** 2 - pi2 / 3
    out = [c0]
    for k in range(1, K + 1):
        s = 0j
        for n in divisors(k):
            cn = cmath.cos(2 * n * PI * x)
            if shifted and n % 2:
                cn = -cn
            s += n * (cn - 1)
        out.append(-8 * pi2 * s)
    return out


def divisors(k: int) -> list:
    """Positive divisors of ``k`` in increasing order."""
    return [n for n in range(1, k + 1) if k % n == 0]


def half_period_shift_index(i: int, j: int) -> int:
    """Index k with omega_i + omega_j congruent to omega_k modulo periods."""
    return i ^ j


def evaluate_poly(coeffs: Sequence[complex], x: complex) -> complex:
    """Horner evaluation of an ascending coefficient list."""
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
