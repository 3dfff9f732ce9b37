"""The even doubly periodic kernel Xi(x, E) and the spectral polynomial Q(E).

Xi is expanded as ``c0 + sum_i sum_j b^(i)_j wp(x + omega_i)^(l_i - j)`` and
solves the third-order product equation

    Xi''' - 4 (V - E) Xi' - 2 V' Xi = 0,   V = sum_i l_i (l_i + 1) wp(x + omega_i).

``Q(E) = Xi^2 (E - V) + Xi Xi''/2 - Xi'^2/4`` is independent of x.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npp

from .elliptic import PI, Lattice, lattice_constants, wp_and_prime
from .errors import AmbiguousNullspace, InterpolationInconsistent
from .heun_bridge import Couplings
from .invariant_space import invariant_dimension
from .polyroots import poly_roots

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# basis


def xi_basis(c: Couplings) -> list:
    """Basis labels ``(i, n)`` for ``wp(x+omega_i)^n``; ``(None, 0)`` is the constant.

    The order is ``[c0, b^(0)_0.., b^(1)_0.., b^(2)_0.., b^(3)_0..]`` with
    ``b^(i)_j`` multiplying ``wp(x+omega_i)^(l_i - j)``.
    """
    out = [(None, 0)]
    for i in range(4):
        for j in range(c[i]):
            out.append((i, c[i] - j))
    return out


@dataclass
class PointData:
    """Values of ``wp(x+omega_i)`` and ``wp'(x+omega_i)`` at one point."""

    x: complex
    y: list
    dy: list
    V: complex
    dV: complex


def point_data(x: complex, c: Couplings, lat: Lattice) -> PointData:
    L = c.strengths()
    y, dy = [], []
    for i in range(4):
        a, b = wp_and_prime(x + lat.half_period(i), lat)
        y.append(a)
        dy.append(b)
    V = sum(L[i] * y[i] for i in range(4))
    dV = sum(L[i] * dy[i] for i in range(4))
    return PointData(complex(x), y, dy, V, dV)


def basis_derivatives(label, pd: PointData, g2: complex) -> tuple:
    """``(f, f', f'', f''')`` for ``f = wp(x+omega_i)^n`` via the Weierstrass ODE."""
    i, n = label
    if i is None:
        return 1.0 + 0j, 0j, 0j, 0j
    y, y1 = pd.y[i], pd.dy[i]
    y2 = 6 * y * y - g2 / 2
    y3 = 12 * y * y1

    def pw(k):
        return y ** k if k >= 0 else 0j

    f = pw(n)
    f1 = n * pw(n - 1) * y1
    f2 = n * (n - 1) * pw(n - 2) * y1 ** 2 + n * pw(n - 1) * y2
    f3 = (n * (n - 1) * (n - 2) * pw(n - 3) * y1 ** 3 + 3 * n * (n - 1) * pw(n - 2) * y1 * y2
          + n * pw(n - 1) * y3)
    return f, f1, f2, f3


def collocation_points(lat: Lattice, n: int, seed: int = 0) -> list:
    """Deterministic generic points at least 0.05 (lattice units) from half-periods."""
    rng = np.random.default_rng(seed + 7919)
    pts = []
    halves = [(a / 2, b / 2) for a in range(3) for b in range(3)]
    while len(pts) < n:
        u, v = rng.uniform(0.0, 1.0, 2)
        if min(math.hypot(u - a, v - b) for a, b in halves) < 0.05:
            continue
        pts.append(2 * lat.omega1 * u + 2 * lat.omega3 * v)
    return pts


def quarter_points(lat: Lattice) -> list:
    """Points near the quarter periods, where every wp(x + omega_i) is moderate."""
    uv = [(0.25, 0.25), (0.75, 0.25), (0.27, 0.73), (0.71, 0.77)]
    return [2 * lat.omega1 * u + 2 * lat.omega3 * v for u, v in uv]


class XiSystem:
    """Linear collocation system ``(A0 + E A1) coeffs = 0`` for Xi."""

    def __init__(self, c: Couplings, lat: Lattice, npts: Optional[int] = None, seed: int = 0):
        self.c = c
        self.lat = lat
        self.lc = lattice_constants(lat)
        self.basis = xi_basis(c)
        npts = npts or 4 * (c.l + 4)
        self.points = [point_data(x, c, lat) for x in collocation_points(lat, npts, seed)]
        g2 = self.lc.g2
        A0 = np.zeros((npts, len(self.basis)), dtype=complex)
        A1 = np.zeros_like(A0)
        for r, pd in enumerate(self.points):
            for k, lab in enumerate(self.basis):
                f, f1, f2, f3 = basis_derivatives(lab, pd, g2)
                A0[r, k] = f3 - 4 * pd.V * f1 - 2 * pd.dV * f
                A1[r, k] = 4 * f1
        self.colscale = np.maximum(np.abs(A0).max(axis=0), np.abs(A1).max(axis=0))
        self.colscale[self.colscale == 0] = 1.0
        self.A0 = A0 / self.colscale
        self.A1 = A1 / self.colscale

    def nullvector(self, E: complex) -> tuple:
        A = self.A0 + complex(E) * self.A1
        rs = np.abs(A).max(axis=1)
        rs[rs == 0] = 1.0
        A = A / rs[:, None]
        _, s, vh = np.linalg.svd(A)
        n = len(self.basis)
        if n >= 2 and abs(s[n - 2] - s[n - 1]) <= 1e-6 * s[0]:
            raise AmbiguousNullspace("nullspace not one-dimensional", E=complex(E))
        v = vh[-1].conj() / self.colscale
        return v, s


def _normalize_unit(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.nonzero(np.abs(v) > 1e-14)[0][0])
    return v * (abs(v[k]) / v[k])


@dataclass
class XiRepresentation:
    """Coefficients of Xi in the basis of :func:`xi_basis`.

    ``coeffs`` is the per-energy vector; ``poly`` (optional) holds one
    ascending E-coefficient array per basis element with monic ``poly[0]``.
    """

    couplings: Couplings
    lattice: Lattice
    E: Optional[complex]
    coeffs: np.ndarray
    poly: Optional[list] = None
    g: Optional[int] = None
    diagnostics: list = field(default_factory=list)

    @property
    def basis(self) -> list:
        return xi_basis(self.couplings)

    def at_energy(self, E: complex) -> "XiRepresentation":
        """Per-energy representation from the polynomial form (monic scale)."""
        if self.poly is None:
            raise ValueError("no polynomial form")
        v = np.array([npp.polyval(complex(E), p) for p in self.poly])
        return XiRepresentation(self.couplings, self.lattice, complex(E), v, self.poly, self.g)

    def evaluate(self, x: complex) -> tuple:
        """``(Xi, Xi', Xi'')`` at ``x``."""
        pd = point_data(x, self.couplings, self.lattice)
        g2 = lattice_constants(self.lattice).g2
        out = np.zeros(3, dtype=complex)
        for ck, lab in zip(self.coeffs, self.basis):
            f, f1, f2, _ = basis_derivatives(lab, pd, g2)
            out += ck * np.array([f, f1, f2])
        return tuple(out)

    def residual(self, x: complex, E: Optional[complex] = None) -> complex:
        """Residual of the product equation at ``x`` relative to the term scale."""
        E = self.E if E is None else E
        pd = point_data(x, self.couplings, self.lattice)
        g2 = lattice_constants(self.lattice).g2
        tot = 0j
        scale = 0.0
        for ck, lab in zip(self.coeffs, self.basis):
            f, f1, f2, f3 = basis_derivatives(lab, pd, g2)
            term = ck * (f3 - 4 * (pd.V - E) * f1 - 2 * pd.dV * f)
            tot += term
            scale = max(scale, abs(ck * f3), abs(ck * 4 * (pd.V - E) * f1), abs(ck * 2 * pd.dV * f))
        return tot / max(scale, 1e-300)


def xi_at_energy(c: Couplings, lat: Lattice, E: complex, system: Optional[XiSystem] = None
                 ) -> XiRepresentation:
    """Per-energy Xi as the unit-norm nullvector of the collocation system.

    Raises
    ------
    AmbiguousNullspace
        At exceptional energies where the kernel is not one-dimensional.
    """
    if c.l == 0:
        return XiRepresentation(c, lat, complex(E), np.array([1.0 + 0j]))
    system = system or XiSystem(c, lat)
    v, _ = system.nullvector(E)
    return XiRepresentation(c, lat, complex(E), _normalize_unit(v))


# ---------------------------------------------------------------------------
# polynomial form


def _fast_path(l0: int, lk: int, k: int, lat: Lattice) -> list:
    """Polynomial Xi coefficients for couplings ``l0`` at 0 and ``lk`` at ``omega_k``.

    Requires ``l0 >= lk``.  Xi = sum_j a_j u^(j - lk) with u = wp(x) - e_k,
    run downward from the top coefficient; each a_j is a polynomial in E.
    """
    lc = lattice_constants(lat)
    ek = lc.e[k - 1]
    ea, eb = [lc.e[m - 1] for m in (1, 2, 3) if m != k]
    A1 = (ek - ea) * (ek - eb)
    L0, L1 = l0 * (l0 + 1), lk * (lk + 1)

    def k0(m):
        return 2 * (2 * m + 1) * (m - l0) * (m + l0 + 1)

    def k1(m):  # linear in E, ascending coefficients
        return np.array([4 * m * ek * (3 * m * m - L0 - L1), 4 * m], dtype=complex)

    def k2(m):
        return 2 * A1 * (2 * m - 1) * (m - lk - 1) * (m + lk)

    top = l0 + lk
    a = {top: np.array([1.0 + 0j]), top + 1: np.array([0j])}
    for j in range(top - 1, -1, -1):
        n = j - lk
        acc = npp.polymul(a[j + 1], k1(n + 1))
        acc = npp.polyadd(acc, k2(n + 2) * a[j + 2])
        a[j] = -acc / k0(n)
    # u^m (m >= 0) expands in powers of wp(x); u^m (m < 0) in powers of wp(x + omega_k)
    ls = [l0, 0, 0, 0]
    ls[k] = lk
    basis = xi_basis(Couplings(*ls))
    idx = {lab: n for n, lab in enumerate(basis)}
    out = [np.array([0j]) for _ in basis]

    def add(lab, poly):
        n = idx[lab]
        out[n] = npp.polyadd(out[n], poly)

    for j in range(top + 1):
        m = j - lk
        if m >= 0:
            for r in range(m + 1):
                coef = math.comb(m, r) * (-ek) ** (m - r)
                add((None, 0) if r == 0 else (0, r), coef * a[j])
        else:
            # u^-r = ((w - e_k)/A1)^r with w = wp(x + omega_k)
            r = -m
            for s in range(r + 1):
                coef = math.comb(r, s) * (-ek) ** (r - s) / A1 ** r
                add((None, 0) if s == 0 else (k, s), coef * a[j])
    lead = out[0][-1]
    return [np.trim_zeros(p / lead, "b") if np.any(p) else np.array([0j]) for p in out]


def _shift_plan(c: Couplings):
    """For couplings supported on at most two sites, return ``(i, k)`` such that
    shifting by ``omega_i`` moves the larger coupling to 0 and the other to ``k``."""
    sites = [m for m in range(4) if c[m]]
    if len(sites) > 2:
        return None
    if len(sites) == 1:
        return sites[0], 1
    i, j = sorted(sites, key=lambda m: (-c[m], m))
    return i, i ^ j


def _fast_polynomials(c: Couplings, lat: Lattice) -> list:
    i, k = _shift_plan(c)
    lk = c[i ^ k]
    poly = _fast_path(c[i], lk, k, lat)
    ls = [c[i], 0, 0, 0]
    ls[k] = lk
    src = {lab: n for n, lab in enumerate(xi_basis(Couplings(*ls)))}
    # Xi_c(x) = Xi_shifted(x + omega_i): wp(y + omega_m) -> wp(x + omega_(m^i))
    out = []
    for m, n in xi_basis(c):
        lab = (None, 0) if m is None else (m ^ i, n)
        out.append(poly[src[lab]])
    return out


def _fit_polynomials(samples, nb: int, g: int):
    """Homogeneous fit ``v0 b_k(s) - v_k c0(s) = 0``; returns (coeff vector, sing. values)."""
    ncols = (g + 1) + nb * g
    rows = []
    for s, v in samples:
        pw = np.array([s ** k for k in range(g + 1)])
        for k in range(nb):
            row = np.zeros(ncols, dtype=complex)
            row[: g + 1] = -v[k + 1] * pw
            row[g + 1 + k * g: g + 1 + (k + 1) * g] = v[0] * pw[:g]
            rows.append(row)
    M = np.array(rows)
    cs = np.abs(M).max(axis=0)
    cs[cs == 0] = 1
    _, sv, vh = np.linalg.svd(M / cs)
    theta = vh[-1].conj() / cs
    return theta, sv


def _general_path(c: Couplings, lat: Lattice, diagnostics: list, seed: int = 0):
    D = invariant_dimension(c)
    gconj = (D - 1) // 2
    basis = xi_basis(c)
    nb = len(basis) - 1
    system = XiSystem(c, lat, seed=seed)
    R = 5.0 + PI * PI * (c.l + 1) ** 2 / 2
    S = 2 * gconj + 8
    samples = []
    k = 0
    while len(samples) < S:
        th = 2 * PI * (k + 0.3) / S
        k += 1
        s = complex(math.cos(th), math.sin(th))
        try:
            v, _ = system.nullvector(R * s)
        except AmbiguousNullspace:
            continue
        samples.append((s, v / np.linalg.norm(v)))
        if k > 4 * S:
            break
    chosen = None
    for g in range(1, gconj + 2):
        theta, sv = _fit_polynomials(samples, nb, g)
        if sv[-1] <= 1e-9 * sv[0] and (len(sv) < 2 or sv[-2] > 1e-9 * sv[0]):
            chosen = (g, theta)
            break
    if chosen is None:
        raise InterpolationInconsistent("no polynomial form found up to the conjectured degree",
                                        couplings=list(c))
    g, theta = chosen
    if g != gconj:
        diagnostics.append(f"deg c0 = {g} differs from conjectured {gconj}")
        log.warning("deg c0 = %d differs from conjectured %d for %s", g, gconj, c)
    c0s = theta[: g + 1]
    bs = [theta[g + 1 + k * g: g + 1 + (k + 1) * g] for k in range(nb)]
    # consistency on fresh energies
    for th in (0.123, 1.987, 4.321):
        s = complex(math.cos(th), math.sin(th)) * 0.8
        v, _ = system.nullvector(R * s)
        pv = np.array([npp.polyval(s, c0s)] + [npp.polyval(s, b) for b in bs])
        v = v / np.linalg.norm(v)
        pv = pv / np.linalg.norm(pv)
        ph = np.vdot(pv, v)
        dev = np.linalg.norm(v - ph * pv)
        if dev > 1e-7:
            raise InterpolationInconsistent("fitted polynomials miss a control sample",
                                            deviation=float(dev))
    # back to E = R s, monic
    scale = np.array([R ** -k for k in range(g + 1)])
    c0 = c0s * scale
    lead = c0[-1]
    poly = [c0 / lead] + [(b * scale[:g]) / lead for b in bs]
    return poly, g


def xi_polynomials(c: Couplings, lat: Lattice, method: str = "auto", seed: int = 0
                   ) -> XiRepresentation:
    """Polynomial form of Xi with monic ``c0(E)`` and ``deg b < deg c0``.

    Parameters
    ----------
    method : {"auto", "general", "fast"}
        ``fast`` uses the three-term recursion, available when at least two
        couplings vanish (other supports are moved to ``l2 = l3 = 0`` by a
        half-period shift); ``auto`` picks it when applicable.

    Raises
    ------
    InterpolationInconsistent
        If a control energy deviates from the fitted polynomials by more than 1e-7.
    """
    diagnostics: list = []
    if c.l == 0:
        return XiRepresentation(c, lat, None, np.array([1.0 + 0j]), [np.array([1.0 + 0j])], 0)
    two_zero = _shift_plan(c) is not None
    if method == "fast" and not two_zero:
        raise ValueError("fast path needs at least two vanishing couplings")
    if method in ("fast", "auto") and two_zero:
        poly = _fast_polynomials(c, lat)
        g = len(poly[0]) - 1
    else:
        poly, g = _general_path(c, lat, diagnostics, seed)
    rep = XiRepresentation(c, lat, None, np.array([p[-1] if len(p) else 0 for p in poly]), poly, g,
                           diagnostics)
    return rep


# ---------------------------------------------------------------------------
# Q(E)


@dataclass
class SpectralPolynomial:
    """Monic ``Q(E)`` as ascending coefficients; ``g = deg c0``."""

    coeffs: np.ndarray
    g: int
    diagnostics: list = field(default_factory=list)
    xi: Optional[XiRepresentation] = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, E: complex) -> complex:
        return complex(npp.polyval(complex(E), self.coeffs))

    def roots(self) -> list:
        r = poly_roots(self.coeffs)
        # polish against the assembled coefficients
        d = npp.polyder(self.coeffs)
        out = []
        for z in r:
            for _ in range(2):
                dz = npp.polyval(z, d)
                if dz == 0:
                    break
                z = z - npp.polyval(z, self.coeffs) / dz
            out.append(complex(z))
        return sorted(out, key=lambda v: (v.real, v.imag))


def q_at_x(xi: XiRepresentation, x: complex) -> np.ndarray:
    """Ascending E-coefficients of the right side of the Q identity at one x."""
    c = xi.couplings
    pd = point_data(x, c, xi.lattice)
    g2 = lattice_constants(xi.lattice).g2
    X0 = np.array([0j])
    X1 = np.array([0j])
    X2 = np.array([0j])
    for p, lab in zip(xi.poly, xi.basis):
        f, f1, f2, _ = basis_derivatives(lab, pd, g2)
        X0 = npp.polyadd(X0, f * p)
        X1 = npp.polyadd(X1, f1 * p)
        X2 = npp.polyadd(X2, f2 * p)
    Q = npp.polymul(npp.polymul(X0, X0), np.array([-pd.V, 1.0]))
    Q = npp.polyadd(Q, 0.5 * npp.polymul(X0, X2))
    Q = npp.polyadd(Q, -0.25 * npp.polymul(X1, X1))
    return Q


def q_polynomial(c: Couplings, lat: Lattice, xi: Optional[XiRepresentation] = None,
                 method: str = "auto") -> SpectralPolynomial:
    """Monic spectral polynomial of degree ``2g + 1``.

    The identity is expanded exactly in E at several generic x and averaged;
    the spread between points is reported as a diagnostic.
    """
    xi = xi or xi_polynomials(c, lat, method=method)
    g = xi.g
    pts = quarter_points(lat)
    vals = []
    for x in pts:
        q = q_at_x(xi, x)
        q = np.pad(q, (0, max(0, 2 * g + 2 - len(q))))[: 2 * g + 2]
        vals.append(q)
    vals = np.array(vals)
    Q = vals.mean(axis=0)
    diag = list(xi.diagnostics)
    spread = np.abs(vals - Q).max() / max(1.0, np.abs(Q).max())
    if abs(Q[-1] - 1) > 1e-8:
        diag.append(f"leading coefficient {Q[-1]:.3e} not 1")
    Q = Q / Q[-1]
    diag.append(f"x-spread {spread:.2e}")
    return SpectralPolynomial(Q, g, diag, xi)


# ---------------------------------------------------------------------------
# trigonometric Q


@dataclass
class TrigSpectralPolynomial:
    """Roots of the trigonometric Q in units of pi^2 (exact rationals)."""

    l0: int
    l1: int
    roots_pi2: list

    @property
    def C_T(self) -> Fraction:
        return Fraction(self.l0 * (self.l0 + 1) + self.l1 * (self.l1 + 1), 3)

    def roots(self) -> list:
        return [float(r) * PI * PI for r in self.roots_pi2]

    @property
    def coeffs_pi2(self) -> list:
        """Exact ascending coefficients of the monic polynomial in ``E / pi^2``."""
        out = [Fraction(1)]
        for r in self.roots_pi2:
            out = [Fraction(0)] + out
            for k in range(len(out) - 1):
                out[k] -= r * out[k + 1]
        return out

    @property
    def coeffs(self) -> np.ndarray:
        n = self.degree
        return np.array([float(a) * PI ** (2 * (n - k)) for k, a in enumerate(self.coeffs_pi2)])

    @property
    def degree(self) -> int:
        return len(self.roots_pi2)


def trig_q_polynomial(l0: int, l1: int) -> TrigSpectralPolynomial:
    """Monic trigonometric spectral polynomial (pi^2 convention on squares)."""
    CT = Fraction(l0 * (l0 + 1) + l1 * (l1 + 1), 3)
    roots = [-CT]
    if (l0 + l1) % 2 == 0:
        evens = range(1, (l0 + l1) // 2 + 1)
        odds = range(1, abs(l0 - l1) // 2 + 1)
    else:
        evens = range(1, (abs(l0 - l1) - 1) // 2 + 1)
        odds = range(1, (l0 + l1 + 1) // 2 + 1)
    for i in evens:
        roots += [Fraction((2 * i) ** 2) - CT] * 2
    for i in odds:
        roots += [Fraction((2 * i - 1) ** 2) - CT] * 2
    return TrigSpectralPolynomial(l0, l1, sorted(roots))


# ---------------------------------------------------------------------------
# closed-form eigenfunction


def eigenfunction_lambda(x: complex, E: complex, state) -> complex:
    """Bethe-form solution ``prod sigma(x+t_j) / (sigma^l0 prod sigma_i^l_i prod sigma(t_j))
    * exp(c x)`` for a converged state."""
    from .bethe import lambda_sigma

    return lambda_sigma(x, state)
