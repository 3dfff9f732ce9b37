"""Bethe roots for the elliptic operator: extraction from Xi, sigma and theta
forms of the Bethe equations, eigenvalue formulas, monodromy and continuation
in the nome."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npp

from .elliptic import (PI, Lattice, lattice_constants, theta_log_ratios,
                       wp_and_prime, wp_family, wp_inverse, wp_zeta)
from .errors import (DomainError, InconsistentState, MaxIterations, PathLost, SingularJacobian,
                     SpectralDegenerate)
from .heun_bridge import Couplings
from .polyroots import poly_roots
from .spectral_curve import SpectralPolynomial, XiRepresentation, q_polynomial, xi_polynomials


@dataclass(frozen=True)
class BetheState:
    """Auxiliary roots ``t``, sigma-form exponent ``c`` and energy ``E``."""

    couplings: Couplings
    t: tuple
    c: complex
    E: complex
    lattice: Lattice
    residual_sigma: float = float("nan")
    residual_theta: float = float("nan")
    monodromy: Optional[tuple] = None

    @property
    def l(self) -> int:
        return self.couplings.l


# ---------------------------------------------------------------------------
# extraction


def numerator_polynomial(xi: XiRepresentation) -> np.ndarray:
    """Ascending z-coefficients of ``Xi * prod_i (z - e_i)^l_i`` with ``z = wp(x)``."""
    c = xi.couplings
    e = lattice_constants(xi.lattice).e
    A = [(e[i] - e[j]) * (e[i] - e[k]) for i, j, k in ((0, 1, 2), (1, 0, 2), (2, 0, 1))]
    lin = [np.array([-ei, 1.0 + 0j]) for ei in e]

    def pw(p, n):
        out = np.array([1.0 + 0j])
        for _ in range(n):
            out = npp.polymul(out, p)
        return out

    den = [pw(lin[i], c[i + 1]) for i in range(3)]
    N = np.array([0j])
    for coef, (i, n) in zip(xi.coeffs, xi.basis):
        if i is None or i == 0:
            term = np.array([1.0 + 0j]) if i is None else pw(np.array([0, 1.0 + 0j]), n)
            for d in den:
                term = npp.polymul(term, d)
        else:
            k = i - 1
            # (e_k (z - e_k) + A_k)^n (z - e_k)^(l_k - n) prod_(other) (z - e_m)^l_m
            term = pw(np.array([A[k] - e[k] * e[k], e[k]]), n)
            term = npp.polymul(term, pw(lin[k], c[i] - n))
            for m in range(3):
                if m != k:
                    term = npp.polymul(term, den[m])
        N = npp.polyadd(N, coef * term)
    return N


def _q_scale(q: SpectralPolynomial, E: complex) -> float:
    return float(sum(abs(a) * abs(E) ** k for k, a in enumerate(q.coeffs)))


def extract_bethe_roots(xi: XiRepresentation, E: complex, lat: Lattice,
                        q: Optional[SpectralPolynomial] = None) -> BetheState:
    """Bethe roots ``t_j`` from the zeros of Xi in ``z = wp(x)``.

    The sign of each ``t_j`` is fixed by ``(dXi/dz)(a_j) wp'(t_j) = 2 C(E)`` with
    ``C`` the principal square root of ``-Q(E)``.

    Raises
    ------
    SpectralDegenerate
        If ``|Q(E)|`` is below ``1e-8`` of its term scale.
    """
    c = xi.couplings
    E = complex(E)
    q = q or q_polynomial(c, lat, xi=xi)
    if xi.poly is not None:
        xi = xi.at_energy(E)
    QE = q(E)
    if abs(QE) <= 1e-8 * max(_q_scale(q, E), 1e-300):
        raise SpectralDegenerate("Q(E) vanishes; the Bethe form breaks down", E=E, Q=QE)
    C = cmath.sqrt(-QE)
    if c.l == 0:
        st = BetheState(c, (), 0j, E, lat)
        return _with_residuals(st)
    e = lattice_constants(lat).e
    N = numerator_polynomial(xi)
    N = N[: c.l + 1]
    dN = npp.polyder(N)
    ts = []
    for a in poly_roots(N):
        t = wp_inverse(a, lat)
        _, wpp = wp_and_prime(t, lat)
        den = 1.0 + 0j
        for i in range(3):
            den *= (a - e[i]) ** c[i + 1]
        dxi = npp.polyval(a, dN) / den
        if abs(dxi * wpp - 2 * C) > abs(dxi * wpp + 2 * C):
            t = -t
        ts.append(complex(t))
    cs = -sum(wp_zeta(t, lat)[2] for t in ts)
    if c.l0 == 0:
        # Xi stays finite at x = 0; the constant part of 2C/Xi enters the exponent
        cs -= C / N[c.l]
    st = BetheState(c, tuple(ts), complex(cs), E, lat)
    return _with_residuals(st)


# ---------------------------------------------------------------------------
# sigma form


def _zeta(z, lat):
    return wp_family(z, lat, "zeta")


def sigma_rows(s: BetheState) -> np.ndarray:
    """The ``l`` Bethe equations plus the active constraint rows (complex)."""
    lat = s.lattice
    c = s.couplings
    lc = lattice_constants(lat)
    t = s.t
    l = len(t)
    om = [lat.half_period(i) for i in range(4)]
    rows = []
    for j in range(l):
        r = s.c
        for k in range(l):
            if k != j:
                r += _zeta(t[k] - t[j], lat)
        r -= c.l0 * _zeta(-t[j], lat)
        for i in (1, 2, 3):
            if c[i]:
                r -= c[i] * (_zeta(om[i] - t[j], lat) - lc.eta[i - 1])
        rows.append(r)
    if c.l0:
        rows.append(s.c + sum(_zeta(tj, lat) for tj in t))
    for i in (1, 2, 3):
        if c[i]:
            rows.append(s.c + l * lc.eta[i - 1] + sum(_zeta(tj - om[i], lat) for tj in t))
    return np.array(rows, dtype=complex)


def sigma_energy(s: BetheState) -> complex:
    lat = s.lattice
    lc = lattice_constants(lat)
    l0, l1, l2, l3 = s.couplings
    t = s.t
    l = len(t)
    e1, e2, e3 = lc.e
    E = -s.c ** 2 + (l0 * l1 + l2 * l3) * e1 + (l0 * l2 + l1 * l3) * e2 + (l0 * l3 + l1 * l2) * e3
    for i in (1, 2, 3):
        E -= s.couplings[i] * lc.eta[i - 1] * (2 * s.c + l * lc.eta[i - 1])
    for tj in t:
        for i in range(4):
            if s.couplings[i]:
                wp, _, z = wp_zeta(tj - lat.half_period(i), lat)
                E -= s.couplings[i] * (wp - z * z)
    for j in range(l):
        for k in range(j + 1, l):
            wp, _, z = wp_zeta(t[j] - t[k], lat)
            E += wp - z * z
    return complex(E)


# ---------------------------------------------------------------------------
# theta form (omega1 = 1/2)


def _require_normalized(lat: Lattice):
    if abs(lat.omega1 - 0.5) > 1e-15:
        raise DomainError("theta form requires omega1 = 1/2", omega1=lat.omega1)


def theta_shifts(lat: Lattice) -> tuple:
    """Shifts ``0, 1/2, (1+tau)/2, tau/2`` used by the theta-form denominators."""
    tau = lat.tau
    return (0j, 0.5 + 0j, (1 + tau) / 2, tau / 2)


def theta_exponent(s: BetheState) -> complex:
    """Exponent ``c`` of the theta form, ``exp(pi i c x)`` (converted from sigma form)."""
    lat = s.lattice
    _require_normalized(lat)
    lc = lattice_constants(lat)
    sh = theta_shifts(lat)
    k = s.c + 2 * lc.eta1 * sum(s.t)
    for i in (1, 2, 3):
        li = s.couplings[i]
        if not li:
            continue
        # sigma(x + omega_2) and sigma(x + (1+tau)/2) differ by exp(2 eta_2 x)
        kap = 2 * lc.eta2 if i == 2 else 0
        k -= li * (2 * lc.eta1 * sh[i] - lc.eta[i - 1] + kap)
    return k / (1j * PI)


def sigma_exponent_from_theta(ct: complex, t, c: Couplings, lat: Lattice) -> complex:
    """Inverse of :func:`theta_exponent`."""
    lc = lattice_constants(lat)
    sh = theta_shifts(lat)
    k = 1j * PI * ct - 2 * lc.eta1 * sum(t)
    for i in (1, 2, 3):
        if c[i]:
            kap = 2 * lc.eta2 if i == 2 else 0
            k += c[i] * (2 * lc.eta1 * sh[i] - lc.eta[i - 1] + kap)
    return k


def _constraint_shift(c: Couplings, i: int) -> float:
    return (c.l2 + c.l3) if i in (0, 1) else -(c.l0 + c.l1)


def theta_rows(t, ct: complex, c: Couplings, lat: Lattice) -> np.ndarray:
    """Theta-form Bethe equations plus active constraint rows (complex)."""
    sh = theta_shifts(lat)
    tau = lat.tau
    l = len(t)
    rows = []
    for j in range(l):
        r = 1j * PI * ct
        for k in range(l):
            if k != j:
                r += theta_log_ratios(t[k] - t[j], tau)[0]
        for i in range(4):
            if c[i]:
                r += c[i] * theta_log_ratios(t[j] - sh[i], tau)[0]
        rows.append(r)
    for i in range(4):
        if c[i]:
            r = 1j * PI * ct + 1j * PI * _constraint_shift(c, i)
            r += sum(theta_log_ratios(tj - sh[i], tau)[0] for tj in t)
            rows.append(r)
    return np.array(rows, dtype=complex)


def theta_energy_from(t, ct: complex, c: Couplings, lat: Lattice) -> complex:
    lc = lattice_constants(lat)
    tau = lat.tau
    sh = theta_shifts(lat)
    l0, l1, l2, l3 = c
    l = len(t)
    e1, e2, e3 = lc.e
    E = PI ** 2 * (ct ** 2 + (l0 + l1) * (l2 + l3)) + l * (l + 1) * lc.eta1
    E += (l0 * l1 + l2 * l3) * e1 + (l0 * l2 + l1 * l3) * e2 + (l0 * l3 + l1 * l2) * e3
    for j in range(l):
        for k in range(j + 1, l):
            E -= theta_log_ratios(t[j] - t[k], tau)[1]
        for i in range(4):
            if c[i]:
                E += c[i] * theta_log_ratios(t[j] - sh[i], tau)[1]
    return complex(E)


# ---------------------------------------------------------------------------
# public residual / energy API


def bethe_residual(s: BetheState, form: str = "sigma") -> np.ndarray:
    """Absolute residuals of the Bethe equations (individual rows first, then constraints)."""
    if form == "sigma":
        return np.abs(sigma_rows(s))
    if form == "theta":
        _require_normalized(s.lattice)
        return np.abs(theta_rows(s.t, theta_exponent(s), s.couplings, s.lattice))
    raise DomainError("form must be sigma or theta", form=form)


def _with_residuals(s: BetheState) -> BetheState:
    rs = bethe_residual(s, "sigma")
    rt = float("nan")
    if abs(s.lattice.omega1 - 0.5) <= 1e-15:
        rt = float(np.max(bethe_residual(s, "theta"), initial=0.0))
    return replace(s, residual_sigma=float(np.max(rs, initial=0.0)), residual_theta=rt)


def bethe_energy(s: BetheState, form: str = "sigma", tol: float = 1e-8) -> complex:
    """Eigenvalue from the sigma or theta formula; both are checked against each other.

    Raises
    ------
    InconsistentState
        If the two formulas disagree by more than ``tol`` relative.
    """
    Es = sigma_energy(s)
    if abs(s.lattice.omega1 - 0.5) > 1e-15:
        if form == "theta":
            _require_normalized(s.lattice)
        return Es
    Et = theta_energy_from(s.t, theta_exponent(s), s.couplings, s.lattice)
    if abs(Es - Et) > tol * max(1.0, abs(Es)):
        raise InconsistentState("sigma and theta energies disagree", sigma=Es, theta=Et)
    return Es if form == "sigma" else Et


# ---------------------------------------------------------------------------
# Newton refinement (theta form)


def _first_active(c: Couplings) -> int:
    return next(i for i in range(4) if c[i])


def _eliminated_ct(t, c: Couplings, lat: Lattice) -> complex:
    i = _first_active(c)
    sh = theta_shifts(lat)
    tot = sum(theta_log_ratios(tj - sh[i], lat.tau)[0] for tj in t)
    return -(tot / (1j * PI)) - _constraint_shift(c, i)


def _newton_system(t, c: Couplings, lat: Lattice, E0: complex):
    """Residual (l rows plus energy pin) and its Jacobian in ``t``."""
    tau = lat.tau
    sh = theta_shifts(lat)
    l = len(t)
    i0 = _first_active(c)
    ct = _eliminated_ct(t, c, lat)

    def lr(u):
        a, b, _ = theta_log_ratios(u, tau)
        return a, b

    # d(pi i ct)/dt_m = -dr1(t_m - s_i0)
    dct = np.zeros(l, dtype=complex)
    for m in range(l):
        a, b = lr(t[m] - sh[i0])
        dct[m] = -(b - a * a)
    F = np.zeros(l + 1, dtype=complex)
    J = np.zeros((l + 1, l), dtype=complex)
    for j in range(l):
        F[j] = 1j * PI * ct
        J[j] += dct
        for k in range(l):
            if k == j:
                continue
            a, b = lr(t[k] - t[j])
            F[j] += a
            d = b - a * a
            J[j, k] += d
            J[j, j] -= d
        for i in range(4):
            if c[i]:
                a, b = lr(t[j] - sh[i])
                F[j] += c[i] * a
                J[j, j] += c[i] * (b - a * a)
    # energy pin
    F[l] = theta_energy_from(t, ct, c, lat) - E0
    dE = 2 * PI ** 2 * ct * dct / (1j * PI)
    for j in range(l):
        for k in range(j + 1, l):
            _, b, r3 = theta_log_ratios(t[j] - t[k], tau)
            a = theta_log_ratios(t[j] - t[k], tau)[0]
            d = r3 - b * a
            dE[j] -= d
            dE[k] += d
        for i in range(4):
            if c[i]:
                a, b, r3 = theta_log_ratios(t[j] - sh[i], tau)
                dE[j] += c[i] * (r3 - b * a)
    J[l] = dE
    scale = max(1.0, abs(E0))
    F[l] /= scale
    J[l] /= scale
    return F, J


def newton_jacobian(s: BetheState) -> np.ndarray:
    """Analytic Jacobian of the refinement system at ``s`` (for checks)."""
    return _newton_system(list(s.t), s.couplings, s.lattice, s.E)[1]


def newton_residual(s: BetheState) -> np.ndarray:
    return _newton_system(list(s.t), s.couplings, s.lattice, s.E)[0]


def newton_refine(s: BetheState, form: str = "theta", tol: float = 1e-12,
                  max_iter: int = 50) -> BetheState:
    """Refine ``t`` by damped Gauss-Newton on the theta rows with an energy pin.

    The theta exponent is eliminated through the first active constraint row;
    the pin fixes the energy to ``s.E`` so the system has isolated solutions.

    Raises
    ------
    MaxIterations
        If ``tol`` is not reached within ``max_iter`` steps.
    SingularJacobian
        If the Jacobian loses rank.
    """
    if form not in ("theta", "sigma"):
        raise DomainError("form must be sigma or theta", form=form)
    _require_normalized(s.lattice)
    c, lat = s.couplings, s.lattice
    if c.l == 0:
        return s
    t = np.array(s.t, dtype=complex)
    F, J = _newton_system(list(t), c, lat, s.E)
    norm = np.max(np.abs(F))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise MaxIterations("Newton did not converge", residual=float(norm))
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-14 * sv[0]:
            raise SingularJacobian("Jacobian is singular", cond=float(sv[0] / max(sv[-1], 1e-300)))
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        lam = 1.0
        while True:
            tn = t + lam * step
            Fn, Jn = _newton_system(list(tn), c, lat, s.E)
            nn = np.max(np.abs(Fn))
            if nn < norm or lam < 1e-4:
                break
            lam /= 2
        t, F, J, norm = tn, Fn, Jn, nn
        it += 1
    ct = _eliminated_ct(list(t), c, lat)
    cs = sigma_exponent_from_theta(ct, list(t), c, lat)
    return _with_residuals(replace(s, t=tuple(complex(v) for v in t), c=complex(cs)))


# ---------------------------------------------------------------------------
# eigenfunction and monodromy


def lambda_sigma(x: complex, s: BetheState) -> complex:
    """Bethe vector ``prod sigma(x+t_j) / (sigma^l0 prod sigma_i^l_i prod sigma(t_j)) e^(cx)``.

    Raises
    ------
    PoleAt
        If ``x`` is on the half-period lattice.
    """
    lat = s.lattice
    c = s.couplings
    x = complex(x)
    val = cmath.exp(s.c * x)
    for tj in s.t:
        val *= wp_family(x + tj, lat, "sigma") / wp_family(tj, lat, "sigma")
    if c.l0:
        val /= wp_family(x, lat, "sigma") ** c.l0
    for i in (1, 2, 3):
        if c[i]:
            val /= wp_family(x, lat, f"cosigma{i}") ** c[i]
    return complex(val)


def lambda_theta(x: complex, s: BetheState) -> complex:
    """Theta-form Bethe vector with exponent ``exp(pi i c x)``."""
    lat = s.lattice
    _require_normalized(lat)
    from .elliptic import theta_eval

    ct = theta_exponent(s)
    sh = theta_shifts(lat)
    val = cmath.exp(1j * PI * ct * x)
    for tj in s.t:
        val *= theta_eval(x + tj, lat.tau)
    for i in range(4):
        if s.couplings[i]:
            val /= theta_eval(x + sh[i], lat.tau) ** s.couplings[i]
    return complex(val)


def ode_residual(s: BetheState, xs, h: float = 2e-3) -> float:
    """Max relative residual of ``-f'' + V f - E f`` by a five-point stencil."""
    lat = s.lattice
    L = s.couplings.strengths()
    worst = 0.0
    for x in xs:
        f = [lambda_sigma(x + k * h, s) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        V = sum(L[i] * wp_family(x + lat.half_period(i), lat, "wp") for i in range(4) if L[i])
        res = -d2 + (V - s.E) * f[2]
        scale = abs(d2) + abs(V * f[2]) + abs(s.E * f[2])
        worst = max(worst, abs(res) / scale)
    return worst


def monodromy_multipliers(s: BetheState, check_x: complex = 0.137 + 0.071j) -> tuple:
    """``(m1, m3)`` with ``Lambda(x + 2 omega_i) = m_i Lambda(x)``.

    Computed from the quasi-periodicity of sigma and checked against the
    direct ratio at one sample point.
    """
    lat = s.lattice
    lc = lattice_constants(lat)
    c = s.couplings
    om = [lat.half_period(i) for i in range(4)]
    eta = (0j,) + lc.eta
    out = []
    for i in (1, 3):
        k = 2 * eta[i] * sum(s.t) + 2 * s.c * om[i]
        for m in (1, 2, 3):
            k -= c[m] * (2 * eta[i] * om[m] - 2 * eta[m] * om[i])
        mi = cmath.exp(k)
        direct = lambda_sigma(check_x + 2 * om[i], s) / lambda_sigma(check_x, s)
        if abs(direct - mi) > 1e-8 * max(1.0, abs(mi)):
            raise InconsistentState("monodromy formula disagrees with direct ratio",
                                    formula=mi, direct=direct)
        out.append(complex(mi))
    return tuple(out)


def reflected(s: BetheState) -> BetheState:
    """State of ``Lambda(-x)``: roots and exponent negated (up to normalization)."""
    return replace(s, t=tuple(-v for v in s.t), c=-s.c)


# ---------------------------------------------------------------------------
# continuation in the nome


@dataclass(frozen=True)
class PathPoint:
    p: float
    state: Optional[BetheState]
    E: complex


def h_function(E: complex, lat: Lattice, c: Couplings, xi=None, q=None) -> tuple:
    """``h(E, p)``; equals ``pi^2 c^2`` along a solution branch with fixed ``c``."""
    xi = xi or xi_polynomials(c, lat)
    q = q or q_polynomial(c, lat, xi=xi)
    s = extract_bethe_roots(xi, E, lat, q)
    lc = lattice_constants(lat)
    tau = lat.tau
    l0, l1 = c.l0, c.l1
    t = s.t
    h = E - (l0 + l1) * (l0 + l1 + 1) * lc.eta1 - l0 * l1 * lc.e1
    for j in range(len(t)):
        for k in range(j + 1, len(t)):
            h += theta_log_ratios(t[j] - t[k], tau)[1]
        h -= l0 * theta_log_ratios(t[j], tau)[1]
        h -= l1 * theta_log_ratios(t[j] - 0.5, tau)[1]
    return complex(h), s


def solve_energy_at(p: float, l0: int, l1: int, m: int, E_guess: complex,
                    tol: float = 1e-13, max_iter: int = 40) -> BetheState:
    """Secant solve of ``h(E, p) = pi^2 c_m^2`` at fixed nome."""
    c = Couplings(l0, l1)
    lat = Lattice.from_nome(p)
    xi = xi_polynomials(c, lat)
    q = q_polynomial(c, lat, xi=xi)
    cm = l0 + l1 + 2 + 2 * m
    target = PI ** 2 * cm * cm
    E0 = complex(E_guess)
    f0, s0 = h_function(E0, lat, c, xi, q)
    f0 -= target
    E1 = E0 - f0  # dh/dE is close to one near p = 0
    for _ in range(max_iter):
        f1, s1 = h_function(E1, lat, c, xi, q)
        f1 -= target
        if abs(f1) <= tol * target or abs(E1 - E0) <= tol * abs(E1):
            return replace(s1, E=E1)
        if f1 == f0:
            break
        E0, E1, f0 = E1, E1 - f1 * (E1 - E0) / (f1 - f0), f1
        if not np.isfinite(E1):
            break
    raise PathLost("energy solve diverged", p=p)


def continue_in_p(l0: int, l1: int, m: int, p_target: float, steps: int = 12,
                  p_min: float = 1e-8) -> list:
    """Follow the solution with fixed exponent ``c_m`` from the trigonometric point.

    Returns a list of :class:`PathPoint`; the first entry is ``p = 0`` with the
    trigonometric energy ``pi^2 c_m^2 - C_T``.

    Raises
    ------
    PathLost
        If the energy solve fails after three step refinements or the path is
        not smooth.
    """
    if p_target < 0 or p_target > 0.05:
        raise DomainError("p_target must lie in [0, 0.05]", p_target=p_target)
    cm = l0 + l1 + 2 + 2 * m
    CT = (l0 * (l0 + 1) + l1 * (l1 + 1)) * PI ** 2 / 3
    E_trig = PI ** 2 * cm * cm - CT
    path = [PathPoint(0.0, None, complex(E_trig))]
    if p_target == 0:
        return path
    p_lo = min(p_min, p_target)
    for refine in range(4):
        n = steps * 2 ** refine
        grid = [p_lo * (p_target / p_lo) ** (k / max(n, 1)) for k in range(n + 1)]
        pts = [path[0]]
        try:
            for p in grid:
                if len(pts) >= 3 and pts[-1].p > 0 and pts[-2].p > 0:
                    # linear extrapolation in p
                    a, b = pts[-2], pts[-1]
                    guess = b.E + (b.E - a.E) * (p - b.p) / (b.p - a.p)
                else:
                    guess = pts[-1].E
                st = solve_energy_at(p, l0, l1, m, guess)
                pts.append(PathPoint(p, st, st.E))
            _check_smooth(pts)
            return pts
        except (PathLost, SpectralDegenerate) as exc:
            last = exc
            continue
    raise PathLost("continuation failed after refinements", reason=str(last))


def _check_smooth(pts):
    Es = [pt.E for pt in pts[1:]]
    ps = [pt.p for pt in pts[1:]]
    # E(p) holomorphic: slopes between neighbours stay bounded
    for k in range(1, len(Es)):
        slope = abs(Es[k] - Es[k - 1]) / (ps[k] - ps[k - 1])
        if not math.isfinite(slope) or slope > 1e6:
            raise PathLost("non-smooth energy path", p=ps[k])
