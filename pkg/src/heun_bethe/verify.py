"""Invariant suites.  Each suite measures quantities and compares them to tolerances.

Suites are plain functions returning a list of :class:`Check`; they are used by
``heun verify`` and by the acceptance tests.
"""

from __future__ import annotations

import cmath
import itertools
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bethe import (bethe_residual, continue_in_p, extract_bethe_roots, newton_refine,
                    ode_residual, sigma_energy, theta_energy_from, theta_exponent)
from .elliptic import (PI, Lattice, lattice_constants, lattice_distance, theta_eval,
                       theta_log_ratios, wp_and_prime, wp_family, wp_p_expansion)
from .heun_bridge import Couplings
from .invariant_space import hamiltonian_matrix, invariant_dimension, parity_basis
from .oracles import weierstrass_sigma_series
from .perturbation import compare_series_vs_continuation
from .spectral_curve import q_polynomial, trig_q_polynomial, xi_polynomials
from .trig_bethe import closed_form_case, sigma_recursion, trig_bethe_state, trig_sigma_coefficients
from .trig_spectrum import apply_trig_hamiltonian, inner_product, jacobi_mode, lambda_sym_ratio


@dataclass
class Check:
    """One measured quantity against a bound.

    ``sense`` is ``"<="`` (upper bound, the default) or ``">="`` (lower bound).
    """

    name: str
    value: float
    tol: float
    detail: dict = field(default_factory=dict)
    sense: str = "<="

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return bool(self.value <= self.tol if self.sense == "<=" else self.value >= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "bound": float(self.tol),
                "sense": self.sense, "passed": self.passed, **self.detail}


def _timed(name, t0, limit):
    return Check(name, time.perf_counter() - t0, limit, {"unit": "s"})


def match_multisets(a, b) -> float:
    """Max distance of the optimal pairing between two equal-size multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) != len(b):
        return float("inf")
    if len(a) == 0:
        return 0.0
    D = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(D)
    return float(D[r, c].max())


def min_gap(roots) -> float:
    r = np.asarray(roots, dtype=complex)
    if len(r) < 2:
        return float("inf")
    D = np.abs(r[:, None] - r[None, :])
    return float(D[np.triu_indices(len(r), 1)].min())


# ---------------------------------------------------------------------------
# elliptic identities


def _random_points(lat: Lattice, rng, n: int, margin: float = 0.05) -> list:
    out = []
    while len(out) < n:
        u, v = rng.uniform(0, 1, 2)
        z = 2 * lat.omega1 * (u + v * lat.tau)
        if lattice_distance(z, lat) >= margin and all(
                lattice_distance(z - lat.half_period(i), lat) >= margin for i in (1, 2, 3)):
            out.append(complex(z))
    return out


def suite_elliptic(seed: int = 0, npts: int = 100) -> list:
    """Elliptic identities at random points on two lattices (relative errors)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    lats = [Lattice.normalized(1j), Lattice.normalized(0.3 + 0.8j)]
    worst = {k: 0.0 for k in ("wp_prime_squared", "zeta_quasi_periodicity", "sigma_theta",
                              "wp_theta", "nome_expansion")}
    for lat in lats:
        lc = lattice_constants(lat)
        w1 = lat.omega1
        t1 = theta_eval(0, lat.tau, 1)
        for z in _random_points(lat, rng, npts):
            wp, wpp = wp_and_prime(z, lat)
            rhs = 4 * (wp - lc.e1) * (wp - lc.e2) * (wp - lc.e3)
            worst["wp_prime_squared"] = max(worst["wp_prime_squared"],
                                            abs(wpp ** 2 - rhs) / max(abs(wpp) ** 2, abs(rhs)))
            zt = wp_family(z, lat, "zeta")
            for j in (1, 3):
                d = wp_family(z + 2 * lat.half_period(j), lat, "zeta") - zt - 2 * lc.eta[j - 1]
                worst["zeta_quasi_periodicity"] = max(worst["zeta_quasi_periodicity"],
                                                      abs(d) / max(1.0, abs(zt)))
            # sigma from its power series in g2, g3 against the theta formula
            x = z / (2 * w1)
            s_ref = weierstrass_sigma_series(z, lc.g2, lc.g3)
            s_th = 2 * w1 * cmath.exp(2 * lc.eta1 * w1 * x * x) * theta_eval(x, lat.tau) / t1
            worst["sigma_theta"] = max(worst["sigma_theta"], abs(s_th - s_ref) / abs(s_ref))
            # wp = -(log sigma)'' from the same series
            wp_ref = _wp_from_sigma_series(z, lc.g2, lc.g3)
            L, r2, _ = theta_log_ratios(x, lat.tau)
            wp_th = L * L - r2 - 2 * lc.eta1
            worst["wp_theta"] = max(worst["wp_theta"], abs(wp_th - wp_ref) / max(1.0, abs(wp_ref)))
    # nome expansion at |p| = 1e-3
    for p in (1e-3, 1e-3 * cmath.exp(0.7j)):
        lat = Lattice.from_nome(p)
        for _ in range(npts):
            x = complex(rng.uniform(0.05, 0.95), rng.uniform(-0.15, 0.15))
            for shifted in (False, True):
                cs = wp_p_expansion(x, 10, shifted=shifted)
                approx = sum(ck * p ** k for k, ck in enumerate(cs))
                ref = wp_family(x + (0.5 if shifted else 0), lat)
                worst["nome_expansion"] = max(worst["nome_expansion"],
                                              abs(approx - ref) / max(1.0, abs(ref)))
    checks = [Check(k, v, 1e-10) for k, v in worst.items()]
    checks.append(_timed("runtime", t0, 5.0))
    return checks


def _wp_from_sigma_series(z, g2, g3):
    # wp = (s'^2 - s s'') / s^2 with derivatives from the termwise series
    from .oracles import _sigma_table

    z = complex(z)
    s = s1 = s2 = 0j
    kmax = 190
    zk = [1 + 0j]
    for k in range(1, kmax + 1):
        zk.append(zk[-1] * z / k)
    for (m, n), a in _sigma_table(90).items():
        k = 4 * m + 6 * n + 1
        w = a * (g2 / 2) ** m * (2 * g3) ** n
        s += w * zk[k]
        s1 += w * zk[k - 1]
        if k >= 2:
            s2 += w * zk[k - 2]
    return (s1 * s1 - s * s2) / (s * s)


# ---------------------------------------------------------------------------
# spectral polynomial


def suite_lame() -> list:
    t0 = time.perf_counter()
    worst = 0.0
    for tau in (1j, 0.3 + 0.8j):
        lat = Lattice.normalized(tau)
        e = lattice_constants(lat).e
        q = q_polynomial(Couplings(1, 0, 0, 0), lat)
        ref = np.polynomial.polynomial.polyfromroots([-v for v in e])
        worst = max(worst, float(np.abs(q.coeffs - ref).max()))
    return [Check("lame_coefficients", worst, 1e-9), _timed("runtime", t0, 2.0)]


def all_couplings(total: int) -> list:
    return [Couplings(*l) for l in itertools.product(range(total + 1), repeat=4) if sum(l) <= total]


def suite_conjecture(total: int = 5) -> list:
    """Degree and simple-root check of Q over all couplings with sum <= total at tau = i."""
    t0 = time.perf_counter()
    lat = Lattice.normalized(1j)
    bad_deg = []
    gap = float("inf")
    worst_c = None
    for c in all_couplings(total):
        q = q_polynomial(c, lat)
        if q.degree != invariant_dimension(c):
            bad_deg.append(list(c))
        g = min_gap(q.roots())
        if g < gap:
            gap, worst_c = g, list(c)
    return [Check("degree_mismatches", len(bad_deg), 0, {"cases": bad_deg}),
            Check("min_root_gap", gap, 1e-6, {"at": worst_c}, ">="),
            _timed("runtime", t0, 300.0)]


def suite_correspondence() -> list:
    lat = Lattice.normalized(1j)
    checks = []
    for l in ((2, 1, 0, 0), (1, 1, 1, 1), (2, 0, 1, 0)):
        c = Couplings(*l)
        roots = q_polynomial(c, lat).roots()
        ev = np.linalg.eigvals(hamiltonian_matrix(parity_basis(c), lat))
        checks.append(Check(f"roots_vs_eigenvalues_{''.join(map(str, l))}",
                            match_multisets(roots, ev), 1e-8))
    return checks


def richardson_trig_error(l0: int, l1: int, ps=(1e-4, 1e-5)) -> float:
    """Max coefficient error of the extrapolated Q against the trig Q.

    Both polynomials are written in ``E / pi^2`` and the error is relative to
    the largest trig coefficient.
    """
    pa, pb = ps
    c = Couplings(l0, l1)
    qa = q_polynomial(c, Lattice.from_nome(pa)).coeffs
    qb = q_polynomial(c, Lattice.from_nome(pb)).coeffs
    q0 = (pa * qb - pb * qa) / (pa - pb)
    tq = trig_q_polynomial(l0, l1).coeffs
    n = len(tq) - 1
    s = PI ** (2.0 * (np.arange(n + 1) - n))
    return float(np.abs((q0 - tq) * s).max() / np.abs(tq * s).max())


def suite_degeneration() -> list:
    return [Check(f"trig_limit_{l0}{l1}", richardson_trig_error(l0, l1), 1e-4)
            for l0, l1 in ((1, 0), (2, 0), (1, 1), (2, 1))]


# ---------------------------------------------------------------------------
# Bethe pipeline


def bethe_pipeline(c: Couplings, lat: Lattice, E: complex, xi=None, q=None) -> dict:
    """Extraction, refinement and the checks of one energy."""
    xi = xi or xi_polynomials(c, lat)
    q = q or q_polynomial(c, lat, xi=xi)
    s0 = extract_bethe_roots(xi, E, lat, q)
    s = newton_refine(s0)
    rows = bethe_residual(s, "theta")
    l = c.l
    Es = sigma_energy(s)
    Et = theta_energy_from(s.t, theta_exponent(s), c, lat)
    xs = [0.11 + 0.07j, 0.23 - 0.05j, 0.37 + 0.13j]
    return {"state": s, "initial_residual": s0.residual_theta,
            "bethe_rows": float(rows[:l].max()),
            "constraint_rows": float(rows[l:].max(initial=0.0)),
            "energy_agreement": abs(Es - Et) / max(1.0, abs(Es)),
            "energy_drift": abs(Es - E) / max(1.0, abs(E)),
            "ode": ode_residual(s, xs)}


def suite_bethe(seed: int = 0, n: int = 10) -> list:
    c = Couplings(2, 1, 0, 0)
    lat = Lattice.normalized(1j)
    xi = xi_polynomials(c, lat)
    q = q_polynomial(c, lat, xi=xi)
    rng = np.random.default_rng(seed)
    energies = []
    while len(energies) < n:
        E = complex(rng.uniform(-30, 120), rng.uniform(-30, 30))
        if abs(q(E)) > 0.1:
            energies.append(E)
    worst = {"bethe_rows": 0.0, "energy_agreement": 0.0, "ode": 0.0, "constraint_rows": 0.0}
    for E in energies:
        r = bethe_pipeline(c, lat, E, xi, q)
        for k in worst:
            worst[k] = max(worst[k], r[k])
    tol = {"bethe_rows": 1e-10, "energy_agreement": 1e-8, "ode": 1e-6, "constraint_rows": 1e-8}
    return [Check(k, v, tol[k]) for k, v in worst.items()]


# ---------------------------------------------------------------------------
# trigonometric limit


def closed_form_pairs(l0max: int = 6) -> list:
    out = []
    for l0 in range(l0max + 1):
        for l1 in sorted({0, 1, 2, l0, l0 - 1, l0 - 2}):
            if 0 <= l1 and closed_form_case(l0, l1) is not None:
                out.append((l0, l1))
    return out


def suite_trig(mmax: int = 3) -> list:
    mismatches = []
    worst = 0.0
    for l0, l1 in closed_form_pairs():
        for m in range(mmax + 1):
            cval = l0 + l1 + 2 + 2 * m
            if sigma_recursion(l0, l1, cval) != trig_sigma_coefficients(l0, l1, cval, "closed_form"):
                mismatches.append([l0, l1, m])
            worst = max(worst, trig_bethe_state(l0, l1, m).residual)
    return [Check("closed_form_mismatches", len(mismatches), 0, {"cases": mismatches}),
            Check("trig_bethe_residual", worst, 1e-10)]


def suite_jacobi(lmax: int = 3) -> list:
    eig_fail = 0
    ortho = 0.0
    for l0, l1 in itertools.product(range(lmax + 1), repeat=2):
        modes = []
        for m in range(11):
            mode = jacobi_mode(l0, l1, m)
            img = apply_trig_hamiltonian(list(mode.coeffs), l0, l1)
            if img != [mode.eigenvalue_pi2 * v for v in mode.coeffs]:
                eig_fail += 1
            modes.append(list(mode.coeffs))
        for a, b in itertools.combinations(range(7), 2):
            ip = inner_product(modes[a], modes[b], l0, l1)
            na = inner_product(modes[a], modes[a], l0, l1)
            nb = inner_product(modes[b], modes[b], l0, l1)
            ortho = max(ortho, abs(float(ip)) / float(na * nb) ** 0.5)
    spread = max(lambda_sym_ratio(*k)[1] for k in ((1, 0, 0), (2, 1, 1), (1, 1, 2)))
    return [Check("eigen_relation_failures", eig_fail, 0),
            Check("orthogonality", ortho, 1e-12),
            Check("lambda_sym_spread", spread, 1e-8)]


def suite_perturbation(cases=((1, 1, 0), (1, 1, 1), (2, 1, 0)), K: int = 3) -> list:
    grid = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
    checks = []
    for l0, l1, m in cases:
        t0 = time.perf_counter()
        path = continue_in_p(l0, l1, m, 0.01)
        ok = abs(path[-1].p - 0.01) < 1e-15
        r = compare_series_vs_continuation(l0, l1, m, K, grid)
        tag = f"{l0}{l1}{m}"
        checks.append(Check(f"continuation_reached_{tag}", 0.0 if ok else 1.0, 0.0))
        checks.append(Check(f"slope_{tag}", r["slope"], 3.5, {}, ">="))
        checks.append(_timed(f"runtime_{tag}", t0, 120.0))
    return checks


SUITES = {
    "elliptic": suite_elliptic,
    "lame": suite_lame,
    "conjecture": suite_conjecture,
    "correspondence": suite_correspondence,
    "degeneration": suite_degeneration,
    "bethe": suite_bethe,
    "trig": suite_trig,
    "jacobi": suite_jacobi,
    "perturbation": suite_perturbation,
}


def run_suite(name: str, seed: int = 0) -> dict:
    """Run one suite (or ``all``) and collect ``{suite: [Check, ...]}``."""
    names = list(SUITES) if name == "all" else [name]
    out = {}
    for n in names:
        fn = SUITES[n]
        out[n] = fn(seed=seed) if n in ("elliptic", "bethe") else fn()
    return out
