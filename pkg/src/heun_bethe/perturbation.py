"""Rayleigh-Schroedinger expansion of the eigenvalues in the nome ``p``.

With ``l2 = l3 = 0`` the elliptic operator (``omega1 = 1/2``) expands as
``H = H_T - C_T + sum_k V_k p^k``.  Everything is a rational multiple of
``pi^2`` in the Jacobi basis, so the recursion runs in exact arithmetic and
is converted to floats at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .elliptic import PI, divisors
from .errors import CutoffTooSmall, DomainError
from .trig_spectrum import inner_product, jacobi_mode


@dataclass(frozen=True)
class FourierPotential:
    """``V_k = pi^2 sum_n [a_kn (cos 2 n pi x - 1) + b_kn ((-1)^n cos 2 n pi x - 1)]``.

    ``terms[k]`` maps a harmonic ``n`` to the pair ``(a_kn, b_kn)`` (already
    multiplied by ``l0(l0+1)`` and ``l1(l1+1)``).
    """

    K: int
    l0: int
    l1: int
    terms: dict

    def harmonics(self, k: int) -> list:
        return sorted(self.terms.get(k, {}))

    def cosine_coefficients(self, k: int) -> dict:
        """``{n: coefficient}`` of ``cos 2 n pi x`` (``n = 0`` is the constant), units pi^2."""
        out = {}
        for n, (a, b) in self.terms.get(k, {}).items():
            out[n] = out.get(n, 0) + a + b * (-1) ** n
            out[0] = out.get(0, 0) - a - b
        return {n: v for n, v in out.items() if v != 0}

    def __call__(self, k: int, x: float) -> float:
        return PI ** 2 * sum(float(v) * math.cos(2 * n * PI * x)
                             for n, v in self.cosine_coefficients(k).items())


def potential_fourier(l0: int, l1: int, K: int) -> FourierPotential:
    """Nome expansion of ``l0(l0+1) wp(x) + l1(l1+1) wp(x + 1/2)`` to order ``K``."""
    if K > 50 or K < 0:
        raise DomainError("K must lie in 0..50", K=K)
    L0, L1 = l0 * (l0 + 1), l1 * (l1 + 1)
    terms = {}
    for k in range(1, K + 1):
        if L0 == 0 and L1 == 0:
            terms[k] = {}
            continue
        terms[k] = {n: (Fraction(-8 * n * L0), Fraction(-8 * n * L1)) for n in divisors(k)}
    return FourierPotential(K, l0, l1, terms)


def _chebyshev_in_w(n: int) -> list:
    """``cos 2 n pi x = T_n(1 - 2w)`` as an ascending w-polynomial."""
    # T_0 = 1, T_1 = u, T_(k+1) = 2u T_k - T_(k-1) with u = 1 - 2w
    u = [Fraction(1), Fraction(-2)]
    T = [[Fraction(1)], u]

    def mul(p, q):
        out = [Fraction(0)] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] += a * b
        return out

    def sub(p, q):
        n_ = max(len(p), len(q))
        return [(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n_)]

    for _ in range(1, n):
        T.append(sub([2 * c for c in mul(u, T[-1])], T[-2]))
    return T[n]


class JacobiBasis:
    """Exact change of basis between w-monomials and ``psi_0..psi_M``."""

    def __init__(self, l0: int, l1: int, M: int):
        self.l0, self.l1, self.M = l0, l1, M
        self.modes = [list(jacobi_mode(l0, l1, m).coeffs) for m in range(M + 1)]
        self.norms = [inner_product(p, p, l0, l1) for p in self.modes]
        self.eig = [Fraction((2 * m + l0 + l1 + 2) ** 2) for m in range(M + 1)]

    def expand(self, f: list) -> list:
        """Coefficients of ``f`` in the psi basis by back substitution (psi_m has degree m)."""
        f = [Fraction(v) for v in f]
        while len(f) > 1 and f[-1] == 0:
            f.pop()
        if len(f) - 1 > self.M:
            raise CutoffTooSmall("w-degree exceeds the cutoff", degree=len(f) - 1, M=self.M)
        out = [Fraction(0)] * (self.M + 1)
        for d in range(len(f) - 1, -1, -1):
            if f[d] == 0:
                continue
            lead = self.modes[d][d]
            coef = f[d] / lead
            out[d] = coef
            for k, v in enumerate(self.modes[d]):
                f[k] -= coef * v
        return out


def _polymul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def potential_matrix_elements(V: FourierPotential, M: int, orders=None) -> dict:
    """Band tables ``W[k][a][b]``: coefficient of ``v_a`` in ``V_k v_b`` (units pi^2).

    Columns ``b`` run over ``0..M - h_k`` where ``h_k`` is the top harmonic of
    ``V_k``, so no image leaks past the cutoff.

    Raises
    ------
    CutoffTooSmall
        If ``M`` is smaller than a harmonic in use.
    """
    orders = range(1, V.K + 1) if orders is None else orders
    basis = JacobiBasis(V.l0, V.l1, M)
    out = {}
    for k in orders:
        coeffs = V.cosine_coefficients(k)
        hk = max(coeffs) if coeffs else 0
        if hk > M:
            raise CutoffTooSmall("harmonic exceeds cutoff", k=k, M=M)
        fw = [Fraction(0)] * (hk + 1)
        for n, v in coeffs.items():
            for i, cf in enumerate(_chebyshev_in_w(n)):
                fw[i] += v * cf
        W = [[Fraction(0)] * (M + 1) for _ in range(M + 1)]
        for b in range(M + 1 - hk):
            img = basis.expand(_polymul(basis.modes[b], fw))
            for a, val in enumerate(img):
                W[a][b] = val
        out[k] = W
    return out


@dataclass
class PerturbSeries:
    """Energy coefficients and eigenvector table of the nome expansion.

    ``energy[k]`` is the order-k coefficient of the eigenvalue (``energy[0]``
    is the unperturbed value); ``vectors[k][a]`` the coefficient of ``v_a`` in
    the order-k eigenvector correction.  Exact values are kept in units of pi^2.
    """

    l0: int
    l1: int
    m: int
    K: int
    M: int
    energy_pi2: list
    vectors: list
    norms: list = field(repr=False, default_factory=list)
    tables: dict = field(repr=False, default_factory=dict)

    @property
    def energy(self) -> list:
        return [PI ** 2 * float(e) for e in self.energy_pi2]

    def evaluate(self, p: float, order=None) -> float:
        order = self.K if order is None else order
        return float(sum(PI ** 2 * float(self.energy_pi2[k]) * p ** k for k in range(order + 1)))

    def order_residual(self, k: int) -> float:
        """Max component of the order-k residual of the eigen-equation (units pi^2)."""
        M = self.M
        CT = Fraction(self.l0 * (self.l0 + 1) + self.l1 * (self.l1 + 1), 3)
        eig = [Fraction((2 * a + self.l0 + self.l1 + 2) ** 2) - CT for a in range(M + 1)]
        res = []
        for a in range(M + 1):
            r = eig[a] * self.vectors[k][a]
            for j in range(1, k + 1):
                W = self.tables[j]
                r += sum(W[a][b] * self.vectors[k - j][b] for b in range(M + 1))
            for j in range(0, k + 1):
                r -= self.energy_pi2[j] * self.vectors[k - j][a]
            res.append(abs(float(r)))
        return max(res)

    def norm_defect(self, k: int) -> float:
        """Order-k coefficient of ``<v(p), v(p)> - <v_m, v_m>`` relative to ``<v_m, v_m>``."""
        tot = Fraction(0)
        for i in range(k + 1):
            for a in range(self.M + 1):
                tot += self.norms[a] * self.vectors[i][a] * self.vectors[k - i][a]
        if k == 0:
            tot -= self.norms[self.m]
        return abs(float(tot / self.norms[self.m]))


def default_cutoff(m: int, K: int) -> int:
    return m + K * K + 2


def rayleigh_schrodinger(l0: int, l1: int, m: int, K: int, M=None) -> PerturbSeries:
    """Order-by-order solution of the perturbed eigenproblem with fixed norm.

    Raises
    ------
    CutoffTooSmall
        If ``M < m + K`` (the band of the order-K correction).
    """
    M = default_cutoff(m, K) if M is None else M
    if M < m + K:
        raise CutoffTooSmall("cutoff below the band of the correction", M=M, needed=m + K)
    V = potential_fourier(l0, l1, K)
    W = potential_matrix_elements(V, M)
    basis = JacobiBasis(l0, l1, M)
    CT = Fraction(l0 * (l0 + 1) + l1 * (l1 + 1), 3)
    eig = [e - CT for e in basis.eig]
    N = basis.norms
    u = [[Fraction(0)] * (M + 1) for _ in range(K + 1)]
    u[0][m] = Fraction(1)
    E = [eig[m]]
    for k in range(1, K + 1):
        rhs = [Fraction(0)] * (M + 1)
        for j in range(1, k + 1):
            prev = u[k - j]
            Wj = W[j]
            for a in range(M + 1):
                rhs[a] -= sum(Wj[a][b] * prev[b] for b in range(M + 1) if prev[b])
        for j in range(1, k):
            for a in range(M + 1):
                rhs[a] += E[j] * u[k - j][a]
        # row m fixes the energy, the other rows the off-diagonal components
        Ek = -rhs[m]
        E.append(Ek)
        for a in range(M + 1):
            if a != m:
                u[k][a] = (rhs[a] + Ek * u[0][a]) / (eig[a] - eig[m])
        s = Fraction(0)
        for i in range(1, k):
            s += sum(N[a] * u[i][a] * u[k - i][a] for a in range(M + 1))
        u[k][m] = -s / (2 * N[m])
    return PerturbSeries(l0, l1, m, K, M, E, u, N, W)


def compare_series_vs_continuation(l0: int, l1: int, m: int, K: int, p_grid) -> dict:
    """Errors ``|E_series(p) - E_m(p)|`` and their log-log slope.

    ``E_m(p)`` comes from the Bethe continuation at each grid point.
    """
    from .bethe import continue_in_p, solve_energy_at

    p_grid = sorted(float(p) for p in p_grid)
    if not p_grid or p_grid[0] <= 0 or p_grid[-1] > 0.05:
        raise DomainError("p_grid must lie in (0, 0.05]", p_grid=p_grid)
    ser = rayleigh_schrodinger(l0, l1, m, K)
    path = continue_in_p(l0, l1, m, p_grid[0])
    E_prev = path[-1].E
    rows = []
    for p in p_grid:
        st = solve_energy_at(p, l0, l1, m, E_prev)
        E_prev = st.E
        Es = ser.evaluate(p, K)
        rows.append({"p": p, "E_continuation": complex(st.E), "E_series": Es,
                     "error": abs(Es - st.E)})
    slope = fit_slope([r["p"] for r in rows], [r["error"] for r in rows])
    return {"rows": rows, "slope": slope, "series": ser}


def fit_slope(ps, errs) -> float:
    """Least-squares slope of ``log err`` against ``log p`` (zero errors skipped)."""
    pts = [(math.log(p), math.log(e)) for p, e in zip(ps, errs) if e > 0]
    if len(pts) < 2:
        return float("inf")
    x = np.array([a for a, _ in pts])
    y = np.array([b for _, b in pts])
    return float(np.polyfit(x, y, 1)[0])


def hermiticity_defect(W: list, norms: list) -> float:
    """Max of ``|N_a W[a][b] - N_b W[b][a]|`` relative to the largest element.

    ``N_a W[a][b]`` is the weighted matrix element between ``psi_a`` and
    ``V psi_b``; only columns inside the filled band are compared.
    """
    n = len(W)
    filled = [b for b in range(n) if any(W[a][b] for a in range(n))]
    G = [[norms[a] * W[a][b] for b in range(n)] for a in range(n)]
    scale = max((abs(float(G[a][b])) for a in range(n) for b in filled), default=0.0) or 1.0
    worst = 0.0
    for a in filled:
        for b in filled:
            worst = max(worst, abs(float(G[a][b] - G[b][a])))
    return worst / scale


def first_order_quadrature(l0: int, l1: int, m: int, n: int = 400) -> float:
    """``<v_m, V_1 v_m> / <v_m, v_m>`` by Gauss-Legendre (units pi^2)."""
    mode = jacobi_mode(l0, l1, m)
    V = potential_fourier(l0, l1, 1)
    xs, ws = np.polynomial.legendre.leggauss(n)
    x = (xs + 1) / 2
    w = np.sin(PI * x) ** 2
    phi2 = np.sin(PI * x) ** (2 * l0 + 2) * np.cos(PI * x) ** (2 * l1 + 2)
    f = np.polyval([float(v) for v in mode.coeffs[::-1]], w)
    v1 = sum(float(c) * np.cos(2 * k * PI * x) for k, c in V.cosine_coefficients(1).items())
    return float(np.sum(ws * phi2 * f * f * v1) / np.sum(ws * phi2 * f * f))
