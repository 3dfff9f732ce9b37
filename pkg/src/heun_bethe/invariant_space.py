"""Finite-dimensional invariant spaces of doubly periodic (up to sign) functions.

Each parity class is spanned by ``phi(z) z^n`` with ``z = wp(x)`` and
``phi = prod_i (z - e_i)^(alpha_i/2)``; the Hamiltonian maps the span of
``z^0..z^d`` into itself, so its matrix is assembled by polynomial algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .elliptic import Lattice, LatticeConstants, lattice_constants, wp_family
from .errors import IllConditioned
from .heun_bridge import Couplings


@dataclass(frozen=True)
class ParityClass:
    """Sign tuple, local exponents and top degree of one parity class."""

    epsilon: tuple
    alpha: tuple
    d: int

    @property
    def dim(self) -> int:
        return max(0, self.d + 1)

    def basis(self) -> list:
        """Descriptors ``(alpha1, alpha2, alpha3, n)`` for ``prod (s_i/s)^alpha_i wp^n``."""
        return [(self.alpha[1], self.alpha[2], self.alpha[3], n) for n in range(self.d + 1)]


@dataclass(frozen=True)
class InvariantSpace:
    couplings: Couplings
    classes: tuple

    @property
    def dimension(self) -> int:
        return sum(cl.dim for cl in self.classes)


def _class_for(c: Couplings, eps: tuple) -> ParityClass:
    alpha = []
    for li, ei in zip(c, eps):
        odd = 0 if ei == 1 else 1
        # pick the exponent in {-l_i, l_i+1} with alpha_i + odd even
        alpha.append(-li if (-li + odd) % 2 == 0 else li + 1)
    return ParityClass(tuple(eps), tuple(alpha), -sum(alpha) // 2)


def sign_tuples() -> list:
    return [e for e in itertools.product((1, -1), repeat=4) if e[0] * e[1] * e[2] * e[3] == 1]


def parity_basis(c: Couplings) -> InvariantSpace:
    """Enumerate the eight parity classes and keep those with ``d >= 0``."""
    classes = [_class_for(c, eps) for eps in sign_tuples()]
    return InvariantSpace(c, tuple(cl for cl in classes if cl.d >= 0))


def dimension_case_split(c: Couplings) -> int:
    """Closed-form dimension from the four-case formula on the sorted couplings."""
    k0, k1, k2, k3 = c.k
    s = k0 + k1 + k2 + k3
    if s % 2 == 0:
        return 2 * k0 + 1 if k0 + k3 >= k1 + k2 else k0 + k1 + k2 - k3 + 1
    return 2 * k0 + 1 if k0 >= k1 + k2 + k3 + 1 else s + 2


def invariant_dimension(c: Couplings) -> int:
    """Dimension of the maximal finite-dimensional invariant subspace.

    Computed by the case split and by summing parity-class dimensions; the two
    must agree.
    """
    a = dimension_case_split(c)
    b = parity_basis(c).dimension
    if a != b:
        raise AssertionError(f"dimension mismatch {a} != {b} for {c}")
    return a


# ---------------------------------------------------------------------------
# Hamiltonian matrices


def _class_operator(cl: ParityClass, c: Couplings, lc: LatticeConstants):
    """Polynomial coefficients (ascending) of P2, P1, P0 with
    ``H(phi u)/phi = P2 u'' + P1 u' + P0 u``."""
    e = lc.e
    L = c.strengths()
    kap = [cl.alpha[i] / 2 for i in (1, 2, 3)]
    P = np.array([-lc.g3 / 4, -lc.g2 / 4, 0, 1], dtype=complex)
    dP = np.array([-lc.g2 / 4, 0, 3], dtype=complex)
    Pi = []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        Pi.append(np.array([e[j] * e[k], -(e[j] + e[k]), 1], dtype=complex))
    P2 = -4 * P
    P1 = -(2 * dP + 8 * sum(kap[i] * Pi[i] for i in range(3)))
    P0 = np.zeros(2, dtype=complex)
    for i in range(3):
        P0 += -L[i + 1] * np.array([2 * e[i], 1])
        P0[0] += L[i + 1] * e[i]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        k = 3 - i - j
        coef = 2 * kap[i] * kap[j] + (kap[i] + kap[j]) / 2
        P0 += -4 * coef * np.array([-e[k], 1])
    P0 += L[0] * np.array([0, 1])
    return P2, P1, P0


def _apply_polys(P2, P1, P0, u):
    from numpy.polynomial import polynomial as npp

    u = np.asarray(u, dtype=complex)
    out = npp.polymul(P0, u)
    if len(u) > 1:
        out = npp.polyadd(out, npp.polymul(P1, npp.polyder(u)))
    if len(u) > 2:
        out = npp.polyadd(out, npp.polymul(P2, npp.polyder(u, 2)))
    return out


def class_matrix(cl: ParityClass, c: Couplings, lc: LatticeConstants) -> np.ndarray:
    """Matrix of H on ``phi z^0..phi z^d`` (column n = image of ``phi z^n``)."""
    P2, P1, P0 = _class_operator(cl, c, lc)
    n = cl.d + 1
    M = np.zeros((n, n), dtype=complex)
    for col in range(n):
        u = np.zeros(col + 1, dtype=complex)
        u[col] = 1
        img = _apply_polys(P2, P1, P0, u)
        img = np.pad(img, (0, max(0, n + 2 - len(img))))
        M[:, col] = img[:n]
        leak = np.abs(img[n:]).max() if len(img) > n else 0.0
        scale = 1 + np.abs(img[:n]).max()
        if leak > 1e-9 * scale:
            raise AssertionError(f"invariance violated (leak {leak:.3e})")
    return M


def _collocation_class_matrix(cl: ParityClass, c: Couplings, lat: Lattice,
                              rng: np.random.Generator) -> np.ndarray:
    """Same matrix from point evaluations of ``H(phi z^n)`` via elliptic functions."""
    lc = lattice_constants(lat)
    n = cl.d + 1
    L = c.strengths()
    npts = n + 4
    pts = []
    while len(pts) < npts:
        u, v = rng.uniform(0.05, 0.45, 2)
        x = 2 * lat.omega1 * u + 2 * lat.omega3 * v
        pts.append(x)
    kap = [cl.alpha[i] / 2 for i in (1, 2, 3)]
    rows_z, rows_h = [], []
    for x in pts:
        z = wp_family(x, lat, "wp")
        wpp = wp_family(x, lat, "wp_prime")
        wp2 = wp_family(x, lat, "wp_second")
        V = sum(L[i] * wp_family(x + lat.half_period(i), lat, "wp") for i in range(4) if L[i])
        d = [z - ei for ei in lc.e]
        K = sum(kap[i] / d[i] for i in range(3))
        dK = -sum(kap[i] / d[i] ** 2 for i in range(3))
        hv = []
        for m in range(n):
            # F = phi z^m, divided by phi
            Fz = K * z ** m + (m * z ** (m - 1) if m else 0)
            Fzz = (dK + K * K) * z ** m + (2 * K * m * z ** (m - 1) if m else 0) + (
                m * (m - 1) * z ** (m - 2) if m > 1 else 0)
            hv.append(-(Fzz * wpp ** 2 + Fz * wp2) + V * z ** m)
        rows_z.append([z ** k for k in range(n)])
        rows_h.append(hv)
    A = np.array(rows_z)
    B = np.array(rows_h)
    Ad = A / np.abs(A).max(axis=0)
    if np.linalg.cond(Ad) > 1e10:
        raise IllConditioned("collocation matrix ill-conditioned", cond=float(np.linalg.cond(Ad)))
    coef, *_ = np.linalg.lstsq(A, B, rcond=None)
    return coef


def hamiltonian_matrix(space: InvariantSpace, lat: Lattice, method: str = "algebraic",
                       seed: int = 0) -> np.ndarray:
    """Block-diagonal matrix of H on the invariant space.

    Parameters
    ----------
    space : InvariantSpace
    lat : Lattice
    method : {"algebraic", "collocation"}
        Polynomial algebra in ``z = wp(x)`` or point collocation through the
        elliptic functions.
    seed : int
        Seed for collocation points.
    """
    lc = lattice_constants(lat)
    rng = np.random.default_rng(seed)
    blocks = []
    for cl in space.classes:
        if method == "algebraic":
            blocks.append(class_matrix(cl, space.couplings, lc))
        elif method == "collocation":
            for attempt in range(5):
                try:
                    blocks.append(_collocation_class_matrix(cl, space.couplings, lat, rng))
                    break
                except IllConditioned:
                    if attempt == 4:
                        raise
        else:
            raise ValueError(f"unknown method {method!r}")
    n = sum(b.shape[0] for b in blocks)
    M = np.zeros((n, n), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        M[k:k + m, k:k + m] = b
        k += m
    return M


def block_sizes(space: InvariantSpace) -> list:
    return [cl.dim for cl in space.classes]


def spectrum(c: Couplings, lat: Lattice) -> np.ndarray:
    """Eigenvalues of H on the invariant space, sorted by (real, imag)."""
    M = hamiltonian_matrix(parity_basis(c), lat)
    if M.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    ev = np.linalg.eigvals(M)
    return np.array(sorted(ev, key=lambda v: (v.real, v.imag)))


# ---------------------------------------------------------------------------
# twisted recursion at e2 (two vanishing couplings)


def _twisted_tuples(l0: int, l1: int):
    halves = [(-l1 / 2, (l1 + 1) / 2), (0.0, 0.5), (0.0, 0.5)]
    out = []
    for a1, a2, a3 in itertools.product(*halves):
        s = a1 + a2 + a3
        g1 = s - l0 / 2
        g2 = s + (l0 + 1) / 2
        for g in (g1, g2):
            if abs(g - round(g)) < 1e-12 and round(g) <= 0:
                out.append(((a1, a2, a3), g1, g2, int(round(g))))
    return out


def twisted_char_polys(l0: int, l1: int, lc: LatticeConstants) -> list:
    """Polynomials ``c_{1-gamma}(E)`` of the terminating recursion at ``e2``.

    Returns a list of dicts with keys ``alpha``, ``degree`` and ``coeffs``
    (ascending in E, normalized monic), padded to four entries with constant
    polynomials for tuples that do not terminate.  When ``l0 < l1`` the couplings are
    swapped, which leaves the spectrum unchanged under ``x -> x + omega1``.
    """
    from numpy.polynomial import polynomial as npp

    if l0 < l1:
        l0, l1 = l1, l0
    e1, e2, e3 = lc.e
    A = (e2 - e1) * (e2 - e3)
    out = []
    for (a1, a2, a3), g1, g2, gt in _twisted_tuples(l0, l1):
        q = np.array([-e1 * (a2 + a3) ** 2 - e2 * (a1 + a3) ** 2 - e3 * (a1 + a2) ** 2
                      + e2 * g1 * g2, 0.25], dtype=complex)
        rmax = 1 - gt
        cs = [np.array([1.0 + 0j])]
        cs.append(-npp.polymul(q, cs[0]) / (A * (2 * a2 + 0.5)))
        for r in range(1, rmax):
            lin = ((2 * a2 + 2 * a3 + r) * (e2 - e1) + (2 * a2 + 2 * a1 + r) * (e2 - e3)) * r
            term = npp.polyadd((r - 1 + g1) * (r - 1 + g2) * cs[r - 1],
                               npp.polymul(npp.polyadd(q, [lin]), cs[r]))
            cs.append(-term / (A * (r + 1) * (r + 2 * a2 + 0.5)))
        poly = np.asarray(cs[rmax], dtype=complex)
        poly = poly / poly[-1]
        out.append({"alpha": (a1, a2, a3), "degree": rmax, "coeffs": poly})
    # tuples without a terminating exponent contribute the constant polynomial
    while len(out) < 4:
        out.append({"alpha": None, "degree": 0, "coeffs": np.array([1.0 + 0j])})
    return out
