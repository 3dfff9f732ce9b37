"""Independent reference evaluations used by the verification suites.

These avoid the theta-series machinery entirely: the Weierstrass functions are
built from their lattice sum or from the power series of sigma in ``g2, g3``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .elliptic import Lattice


def lattice_sum_wp(z: complex, lat: Lattice, N: int = 60) -> complex:
    """``wp(z)`` from the square lattice sums at ``N``, ``2N`` and ``4N``.

    The truncated sum has a tail ``a/N^2 + b/N^3 + ...``; the two leading
    terms are removed by Richardson extrapolation in ``N``.
    """
    Ns = [N, 2 * N, 4 * N]
    A = np.array([[1.0, n ** -2.0, n ** -3.0] for n in Ns])
    S = np.array([_square_sum(z, lat, n) for n in Ns])
    return complex(np.linalg.solve(A, S)[0])


def _square_sum(z: complex, lat: Lattice, N: int) -> complex:
    w1, w3 = 2 * lat.omega1, 2 * lat.omega3
    m, n = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1))
    w = (m * w1 + n * w3).ravel()
    w = w[w != 0]
    z = complex(z)
    return complex(1 / z ** 2 + np.sum(1 / (z - w) ** 2 - 1 / w ** 2))


@lru_cache(maxsize=8)
def _sigma_table(nmax: int) -> dict:
    # a_(m,n) from the Weierstrass recursion; indices outside the quadrant vanish
    a = {(0, 0): 1.0}

    def get(m, n):
        return a.get((m, n), 0.0) if m >= 0 and n >= 0 else 0.0

    for d in range(1, nmax + 1):
        # order in z is 4m + 6n + 1; fill by increasing total weight 2m + 3n
        for n in range(0, d // 3 + 1):
            rem = d - 3 * n
            if rem % 2:
                continue
            m = rem // 2
            a[(m, n)] = (3 * (m + 1) * get(m + 1, n - 1) + 16 / 3 * (n + 1) * get(m - 2, n + 1)
                         - (2 * m + 3 * n - 1) * (4 * m + 6 * n - 1) / 3 * get(m - 1, n))
    return a


def weierstrass_sigma_series(z: complex, g2: complex, g3: complex, weight: int = 90) -> complex:
    """``sigma(z)`` from its power series in ``z`` with coefficients in ``g2/2`` and ``2 g3``."""
    z = complex(z)
    kmax = 2 * weight + 2
    zk = [1 + 0j]
    for k in range(1, kmax + 1):
        zk.append(zk[-1] * z / k)  # z^k / k!
    tot = 0j
    for (m, n), a in _sigma_table(weight).items():
        k = 4 * m + 6 * n + 1
        tot += a * (g2 / 2) ** m * (2 * g3) ** n * zk[k]
    return tot
