"""Polynomial root finder and the independent reference evaluations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heun_bethe.elliptic import Lattice, lattice_constants, wp_family
from heun_bethe.oracles import lattice_sum_wp, weierstrass_sigma_series
from heun_bethe.polyroots import poly_from_roots, poly_roots

cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


class TestPolyRoots:
    def test_quadratic(self):
        r = sorted(poly_roots([2, -3, 1]), key=lambda z: z.real)
        assert np.allclose(r, [1, 2], atol=1e-14)

    def test_constant_and_linear(self):
        assert poly_roots([5]) == []
        assert np.allclose(poly_roots([-3, 2]), [1.5])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(cplx, min_size=1, max_size=8))
    def test_round_trip(self, roots):
        # separated roots are recovered to near machine precision
        if any(abs(a - b) < 0.1 for i, a in enumerate(roots) for b in roots[i + 1:]):
            return
        found = poly_roots(poly_from_roots(roots))
        for z in roots:
            assert min(abs(z - w) for w in found) < 1e-8 * max(1, abs(z))

    def test_double_root(self):
        found = poly_roots(poly_from_roots([1.0, 1.0, -2.0]))
        assert sum(abs(z - 1) < 1e-6 for z in found) == 2

    def test_from_roots_is_monic_ascending(self):
        assert np.allclose(poly_from_roots([1, 2]), [2, -3, 1])


class TestOracles:
    @pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j])
    def test_lattice_sum_richardson(self, tau):
        lat = Lattice.normalized(tau)
        z = 0.3 + 0.1j
        assert abs(lattice_sum_wp(z, lat) - wp_family(z, lat)) < 1e-8

    def test_sigma_series_small_argument(self):
        lc = lattice_constants(Lattice.normalized(1j))
        z = 1e-3
        # sigma(z) = z - g2 z^5 / 240 + ...
        ref = z - lc.g2 * z ** 5 / 240
        assert abs(weierstrass_sigma_series(z, lc.g2, lc.g3) - ref) < 1e-20

    def test_sigma_series_odd(self):
        lc = lattice_constants(Lattice.normalized(0.3 + 0.8j))
        z = 0.31 - 0.2j
        assert abs(weierstrass_sigma_series(-z, lc.g2, lc.g3)
                   + weierstrass_sigma_series(z, lc.g2, lc.g3)) < 1e-15
