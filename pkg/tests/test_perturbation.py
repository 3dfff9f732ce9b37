"""Nome expansion of the potential and the Rayleigh-Schrodinger series."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heun_bethe.elliptic import PI, Lattice, wp_family
from heun_bethe.errors import CutoffTooSmall, DomainError
from heun_bethe.perturbation import (JacobiBasis, compare_series_vs_continuation, default_cutoff,
                                     first_order_quadrature, fit_slope, hermiticity_defect,
                                     potential_fourier, potential_matrix_elements,
                                     rayleigh_schrodinger)
from heun_bethe.trig_spectrum import inner_product, jacobi_mode

GRID = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]


class TestFourierPotential:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 4), st.integers(0, 4), st.floats(0.01, 0.49))
    def test_first_order_formula(self, l0, l1, x):
        V = potential_fourier(l0, l1, 1)
        L0, L1 = l0 * (l0 + 1), l1 * (l1 + 1)
        c = math.cos(2 * PI * x)
        ref = -8 * PI ** 2 * (L0 * (c - 1) + L1 * (-c - 1))
        assert abs(V(1, x) - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_second_order_harmonics(self):
        assert potential_fourier(2, 1, 2).harmonics(2) == [1, 2]
        assert potential_fourier(2, 1, 6).harmonics(6) == [1, 2, 3, 6]

    def test_free_case(self):
        V = potential_fourier(0, 0, 4)
        assert all(V.cosine_coefficients(k) == {} for k in range(1, 5))
        W = potential_matrix_elements(V, 6)
        assert all(v == 0 for k in W for row in W[k] for v in row)

    def test_sums_to_potential(self):
        # sum_k V_k p^k plus the constant and trig parts reproduces the elliptic potential
        l0, l1, K, p = 2, 1, 8, 1e-3
        lat = Lattice.from_nome(p)
        V = potential_fourier(l0, l1, K)
        L0, L1 = l0 * (l0 + 1), l1 * (l1 + 1)
        for x in (0.13, 0.31, 0.42):
            trig = PI ** 2 * (L0 / math.sin(PI * x) ** 2 + L1 / math.cos(PI * x) ** 2)
            const = -PI ** 2 / 3 * (L0 + L1)
            approx = trig + const + sum(V(k, x) * p ** k for k in range(1, K + 1))
            ref = L0 * wp_family(x, lat) + L1 * wp_family(x + 0.5, lat)
            assert abs(approx - ref) <= 1e-12 * abs(ref)

    def test_order_limit(self):
        with pytest.raises(DomainError):
            potential_fourier(1, 0, 51)


class TestMatrixElements:
    def test_band_structure(self):
        V = potential_fourier(2, 1, 3)
        W = potential_matrix_elements(V, 10)
        for k in (1, 2, 3):
            for a in range(11):
                for b in range(11 - k):
                    if abs(a - b) > k:
                        assert W[k][a][b] == 0

    @pytest.mark.parametrize("l0,l1,m", [(1, 0, 0), (1, 1, 0), (2, 1, 1), (0, 2, 2)])
    def test_diagonal_by_quadrature(self, l0, l1, m):
        W = potential_matrix_elements(potential_fourier(l0, l1, 1), m + 2)
        assert abs(float(W[1][m][m]) - first_order_quadrature(l0, l1, m)) <= 1e-10 * max(
            1.0, abs(float(W[1][m][m])))

    def test_element_by_exact_inner_product(self):
        l0, l1 = 2, 1
        V = potential_fourier(l0, l1, 2)
        basis = JacobiBasis(l0, l1, 6)
        W = potential_matrix_elements(V, 6)
        # V_2 psi_1 expanded back in w-polynomials and projected on psi_0
        coef = V.cosine_coefficients(2)
        mode1, mode0 = jacobi_mode(l0, l1, 1), jacobi_mode(l0, l1, 0)
        xs, ws = np.polynomial.legendre.leggauss(200)
        x = (xs + 1) / 2
        phi2 = np.sin(PI * x) ** (2 * l0 + 2) * np.cos(PI * x) ** (2 * l1 + 2)
        v2 = sum(float(c) * np.cos(2 * n * PI * x) for n, c in coef.items())
        w = np.sin(PI * x) ** 2
        f1 = np.polyval([float(v) for v in mode1.coeffs[::-1]], w)
        f0 = np.polyval([float(v) for v in mode0.coeffs[::-1]], w)
        num = float(np.sum(ws * phi2 * f0 * v2 * f1) / 2)
        assert abs(float(basis.norms[0] * W[2][0][1]) - num) <= 1e-12 * max(1.0, abs(num))

    @pytest.mark.parametrize("l0,l1", [(1, 0), (2, 1), (3, 3)])
    def test_hermiticity(self, l0, l1):
        W = potential_matrix_elements(potential_fourier(l0, l1, 3), 9)
        norms = JacobiBasis(l0, l1, 9).norms
        for k in (1, 2, 3):
            assert hermiticity_defect(W[k], norms) <= 1e-10

    def test_norms_match_inner_product(self):
        basis = JacobiBasis(2, 1, 4)
        for a in range(5):
            mode = list(jacobi_mode(2, 1, a).coeffs)
            assert basis.norms[a] == inner_product(mode, mode, 2, 1)

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            potential_matrix_elements(potential_fourier(1, 1, 4), 3)
        with pytest.raises(CutoffTooSmall):
            JacobiBasis(1, 1, 2).expand([0, 0, 0, 1])


class TestSeries:
    def test_first_order_identity(self):
        s = rayleigh_schrodinger(2, 1, 1, 2)
        W = s.tables[1]
        assert s.energy_pi2[1] == W[1][1]
        assert abs(s.energy[1] / PI ** 2 - first_order_quadrature(2, 1, 1)) < 1e-10

    def test_zeroth_order(self):
        s = rayleigh_schrodinger(1, 1, 0, 1)
        assert s.energy_pi2[0] == 16 - Fraction(4, 3)

    def test_frozen_coefficients(self):
        # exact rational values of the (1,1,0) series in units of pi^2
        s = rayleigh_schrodinger(1, 1, 0, 3)
        assert s.energy_pi2 == [Fraction(44, 3), 32, Fraction(416, 3), 128]

    @pytest.mark.parametrize("l0,l1,m", [(1, 1, 0), (2, 1, 1), (1, 0, 2)])
    def test_cutoff_stability(self, l0, l1, m):
        base = rayleigh_schrodinger(l0, l1, m, 3)
        big = rayleigh_schrodinger(l0, l1, m, 3, M=30)
        assert base.energy_pi2 == big.energy_pi2

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            rayleigh_schrodinger(1, 1, 2, 3, M=4)

    @pytest.mark.parametrize("l0,l1,m", [(1, 1, 0), (2, 1, 1), (3, 0, 0)])
    def test_order_residuals_and_norm(self, l0, l1, m):
        s = rayleigh_schrodinger(l0, l1, m, 4)
        for k in range(5):
            assert s.order_residual(k) <= 1e-10
            assert s.norm_defect(k) <= 1e-10

    def test_default_cutoff(self):
        assert default_cutoff(1, 3) == 12


class TestAgainstContinuation:
    def test_free_case_exact(self):
        out = compare_series_vs_continuation(0, 0, 1, 3, GRID[:3])
        assert all(r["error"] == 0 for r in out["rows"])

    def test_leading_order_only(self):
        out = compare_series_vs_continuation(1, 1, 0, 0, GRID)
        assert out["slope"] >= 1

    @pytest.mark.parametrize("l0,l1", [(1, 0), (1, 1), (2, 1)])
    @pytest.mark.parametrize("m", [0, 1])
    def test_third_order_slope(self, l0, l1, m):
        out = compare_series_vs_continuation(l0, l1, m, 3, GRID)
        assert out["slope"] >= 3.5

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            compare_series_vs_continuation(1, 1, 0, 3, [0.0, 1e-3])
        with pytest.raises(DomainError):
            compare_series_vs_continuation(1, 1, 0, 3, [1e-3, 0.1])

    def test_fit_slope(self):
        ps = [1e-4, 1e-3, 1e-2]
        assert abs(fit_slope(ps, [3 * p ** 4 for p in ps]) - 4) < 1e-10
        assert fit_slope(ps, [0, 0, 0]) == float("inf")
