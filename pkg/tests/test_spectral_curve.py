"""Product solution Xi, the spectral polynomial Q and its trigonometric limit."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from numpy.polynomial import polynomial as npp

from heun_bethe.bethe import extract_bethe_roots, newton_refine, ode_residual
from heun_bethe.elliptic import PI, Lattice, lattice_constants, wp_family
from heun_bethe.heun_bridge import Couplings
from heun_bethe.invariant_space import invariant_dimension
from heun_bethe.spectral_curve import (eigenfunction_lambda, q_at_x, q_polynomial, xi_at_energy,
                                       trig_q_polynomial, xi_basis, xi_polynomials)

SQUARE = Lattice.normalized(1j)
SKEW = Lattice.normalized(0.3 + 0.8j)
SAMPLE_X = [0.13 + 0.07j, 0.31 + 0.22j, 0.42 - 0.11j, 0.07 + 0.36j, 0.27 - 0.31j,
            0.19 + 0.41j, 0.36 + 0.05j, 0.11 - 0.21j, 0.44 + 0.29j, 0.23 - 0.04j]


def couplings_up_to(total):
    for t in itertools.product(range(total + 1), repeat=4):
        if sum(t) <= total:
            yield Couplings(*t)


def xi_value(rep, x):
    return rep.evaluate(x)[0]


class TestXiAtEnergy:
    def test_free_case(self):
        rep = xi_at_energy(Couplings(0, 0, 0, 0), SQUARE, 3.0)
        assert xi_value(rep, 0.2 + 0.1j) == 1

    @pytest.mark.parametrize("E", [2.0, -1.5 + 0.7j])
    def test_lame_one(self, E):
        rep = xi_at_energy(Couplings(1, 0, 0, 0), SQUARE, E)
        x = 0.21 + 0.13j
        ratio = xi_value(rep, x) / (wp_family(x, SQUARE) + E)
        ratio2 = xi_value(rep, 0.37 - 0.2j) / (wp_family(0.37 - 0.2j, SQUARE) + E)
        assert abs(ratio - ratio2) < 1e-12 * abs(ratio)

    def test_product_equation_residual(self):
        rep = xi_at_energy(Couplings(1, 1, 0, 0), SQUARE, 2.0)
        assert max(abs(rep.residual(x)) for x in SAMPLE_X) <= 1e-9


class TestXiPolynomials:
    def test_lame_one_coefficients(self):
        rep = xi_polynomials(Couplings(1, 0, 0, 0), SQUARE)
        assert xi_basis(rep.couplings) == [(None, 0), (0, 1)]
        assert np.allclose(rep.poly[0], [0, 1], atol=1e-14)
        assert np.allclose(rep.poly[1], [1], atol=1e-14)

    @pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j])
    def test_fast_path_matches_general(self, tau):
        lat = Lattice.normalized(tau)
        c = Couplings(2, 1, 0, 0)
        a = xi_polynomials(c, lat, "fast")
        b = xi_polynomials(c, lat, "general")
        assert a.g == b.g
        for pa, pb in zip(a.poly, b.poly):
            n = max(len(pa), len(pb))
            d = np.pad(pa, (0, n - len(pa))) - np.pad(pb, (0, n - len(pb)))
            assert np.max(np.abs(d)) <= 1e-8 * max(1.0, np.max(np.abs(pa)))

    @pytest.mark.parametrize("l0,l1", [(1, 0), (2, 1), (3, 1), (3, 3), (4, 2)])
    def test_degree_of_c0(self, l0, l1):
        rep = xi_polynomials(Couplings(l0, l1, 0, 0), SQUARE)
        assert len(rep.poly[0]) - 1 == l0

    def test_polynomial_form_solves_equation(self):
        rep = xi_polynomials(Couplings(2, 0, 1, 1), SKEW, "general")
        at = rep.at_energy(1.3 - 0.4j)
        assert max(abs(at.residual(x)) for x in SAMPLE_X[:5]) <= 1e-8


class TestQPolynomial:
    def test_free_case(self):
        q = q_polynomial(Couplings(0, 0, 0, 0), SQUARE)
        assert np.allclose(q.coeffs, [0, 1], atol=1e-14)

    @pytest.mark.parametrize("lat", [SQUARE, SKEW])
    def test_lame_one(self, lat):
        e = lattice_constants(lat).e
        q = q_polynomial(Couplings(1, 0, 0, 0), lat)
        ref = npp.polyfromroots([-ei for ei in e])
        assert np.max(np.abs(q.coeffs - ref)) <= 1e-9
        for ei in e:
            assert abs(q(-ei)) <= 1e-9 * (1 + abs(ei) ** 3)

    def test_degree_equals_dimension(self):
        for c in couplings_up_to(5):
            assert q_polynomial(c, SQUARE).degree == invariant_dimension(c)

    @pytest.mark.parametrize("l", [(2, 1, 0, 0), (1, 1, 1, 0), (2, 0, 1, 1)])
    def test_x_independence(self, l):
        xi = xi_polynomials(Couplings(*l), SQUARE)
        qa = q_at_x(xi, 0.17 + 0.09j)
        qb = q_at_x(xi, 0.38 - 0.27j)
        rng = np.random.default_rng(7)
        for E in rng.uniform(-20, 20, 10) + 1j * rng.uniform(-5, 5, 10):
            a, b = npp.polyval(E, qa), npp.polyval(E, qb)
            assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


class TestTrigQ:
    def test_lame_limit(self):
        t = trig_q_polynomial(1, 0)
        assert t.roots_pi2 == [Fraction(-2, 3), Fraction(1, 3), Fraction(1, 3)]

    def test_free(self):
        t = trig_q_polynomial(0, 0)
        assert t.roots_pi2 == [0] and t.coeffs_pi2 == [0, 1]

    def test_even_case(self):
        t = trig_q_polynomial(1, 1)
        assert t.C_T == Fraction(4, 3)
        assert t.roots_pi2 == [Fraction(-4, 3), Fraction(8, 3), Fraction(8, 3)]
        assert np.allclose(sorted(t.roots()), [-4 * PI ** 2 / 3] + [8 * PI ** 2 / 3] * 2)

    @pytest.mark.parametrize("l0,l1", [(0, 0), (1, 0), (2, 1), (3, 1), (4, 0), (2, 5)])
    def test_degree_and_symmetry(self, l0, l1):
        t = trig_q_polynomial(l0, l1)
        assert t.degree == 2 * max(l0, l1) + 1
        assert t.roots_pi2 == trig_q_polynomial(l1, l0).roots_pi2

    def test_float_coefficients_follow_exact(self):
        t = trig_q_polynomial(2, 1)
        ref = npp.polyfromroots(t.roots())
        assert np.allclose(t.coeffs, ref, rtol=1e-13, atol=1e-9)


class TestEigenfunction:
    def _state(self, l, E):
        c = Couplings(*l)
        xi = xi_polynomials(c, SQUARE).at_energy(E)
        return newton_refine(extract_bethe_roots(xi, E, SQUARE)), xi

    def test_ode_residual(self):
        s, _ = self._state((2, 1, 0, 0), 5 + 0.3j)
        xs = [0.05 + 0.045 * k + (0.1 + 0.013 * k) * 1j for k in range(20)]
        assert ode_residual(s, xs) <= 1e-6

    def test_lame_closed_form(self):
        s, _ = self._state((1, 0, 0, 0), 1.7)
        t1 = s.t[0]
        for x in SAMPLE_X[:4]:
            ref = (wp_family(x + t1, SQUARE, "sigma") / (wp_family(x, SQUARE, "sigma")
                   * wp_family(t1, SQUARE, "sigma")) * np.exp(-wp_family(t1, SQUARE, "zeta") * x))
            assert abs(eigenfunction_lambda(x, 1.7, s) - ref) <= 1e-10 * abs(ref)

    @pytest.mark.parametrize("l,E", [((2, 1, 0, 0), 5 + 0.3j), ((1, 1, 1, 0), -3.1 + 1.2j)])
    def test_product_gives_xi(self, l, E):
        s, xi = self._state(l, E)
        r = [eigenfunction_lambda(x, E, s) * eigenfunction_lambda(-x, E, s) / xi_value(xi, x)
             for x in SAMPLE_X]
        spread = max(abs(v - r[0]) for v in r) / abs(r[0])
        assert spread <= 1e-8
