"""Riemann scheme, Heun parameters and local Frobenius series."""

import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from heun_bethe.elliptic import Lattice, LatticeConstants, lattice_constants, wp_family
from heun_bethe.errors import DegenerateLattice, DomainError
from heun_bethe.heun_bridge import (Couplings, frobenius_eval, frobenius_series, laurent_wp,
                                    riemann_scheme, to_heun_parameters)

SQUARE = Lattice.normalized(1j)
LC = lattice_constants(SQUARE)
couplings = st.tuples(*[st.integers(0, 6)] * 4).map(lambda t: Couplings(*t))


def potential(x, c, lat):
    return sum(c[i] * (c[i] + 1) * wp_family(x + lat.half_period(i), lat) for i in range(4) if c[i])


class TestCouplings:
    def test_parse_and_sorted_k(self):
        c = Couplings.parse("1,3,0,2")
        assert c.as_tuple() == (1, 3, 0, 2) and c.k == (3, 2, 1, 0) and c.l == 6

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            Couplings(-1, 0)


class TestRiemannScheme:
    def test_lame_one(self):
        s = riemann_scheme(Couplings(1, 0, 0, 0), LC)
        assert s.exponents[3] == (1, Fraction(-1, 2))
        assert all(ex == (Fraction(1, 2), 0) for ex in s.exponents[:3])

    def test_free_case(self):
        s = riemann_scheme(Couplings(0, 0, 0, 0), LC)
        assert all(ex == (Fraction(1, 2), 0) for ex in s.exponents)

    def test_fuchs_example(self):
        assert riemann_scheme(Couplings(2, 1, 1, 0), LC).fuchs_sum() == 2

    @given(couplings)
    def test_fuchs_relation_exact(self, c):
        s = riemann_scheme(c, LC)
        assert isinstance(s.fuchs_sum(), Fraction) and s.fuchs_sum() == 2


class TestHeunParameters:
    def test_free_case(self):
        hp = to_heun_parameters(Couplings(0, 0, 0, 0), LC, 1.3)
        assert hp.gamma == hp.delta == hp.epsilon == 0.5
        assert abs(hp.alpha + hp.beta + 1 - 1.5) < 1e-15
        assert hp.alpha * hp.beta == 0

    @given(couplings)
    @settings(max_examples=25, deadline=None)
    def test_fuchs_and_cross_ratio(self, c):
        lc = lattice_constants(Lattice.normalized(0.3 + 0.8j))
        hp = to_heun_parameters(c, lc, 2.0 - 1j)
        assert hp.fuchs_defect() < 1e-14
        assert abs(hp.t - (lc.e3 - lc.e1) / (lc.e2 - lc.e1)) < 1e-14

    @given(couplings)
    @settings(max_examples=25, deadline=None)
    def test_energy_enters_q_affinely(self, c):
        a, b, m = (to_heun_parameters(c, LC, E) for E in (0.0, 2.0, 1.0))
        for name in ("alpha", "beta", "gamma", "delta", "epsilon", "t"):
            assert getattr(a, name) == getattr(b, name) == getattr(m, name)
        assert abs(m.q - (a.q + b.q) / 2) < 1e-10 * (1 + abs(a.q) + abs(b.q))
        assert abs(b.q - a.q) > 0

    def test_degenerate_lattice(self):
        lc = LatticeConstants(1.0, 1.0, -2.0, 0, 0, 0, 12.0, -4.0)
        with pytest.raises(DegenerateLattice):
            to_heun_parameters(Couplings(1, 0, 0, 0), lc, 0.0)

    def test_round_trip_through_heun_equation(self):
        # integrate the Heun equation, pull the solution back and check the elliptic form
        c, E = Couplings(1, 1, 0, 0), 1.0
        hp = to_heun_parameters(c, LC, E)
        e1, e2, e3 = LC.e

        def heun_rhs(w, y):
            p = hp.gamma / w + hp.delta / (w - 1) + hp.epsilon / (w - hp.t)
            r = (hp.alpha * hp.beta * w - hp.q) / (w * (w - 1) * (w - hp.t))
            return [y[1], -p * y[1] - r * y[0]]

        x0, h = 0.23 + 0.17j, 3e-3
        xs = [x0 + k * h for k in range(-2, 3)]
        ws = [(wp_family(x, SQUARE) - e1) / (e2 - e1) for x in xs]
        w_ref = ws[2] + 0.05 + 0.05j
        y_ref = [1.0 + 0j, 0.3 - 0.2j]

        def y_at(w):
            seg = w - w_ref
            sol = solve_ivp(lambda s, y: np.array(heun_rhs(w_ref + s * seg, y)) * seg,
                            (0.0, 1.0), np.array(y_ref, dtype=complex), method="DOP853",
                            rtol=1e-13, atol=1e-15)
            return sol.y[0, -1]

        fs = []
        for x, w in zip(xs, ws):
            z = wp_family(x, SQUARE)
            fs.append(cmath.sqrt(z - e1) ** (-c.l1) * y_at(w))
        # continuous branch of the square root across the stencil
        ref = cmath.sqrt(wp_family(xs[2], SQUARE) - e1)
        for k, x in enumerate(xs):
            s = cmath.sqrt(wp_family(x, SQUARE) - e1)
            if abs(s + ref) < abs(s - ref):
                fs[k] = -fs[k]
        d2 = (-fs[0] + 16 * fs[1] - 30 * fs[2] + 16 * fs[3] - fs[4]) / (12 * h * h)
        V = potential(x0, c, SQUARE)
        res = abs(-d2 + (V - E) * fs[2]) / (abs(fs[2]) * (abs(V) + abs(E)))
        assert res <= 1e-6


class TestFrobenius:
    @pytest.mark.parametrize("i", [0, 1, 2, 3])
    @pytest.mark.parametrize("choice", ["lower", "upper"])
    def test_odd_coefficients_vanish(self, i, choice):
        a = frobenius_series(Couplings(2, 1, 1, 3), SQUARE, i, choice, 0.7 + 0.2j, 20)
        assert all(a[k] == 0 for k in range(1, 21, 2))

    def test_free_lower_first_coefficient(self):
        # l_i = 0: f = 1 + a_2 s^2 with -2 a_2 + (V(omega_i) - E) = 0
        c, E = Couplings(0, 2, 0, 0), 1.7
        a = frobenius_series(c, SQUARE, 0, "lower", E, 3)
        V0 = potential(0.0, Couplings(0, 2, 0, 0), SQUARE)
        assert abs(a[2] - (V0 - E) / 2) < 1e-12

    def test_upper_leading_power(self):
        c = Couplings(2, 1, 0, 0)
        a = frobenius_series(c, SQUARE, 1, "upper", 2.0, 4)
        f, _, _ = frobenius_eval(a, c[1] + 1, 1e-3)
        assert abs(f / 1e-3 ** (c[1] + 1) - 1) < 1e-4

    @pytest.mark.parametrize("i,choice", [(0, "lower"), (0, "upper"), (1, "lower"), (2, "upper")])
    def test_truncated_series_solves_equation(self, i, choice):
        c, E, s = Couplings(2, 1, 1, 0), 1.5 - 0.5j, 0.05
        a = frobenius_series(c, SQUARE, i, choice, E, 40)
        rho = -c[i] if choice == "lower" else c[i] + 1
        f, _, d2 = frobenius_eval(a, rho, s)
        x = SQUARE.half_period(i) + s
        res = abs(-d2 + (potential(x, c, SQUARE) - E) * f) / abs(d2)
        assert res < 1e-8

    def test_laurent_coefficients(self):
        c = laurent_wp(LC.g2, LC.g3, 3)
        assert abs(c[0] - LC.g2 / 20) < 1e-14 and abs(c[1] - LC.g3 / 28) < 1e-14
        assert abs(c[2] - LC.g2 ** 2 / 1200) < 1e-12

    def test_bad_order(self):
        with pytest.raises(DomainError):
            frobenius_series(Couplings(1, 0), SQUARE, 0, "lower", 0, 201)
