"""Invariant spaces, their Hamiltonian matrices and the twisted recursion."""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import polynomial as npp

from heun_bethe.elliptic import Lattice, lattice_constants
from heun_bethe.heun_bridge import Couplings
from heun_bethe.invariant_space import (block_sizes, dimension_case_split, hamiltonian_matrix,
                                        invariant_dimension, parity_basis, sign_tuples, spectrum,
                                        twisted_char_polys)

SQUARE = Lattice.normalized(1j)


def couplings_up_to(total):
    for t in itertools.product(range(total + 1), repeat=4):
        if sum(t) <= total:
            yield Couplings(*t)


def monic_char_poly(M):
    return np.poly(M)[::-1]


class TestDimension:
    @pytest.mark.parametrize("l,d", [((1, 0, 0, 0), 3), ((0, 0, 0, 0), 1), ((1, 1, 1, 0), 5),
                                     ((1, 1, 1, 1), 3), ((1, 1, 0, 0), 3)])
    def test_examples(self, l, d):
        assert invariant_dimension(Couplings(*l)) == d

    def test_case_split_equals_class_sum(self):
        for c in couplings_up_to(8):
            assert dimension_case_split(c) == parity_basis(c).dimension

    @given(st.permutations([3, 1, 2, 0]))
    def test_permutation_invariance(self, perm):
        assert invariant_dimension(Couplings(*perm)) == invariant_dimension(Couplings(3, 1, 2, 0))


class TestParityBasis:
    def test_sign_tuples(self):
        ts = sign_tuples()
        assert len(ts) == 8 and all(np.prod(t) == 1 for t in ts)

    def test_free_case(self):
        sp = parity_basis(Couplings(0, 0, 0, 0))
        assert len(sp.classes) == 1
        cl = sp.classes[0]
        assert cl.epsilon == (1, 1, 1, 1) and cl.alpha == (0, 0, 0, 0) and cl.d == 0
        assert cl.basis() == [(0, 0, 0, 0)]

    def test_lame_one_classes(self):
        sp = parity_basis(Couplings(1, 0, 0, 0))
        assert sorted(block_sizes(sp)) == [1, 1, 1]
        assert sp.dimension == 3

    def test_exponents_are_local_choices(self):
        c = Couplings(2, 1, 3, 0)
        for cl in parity_basis(c).classes:
            for li, a in zip(c, cl.alpha):
                assert a in (-li, li + 1)


class TestHamiltonianMatrix:
    def test_free_case(self):
        M = hamiltonian_matrix(parity_basis(Couplings(0, 0, 0, 0)), SQUARE)
        assert M.shape == (1, 1) and abs(M[0, 0]) < 1e-14

    def test_lame_band_edges(self):
        e = lattice_constants(SQUARE).e
        ev = np.sort_complex(spectrum(Couplings(1, 0, 0, 0), SQUARE))
        assert np.allclose(ev, np.sort_complex(-np.array(e)), atol=1e-12)

    @pytest.mark.parametrize("l", [(2, 1, 0, 0), (1, 1, 1, 1), (2, 0, 1, 0), (3, 1, 2, 0)])
    def test_block_structure_and_degree(self, l):
        sp = parity_basis(Couplings(*l))
        M = hamiltonian_matrix(sp, SQUARE)
        assert M.shape[0] == invariant_dimension(Couplings(*l))
        k = 0
        mask = np.ones_like(M, dtype=bool)
        for n in block_sizes(sp):
            mask[k:k + n, k:k + n] = False
            k += n
        assert np.max(np.abs(M[mask]), initial=0) <= 1e-10

    @pytest.mark.parametrize("l", [(2, 1, 0, 0), (1, 1, 1, 0)])
    def test_collocation_agrees(self, l):
        sp = parity_basis(Couplings(*l))
        lat = Lattice.normalized(0.3 + 0.8j)
        a = np.sort_complex(np.linalg.eigvals(hamiltonian_matrix(sp, lat)))
        b = np.sort_complex(np.linalg.eigvals(hamiltonian_matrix(sp, lat, "collocation", seed=3)))
        assert np.allclose(a, b, atol=1e-7 * np.max(np.abs(a)))

    @pytest.mark.parametrize("tau", [1j, 0.8j, 1.3j, 0.3 + 0.8j])
    def test_distinct_eigenvalues(self, tau):
        lat = Lattice.normalized(tau)
        for c in couplings_up_to(5):
            if c.l2 or c.l3:
                continue
            ev = spectrum(c, lat)
            gaps = [abs(a - b) for a, b in itertools.combinations(ev, 2)]
            assert min(gaps, default=1.0) > 1e-6

    def test_real_spectrum_on_rectangular_lattice(self):
        ev = spectrum(Couplings(3, 1, 0, 0), Lattice.normalized(0.8j))
        assert np.max(np.abs(ev.imag)) < 1e-8 * np.max(np.abs(ev))


class TestTwistedPolynomials:
    @pytest.mark.parametrize("l0,l1", [(1, 0), (2, 1), (3, 0), (3, 2), (1, 3)])
    def test_degrees_sum(self, l0, l1):
        polys = twisted_char_polys(l0, l1, lattice_constants(SQUARE))
        assert len(polys) == 4
        assert sum(p["degree"] for p in polys) == 2 * max(l0, l1) + 1

    @pytest.mark.parametrize("tau", [1j, 0.8j])
    def test_real_distinct_roots(self, tau):
        lc = lattice_constants(Lattice.normalized(tau))
        assert ((lc.e2 - lc.e1) * (lc.e2 - lc.e3)).real < 0
        for l0, l1 in [(1, 0), (2, 1), (3, 1)]:
            for p in twisted_char_polys(l0, l1, lc):
                if p["degree"] == 0:
                    continue
                r = np.roots(p["coeffs"][::-1])
                assert np.max(np.abs(r.imag)) < 1e-8 * (1 + np.max(np.abs(r)))
                if len(r) > 1:
                    assert min(abs(a - b) for a, b in itertools.combinations(r, 2)) > 1e-6

    @pytest.mark.parametrize("l0,l1,tau", [(1, 0, 1j), (2, 1, 1j), (3, 2, 0.3 + 0.8j), (2, 2, 1.3j)])
    def test_product_is_char_poly(self, l0, l1, tau):
        lat = Lattice.normalized(tau)
        prod = np.array([1.0 + 0j])
        for p in twisted_char_polys(l0, l1, lattice_constants(lat)):
            prod = npp.polymul(prod, p["coeffs"])
        M = hamiltonian_matrix(parity_basis(Couplings(l0, l1, 0, 0)), lat)
        ref = monic_char_poly(M)
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(prod - ref)) <= 1e-8 * scale
