import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trottercost import oracles
from trottercost.hamiltonians import (
    FermionHamiltonian,
    GridSpec,
    Nucleus,
    hubbard,
    hubbard_bonds,
    jellium,
    jordan_wigner,
    material,
)
from trottercost.pauli import PauliString, QubitOperator, to_dense


def test_grid_volume_from_rs():
    g = GridSpec((3, 3, 3), spinful=True, wigner_seitz_radius=10.0)
    assert g.n_orbitals == 54 and g.electrons == 27
    assert g.omega == pytest.approx(27 * 4 * math.pi / 3 * 1000)
    assert GridSpec((4, 4), wigner_seitz_radius=2.0).omega == pytest.approx(8 * math.pi * 4)
    assert GridSpec((5,), wigner_seitz_radius=1.5).omega == pytest.approx(2 * 3.0)
    assert GridSpec((2, 2), volume=7.0).omega == 7.0


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        GridSpec((2, 2, 2, 2))
    with pytest.raises(ValueError):
        GridSpec((2, 2), eta=5)
    with pytest.raises(ValueError):
        jellium(GridSpec((2, 2)))


def test_jellium_has_no_external_potential():
    h = jellium(GridSpec((3, 2), spinful=True, wigner_seitz_radius=5.0))
    assert np.all(h.external == 0)


@pytest.mark.parametrize("lengths,spinful", [((4,), False), ((3, 2), True), ((2, 2, 2), False)])
def test_jellium_translation_invariant(lengths, spinful):
    h = jellium(GridSpec(lengths, spinful=spinful, wigner_seitz_radius=10.0))
    assert h.is_translation_invariant(atol=1e-12)


def test_jellium_kinetic_conserves_spin():
    g = GridSpec((3, 3), spinful=True, wigner_seitz_radius=10.0)
    h = jellium(g)
    up = [g.orbital(s, 0) for s in range(9)]
    down = [g.orbital(s, 1) for s in range(9)]
    assert np.all(h.kinetic[np.ix_(up, down)] == 0)


def test_jellium_matches_direct_summation():
    g = GridSpec((2, 2), wigner_seitz_radius=10.0)
    h = jellium(g)
    t, v, _ = oracles.plane_wave_coefficients((2, 2), g.omega)
    np.testing.assert_allclose(h.kinetic, t, atol=1e-12)
    np.testing.assert_allclose(h.interaction, v - np.diag(np.diag(v)), atol=1e-12)


def test_jellium_odd_grid_matches_direct_summation():
    g = GridSpec((3, 2), spinful=True, wigner_seitz_radius=4.0)
    h = jellium(g)
    t, v, _ = oracles.plane_wave_coefficients((3, 2), g.omega)
    idx = [g.orbital(s, 1) for s in range(6)]
    np.testing.assert_allclose(h.kinetic[np.ix_(idx, idx)], t, atol=1e-12)
    other = [g.orbital(s, 0) for s in range(6)]
    np.testing.assert_allclose(h.interaction[np.ix_(idx, other)], v, atol=1e-12)


def test_material_zero_charge_is_jellium():
    g = GridSpec((2, 2), wigner_seitz_radius=3.0)
    m = material(g, [Nucleus((0.4, 1.0), 0.0)])
    j = jellium(g)
    assert np.all(m.external == 0)
    np.testing.assert_array_equal(m.kinetic, j.kinetic)
    np.testing.assert_array_equal(m.interaction, j.interaction)


def test_material_matches_direct_summation():
    g = GridSpec((2, 2), wigner_seitz_radius=3.0)
    m = material(g, [Nucleus((0.4, 1.0), 1.5)])
    _, _, u = oracles.plane_wave_coefficients((2, 2), g.omega, [((0.4, 1.0), 1.5)])
    np.testing.assert_allclose(m.external, u, atol=1e-12)


def test_material_lattice_translation():
    g = GridSpec((4, 3), wigner_seitz_radius=2.0)
    side = g.omega ** 0.5
    spacing = side / 4
    base = material(g, [Nucleus((0.3, 0.7), 2.0)]).external
    moved = material(g, [Nucleus((0.3 + spacing, 0.7), 2.0)]).external
    # Moving the nucleus one site along x relabels the sites by the same shift.
    perm = [g.site_index((x - 1, y)) for x, y in map(g.site_coords, range(12))]
    np.testing.assert_allclose(moved, base[perm], atol=1e-12)
    wrapped = material(g, [Nucleus((0.3 + side, 0.7 - side), 2.0)]).external
    np.testing.assert_allclose(wrapped, base, atol=1e-12)


def test_hubbard_two_by_one_open():
    h = hubbard(2, 1, 1.0, 4.0, periodic=False)
    assert np.count_nonzero(np.triu(h.kinetic)) == 2
    assert np.count_nonzero(np.triu(h.interaction)) == 2
    assert np.all(h.external == 0)


def test_hubbard_periodic_hopping_count():
    bonds = hubbard_bonds(2, 2, periodic=True)
    degree = np.zeros(4, dtype=int)
    for a, b in bonds:
        degree[a] += 1
        degree[b] += 1
    assert list(degree) == [4, 4, 4, 4]
    n = 8
    assert 2 * len(bonds) == 2 * n


def test_hubbard_eight_by_eight_size():
    h = hubbard(8, 8, 1.0, 4.0)
    assert h.n_orbitals == 128
    assert h.kind == "hubbard"


def test_hubbard_spin_blocked_order():
    h = hubbard(2, 2, 1.0, 4.0, spin_order="blocked")
    assert h.interaction[0, 4] == 2.0


def test_jordan_wigner_diagonal_only():
    n = 3
    h = FermionHamiltonian(np.diag([1.0, -2.0, 0.5]), np.array([0.1, 0, 0]), np.zeros((n, n)),
                           GridSpec((3,), volume=1.0))
    for s, _ in jordan_wigner(h):
        assert s.x == 0


def test_jordan_wigner_two_site_hopping():
    t = np.array([[0.0, 1.0], [1.0, 0.0]])
    h = FermionHamiltonian(t, np.zeros(2), np.zeros((2, 2)), GridSpec((2,), volume=1.0))
    op = jordan_wigner(h)
    assert op.coefficient(PauliString.parse("X0 X1")) == 0.5
    assert op.coefficient(PauliString.parse("Y0 Y1")) == 0.5
    assert len(op) == 2


def test_jordan_wigner_hubbard_matches_fock_oracle():
    h = hubbard(2, 1, 1.0, 4.0)
    dense = to_dense(jordan_wigner(h), 4)
    np.testing.assert_allclose(
        dense, oracles.fock_hamiltonian(h.kinetic, h.external, h.interaction), atol=1e-12
    )


@st.composite
def fermion_hamiltonians(draw):
    n = draw(st.integers(2, 6))
    coeffs = st.floats(-1, 1)
    t = np.array([[draw(coeffs) for _ in range(n)] for _ in range(n)])
    v = np.array([[draw(coeffs) for _ in range(n)] for _ in range(n)])
    u = np.array([draw(coeffs) for _ in range(n)])
    v = v + v.T
    np.fill_diagonal(v, 0)
    return FermionHamiltonian(t + t.T, u, v, GridSpec((n,), volume=1.0))


@settings(max_examples=25, deadline=None)
@given(fermion_hamiltonians())
def test_jordan_wigner_spectrum_and_hermiticity(h):
    op = jordan_wigner(h)
    assert op.max_imag() < 1e-12
    n = h.n_orbitals
    qubit = np.linalg.eigvalsh(to_dense(op, n))
    fermion = np.linalg.eigvalsh(oracles.fock_hamiltonian(h.kinetic, h.external, h.interaction))
    np.testing.assert_allclose(qubit, fermion, atol=1e-9)


def test_jellium_jordan_wigner_matches_fock_oracle():
    h = jellium(GridSpec((3,), spinful=True, wigner_seitz_radius=2.0))
    np.testing.assert_allclose(
        to_dense(jordan_wigner(h), 6),
        oracles.fock_hamiltonian(h.kinetic, h.external, h.interaction),
        atol=1e-12,
    )


def test_scaled_is_linear():
    h = hubbard(2, 2, 1.0, 4.0)
    assert jordan_wigner(h.scaled(2.0)).isclose(jordan_wigner(h) * 2.0)
    assert isinstance(jordan_wigner(h), QubitOperator)
