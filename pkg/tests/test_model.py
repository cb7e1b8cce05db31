import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ion_majorana.errors import SymmetryViolation
from ion_majorana.model import (SX, SY, SZ, S0, BdGOperator, ChainSpec, antidiagonal_block,
                                antidiagonal_d, bloch_bdg, bloch_stack, bloch_uniform,
                                check_symmetries, momentum_grid, real_space_bdg, symmetry_residuals)

coupling = st.floats(-2, 2, allow_nan=False)
momentum = st.floats(-np.pi + 1e-9, np.pi)


def test_chainspec_validation():
    with pytest.raises(ValueError):
        ChainSpec(5, 1, 1, 0)
    with pytest.raises(ValueError):
        ChainSpec(2, 1, 1, 0)
    with pytest.raises(ValueError):
        ChainSpec(4, float("nan"), 1, 0)
    with pytest.raises(ValueError):
        ChainSpec(4, 1, 1, 0, "twisted")
    s = ChainSpec(8, 0.5, 1.0, 0.3, "periodic")
    assert ChainSpec.from_dict(s.to_dict()) == s
    assert s.cells == 4


def test_momentum_grid():
    k = momentum_grid(1001)
    assert len(k) == 1001 and 0.0 in k
    assert k.min() > -np.pi and k.max() < np.pi
    np.testing.assert_allclose(momentum_grid(8), -np.pi + 2 * np.pi * np.arange(8) / 8)


def test_bloch_k0_uniform_no_field():
    h = bloch_bdg(ChainSpec(4, 1, 1, 0), 0.0).matrix
    np.testing.assert_allclose(h, 2 * np.kron(SX, SZ), atol=0)


def test_bloch_flat_bands_without_inter_cell_coupling():
    h = bloch_stack(0.7, 0.0, 0.6, momentum_grid(51))
    assert np.all(h == h[0])


@settings(max_examples=50, deadline=None)
@given(coupling, coupling, coupling, momentum)
def test_bloch_hermitian_and_chiral(j1, j2, b, k):
    h = bloch_bdg(ChainSpec(4, j1, j2, b), k).matrix
    s = np.kron(S0, SX)
    assert np.abs(h - h.conj().T).max() < 1e-12
    assert np.abs(s @ h @ s + h).max() < 1e-12
    w = np.linalg.eigvalsh(h)
    np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-10)


def test_bloch_uniform_examples():
    np.testing.assert_allclose(bloch_uniform(1.3, 0.4, 0.0).matrix, (2 * 1.3 - 0.8) * SZ)
    h = bloch_uniform(1.0, 0.0, np.pi / 2).matrix
    np.testing.assert_allclose(h, -2 * SY, atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-2, 2])
    ks = np.linspace(-np.pi, np.pi, 100, endpoint=False)
    for k in ks:
        w = np.linalg.eigvalsh(bloch_uniform(0.8, 0.3, k).matrix)
        e = 2 * np.sqrt(0.64 - 2 * 0.8 * 0.3 * np.cos(k) + 0.09)
        np.testing.assert_allclose(w, [-e, e], atol=1e-12)


def test_real_space_hand_expansion_n4():
    j1, j2, b = 0.7, 1.3, 0.4
    m = real_space_bdg(ChainSpec(4, j1, j2, b)).matrix
    h = np.array([[-2 * b, j1, 0, 0], [j1, -2 * b, j2, 0], [0, j2, -2 * b, j1], [0, 0, j1, -2 * b]])
    d = np.array([[0, j1, 0, 0], [-j1, 0, j2, 0], [0, -j2, 0, j1], [0, 0, -j1, 0]])
    np.testing.assert_allclose(m, np.block([[h, d], [-d, -h]]), atol=0)


def test_periodic_spectrum_matches_bloch_union():
    spec = ChainSpec(24, 0.6, 1.1, 0.45, "periodic")
    w = np.sort(np.linalg.eigvalsh(real_space_bdg(spec).matrix))
    ks = 2 * np.pi * np.arange(spec.cells) / spec.cells
    ks = np.where(ks > np.pi, ks - 2 * np.pi, ks)
    bands = np.sort(np.linalg.eigvalsh(bloch_stack(spec.j1, spec.j2, 2 * spec.b, ks)).ravel())
    np.testing.assert_allclose(w, bands, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(coupling, coupling, coupling)
def test_real_space_particle_hole_symmetric(j1, j2, b):
    w = np.linalg.eigvalsh(real_space_bdg(ChainSpec(10, j1, j2, b)).matrix)
    np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-10)


def test_open_spectrum_close_to_bulk_bands():
    spec = ChainSpec(400, 5 / 6, 5 / 4, 0.6)
    w = np.linalg.eigvalsh(real_space_bdg(spec).matrix)
    bands = np.linalg.eigvalsh(bloch_stack(spec.j1, spec.j2, 2 * spec.b, momentum_grid(4001)))
    lo, hi = bands.min(axis=0) - 1e-2, bands.max(axis=0) + 1e-2
    inside = np.zeros(len(w), dtype=bool)
    for a, c in zip(lo, hi):
        inside |= (w >= a) & (w <= c)
    assert np.count_nonzero(~inside) <= 8


def test_antidiagonal_block_literal_form():
    j1, j2, b = 0.7, 1.2, 0.35
    for k in np.linspace(-3, 3, 13):
        form = antidiagonal_block(ChainSpec(4, j1, j2, b), k)
        expected = (2 * (j2 * np.sin(k) + 1j * (j1 - j2 * np.cos(k))) * SX
                    - 2 * (1j * j2 * np.sin(k) + (j1 + j2 * np.cos(k))) * SY + 4j * b * SZ)
        np.testing.assert_allclose(form.d, expected, atol=1e-12)
        assert form.residual < 1e-10
        blk = np.block([[np.zeros((2, 2)), form.d / 2], [form.d.conj().T / 2, np.zeros((2, 2))]])
        np.testing.assert_allclose(np.linalg.eigvalsh(blk),
                                   np.linalg.eigvalsh(bloch_bdg(ChainSpec(4, j1, j2, b), k).matrix), atol=1e-10)


def test_antidiagonal_det_closed_form():
    # det D = 16 (B^2 - J1 J2 e^{ik})
    j1, j2, b, k = 0.9, 1.4, 0.6, 0.8
    d = antidiagonal_d(j1, j2, 2 * b, k)
    np.testing.assert_allclose(np.linalg.det(d), 16 * (b**2 - j1 * j2 * np.exp(1j * k)), atol=1e-12)
    # J1 = J2 = 1, B = 0, k = pi/2: the general expression gives (2+2i)(tau_x - tau_y)
    d = antidiagonal_d(1.0, 1.0, 0.0, np.pi / 2)
    np.testing.assert_allclose(d, (2 + 2j) * (SX - SY), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(d), -16j, atol=1e-12)


def test_uniform_d_needs_2j_on_ladder_terms():
    # 2i(J' tau_+ - J' e^{ik} tau_- + 2B tau_z) reproduces det D only for J' = 2J
    tp, tm = (SX + 1j * SY) / 2, (SX - 1j * SY) / 2

    def stated(jp, b, k):
        return 2j * (jp * tp - jp * np.exp(1j * k) * tm + 2 * b * SZ)

    for j, b, k in [(0.8, 0.3, 1.1), (1.0, 0.7, -2.0), (0.4, 0.9, 0.3)]:
        ours = np.linalg.det(antidiagonal_d(j, j, 2 * b, k))
        np.testing.assert_allclose(ours, np.linalg.det(stated(2 * j, b, k)), atol=1e-12)
    # with J' = J the stated form would close at |J| = 2|B| instead of |J| = |B|
    assert abs(np.linalg.det(stated(1.0, 0.5, 0.0))) < 1e-12
    assert abs(np.linalg.det(antidiagonal_d(1.0, 1.0, 1.0, 0.0))) > 1


def test_symmetry_checks():
    rep = check_symmetries(ChainSpec(4, 0.3, -1.1, 0.7))
    assert rep.max_residual < 1e-12
    pert = symmetry_residuals(lambda k: bloch_stack(0.3, -1.1, 1.4, k) + 0.2 * np.eye(4), momentum_grid(101))
    assert pert.chiral > 0.1


def test_symmetry_violation_raised(monkeypatch):
    import ion_majorana.model as m

    original = m.bloch_stack
    monkeypatch.setattr(m, "bloch_stack", lambda *a, **kw: original(*a, **kw) + 0.1 * np.eye(4))
    with pytest.raises(SymmetryViolation):
        m.check_symmetries(ChainSpec(4, 1, 1, 0.5))


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        BdGOperator(np.array([[0, 1j], [1j, 0]]), "x")
    h = bloch_bdg(ChainSpec(4, 1, 1, 0.5), 0.2).matrix
    with pytest.raises(ValueError):
        BdGOperator(h + 0.1j * np.kron(S0, SZ), "x")
