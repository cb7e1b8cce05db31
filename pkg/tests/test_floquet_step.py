import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ion_majorana.errors import ConfigError, GapClosedError
from ion_majorana.floquet import drive_from_dict, step_edge_point
from ion_majorana.floquet.common import effective_hamiltonian, propagate, su2_matrix, unitarity_residual
from ion_majorana.floquet.step import (StepDrive, chiral_frame_windings, epsilon_r, frame_hamiltonians,
                                       frame_monodromies, invariant_sweep, step_boundaries,
                                       step_boundary_curves, step_monodromy, step_quasienergies)
from ion_majorana.model import ChainSpec, momentum_grid, uniform_stack
from ion_majorana.topology import AxisSpec, winding_number

FIG3 = StepDrive(0.8, 4 / 3, 0.5, 1.3)
val = st.floats(-2, 2)
dur = st.floats(0.05, 2)


def test_drive_validation_and_round_trip():
    with pytest.raises(ValueError):
        StepDrive(1, 1, 0.0, 1)
    assert drive_from_dict(FIG3.to_dict()) == FIG3
    with pytest.raises(ConfigError):
        drive_from_dict({"type": "step", "u1": 1})
    assert FIG3.period == pytest.approx(1.8)


def test_monodromy_identical_steps():
    d = StepDrive(0.9, 0.9, 0.4, 0.7)
    k = momentum_grid(31)
    np.testing.assert_allclose(step_monodromy(0.3, d, k), propagate(uniform_stack(0.9, 0.3, k), 1.1), atol=1e-12)


def test_monodromy_short_second_step():
    d = StepDrive(0.9, 1.7, 0.6, 1e-9)
    np.testing.assert_allclose(step_monodromy(0.4, d, 0.7), propagate(uniform_stack(0.9, 0.4, 0.7), 0.6),
                               atol=1e-8)


def test_real_space_monodromy_unitary():
    u = step_monodromy(1.1, FIG3, n=40)
    assert u.shape == (80, 80)
    assert unitarity_residual(u) < 1e-10
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(val, val, dur, dur, val, st.floats(-np.pi, np.pi))
def test_epsilon_r_closed_form(u1, u2, t1, t2, b, k):
    d = StepDrive(u1, u2, t1, t2)
    eps, r = epsilon_r(b, d, k)
    assert abs(eps**2 + r @ r - 1) < 1e-12
    u = step_monodromy(b, d, k)
    np.testing.assert_allclose(su2_matrix(eps, r), u, atol=1e-12)
    assert unitarity_residual(u) < 1e-10


def test_aligned_vectors_reduce_to_cosine():
    # at k = 0, d_j = (0, 0, 2U_j - 2B) so the two rotations share an axis
    b = 1.0
    for u1, u2 in [(1.2, 4 / 3), (-0.5, 4 / 3), (0.3, 0.6)]:
        d = StepDrive(u1, u2, 0.5, 1.3)
        eps, _ = epsilon_r(b, d, 0.0)
        a1, a2 = 2 * abs(u1 - b) * d.t1, 2 * abs(u2 - b) * d.t2
        same = (u1 - b) * (u2 - b) > 0
        assert eps == pytest.approx(np.cos(a1 + a2 if same else a1 - a2), abs=1e-12)


def test_effective_hamiltonian_identity_and_static_limit():
    spec, h = effective_hamiltonian(np.eye(6), 2.0)
    assert np.abs(h).max() < 1e-15 and not spec.at_branch_cut
    h0 = np.linalg.qr(np.random.default_rng(1).normal(size=(6, 6)))[0]
    h0 = h0 @ np.diag([0.4, -0.3, 0.2, -0.1, 0.5, 0.0]) @ h0.T
    spec, h = effective_hamiltonian(propagate(h0, 3.0), 3.0)
    np.testing.assert_allclose(h, h0, atol=1e-10)
    assert np.all(np.abs(spec.quasienergies) <= np.pi / 3.0)
    with pytest.raises(ValueError):
        effective_hamiltonian(2 * np.eye(2), 1.0)


def test_effective_hamiltonian_branch_cut_flag():
    spec, _ = effective_hamiltonian(-np.eye(2), 1.0)
    assert spec.at_branch_cut
    np.testing.assert_allclose(spec.quasienergies, [np.pi, np.pi])


def test_effective_hamiltonian_reconstructs_real_space_monodromy():
    u = step_monodromy(1.3, FIG3, n=60)
    spec, h = effective_hamiltonian(u, FIG3.period)
    np.testing.assert_allclose(propagate(h, FIG3.period), u, atol=1e-9)


def test_frames_share_quasienergies():
    ks = momentum_grid(51)
    for b in (0.2, 1.3, 3.7):
        q = step_quasienergies(b, FIG3, ks)
        for h in frame_hamiltonians(b, FIG3, ks):
            w = np.linalg.eigvalsh(h)
            np.testing.assert_allclose(w[:, 1], q, atol=1e-10)
            np.testing.assert_allclose(w[:, 0], -q, atol=1e-10)
        for u in frame_monodromies(b, FIG3, ks):
            assert unitarity_residual(u) < 1e-10


def test_static_limit_windings():
    for b, w in [(0.4, 1), (1.6, 0)]:
        inv = chiral_frame_windings(b, StepDrive(1.0, 1.0, 0.1, 0.1))
        assert (inv.w0, inv.wpi) == (w, 0)
        assert inv.w1 == inv.w2
        assert winding_number(ChainSpec(200, 1.0, 1.0, b, "periodic")).value == w


def test_frames_are_chiral_and_invariants_integer():
    for b in np.linspace(0.05, 4.95, 25):
        try:
            inv = chiral_frame_windings(float(b), FIG3)
        except GapClosedError:
            continue
        assert inv.chiral_residual < 1e-8 and inv.integer_residual == 0


def test_time_origin_only_exchanges_frames():
    swapped = StepDrive(FIG3.u2, FIG3.u1, FIG3.t2, FIG3.t1)
    for b in (0.15, 0.9, 1.3, 1.75, 3.0):
        a, c = chiral_frame_windings(b, FIG3), chiral_frame_windings(b, swapped)
        assert (a.w1, a.w2) == (c.w2, c.w1)
        assert a.w0 == c.w0 and abs(a.wpi) == abs(c.wpi)


def test_gap_closing_raises():
    pts = step_boundaries(FIG3, (0.0, 1.0))
    with pytest.raises(GapClosedError):
        chiral_frame_windings(pts[0].b, FIG3)


def test_boundaries_sit_on_eigenphase_zero_or_pi():
    pts = step_boundaries(FIG3, (0.0, 5.0))
    assert len(pts) >= 10
    for p in pts:
        eps, r = epsilon_r(p.b, FIG3, p.k)
        phase = np.arctan2(np.linalg.norm(r), eps)
        target = 0.0 if p.gap == "zero" else np.pi
        assert abs(phase - target) < 1e-8, p


def test_boundary_parity_rules():
    for p in step_boundaries(FIG3, (0.0, 5.0)):
        if p.family == "resonant":
            assert (p.gap == "zero") == ((p.n1 - p.n2) % 2 == 0)
        else:
            assert p.gamma in (0.0, np.pi) and p.sign in "+-"
            assert (p.gap == "zero") == (p.n % 2 == 0)


def test_invariants_constant_between_boundaries():
    bs = np.linspace(0.0, 5.0, 201)
    pts = [p.b for p in step_boundaries(FIG3, (0.0, 5.0))]
    sweep = invariant_sweep(FIG3, bs, kgrid=401)
    prev = None
    for s in sweep:
        if s.invariants is None:
            prev = None
            continue
        cur = (s.invariants.w0, s.invariants.wpi)
        if prev is not None and cur != prev[1]:
            assert any(prev[0] <= x <= s.b for x in pts)
        prev = (s.b, cur)


def test_boundary_curves_in_b_t1_plane():
    b_axis, t_axis = AxisSpec("b", 0, 5, 50), AxisSpec("t1", 0.1, 4.0, 50)
    curves = step_boundary_curves(FIG3, b_axis, t_axis)
    labels = {c.label for c in curves}
    assert "n_0,+=2" in labels and "n_pi,+=2" in labels
    # the fixed-drive points at t1 = 0.5 lie on the plane curves
    for p in step_boundaries(FIG3, (0.0, 5.0)):
        near = [c for c in curves if c.meta["gap"] == p.gap
                and np.any((np.abs(c.points[:, 0] - p.b) < 0.02) & (np.abs(c.points[:, 1] - 0.5) < 0.02))]
        assert near, p


def test_edge_modes_at_both_gaps():
    pt = step_edge_point(1.3, FIG3, n=200)
    inv = chiral_frame_windings(1.3, FIG3)
    assert (inv.w0, inv.wpi) != (0, 0)
    assert pt.counts == (2 * abs(inv.w0), 2 * abs(inv.wpi))
    assert pt.counts[0] > 0 and pt.counts[1] > 0


def test_static_drive_has_no_pi_modes():
    d = StepDrive(1.0, 1.0, 0.2, 0.3)
    for b in (0.3, 0.8, 1.5):
        assert step_edge_point(b, d, n=80).counts[1] == 0
