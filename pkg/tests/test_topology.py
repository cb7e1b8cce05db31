import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ion_majorana.errors import GapClosedError
from ion_majorana.model import ChainSpec
from ion_majorana.spectra import min_gap_bands
from ion_majorana.topology import (DIPOLE_LENGTH, DIPOLE_NORMALIZATION, AxisSpec, BoundaryCurve,
                                   bracketed_roots, dipole_moment, eq4_residual, flag_near_boundaries,
                                   loop_winding, phase_diagram, static_boundary, static_phase_diagram,
                                   winding_from_function, winding_number)


def periodic(j1, j2, b, n=200):
    return ChainSpec(n, j1, j2, b, "periodic")


def test_uniform_winding():
    assert winding_number(periodic(1, 1, 0.5)).value == 1
    assert winding_number(periodic(1, 1, 1.5)).value == 0
    assert winding_number(periodic(-1, -1, 0.5)).value == 1


def test_dimerized_winding_window():
    assert winding_number(periodic(5 / 6, 5 / 4, 0.9)).value == 1
    assert winding_number(periodic(5 / 6, 5 / 4, 1.2)).value == 0


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 2))
def test_no_inter_cell_coupling_is_trivial(j1, b):
    assert winding_number(periodic(j1, 0.0, b)).value == 0


def test_winding_at_gap_closing_raises():
    with pytest.raises(GapClosedError):
        winding_number(periodic(1, 1, 1.0))


def test_winding_grid_refinement_invariance():
    for j1, j2, b in [(0.6, 1.3, 0.5), (1.2, 0.8, 0.99), (0.3, 0.4, 0.2)]:
        assert winding_number(periodic(j1, j2, b), 1001).value == winding_number(periodic(j1, j2, b), 4001).value


def test_loop_winding_circle():
    z = np.exp(2j * np.pi * np.arange(50) / 50)
    assert loop_winding(z ** 3)[0] == pytest.approx(3)
    with pytest.raises(GapClosedError):
        # a step of 3 pi/5 is too coarse to unwrap, even after refinement of a fixed sampling
        winding_from_function(lambda k: np.exp(1j * 300 * k), 11, max_refinements=0)


def test_static_boundary_examples():
    assert static_boundary(1.0, 1.0) == pytest.approx([1.0], abs=1e-7)
    assert static_boundary(0.0, 1.3) == pytest.approx([0.0], abs=1e-7)
    roots = static_boundary(5 / 6, 5 / 4)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(np.sqrt(5 / 6 * 5 / 4), abs=1e-7)
    assert static_boundary(-1.0, 1.0) == []


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 2), st.floats(0.2, 2))
def test_static_boundary_closes_gap(j1, j2):
    for b in static_boundary(j1, j2):
        assert abs(eq4_residual(b, j1, j2)) < 1e-9 * (j1**2 + j2**2)
        assert min_gap_bands(j1, j2, 2 * b, "zero", refine=True)[0] < 1e-6


def test_bracketed_roots_sign_changes_and_touching():
    roots = bracketed_roots(lambda x: (x - 0.3) * (x - 0.7) ** 2, 0.0, 1.0, 50, 1e-12)
    assert roots == pytest.approx([0.3, 0.7], abs=1e-6)


def test_dipole_frozen_convention():
    assert (DIPOLE_LENGTH, DIPOLE_NORMALIZATION) == ("cells", "cells")
    assert dipole_moment(periodic(0.1, 0.5, 1.0)).value == pytest.approx(0.5, abs=1e-3)
    assert dipole_moment(periodic(1.5, 0.5, 1.0)).value == pytest.approx(0.0, abs=1e-3)


def test_dipole_origin_shift_is_integer():
    spec = periodic(0.3, 0.5, 1.0, 40)
    a, b = dipole_moment(spec, origin=1), dipole_moment(spec, origin=2)
    d = (a.value - b.value) % 1.0
    assert min(d, 1 - d) < 1e-6


def test_dipole_needs_periodic_chain():
    with pytest.raises(ValueError):
        dipole_moment(ChainSpec(20, 0.3, 0.5, 1.0))


def test_phase_diagram_uniform_region():
    axes = [AxisSpec("j", -2, 2, 21), AxisSpec("b", -2, 2, 21)]
    grid = static_phase_diagram(axes, "W", threads=1, n=8)
    assert grid.cell_count == 441
    jj, bb = np.meshgrid(axes[0].values(), axes[1].values(), indexing="ij")
    ok = ~grid.flagged
    assert ok.sum() > 200
    np.testing.assert_array_equal(grid.values[ok], (np.abs(jj) > np.abs(bb))[ok].astype(float))
    # everything flagged is near |J| = |B| or near the corner at the origin
    near = (np.abs(np.abs(jj) - np.abs(bb)) <= 0.4 + 1e-9) | (np.abs(jj) + np.abs(bb) <= 0.6 + 1e-9)
    assert np.all(near[grid.flagged])


def test_phase_diagram_dimerized_boundary_cells_trace_closing_locus():
    axes = [AxisSpec("j1", 0.2, 2.0, 10), AxisSpec("b", 0.0, 2.5, 11)]
    grid = static_phase_diagram(axes, "W", {"j2": 5 / 4}, threads=1, n=8)
    for i, j1 in enumerate(axes[0].values()):
        roots = static_boundary(j1, 5 / 4)
        for j, b in enumerate(axes[1].values()):
            near = any(abs(b - r) <= axes[1].step * (1 + 1e-9) for r in roots)
            if near:
                assert grid.flagged[i, j]


def test_phase_diagram_dipole_boundary_is_equal_couplings():
    axes = [AxisSpec("j1", 0.0, 1.0, 6), AxisSpec("b", 0.5, 1.5, 3)]
    grid = static_phase_diagram(axes, "P", {"j2": 0.5}, threads=1, n=20)
    j1 = axes[0].values()
    for i in range(6):
        if not grid.flagged[i].any():
            expected = 0.5 if j1[i] < 0.5 else 0.0
            np.testing.assert_allclose(grid.values[i], expected, atol=1e-3)
    assert grid.flagged[np.argmin(np.abs(j1 - 0.5))].all()


def test_phase_diagram_records_errors():
    def bad(params):
        raise GapClosedError("closed")

    grid = phase_diagram([AxisSpec("b", 0, 1, 3)], bad, threads=1)
    assert np.isnan(grid.values).all() and len(grid.errors) == 3


def test_flag_near_boundaries_single_point():
    axes = [AxisSpec("b", 0, 1, 11)]
    f = flag_near_boundaries(axes, [BoundaryCurve("x", np.array([[0.5]]))])
    assert f.tolist() == [False] * 4 + [True] * 3 + [False] * 4
