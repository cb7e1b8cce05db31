"""Periodically driven chains: two-step hopping drive and sinusoidal field drive."""

from .common import QuasienergySpectrum, effective_hamiltonian, propagate
from .edges import FloquetEdgePoint, floquet_edge_modes, sine_edge_point, step_edge_point
from .sine import (SineBoundary, SineDrive, magnus_deviation, sine_boundary, sine_dipole,
                   sine_effective, sine_real_space, sine_winding, sliced_propagator)
from .step import (BoundaryPoint, FloquetInvariants, StepDrive, chiral_frame_windings, epsilon_r,
                   quasienergy_gaps, step_boundaries, step_boundary_curves, step_monodromy)


def drive_from_dict(d: dict):
    from ..errors import ConfigError

    kind = d.get("type")
    if kind == "step":
        return StepDrive.from_dict(d)
    if kind == "sine":
        return SineDrive.from_dict(d)
    raise ConfigError(f"drive type must be 'step' or 'sine', got {kind!r}")
