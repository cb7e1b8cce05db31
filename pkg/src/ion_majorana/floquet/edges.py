"""Open-chain quasienergy spectra and edge modes at 0 and pi/T along a sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..spectra import EdgeModeReport, diagonalize, edge_modes
from .common import QuasienergySpectrum, effective_hamiltonian
from .sine import SineDrive, sine_real_space, sliced_propagator
from .step import StepDrive, step_monodromy

EDGE_TOL = 1e-3  # quasienergy tolerance in units of 1/T


@dataclass(frozen=True, eq=False)
class FloquetEdgePoint:
    value: float
    spectrum: QuasienergySpectrum
    zero: EdgeModeReport
    pi: EdgeModeReport

    @property
    def counts(self) -> tuple[int, int]:
        return self.zero.count, self.pi.count


def _reports(spec: QuasienergySpectrum, tol: float, threshold: float):
    t = spec.period
    s = spec.as_spectrum()
    zero = edge_modes(s, 0.0, tol / t, threshold, period=2 * np.pi / t)
    pi = edge_modes(s, np.pi / t, tol / t, threshold, period=2 * np.pi / t)
    return zero, pi


def step_edge_point(b: float, drive: StepDrive, n: int = 200, tol: float = EDGE_TOL,
                    threshold: float = 0.9) -> FloquetEdgePoint:
    u = step_monodromy(b, drive, n=n, boundary="open")
    spec, _ = effective_hamiltonian(u, drive.period)
    return FloquetEdgePoint(float(b), spec, *_reports(spec, tol, threshold))


def step_edge_sweep(bs, drive: StepDrive, n: int = 200, tol: float = EDGE_TOL,
                    threshold: float = 0.9) -> list[FloquetEdgePoint]:
    return [step_edge_point(float(b), drive, n, tol, threshold) for b in np.asarray(bs, dtype=float)]


def sine_edge_point(b0: float, j1: float, j2: float, omega: float, n: int = 200,
                    tol: float = EDGE_TOL, threshold: float = 0.9,
                    method: str = "effective") -> FloquetEdgePoint:
    """Edge modes of the sine drive.

    ``method="effective"`` diagonalizes the Magnus Hamiltonian directly
    (quasienergies are then its eigenvalues folded into the zone);
    ``"sliced"`` uses the brute-force propagator.
    """
    drive = SineDrive(float(b0), float(omega))
    t = drive.period
    if method == "effective":
        s = diagonalize(sine_real_space(j1, j2, drive, n, "open"))
        w = np.pi / t
        eps = (s.eigenvalues + w) % (2 * w) - w
        eps = np.where(eps == -w, w, eps)
        order = np.argsort(eps, kind="stable")
        spec = QuasienergySpectrum(eps[order], s.eigenvectors[:, order], t, False)
    elif method == "sliced":
        u = sliced_propagator(j1, j2, drive, n=n, boundary="open").unitary
        spec, _ = effective_hamiltonian(u, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FloquetEdgePoint(float(b0), spec, *_reports(spec, tol, threshold))


def floquet_edge_modes(values, drive, n: int = 200, tol: float = EDGE_TOL, **kwargs) -> list[FloquetEdgePoint]:
    """Sweep B (step drive) or B0 (sine drive, needs ``j1``, ``j2`` kwargs)."""
    if isinstance(drive, StepDrive):
        return step_edge_sweep(values, drive, n, tol, kwargs.get("threshold", 0.9))
    if isinstance(drive, SineDrive):
        j1, j2 = kwargs.pop("j1"), kwargs.pop("j2")
        return [sine_edge_point(float(v), j1, j2, drive.omega, n, tol, **kwargs)
                for v in np.asarray(values, dtype=float)]
    raise TypeError(f"unsupported drive {drive!r}")
