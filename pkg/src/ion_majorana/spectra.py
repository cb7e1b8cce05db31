"""Diagonalization, band-gap scans and edge-mode extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import BdGOperator, ChainSpec, bloch_stack, momentum_grid, real_space_bdg


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: str

    def __len__(self):
        return len(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class EdgeModeReport:
    target: float
    energies: np.ndarray
    profiles: np.ndarray  # (count, sites), each row sums to 1
    edge_fraction: np.ndarray
    left_fraction: np.ndarray
    right_fraction: np.ndarray
    localized: np.ndarray

    @property
    def count(self) -> int:
        return len(self.energies)

    @property
    def localized_count(self) -> int:
        return int(np.count_nonzero(self.localized))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real and positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return vectors / phases


def diagonalize(op: BdGOperator) -> SpectrumResult:
    if not isinstance(op, BdGOperator):
        op = BdGOperator(op, "unspecified")
    w, v = np.linalg.eigh(op.matrix)
    return SpectrumResult(w, fix_phases(v), op.basis)


def open_spectrum(spec: ChainSpec, pairing_scale: float = 1.0) -> SpectrumResult:
    return diagonalize(real_space_bdg(spec.replace(boundary="open"), pairing_scale))


def bloch_bands(j1, j2, onsite, ks, pairing_scale=1.0) -> np.ndarray:
    """Ascending four-band energies, shape ``(len(ks), 4)``."""
    return np.linalg.eigvalsh(bloch_stack(j1, j2, onsite, ks, pairing_scale))


def _gap_from_bands(bands: np.ndarray, selector: str) -> np.ndarray:
    if selector == "zero":
        return bands[..., 2] - bands[..., 1]
    if selector == "nonzero":
        return bands[..., 3] - bands[..., 2]
    raise ValueError(f"gap selector must be 'zero' or 'nonzero', got {selector!r}")


def min_gap_bands(j1, j2, onsite, selector="zero", ks=None, pairing_scale=1.0,
                  refine=False) -> tuple[float, float]:
    ks = momentum_grid() if ks is None else np.asarray(ks, dtype=float)
    gaps = _gap_from_bands(bloch_bands(j1, j2, onsite, ks, pairing_scale), selector)
    i = int(np.argmin(gaps))
    gap, kmin = float(gaps[i]), float(ks[i])
    if refine:
        step = 2 * np.pi / len(ks)

        def g(k):
            return float(_gap_from_bands(bloch_bands(j1, j2, onsite, k, pairing_scale), selector))

        res = minimize_scalar(g, bounds=(kmin - step, kmin + step), method="bounded",
                              options={"xatol": 1e-13})
        if res.fun < gap:
            gap, kmin = float(res.fun), float(res.x)
    return gap, kmin


def min_gap(spec: ChainSpec, gap_selector: str = "zero", ks=None, refine=False) -> tuple[float, float]:
    """Smallest separation of the middle (``zero``) or upper (``nonzero``) band pair."""
    return min_gap_bands(spec.j1, spec.j2, 2 * spec.b, gap_selector, ks, refine=refine)


def upper_gap_window(j1, j2, onsite, ks=None, pairing_scale=1.0) -> tuple[float, float]:
    """Bulk window between the top of band 3 and the bottom of band 4."""
    ks = momentum_grid() if ks is None else ks
    bands = bloch_bands(j1, j2, onsite, ks, pairing_scale)
    return float(bands[:, 2].max()), float(bands[:, 3].min())


def site_profiles(vectors: np.ndarray) -> np.ndarray:
    """``|u_i|^2 + |v_i|^2`` per site for Nambu column vectors, normalized."""
    n = vectors.shape[0] // 2
    p = np.abs(vectors[:n]) ** 2 + np.abs(vectors[n:]) ** 2
    return (p / p.sum(axis=0)).T


def _wrapped(delta, period):
    if period is None:
        return delta
    return (delta + period / 2) % period - period / 2


def edge_modes(spectrum: SpectrumResult, target: float = 0.0, tol: float = 1e-4,
               edge_fraction_threshold: float = 0.9, *, window=None, period=None,
               bulk_gap=None) -> EdgeModeReport:
    """Collect eigenstates near ``target`` and measure how edge-localized they are.

    ``window=(lo, hi)`` replaces the ``|E - target| < tol`` test with a strict
    in-gap test. ``period`` (2 pi/T for quasienergies) makes distances
    periodic so that +pi/T and -pi/T are one target. Passing ``bulk_gap``
    enables the ambiguity check ``tol <= bulk_gap / 2``.
    """
    if bulk_gap is not None and window is None and tol > bulk_gap / 2:
        raise ValueError(f"tol={tol:g} exceeds half the bulk gap ({bulk_gap:g}); use a smaller tol")
    e = np.asarray(spectrum.eigenvalues)
    if window is not None:
        lo, hi = window
        mask = (e > lo) & (e < hi)
    else:
        mask = np.abs(_wrapped(e - target, period)) < tol
    profiles = site_profiles(spectrum.eigenvectors[:, mask])
    sites = profiles.shape[1] if profiles.size else spectrum.eigenvectors.shape[0] // 2
    w = max(1, sites // 10)
    left = profiles[:, :w].sum(axis=1)
    right = profiles[:, sites - w:].sum(axis=1)
    edge = left + right
    return EdgeModeReport(float(target), e[mask], profiles, edge, left, right,
                          edge > edge_fraction_threshold)
