"""Propagators, matrix logarithms and quasienergy bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from ..model import HADAMARD, SX, SY, SZ
from ..spectra import SpectrumResult, fix_phases

UNITARITY_TOL = 1e-10
LOG_RESIDUAL_TOL = 1e-9
BRANCH_CUT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuasienergySpectrum:
    """Quasienergies in (-pi/T, pi/T], ascending, with orthonormal eigenvectors."""

    quasienergies: np.ndarray
    eigenvectors: np.ndarray
    period: float
    at_branch_cut: bool

    @property
    def zone(self) -> float:
        return np.pi / self.period

    def as_spectrum(self, basis: str = "nambu") -> SpectrumResult:
        return SpectrumResult(self.quasienergies, self.eigenvectors, basis)


def propagate(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for a Hermitian matrix or a stack of them."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def unitarity_residual(u: np.ndarray) -> float:
    eye = np.eye(u.shape[-1])
    return float(np.abs(np.swapaxes(u.conj(), -1, -2) @ u - eye).max())


def phases_to_quasienergies(phases: np.ndarray, period: float) -> np.ndarray:
    """Map eigenphases arg(lambda) in (-pi, pi] to quasienergies in (-pi/T, pi/T]."""
    eps = -np.asarray(phases) / period
    return np.where(eps <= -np.pi / period, eps + 2 * np.pi / period, eps)


def effective_hamiltonian(u: np.ndarray, period: float) -> tuple[QuasienergySpectrum, np.ndarray]:
    """``H_eff = (i/T) ln U`` on the principal branch.

    The complex Schur form of a unitary is diagonal up to rounding and comes
    with a unitary basis, so degenerate eigenphase clusters stay orthonormal.
    """
    u = np.asarray(u, dtype=complex)
    if unitarity_residual(u) > UNITARITY_TOL:
        raise ValueError("input is not unitary")
    tri, z = schur(u, output="complex")
    lam = np.diag(tri)
    phases = np.angle(lam)
    eps = phases_to_quasienergies(phases, period)
    order = np.argsort(eps, kind="stable")
    eps, z = eps[order], z[:, order]
    h = (z * eps) @ z.conj().T
    h = (h + h.conj().T) / 2
    recon = (z * np.exp(-1j * eps * period)) @ z.conj().T
    residual = float(np.abs(recon - u).max())
    if residual > LOG_RESIDUAL_TOL:
        raise ArithmeticError(f"matrix logarithm residual {residual:.2e}")
    at_cut = bool(np.any(np.pi - np.abs(phases) < BRANCH_CUT_TOL))
    return QuasienergySpectrum(eps, fix_phases(z), float(period), at_cut), h


def su2_parts(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``u = eps I - i r.tau`` for a stack of SU(2) matrices."""
    eps = np.real(np.trace(u, axis1=-2, axis2=-1)) / 2
    r = np.stack([np.real(0.5j * np.trace(u @ p, axis1=-2, axis2=-1)) for p in (SX, SY, SZ)], axis=-1)
    return eps, r


def su2_matrix(eps: np.ndarray, r: np.ndarray) -> np.ndarray:
    eps = np.asarray(eps, dtype=complex)
    return (eps[..., None, None] * np.eye(2) - 1j * (r[..., 0, None, None] * SX
            + r[..., 1, None, None] * SY + r[..., 2, None, None] * SZ))


def su2_phase(eps: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Eigenphase magnitude ``arccos(eps)`` in [0, pi], evaluated stably near 0 and pi."""
    return np.arctan2(np.linalg.norm(r, axis=-1), eps)


def su2_log(u: np.ndarray, period: float) -> np.ndarray:
    """Principal ``(i/T) ln u`` for a stack of SU(2) matrices.

    Equal to ``arccos(eps)/T * r.tau/|r|``. Where ``u = -I`` the direction is
    undefined; callers must have checked the pi gap first.
    """
    eps, r = su2_parts(u)
    theta, norm = su2_phase(eps, r), np.linalg.norm(r, axis=-1)
    scale = np.where(norm > 0, theta / np.where(norm > 0, norm, 1.0), 0.0) / period
    n = r * scale[..., None]
    return n[..., 0, None, None] * SX + n[..., 1, None, None] * SY + n[..., 2, None, None] * SZ


def chiral_offdiagonal(h: np.ndarray) -> np.ndarray:
    """Lower-left entry of a 2x2 chiral Hamiltonian in the tau_x eigenbasis."""
    return (HADAMARD @ h @ HADAMARD)[..., 1, 0]


def chiral_residual(h: np.ndarray) -> float:
    """``max ||tau_x h tau_x + h||`` over a stack."""
    return float(np.abs(SX @ h @ SX + h).max())
