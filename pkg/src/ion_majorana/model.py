"""Bogoliubov-de Gennes operators for the dimerized transverse-field chain.

Conventions used everywhere in the package:

* Bloch 4x4 basis ``(a-particle, a-hole, b-particle, b-hole)``: sublattice
  Pauli matrices (tau) are the outer Kronecker factor, particle-hole (s) the
  inner one.
* Real-space Nambu basis ``(c_1 .. c_N, c_1^dag .. c_N^dag)`` with sites ordered
  a_1, b_1, a_2, b_2, ...; the many-body Hamiltonian is
  ``1/2 Psi^dag H Psi + const``.
* Energies are in units of J0, momenta in units of the inverse cell length.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SymmetryViolation

S0 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

BLOCH4 = "bloch4:(a+,a-,b+,b-)"
BLOCH2 = "bloch2:(particle,hole)"
NAMBU = "nambu:(c_1..c_N,c_1^+..c_N^+)"

HERMITICITY_TOL = 1e-12
SYMMETRY_TOL = 1e-10
DEFAULT_KGRID = 1001


@dataclass(frozen=True)
class ChainSpec:
    """Static chain: ``n`` sites, intra/inter-cell couplings and transverse field."""

    n: int
    j1: float
    j2: float
    b: float
    boundary: str = "open"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n!r}")
        for name in ("j1", "j2", "b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")

    @property
    def cells(self) -> int:
        return self.n // 2

    def replace(self, **changes) -> "ChainSpec":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSpec":
        return cls(n=int(d["n"]), j1=float(d["j1"]), j2=float(d["j2"]), b=float(d["b"]),
                   boundary=d.get("boundary", "open"))

    def to_dict(self) -> dict:
        return {"n": self.n, "j1": self.j1, "j2": self.j2, "b": self.b, "boundary": self.boundary}


@dataclass(frozen=True, eq=False)
class BdGOperator:
    """A Hermitian matrix together with its basis layout tag."""

    matrix: np.ndarray
    basis: str
    k: float | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m - m.conj().T).max(initial=0.0) > HERMITICITY_TOL * scale:
            raise ValueError("operator is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SymmetryReport:
    particle_hole: float
    time_reversal: float
    chiral: float

    @property
    def max_residual(self) -> float:
        return max(self.particle_hole, self.time_reversal, self.chiral)


@dataclass(frozen=True, eq=False)
class AntidiagonalForm:
    """``d`` in the 16(B^2 - J1 J2 e^{ik}) normalization; ``unitary^dag H unitary = [[0, d/2], [d^dag/2, 0]]``."""

    d: np.ndarray
    unitary: np.ndarray
    residual: float


def momentum_grid(m: int = DEFAULT_KGRID) -> np.ndarray:
    """Uniform Brillouin-zone grid of ``m`` points, symmetric about k=0.

    For odd ``m`` the grid contains k=0 and avoids k=+-pi; for even ``m`` it is
    ``-pi + 2 pi n / m``.
    """
    m = int(m)
    if m < 3:
        raise ValueError("k-grid needs at least 3 points")
    n = np.arange(m)
    if m % 2:
        return 2 * np.pi * (n - (m - 1) // 2) / m
    return -np.pi + 2 * np.pi * n / m


def _check_k(k) -> float:
    k = float(k)
    if not (-np.pi - 1e-12 < k <= np.pi + 1e-12):
        raise ValueError(f"k must lie in (-pi, pi], got {k}")
    return k


def _kron_stack(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Kronecker product of a stack of 2x2 ``a`` with a fixed 2x2 ``s``."""
    out = np.einsum("...ij,kl->...ikjl", a, s)
    return out.reshape(a.shape[:-2] + (4, 4))


def _pauli_stack(c0, cx, cy, cz=0.0) -> np.ndarray:
    c0, cx, cy, cz = np.broadcast_arrays(*(np.asarray(c, dtype=complex) for c in (c0, cx, cy, cz)))
    return (c0[..., None, None] * S0 + cx[..., None, None] * SX
            + cy[..., None, None] * SY + cz[..., None, None] * SZ)


def bloch_stack(j1, j2, onsite, k, pairing_scale=1.0) -> np.ndarray:
    """Four-band Bloch matrices for an array of momenta.

    ``[onsite tau0 + (j1 + j2 cos k) tau_x + j2 sin k tau_y] s_z
    - pairing_scale [j2 sin k tau_x + (j1 - j2 cos k) tau_y] s_y``

    ``onsite = 2B`` and ``pairing_scale = 1`` give the static chain; the
    high-frequency sine drive uses ``onsite = B0`` and ``pairing_scale = f``.
    """
    k = np.asarray(k, dtype=float)
    c, s = np.cos(k), np.sin(k)
    normal = _pauli_stack(onsite, j1 + j2 * c, j2 * s)
    pairing = _pauli_stack(0.0, j2 * s, j1 - j2 * c)
    return _kron_stack(normal, SZ) - pairing_scale * _kron_stack(pairing, SY)


def bloch_bdg(spec: ChainSpec, k: float) -> BdGOperator:
    k = _check_k(k)
    return BdGOperator(bloch_stack(spec.j1, spec.j2, 2 * spec.b, k), BLOCH4, k)


def uniform_d_vector(j, b, k) -> np.ndarray:
    """Pauli vector ``d(k)`` of the two-band uniform chain, shape ``k.shape + (3,)``."""
    k = np.asarray(k, dtype=float)
    j = np.asarray(j, dtype=float)
    dy = -2 * j * np.sin(k)
    dz = 2 * j * np.cos(k) - 2 * b
    return np.stack(np.broadcast_arrays(np.zeros_like(dy), dy, dz), axis=-1)


def uniform_stack(j, b, k) -> np.ndarray:
    d = uniform_d_vector(j, b, k)
    return _pauli_stack(0.0, d[..., 0], d[..., 1], d[..., 2])


def bloch_uniform(j: float, b: float, k: float) -> BdGOperator:
    """``(2J cos k - 2B) tau_z - 2J sin k tau_y`` for the uniform chain."""
    k = _check_k(k)
    return BdGOperator(uniform_stack(j, b, k), BLOCH2, k)


def real_space_matrix(n: int, hopping, pairing, field: float, boundary: str = "open") -> np.ndarray:
    """Nambu matrix of a two-site-cell chain.

    ``hopping`` and ``pairing`` are the (intra, inter)-cell amplitudes; each bond
    contributes ``t c_i^dag c_j + Delta c_i^dag c_j^dag + h.c.`` and the field
    enters as ``-2 field sum_i c_i^dag c_i``.
    """
    h = np.zeros((n, n))
    delta = np.zeros((n, n))
    np.fill_diagonal(h, -2.0 * field)
    bonds = [(i, i + 1) for i in range(n - 1)]
    if boundary == "periodic":
        bonds.append((n - 1, 0))
    elif boundary != "open":
        raise ValueError(f"unknown boundary {boundary!r}")
    for i, j in bonds:
        t, d = (hopping[0], pairing[0]) if i % 2 == 0 else (hopping[1], pairing[1])
        h[i, j] += t
        h[j, i] += t
        delta[i, j] += d
        delta[j, i] -= d
    return np.block([[h, delta], [delta.conj().T, -h.conj()]]).astype(complex)


def real_space_bdg(spec: ChainSpec, pairing_scale: float = 1.0) -> BdGOperator:
    m = real_space_matrix(spec.n, (spec.j1, spec.j2),
                          (pairing_scale * spec.j1, pairing_scale * spec.j2),
                          spec.b, spec.boundary)
    return BdGOperator(m, NAMBU)


def _s_eigenbasis_unitary() -> np.ndarray:
    # s_x eigenbasis per sublattice, reordered to (a-, b- | a+, b+), then
    # the first chiral block rotated by -i tau_z.
    v = np.kron(S0, HADAMARD)[:, [1, 3, 0, 2]]
    w = np.zeros((4, 4), dtype=complex)
    w[:2, :2] = -1j * SZ
    w[2:, 2:] = S0
    return v @ w


_ANTIDIAG_U = _s_eigenbasis_unitary()


def antidiagonal_d(j1, j2, onsite, k, pairing_scale=1.0) -> np.ndarray:
    """Off-diagonal chiral block in the 16(B^2 - J1 J2 e^{ik}) normalization, for arrays of k.

    At ``onsite = 2B``, ``pairing_scale = 1`` this is
    ``2[J2 sin k + i(J1 - J2 cos k)] tau_x - 2[i J2 sin k + (J1 + J2 cos k)] tau_y + 4iB tau_z``.
    """
    h = bloch_stack(j1, j2, onsite, k, pairing_scale)
    rotated = _ANTIDIAG_U.conj().T @ h @ _ANTIDIAG_U
    return 2.0 * rotated[..., :2, 2:]


def antidiagonal_block(spec: ChainSpec, k: float) -> AntidiagonalForm:
    k = _check_k(k)
    h = bloch_stack(spec.j1, spec.j2, 2 * spec.b, k)
    d = antidiagonal_d(spec.j1, spec.j2, 2 * spec.b, k)
    target = np.zeros((4, 4), dtype=complex)
    target[:2, 2:] = d / 2
    target[2:, :2] = d.conj().T / 2
    residual = float(np.abs(_ANTIDIAG_U.conj().T @ h @ _ANTIDIAG_U - target).max())
    if residual > SYMMETRY_TOL:
        raise SymmetryViolation(f"antidiagonalization residual {residual:.3e}")
    return AntidiagonalForm(d, _ANTIDIAG_U.copy(), residual)


def symmetry_residuals(hk: Callable[[np.ndarray], np.ndarray], ks) -> SymmetryReport:
    """BDI residuals of a Bloch-matrix family ``hk(k) -> (..., 4, 4)``.

    Particle-hole ``C = tau0 s_x K``, time reversal ``T = K``, chiral
    ``S = tau0 s_x``.
    """
    ks = np.asarray(ks, dtype=float)
    h, h_minus = hk(ks), hk(-ks)
    sx = np.kron(S0, SX)
    ph = sx @ h.conj() @ sx + h_minus
    tr = h.conj() - h_minus
    ch = sx @ h @ sx + h
    return SymmetryReport(float(np.abs(ph).max()), float(np.abs(tr).max()), float(np.abs(ch).max()))


def check_symmetries(spec: ChainSpec, ks=None, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    ks = momentum_grid() if ks is None else ks
    report = symmetry_residuals(lambda k: bloch_stack(spec.j1, spec.j2, 2 * spec.b, k), ks)
    if report.max_residual > tol:
        raise SymmetryViolation(f"BDI symmetry broken: {report}")
    return report
