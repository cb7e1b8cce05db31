"""Effective Ising couplings of an ion chain, from a power law or from phonon modes.

This module only records where (J1, J2) come from; nothing downstream
depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ResonanceError

ORTHONORMAL_TOL = 1e-10
DEFAULT_PREFACTOR = 4  # J = Omega^2 dk^2 / (c M) sum_m b b / (mu^2 - w^2)


@dataclass(frozen=True, eq=False)
class GeometricCoupling:
    j0: float
    beta: float
    positions: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.positions, dtype=float)
        if z.ndim != 1 or len(z) < 2:
            raise ValueError("need at least two ion positions")
        if not (0 < self.beta):
            raise ValueError("beta must be positive")
        if np.any(np.diff(z) < 0):
            raise ValueError("positions must be increasing")
        object.__setattr__(self, "positions", z)

    @classmethod
    def dimerized(cls, j0: float, beta: float, delta1: float, delta2: float, n: int) -> "GeometricCoupling":
        """Ions alternately spaced by ``delta1`` (intra-cell) and ``delta2``."""
        if delta1 <= 0 or delta2 <= 0:
            raise ValueError("spacings must be positive")
        if n < 2 or n % 2:
            raise ValueError("n must be even")
        gaps = [delta1 if i % 2 == 0 else delta2 for i in range(n - 1)]
        return cls(j0, beta, np.concatenate([[0.0], np.cumsum(gaps)]))


def power_law_couplings(g: GeometricCoupling) -> np.ndarray:
    """``J_ij = J0 / |z_i - z_j|^beta`` with zero diagonal."""
    z = g.positions
    dist = np.abs(z[:, None] - z[None, :])
    off = ~np.eye(len(z), dtype=bool)
    if np.any(dist[off] == 0):
        raise ZeroDivisionError("two ions share a position")
    j = np.zeros_like(dist)
    j[off] = g.j0 / dist[off] ** g.beta
    return j


def nearest_neighbor(j: np.ndarray) -> tuple[float, float]:
    """(J1, J2) read off the first two nearest-neighbor bonds."""
    return float(j[0, 1]), float(j[1, 2])


@dataclass(frozen=True, eq=False)
class PhononSpec:
    omega: float       # Rabi frequency
    delta_k: float
    mass: float
    mu: float          # beatnote detuning
    freqs: np.ndarray  # (modes,)
    b: np.ndarray      # (ions, modes), column m is mode m
    prefactor: int = DEFAULT_PREFACTOR
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 2 or b.shape[1] != len(freqs):
            raise ValueError("mode matrix must be (ions, modes) with one column per frequency")
        if np.any(freqs <= 0):
            raise ValueError("mode frequencies must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.prefactor not in (2, 4):
            raise ValueError("prefactor constant must be 2 or 4")
        gram = b.T @ b
        if np.abs(gram - np.eye(len(freqs))).max() > ORTHONORMAL_TOL:
            raise ValueError("mode vectors are not orthonormal")
        if np.any(np.isclose(self.mu, freqs, rtol=0, atol=1e-12 * max(1.0, abs(self.mu)))):
            raise ResonanceError("beatnote detuning sits on a phonon mode")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "b", b)

    @property
    def eta(self) -> np.ndarray:
        """Lamb-Dicke parameters ``dk b_jm / sqrt(2 M w_m)``, shape (ions, modes)."""
        return self.delta_k * self.b / np.sqrt(2 * self.mass * self.freqs)

    @classmethod
    def from_dict(cls, d: dict) -> "PhononSpec":
        try:
            modes = d["modes"]
            freqs = [float(m["freq"]) for m in modes]
            b = np.array([m["b"] for m in modes], dtype=float).T
            return cls(float(d["omega"]), float(d["delta_k"]), float(d["mass"]), float(d["mu"]),
                       np.array(freqs), b, int(d.get("prefactor", DEFAULT_PREFACTOR)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad phonon spec: {exc}") from None

    def to_dict(self) -> dict:
        return {"omega": self.omega, "delta_k": self.delta_k, "mass": self.mass, "mu": self.mu,
                "prefactor": self.prefactor,
                "modes": [{"freq": float(w), "b": self.b[:, m].tolist()} for m, w in enumerate(self.freqs)]}


def phonon_couplings(p: PhononSpec) -> np.ndarray:
    """``Omega^2 dk^2 / (c M) sum_m b_im b_jm / (mu^2 - w_m^2)``, diagonal zeroed."""
    weights = 1.0 / (p.mu**2 - p.freqs**2)
    j = (p.b * weights) @ p.b.T * (p.omega**2 * p.delta_k**2 / (p.prefactor * p.mass))
    j = (j + j.T) / 2
    np.fill_diagonal(j, 0.0)
    return j


def displacement_amplitude(p: PhononSpec, j: int, m: int, t) -> np.ndarray:
    """Spin-dependent displacement ``g_{j,m}(t)`` of mode m by ion j."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    mu, w = p.mu, p.freqs[m]
    bracket = mu - np.exp(1j * w * t) * (mu * np.cos(mu * t) - 1j * w * np.sin(mu * t))
    return -1j * p.eta[j, m] * p.omega / (mu**2 - w**2) * bracket


def accumulated_phase(p: PhononSpec, i: int, j: int, t) -> tuple[np.ndarray, complex]:
    """``chi_{i,j}(t)`` and the coefficient of its term linear in t.

    With the appendix normalization the slope is ``-1j * J_ij`` at c = 4; the
    overall sign relating chi to the Ising coupling is not asserted.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    mu = p.mu
    eta = p.eta
    chi = np.zeros(t.shape, dtype=complex)
    slope = 0j
    for m, w in enumerate(p.freqs):
        a = 0.5j * p.omega**2 * eta[i, m] * eta[j, m] / (mu**2 - w**2)
        chi = chi + a * (mu * np.sin((mu - w) * t) / (mu - w) - mu * np.sin((mu + w) * t) / (mu + w)
                         + w * np.sin(2 * mu * t) / (2 * mu) - w * t)
        slope += -a * w
    return chi, complex(slope)


def secular_fit(p: PhononSpec, i: int, j: int, periods: int = 100, samples: int = 20001) -> float:
    """Least-squares slope of Im chi over ``periods`` beat periods."""
    detune = np.min(np.abs(p.mu - p.freqs))
    t = np.linspace(0, periods * 2 * np.pi / detune, samples)
    chi, _ = accumulated_phase(p, i, j, t)
    return float(np.polyfit(t, chi.imag, 1)[0])
