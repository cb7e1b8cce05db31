"""Sinusoidal field drive ``B(t) = B0 sin^2(omega t)`` on the dimerized chain.

The period is pi/omega. The second-order Magnus effective Hamiltonian has
the static Bloch form with onsite term ``B0`` and pairing renormalized by
``f = 1 - B0^2/omega^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ConvergenceError
from ..model import (BLOCH4, BdGOperator, ChainSpec, DEFAULT_KGRID, _check_k, bloch_stack,
                     real_space_bdg)
from ..topology import (DIPOLE_N, DipoleResult, WindingResult, bracketed_roots, det_d,
                        dipole_moment, winding_from_function)
from .common import phases_to_quasienergies, propagate

MIN_SLICES = 100
MAX_SLICES = 1 << 18
SLICING_TOL = 1e-8
CLOSING_BRACKETS = 400


@dataclass(frozen=True)
class SineDrive:
    b0: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.b0) and math.isfinite(self.omega)):
            raise ValueError("b0 and omega must be finite")
        if self.omega <= 0:
            raise ValueError("omega must be positive")

    @property
    def f(self) -> float:
        return 1.0 - self.b0**2 / self.omega**2

    @property
    def period(self) -> float:
        return math.pi / self.omega

    def field(self, t):
        return self.b0 * np.sin(self.omega * np.asarray(t)) ** 2

    @classmethod
    def from_dict(cls, d: dict) -> "SineDrive":
        if d.get("type", "sine") != "sine":
            raise ConfigError(f"not a sine drive: {d!r}")
        try:
            return cls(float(d["b0"]), float(d["omega"]))
        except KeyError as exc:
            raise ConfigError(f"sine drive is missing {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        return {"type": "sine", "b0": self.b0, "omega": self.omega}


def sine_effective_stack(j1, j2, drive: SineDrive, k) -> np.ndarray:
    return bloch_stack(j1, j2, drive.b0, k, drive.f)


def sine_effective(j1: float, j2: float, drive: SineDrive, k: float) -> BdGOperator:
    k = _check_k(k)
    return BdGOperator(sine_effective_stack(j1, j2, drive, k), BLOCH4, k)


def sine_real_space(j1: float, j2: float, drive: SineDrive, n: int, boundary: str = "open") -> BdGOperator:
    """Real-space form of the effective Hamiltonian (field B0/2, pairing f J)."""
    return real_space_bdg(ChainSpec(n, j1, j2, drive.b0 / 2, boundary), drive.f)


def closing_residual(b0, j1, j2, omega, k):
    """Left minus right side of the effective zero-gap closing condition."""
    b0 = np.asarray(b0, dtype=float)
    f2 = (1 - b0**2 / omega**2) ** 2
    c = np.cos(k)
    lhs = b0**2 + (1 + f2) * (j1**2 + j2**2) + 2 * (1 - f2) * j1 * j2 * c
    rhs = 2 * np.sqrt(b0**2 * (j1**2 + 2 * j1 * j2 * c + j2**2) + f2 * (j1**2 - j2**2) ** 2)
    return lhs - rhs


@dataclass(frozen=True)
class SineBoundary:
    """Critical B0 per momentum extremum, plus whether the upper-gap line |J1|=|J2| is hit."""

    roots: dict  # k -> list of B0
    nonzero_gap_closed: bool

    @property
    def all_roots(self) -> list[float]:
        return sorted(r for rs in self.roots.values() for r in rs)


def sine_boundary(j1: float, j2: float, omega: float, b0_max: float | None = None,
                  brackets: int = CLOSING_BRACKETS) -> SineBoundary:
    """Zero-gap critical amplitudes B0 >= 0 of the effective Hamiltonian.

    The closing condition only holds at the band extrema k = 0 and k = pi,
    so it is solved separately there. As in the static case the two sides
    touch, so roots are mostly tangential.
    """
    if isinstance(omega, SineDrive):
        omega = omega.omega
    scale = j1**2 + j2**2
    if b0_max is None:
        b0_max = 2 * (abs(j1) + abs(j2)) + 1.0
    roots = {}
    for k in (0.0, np.pi):
        roots[k] = bracketed_roots(lambda b, k=k: float(closing_residual(b, j1, j2, omega, k)),
                                   0.0, b0_max, brackets, accept=1e-10 * max(scale, 1e-300))
    # at B0 = omega the pairing vanishes and the closing can sit at any k
    if omega <= b0_max and j1 * j2 != 0:
        c = (omega**2 - j1**2 - j2**2) / (2 * j1 * j2)
        if abs(c) <= 1:
            k = float(np.arccos(c))
            if not any(abs(r - omega) < 1e-7 for rs in roots.values() for r in rs):
                roots[k] = [float(omega)]
    return SineBoundary(roots, bool(np.isclose(abs(j1), abs(j2))))


def sine_winding(j1: float, j2: float, drive: SineDrive, m: int = DEFAULT_KGRID) -> WindingResult:
    return winding_from_function(lambda ks: det_d(j1, j2, drive.b0, ks, drive.f), m)


def sine_dipole(j1: float, j2: float, drive: SineDrive, n: int = DIPOLE_N) -> DipoleResult:
    return dipole_moment(ChainSpec(n, j1, j2, drive.b0 / 2, "periodic"), pairing_scale=drive.f)


def sine_evaluator(invariant: str, j1: float, j2: float, kgrid: int = DEFAULT_KGRID, n: int = DIPOLE_N):
    """Callable ``params -> W or P`` over params containing b0 and omega (and optionally j1, j2)."""
    if invariant not in ("W", "P"):
        raise ValueError(f"unknown invariant {invariant!r}")

    def evaluate(params):
        a, b = float(params.get("j1", j1)), float(params.get("j2", j2))
        drive = SineDrive(float(params["b0"]), float(params["omega"]))
        if invariant == "W":
            return sine_winding(a, b, drive, kgrid).value
        return sine_dipole(a, b, drive, n).value

    return evaluate


# ---------------------------------------------------------------------------
# brute-force propagator


@dataclass(frozen=True, eq=False)
class SlicedResult:
    unitary: np.ndarray
    quasienergies: np.ndarray  # sorted per momentum (last axis)
    slices: int
    change: float


def _instantaneous(j1, j2, drive: SineDrive, b, k, n, boundary):
    if n is not None:
        return real_space_bdg(ChainSpec(n, j1, j2, float(b), boundary)).matrix
    return bloch_stack(j1, j2, 2 * b, k)


def _slice_product(j1, j2, drive, k, n, boundary, m):
    dt = drive.period / m
    u = None
    for b in drive.field((np.arange(m) + 0.5) * dt):
        step = propagate(_instantaneous(j1, j2, drive, b, k, n, boundary), dt)
        u = step if u is None else step @ u
    return u


def _sorted_quasienergies(u, period):
    return np.sort(phases_to_quasienergies(np.angle(np.linalg.eigvals(u)), period), axis=-1)


def _phase_distance(a, b, period):
    w = 2 * np.pi / period
    d = np.abs(a - b) % w
    return float(np.minimum(d, w - d).max())


def sliced_propagator(j1: float, j2: float, drive: SineDrive, k=None, *, n: int | None = None,
                      boundary: str = "open", slices: int = MIN_SLICES, tol: float = SLICING_TOL,
                      max_slices: int = MAX_SLICES) -> SlicedResult:
    """Midpoint-sliced one-period propagator of the static chain at field ``B(t)``.

    The slice count doubles until the sorted quasienergies move by less than
    ``tol`` in one doubling.
    """
    if (k is None) == (n is None):
        raise ValueError("give exactly one of k or n")
    if slices < MIN_SLICES:
        raise ValueError(f"need at least {MIN_SLICES} slices")
    if k is not None:
        k = np.asarray(k, dtype=float)
    t = drive.period
    m = int(slices)
    u = _slice_product(j1, j2, drive, k, n, boundary, m)
    q = _sorted_quasienergies(u, t)
    change = math.inf
    while m * 2 <= max_slices:
        m *= 2
        u2 = _slice_product(j1, j2, drive, k, n, boundary, m)
        q2 = _sorted_quasienergies(u2, t)
        change = _phase_distance(q, q2, t)
        u, q = u2, q2
        if change < tol:
            return SlicedResult(u, q, m, change)
    raise ConvergenceError(f"slicing did not converge: last change {change:.2e} at {m} slices")


def magnus_deviation(j1: float, j2: float, drive: SineDrive, ks, **kwargs) -> tuple[float, SlicedResult]:
    """``max |eps_sliced - eps_eff| / max |eps_eff|`` over the given momenta."""
    ks = np.asarray(ks, dtype=float)
    sliced = sliced_propagator(j1, j2, drive, ks, **kwargs)
    eff = np.linalg.eigvalsh(sine_effective_stack(j1, j2, drive, ks))
    dev = _phase_distance(sliced.quasienergies, eff, drive.period)
    return dev / float(np.abs(eff).max()), sliced
