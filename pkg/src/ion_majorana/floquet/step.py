"""Two-step hopping drive: the uniform chain alternates between couplings U1 and U2.

Within one period the chain evolves for ``t1`` with coupling ``u1`` and then
for ``t2`` with ``u2``. Everything per momentum uses the two-band form
``d(k) = (0, -2U sin k, 2U cos k - 2B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, GapClosedError, SymmetryViolation
from ..model import DEFAULT_KGRID, momentum_grid, real_space_matrix, uniform_d_vector, uniform_stack
from ..topology import AxisSpec, BoundaryCurve, winding_from_function
from .common import chiral_offdiagonal, chiral_residual, propagate, su2_log, su2_matrix, su2_phase

CHIRAL_TOL = 1e-8
FRAME_ERROR_TOL = 1e-6
INTEGER_TOL = 1e-6
GAP_TOL = 1e-6  # in units of 1/T


@dataclass(frozen=True)
class StepDrive:
    u1: float
    u2: float
    t1: float
    t2: float

    def __post_init__(self):
        for name in ("u1", "u2", "t1", "t2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("step durations t1, t2 must be positive")

    @property
    def period(self) -> float:
        return self.t1 + self.t2

    def replace(self, **changes) -> "StepDrive":
        return StepDrive(**{**self.to_dict(drop_type=True), **changes})

    @classmethod
    def from_dict(cls, d: dict) -> "StepDrive":
        if d.get("type", "step") != "step":
            raise ConfigError(f"not a step drive: {d!r}")
        try:
            return cls(float(d["u1"]), float(d["u2"]), float(d["t1"]), float(d["t2"]))
        except KeyError as exc:
            raise ConfigError(f"step drive is missing {exc.args[0]!r}") from None

    def to_dict(self, drop_type: bool = False) -> dict:
        d = {"u1": self.u1, "u2": self.u2, "t1": self.t1, "t2": self.t2}
        return d if drop_type else {"type": "step", **d}


@dataclass(frozen=True)
class FloquetInvariants:
    w1: int
    w2: int
    w0: int
    wpi: int
    chiral_residual: float
    integer_residual: float
    zero_gap: float
    pi_gap: float


def step_hamiltonians(b: float, drive: StepDrive, k) -> tuple[np.ndarray, np.ndarray]:
    return uniform_stack(drive.u1, b, k), uniform_stack(drive.u2, b, k)


def step_real_space(b: float, drive: StepDrive, n: int, boundary: str = "open"):
    """Nambu matrices of the uniform chain at couplings u1 and u2."""
    return tuple(real_space_matrix(n, (u, u), (u, u), b, boundary) for u in (drive.u1, drive.u2))


def step_monodromy(b: float, drive: StepDrive, k=None, *, n: int | None = None,
                   boundary: str = "open") -> np.ndarray:
    """``exp(-i H2 t2) exp(-i H1 t1)`` per momentum, or in real space when ``n`` is given."""
    if (k is None) == (n is None):
        raise ValueError("give exactly one of k or n")
    if n is not None:
        h1, h2 = step_real_space(b, drive, n, boundary)
    else:
        h1, h2 = step_hamiltonians(b, drive, k)
    return propagate(h2, drive.t2) @ propagate(h1, drive.t1)


def _unit_and_norm(d):
    norm = np.linalg.norm(d, axis=-1)
    unit = d / np.where(norm > 0, norm, 1.0)[..., None]
    return unit, norm


def epsilon_r(b: float, drive: StepDrive, k) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``U_T = eps I - i r.tau``."""
    e1, n1 = _unit_and_norm(uniform_d_vector(drive.u1, b, k))
    e2, n2 = _unit_and_norm(uniform_d_vector(drive.u2, b, k))
    c1, s1 = np.cos(n1 * drive.t1), np.sin(n1 * drive.t1)
    c2, s2 = np.cos(n2 * drive.t2), np.sin(n2 * drive.t2)
    eps = c1 * c2 - s1 * s2 * np.sum(e1 * e2, axis=-1)
    r = (e1 * (s1 * c2)[..., None] + e2 * (c1 * s2)[..., None]
         - np.cross(e1, e2) * (s1 * s2)[..., None])
    return eps, r


def step_quasienergies(b: float, drive: StepDrive, k) -> np.ndarray:
    """Non-negative quasienergy branch ``arccos(eps)/T`` per momentum."""
    eps, r = epsilon_r(b, drive, k)
    return su2_phase(eps, r) / drive.period


def quasienergy_gaps(b: float, drive: StepDrive, ks=None) -> tuple[float, float]:
    """Smallest band separations around quasienergy 0 and around pi/T."""
    ks = momentum_grid() if ks is None else ks
    q = step_quasienergies(b, drive, ks)
    zone = np.pi / drive.period
    return float(2 * q.min()), float(2 * (zone - q.max()))


def frame_monodromies(b: float, drive: StepDrive, k) -> tuple[np.ndarray, np.ndarray]:
    """``G_l U_T G_l^dag`` for the two half-step frames.

    Frame 1 splits the first step symmetrically, frame 2 the second one.
    """
    def half(u, b, t):
        d = uniform_d_vector(u, b, k)
        unit, norm = _unit_and_norm(d)
        return su2_matrix(np.cos(norm * t), unit * np.sin(norm * t)[..., None])

    a1, f1 = half(drive.u1, b, drive.t1 / 2), half(drive.u1, b, drive.t1)
    a2, f2 = half(drive.u2, b, drive.t2 / 2), half(drive.u2, b, drive.t2)
    return a1 @ f2 @ a1, a2 @ f1 @ a2


def frame_hamiltonians(b: float, drive: StepDrive, k) -> tuple[np.ndarray, np.ndarray]:
    return tuple(su2_log(u, drive.period) for u in frame_monodromies(b, drive, k))


def chiral_frame_windings(b: float, drive: StepDrive, m: int = DEFAULT_KGRID,
                          gap_tol: float = GAP_TOL) -> FloquetInvariants:
    """Winding numbers of both chirally symmetric frames and their 0 and pi/T combinations."""
    zero_gap, pi_gap = quasienergy_gaps(b, drive, momentum_grid(m))
    limit = gap_tol / drive.period
    if zero_gap <= limit or pi_gap <= limit:
        raise GapClosedError(f"quasienergy gap closed (zero: {zero_gap:.3e}, pi: {pi_gap:.3e})")
    windings, residuals = [], []
    for frame in (0, 1):
        def offdiag(ks, frame=frame):
            h = frame_hamiltonians(b, drive, ks)[frame]
            residuals.append(chiral_residual(h))
            return chiral_offdiagonal(h)

        windings.append(winding_from_function(offdiag, m).value)
    res = max(residuals)
    if res > FRAME_ERROR_TOL:
        raise SymmetryViolation(f"frame Hamiltonian is not chiral (residual {res:.2e})")
    w1, w2 = windings
    w0, wpi = (w1 + w2) / 2, (w1 - w2) / 2
    integer_residual = max(abs(w0 - round(w0)), abs(wpi - round(wpi)))
    if integer_residual > INTEGER_TOL:
        raise GapClosedError(f"frame windings {w1}, {w2} do not combine to integers")
    return FloquetInvariants(w1, w2, int(round(w0)), int(round(wpi)), res, integer_residual,
                             zero_gap, pi_gap)


# ---------------------------------------------------------------------------
# analytic boundaries


@dataclass(frozen=True)
class BoundaryPoint:
    """One analytic closing point.

    ``family`` is ``"resonant"`` for simultaneous ``d_j t_j = n_j pi`` at a
    common momentum, or ``"aligned"`` for parallel ``d_1, d_2`` at k = 0 or pi.
    ``gap`` is ``"zero"`` or ``"pi"``.
    """

    b: float
    family: str
    gap: str
    k: float
    n1: int | None = None
    n2: int | None = None
    gamma: float | None = None
    sign: str | None = None
    n: int | None = None
    t1: float | None = None

    def label(self) -> dict:
        return {"family": self.family, "n1": self.n1, "n2": self.n2, "gamma": self.gamma,
                "sign": self.sign, "n": self.n, "gap": self.gap}


def _resonant_points(drive: StepDrive, b_lo: float, b_hi: float) -> list[BoundaryPoint]:
    u1, u2, t1, t2 = drive.u1, drive.u2, drive.t1, drive.t2
    if np.isclose(u1, u2):
        return []
    bmax = max(abs(b_lo), abs(b_hi))
    n1max = int(2 * (abs(u1) + bmax) * t1 / np.pi) + 1
    n2max = int(2 * (abs(u2) + bmax) * t2 / np.pi) + 1
    out = []
    for n1 in range(n1max + 1):
        for n2 in range(n2max + 1):
            r1, r2 = n1 * np.pi / (2 * t1), n2 * np.pi / (2 * t2)
            b2 = (u1 * u2 * (u2 - u1) + u2 * r1**2 - u1 * r2**2) / (u2 - u1)
            if b2 < 0:
                continue
            for b in {math.sqrt(b2), -math.sqrt(b2)}:
                if not (b_lo <= b <= b_hi):
                    continue
                if b == 0.0 or u1 == 0.0:
                    continue
                c = (u1**2 + b**2 - r1**2) / (2 * b * u1)
                if abs(c) > 1 + 1e-12:
                    continue
                k = float(np.arccos(np.clip(c, -1, 1)))
                gap = "zero" if (n1 - n2) % 2 == 0 else "pi"
                out.append(BoundaryPoint(b, "resonant", gap, k, n1=n1, n2=n2))
    return out


def _aligned_points(drive: StepDrive, b_lo: float, b_hi: float) -> list[BoundaryPoint]:
    u1, u2, t1, t2, tt = drive.u1, drive.u2, drive.t1, drive.t2, drive.period
    bmax = max(abs(b_lo), abs(b_hi))
    nmax = int(2 * ((abs(u1) + bmax) * t1 + (abs(u2) + bmax) * t2) / np.pi) + 1
    out = []
    for gamma, sgn, k in ((0.0, 1.0, np.pi), (np.pi, -1.0, 0.0)):
        # s_j = u_j + B e^{i gamma} is real; closing when s1 t1 + s2 t2 = n pi / 2
        for n in range(-nmax, nmax + 1):
            b = sgn * (n * np.pi / 2 - (u1 * t1 + u2 * t2)) / tt
            if not (b_lo <= b <= b_hi):
                continue
            s1, s2 = u1 + sgn * b, u2 + sgn * b
            sign = "+" if s1 * s2 >= 0 else "-"
            label = abs(s1) * t1 + (abs(s2) if sign == "+" else -abs(s2)) * t2
            nl = int(round(2 * label / np.pi))
            gap = "zero" if n % 2 == 0 else "pi"
            out.append(BoundaryPoint(b, "aligned", gap, k, gamma=gamma, sign=sign, n=nl))
    return out


def step_boundaries(drive: StepDrive, b_range=(0.0, 5.0)) -> list[BoundaryPoint]:
    """Analytic closing points in field at fixed drive, sorted by field."""
    lo, hi = b_range
    pts = _resonant_points(drive, lo, hi) + _aligned_points(drive, lo, hi)
    return sorted(pts, key=lambda p: p.b)


def _curve_label(meta: dict) -> str:
    if meta["family"] == "resonant":
        return f"(n1,n2)=({meta['n1']},{meta['n2']})"
    g = "0" if meta["gamma"] == 0 else "pi"
    return f"n_{g},{meta['sign']}={meta['n']}"


def step_boundary_curves(drive: StepDrive, b_axis: AxisSpec, t1_axis: AxisSpec,
                         samples: int = 801) -> list[BoundaryCurve]:
    """Analytic boundaries as curves in the (B, T1) plane at fixed u1, u2, t2.

    Resonant curves: the second step fixes cos k through ``d_2 t2 = n2 pi``,
    then ``t1 = n1 pi / d_1``. Aligned curves: ``t1 = (n pi/2 - s2 t2) / s1``.
    """
    u1, u2, t2 = drive.u1, drive.u2, drive.t2
    bs = np.linspace(b_axis.min, b_axis.max, samples)
    t_lo, t_hi = t1_axis.min - t1_axis.step, t1_axis.max + t1_axis.step
    bmax = max(abs(b_axis.min), abs(b_axis.max))
    curves: dict[tuple, list] = {}

    n2max = int(2 * (abs(u2) + bmax) * t2 / np.pi) + 1
    n1max = int(2 * (abs(u1) + bmax) * t_hi / np.pi) + 1
    for n2 in range(n2max + 1):
        r2 = n2 * np.pi / (2 * t2)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (u2**2 + bs**2 - r2**2) / (2 * bs * u2)
        ok = np.abs(c) <= 1
        c = np.where(ok, c, 0.0)
        d1 = 2 * np.sqrt(np.maximum(u1**2 - 2 * bs * u1 * c + bs**2, 0.0))
        for n1 in range(1, n1max + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = n1 * np.pi / d1
            sel = ok & np.isfinite(t1) & (t1 >= t_lo) & (t1 <= t_hi)
            if sel.any():
                gap = "zero" if (n1 - n2) % 2 == 0 else "pi"
                key = ("resonant", n1, n2, None, None, None, gap)
                curves.setdefault(key, []).extend(zip(bs[sel], t1[sel]))

    nmax = int(2 * ((abs(u1) + bmax) * t_hi + (abs(u2) + bmax) * t2) / np.pi) + 1
    for gamma, sgn in ((0.0, 1.0), (np.pi, -1.0)):
        s1, s2 = u1 + sgn * bs, u2 + sgn * bs
        for n in range(-nmax, nmax + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (n * np.pi / 2 - s2 * t2) / s1
            sel = np.isfinite(t1) & (t1 >= t_lo) & (t1 <= t_hi) & (t1 > 0)
            for i in np.flatnonzero(sel):
                sign = "+" if s1[i] * s2[i] >= 0 else "-"
                label = abs(s1[i]) * t1[i] + (abs(s2[i]) if sign == "+" else -abs(s2[i])) * t2
                key = ("aligned", None, None, gamma, sign, int(round(2 * label / np.pi)),
                       "zero" if n % 2 == 0 else "pi")
                curves.setdefault(key, []).append((bs[i], t1[i]))

    out = []
    for key, pts in curves.items():
        meta = dict(zip(("family", "n1", "n2", "gamma", "sign", "n", "gap"), key))
        out.append(BoundaryCurve(_curve_label(meta), np.array(pts, dtype=float), meta))
    return out


# ---------------------------------------------------------------------------
# phase diagrams in (B, T1)


def step_evaluator(invariant: str, drive: StepDrive, kgrid: int = DEFAULT_KGRID):
    """Callable ``params -> W0 or Wpi``; params may override b, u1, u2, t1, t2."""
    if invariant not in ("W0", "Wpi"):
        raise ValueError(f"unknown Floquet invariant {invariant!r}")

    def evaluate(params):
        d = drive.replace(**{k: float(v) for k, v in params.items() if k in ("u1", "u2", "t1", "t2")})
        inv = chiral_frame_windings(float(params["b"]), d, kgrid)
        return inv.w0 if invariant == "W0" else inv.wpi

    return evaluate


@dataclass(frozen=True, eq=False)
class SweepPoint:
    b: float
    invariants: FloquetInvariants | None
    error: str | None = None
    extra: dict = field(default_factory=dict)


def invariant_sweep(drive: StepDrive, bs, kgrid: int = DEFAULT_KGRID) -> list[SweepPoint]:
    """W0, Wpi along a field sweep; closed-gap points are kept with an error string."""
    out = []
    for b in np.asarray(bs, dtype=float):
        try:
            out.append(SweepPoint(float(b), chiral_frame_windings(float(b), drive, kgrid)))
        except (GapClosedError, SymmetryViolation) as exc:
            out.append(SweepPoint(float(b), None, f"{type(exc).__name__}: {exc}"))
    return out
