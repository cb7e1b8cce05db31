"""Winding number, dipole moment, static phase boundary and phase diagrams."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import GapClosedError
from .model import DEFAULT_KGRID, ChainSpec, antidiagonal_d, momentum_grid, real_space_bdg

# Largest accepted phase increment between neighbouring k points. Anything
# bigger triggers grid refinement.
MAX_PHASE_STEP = np.pi / 2
MAX_REFINEMENTS = 3
WINDING_RESIDUAL_TOL = 1e-6

# Frozen output of calibrate_dipole_convention(); see tests/test_topology.py.
DIPOLE_LENGTH = "cells"
DIPOLE_NORMALIZATION = "cells"
DIPOLE_N = 200
DIPOLE_GAP_TOL = 1e-8
QUANTIZATION_TOL = 1e-3

EQ4_BRACKETS = 400
DENSIFY_MAX_GAP = 4  # grid steps


@dataclass(frozen=True)
class WindingResult:
    value: int
    residual: float
    grid_size: int


@dataclass(frozen=True)
class DipoleResult:
    value: float
    occupied: int
    residual: float
    det_modulus: float


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    steps: int

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.steps)

    @property
    def step(self) -> float:
        return 0.0 if self.steps == 1 else (self.max - self.min) / (self.steps - 1)

    @classmethod
    def from_dict(cls, d: dict) -> "AxisSpec":
        return cls(str(d["name"]), float(d["min"]), float(d["max"]), int(d["steps"]))


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Analytic boundary sampled as points in the coordinates of the scan axes."""

    label: str
    points: np.ndarray  # (P, n_axes); NaN rows separate disconnected pieces
    meta: dict = field(default_factory=dict)


@dataclass(eq=False)
class PhaseDiagramGrid:
    axes: list[AxisSpec]
    values: np.ndarray
    flagged: np.ndarray
    boundaries: list[BoundaryCurve] = field(default_factory=list)
    errors: dict = field(default_factory=dict)

    @property
    def cell_count(self) -> int:
        return int(np.prod([a.steps for a in self.axes]))


# ---------------------------------------------------------------------------
# winding numbers


def loop_winding(values: np.ndarray) -> tuple[float, float]:
    """Total phase winding of a closed sampled loop and its largest step."""
    z = np.append(values, values[:1])
    steps = np.angle(z[1:] / z[:-1])
    return float(steps.sum() / (2 * np.pi)), float(np.abs(steps).max())


def winding_from_function(fn: Callable[[np.ndarray], np.ndarray], m: int = DEFAULT_KGRID,
                          max_refinements: int = MAX_REFINEMENTS) -> WindingResult:
    """Winding of ``fn(k)`` around the origin over the Brillouin zone.

    The grid is refined fourfold whenever a single phase increment is too
    large to be unwrapped unambiguously.
    """
    for _ in range(max_refinements + 1):
        ks = momentum_grid(m)
        z = np.asarray(fn(ks), dtype=complex)
        modulus = np.abs(z)
        if modulus.min() <= 1e-12 * max(1.0, modulus.max()):
            raise GapClosedError("loop passes through the origin (gap closed)")
        raw, biggest = loop_winding(z)
        if biggest < MAX_PHASE_STEP:
            value = int(round(raw))
            residual = abs(raw - value)
            if residual > WINDING_RESIDUAL_TOL:
                raise GapClosedError(f"winding not quantized (residual {residual:.2e})")
            return WindingResult(value, residual, m)
        m = 4 * m + (m % 2)
    raise GapClosedError(f"phase increments stay >= {MAX_PHASE_STEP:.3f} after refinement; gap closing")


def det_d(j1, j2, onsite, ks, pairing_scale=1.0) -> np.ndarray:
    return np.linalg.det(antidiagonal_d(j1, j2, onsite, ks, pairing_scale))


def winding_number(spec: ChainSpec, m: int = DEFAULT_KGRID) -> WindingResult:
    """Zero-energy winding number from the phase of det D(k)."""
    return winding_from_function(lambda ks: det_d(spec.j1, spec.j2, 2 * spec.b, ks), m)


# ---------------------------------------------------------------------------
# dipole moment


def cell_positions(n: int, origin: int = 1) -> np.ndarray:
    """Unit-cell index for every Nambu component (particles then holes)."""
    cells = origin + np.arange(n) // 2
    return np.concatenate([cells, cells])


def dipole_moment(spec: ChainSpec, occupied_count: int | None = None, *,
                  length: str = DIPOLE_LENGTH, normalization: str = DIPOLE_NORMALIZATION,
                  origin: int = 1, pairing_scale: float = 1.0) -> DipoleResult:
    """Many-body dipole moment of the lowest ``occupied_count`` BdG states.

    ``length`` picks the period of the position exponential (``"cells"`` for
    N/2, ``"sites"`` for N). ``normalization`` picks the background term:
    ``"verbatim"`` divides the summed cell coordinates by 4N, ``"cells"`` by
    twice the number of cells.
    """
    if spec.boundary != "periodic":
        raise ValueError("dipole moment needs a periodic chain")
    n = spec.n
    occ = n // 2 if occupied_count is None else int(occupied_count)
    w, v = np.linalg.eigh(real_space_bdg(spec, pairing_scale).matrix)
    if w[occ] - w[occ - 1] < DIPOLE_GAP_TOL:
        raise GapClosedError("occupied and unoccupied states are degenerate")
    period = {"cells": n // 2, "sites": n}[length]
    r = cell_positions(n, origin)
    states = v[:, :occ]
    f = states.conj().T @ (np.exp(2j * np.pi * r / period)[:, None] * states)
    sign, logabs = np.linalg.slogdet(f)
    modulus = math.exp(logabs)
    if modulus < 1e-12:
        raise GapClosedError("position overlap matrix is singular")
    background = r[:n].sum() / {"verbatim": 4 * n, "cells": n}[normalization]
    p = float((np.angle(sign) / (2 * np.pi) - background) % 1.0)
    if p >= 1.0:
        p = 0.0
    residual = min(abs(p), abs(p - 0.5), abs(p - 1.0))
    return DipoleResult(p, occ, residual, modulus)


DIPOLE_VARIANTS = (("sites", "verbatim"), ("cells", "verbatim"),
                   ("sites", "cells"), ("cells", "cells"))


def calibrate_dipole_convention(j2: float = 0.5, b: float = 1.0, j1_values=None,
                                n: int = DIPOLE_N) -> tuple[tuple[str, str], dict]:
    """Pick the first dipole variant that is quantized across a J1 sweep.

    Returns the chosen ``(length, normalization)`` and the worst quantization
    residual of every variant tried. Points within one step of |J1| = |J2| are
    skipped.
    """
    j1_values = np.linspace(0.0, 2.0, 41) if j1_values is None else np.asarray(j1_values)
    step = np.min(np.diff(j1_values)) if len(j1_values) > 1 else 0.0
    pts = [j1 for j1 in j1_values if abs(abs(j1) - abs(j2)) > step]
    worst = {}
    chosen = None
    for variant in DIPOLE_VARIANTS:
        res = max(dipole_moment(ChainSpec(n, float(j1), j2, b, "periodic"), length=variant[0],
                                normalization=variant[1]).residual for j1 in pts)
        worst[variant] = res
        if chosen is None and res < QUANTIZATION_TOL:
            chosen = variant
    return chosen, worst


# ---------------------------------------------------------------------------
# static phase boundary


def eq4_residual(b, j1, j2):
    """Left minus right side of the zero-gap closing condition (>= 0)."""
    b = np.asarray(b, dtype=float)
    lhs = 2 * b**2 + j1**2 + j2**2
    rhs = np.sqrt(4 * b**2 * (j1 + j2) ** 2 + (j1**2 - j2**2) ** 2)
    return lhs - rhs


def bracketed_roots(fn: Callable[[float], float], lo: float, hi: float, brackets: int,
                    accept: float) -> list[float]:
    """Roots of ``fn`` on [lo, hi], including tangential ones.

    Sign changes between bracket nodes go to Brent's method; local minima of
    ``|fn|`` are refined with a bounded minimizer and kept if they reach
    ``accept``.
    """
    if hi <= lo:
        return [lo] if abs(fn(lo)) <= accept else []
    x = np.linspace(lo, hi, brackets + 1)
    y = np.array([fn(v) for v in x])
    roots = []
    for i in range(brackets):
        if y[i] == 0.0:
            roots.append(float(x[i]))
        elif np.sign(y[i]) * np.sign(y[i + 1]) < 0:
            roots.append(float(brentq(fn, x[i], x[i + 1], xtol=1e-14, rtol=1e-14)))
    if y[-1] == 0.0:
        roots.append(float(x[-1]))
    a = np.abs(y)
    for i in range(brackets + 1):
        left = a[i - 1] if i > 0 else np.inf
        right = a[i + 1] if i < brackets else np.inf
        if a[i] <= left and a[i] <= right and a[i] > 0:
            res = minimize_scalar(lambda v: abs(fn(v)), bounds=(x[max(i - 1, 0)], x[min(i + 1, brackets)]),
                                  method="bounded", options={"xatol": 1e-14})
            cand = (float(res.x), float(res.fun))
            if a[i] < cand[1]:
                cand = (float(x[i]), float(a[i]))
            if cand[1] <= accept:
                roots.append(cand[0])
    roots.sort()
    merged: list[float] = []
    tol = 1e-7 * max(1.0, abs(hi - lo))
    for r in roots:
        if not merged or r - merged[-1] > tol:
            merged.append(r)
    return merged


def static_boundary(j1: float, j2: float, brackets: int = EQ4_BRACKETS) -> list[float]:
    """All B >= 0 on the zero-energy closing locus for the given couplings.

    The two sides of the closing condition touch rather than cross, so most
    roots are found from bracketed minima, not sign changes.
    """
    scale = j1**2 + j2**2
    if scale == 0.0:
        return [0.0]
    b_max = 2 * (abs(j1) + abs(j2))
    return bracketed_roots(lambda b: float(eq4_residual(b, j1, j2)), 0.0, b_max, brackets,
                           accept=1e-10 * scale)


# ---------------------------------------------------------------------------
# phase diagrams


def _default_threads(threads):
    return max(1, threads or os.cpu_count() or 1)


def _densify(points: np.ndarray, steps: np.ndarray) -> np.ndarray:
    out = []
    for i in range(len(points)):
        p = points[i]
        out.append(p)
        if i + 1 < len(points):
            q = points[i + 1]
            if np.any(np.isnan(p)) or np.any(np.isnan(q)):
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(steps > 0, np.abs(q - p) / steps, 0.0)
            if ratio.max() > DENSIFY_MAX_GAP:
                continue  # separate branch, not a gap in one curve
            pieces = int(np.ceil(4 * ratio.max()))
            for t in np.linspace(0, 1, pieces + 1)[1:-1]:
                out.append(p + t * (q - p))
    return np.array(out).reshape(-1, points.shape[1])


def flag_near_boundaries(axes: Sequence[AxisSpec], boundaries: Sequence[BoundaryCurve]) -> np.ndarray:
    """Cells within one grid step (per axis) of any boundary point."""
    shape = tuple(a.steps for a in axes)
    flagged = np.zeros(shape, dtype=bool)
    steps = np.array([a.step for a in axes])
    coords = [a.values() for a in axes]
    for curve in boundaries:
        pts = _densify(np.asarray(curve.points, dtype=float), steps)
        pts = pts[~np.isnan(pts).any(axis=1)]
        for p in pts:
            masks = [np.abs(c - p[i]) <= steps[i] * (1 + 1e-9) + 1e-12 for i, c in enumerate(coords)]
            if not all(m.any() for m in masks):
                continue
            flagged[np.ix_(*masks)] = True
    return flagged


def phase_diagram(axes: Sequence[AxisSpec], evaluate: Callable[[dict], float], fixed: dict | None = None,
                  boundaries: Sequence[BoundaryCurve] = (), threads: int | None = None) -> PhaseDiagramGrid:
    """Evaluate an invariant on every cell not flagged as near a boundary."""
    axes = list(axes)
    fixed = dict(fixed or {})
    flagged = flag_near_boundaries(axes, boundaries)
    values = np.full(flagged.shape, np.nan)
    errors = {}
    cells = [idx for idx in np.ndindex(flagged.shape) if not flagged[idx]]
    coords = [a.values() for a in axes]

    def work(idx):
        params = dict(fixed)
        params.update({a.name: float(coords[i][j]) for i, (a, j) in enumerate(zip(axes, idx))})
        try:
            return idx, float(evaluate(params)), None
        except (ArithmeticError, ValueError) as exc:
            return idx, math.nan, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(_default_threads(threads)) as pool:
        for idx, value, err in pool.map(work, cells):
            values[idx] = value
            if err:
                errors[idx] = err
    return PhaseDiagramGrid(axes, values, flagged, list(boundaries), errors)


def chain_params(params: dict) -> tuple[float, float, float]:
    """(j1, j2, b) from a parameter dict; a uniform ``j`` sets both couplings."""
    if "j" in params:
        return float(params["j"]), float(params["j"]), float(params["b"])
    return float(params["j1"]), float(params["j2"]), float(params["b"])


def static_evaluator(invariant: str, n: int = DIPOLE_N, kgrid: int = DEFAULT_KGRID):
    def evaluate(params):
        j1, j2, b = chain_params(params)
        if invariant == "W":
            return winding_number(ChainSpec(max(n, 4), j1, j2, b, "periodic"), kgrid).value
        if invariant == "P":
            return dipole_moment(ChainSpec(n, j1, j2, b, "periodic")).value
        raise ValueError(f"unknown static invariant {invariant!r}")

    return evaluate


def implicit_curve(residual: Callable[[dict], float], axes: Sequence[AxisSpec], fixed: dict,
                   label: str, samples: int = 801, brackets: int = 200) -> BoundaryCurve:
    """Sample the zero set of ``residual`` in a 1D or 2D axis box.

    For two axes, roots are searched along lines of both axes so steep and
    flat stretches of the curve are both covered.
    """
    fixed = dict(fixed)
    scale = 1e-10

    def root_scan(vary: AxisSpec, others: dict):
        lo, hi = vary.min - vary.step, vary.max + vary.step

        def fn(x):
            p = dict(fixed)
            p.update(others)
            p[vary.name] = x
            return float(residual(p))

        return bracketed_roots(fn, lo, hi, brackets, accept=scale)

    if len(axes) == 1:
        return BoundaryCurve(label, np.array([[r] for r in root_scan(axes[0], {})]).reshape(-1, 1))
    ax, ay = axes
    pts = []
    for x in np.linspace(ax.min, ax.max, samples):
        pts += [(x, y) for y in root_scan(ay, {ax.name: x})]
    for y in np.linspace(ay.min, ay.max, samples):
        pts += [(x, y) for x in root_scan(ax, {ay.name: y})]
    return BoundaryCurve(label, np.array(pts, dtype=float).reshape(-1, 2))


def static_boundary_curves(axes: Sequence[AxisSpec], invariant: str, fixed: dict,
                           samples: int = 401) -> list[BoundaryCurve]:
    """Analytic overlays: the zero-gap locus for W, |J1| = |J2| for P."""
    def eq4(p):
        j1, j2, b = chain_params(p)
        return eq4_residual(b, j1, j2) / max(j1**2 + j2**2, 1e-300)

    def nonzero_gap(p):
        j1, j2, _ = chain_params(p)
        return abs(j1) - abs(j2)

    if invariant == "W":
        return [implicit_curve(eq4, axes, fixed, "zero-gap", samples)]
    if invariant == "P":
        if "j" in fixed or any(a.name == "j" for a in axes):
            return []
        return [implicit_curve(nonzero_gap, axes, fixed, "|J1|=|J2|", samples)]
    raise ValueError(f"unknown static invariant {invariant!r}")


def static_phase_diagram(axes: Sequence[AxisSpec], invariant: str = "W", fixed: dict | None = None,
                         threads: int | None = None, n: int = DIPOLE_N,
                         kgrid: int = DEFAULT_KGRID) -> PhaseDiagramGrid:
    fixed = dict(fixed or {})
    curves = static_boundary_curves(axes, invariant, fixed)
    return phase_diagram(axes, static_evaluator(invariant, n, kgrid), fixed, curves, threads)
