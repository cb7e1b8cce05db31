"""Command-line front end: ``ion-majorana run <config.json> [--out DIR] [--threads N] [--kgrid M]``.

A config names a task, the model point, an optional drive and up to two scan
axes. Outputs are CSV files plus ``manifest.json`` in the output directory;
failures leave ``error.json`` there and exit with 2 (bad config) or 3
(computation failed, e.g. a closed gap).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .couplings import (DEFAULT_PREFACTOR, GeometricCoupling, PhononSpec, nearest_neighbor,
                        phonon_couplings, power_law_couplings)
from .errors import ConfigError
from .floquet import drive_from_dict
from .floquet.edges import EDGE_TOL, sine_edge_point, step_edge_point
from .floquet.sine import SineDrive, closing_residual, sine_boundary, sine_dipole, sine_winding
from .floquet.step import (StepDrive, chiral_frame_windings, step_boundaries,
                           step_boundary_curves)
from .io import _json_default, config_hash, write_csv, write_json, write_matrix_csv
from .model import DEFAULT_KGRID, ChainSpec, real_space_bdg
from .oracle import (MAX_DENSE_SITES, SpinChainSpec, fermion_spectrum_reconstruction,
                     magnetization_probes, spectrum_distance, spin_ed)
from .spectra import open_spectrum
from .topology import (DIPOLE_LENGTH, DIPOLE_N, DIPOLE_NORMALIZATION, MAX_PHASE_STEP, MAX_REFINEMENTS, AxisSpec,
                       BoundaryCurve, chain_params, dipole_moment, flag_near_boundaries,
                       implicit_curve, static_boundary, static_boundary_curves, winding_number)

log = logging.getLogger("ion_majorana")

TASKS = ("spectrum", "winding", "dipole", "boundary", "phase-diagram", "floquet-spectrum",
         "floquet-invariants", "floquet-boundaries", "oracle-check", "couplings")
PARAMETERS = {"n", "j", "j1", "j2", "b", "u1", "u2", "t1", "t2", "b0", "omega"}
EXIT_CONFIG, EXIT_COMPUTE = 2, 3


class ScanInterrupted(RuntimeError):
    """Raised when a scan stops early on purpose; the partial file is kept."""


@dataclass
class RunConfig:
    task: str
    model: dict
    drive: dict | None = None
    axes: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    couplings: dict | None = None
    out: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - {"task", "model", "drive", "axes", "options", "couplings", "out"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        task = d.get("task")
        if task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
        try:
            axes = [AxisSpec.from_dict(a) for a in d.get("axes") or []]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad axis: {exc}") from None
        if len(axes) > 2:
            raise ConfigError("at most two scan axes")
        for a in axes:
            if a.name not in PARAMETERS:
                raise ConfigError(f"axis {a.name!r} is not a model or drive parameter")
        model = dict(d.get("model") or {})
        n = model.get("n")
        if n is not None and (not isinstance(n, int) or n < 2 or n % 2):
            raise ConfigError(f"model.n must be a positive even integer, got {n!r}")
        if model.get("boundary", "open") not in ("open", "periodic"):
            raise ConfigError("model.boundary must be 'open' or 'periodic'")
        drive = d.get("drive")
        if drive is not None:
            drive_from_dict(drive)
        cfg = cls(task, model, drive, axes, dict(d.get("options") or {}), d.get("couplings"), d.get("out"))
        cfg.base_params()
        return cfg

    def to_dict(self) -> dict:
        return {"task": self.task, "model": self.model, "drive": self.drive,
                "axes": [{"name": a.name, "min": a.min, "max": a.max, "steps": a.steps} for a in self.axes],
                "options": self.options, "couplings": self.couplings}

    def base_params(self) -> dict:
        p = {k: v for k, v in self.model.items() if k != "boundary"}
        if self.drive:
            p.update({k: v for k, v in self.drive.items() if k != "type"})
        bad = set(p) - PARAMETERS
        if bad:
            raise ConfigError(f"unknown parameters {sorted(bad)}")
        return p

    @property
    def drive_kind(self) -> str | None:
        return self.drive.get("type") if self.drive else None


@dataclass
class Context:
    out: Path
    threads: int
    kgrid: int
    max_cells: int | None = None
    outputs: list = field(default_factory=list)

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(name)
        return p


# ---------------------------------------------------------------------------
# scans


def _cells(axes):
    shape = tuple(a.steps for a in axes)
    return list(np.ndindex(shape)) if axes else [()]


def _cell_params(base: dict, axes, idx) -> dict:
    p = dict(base)
    for a, i in zip(axes, idx):
        p[a.name] = float(a.values()[i])
    return p


def resumable_scan(ctx: Context, name: str, axes, base: dict, evaluate: Callable[[dict], dict],
                   columns: list, flagged=None) -> tuple[Path, list]:
    """Evaluate every cell, flushing finished cells to ``<name>.partial.jsonl``.

    A rerun skips cells already in the partial file, so an interrupted scan
    resumes where it stopped. The final CSV is written in cell order.
    """
    partial = ctx.out / f"{name}.partial.jsonl"
    done = {}
    if partial.exists():
        for line in partial.read_text().splitlines():
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn last line from a kill
            done[tuple(rec["idx"])] = rec
    cells = _cells(axes)
    todo = [c for c in cells if c not in done and not (flagged is not None and flagged[c])]
    total = len(todo)
    log.info("%s: %d cells, %d already done, %d to evaluate", name, len(cells), len(done), total)

    def work(idx):
        try:
            values = evaluate(_cell_params(base, axes, idx))
            return {"idx": list(idx), "values": values, "error": None}
        except (ArithmeticError, AssertionError, ValueError) as exc:
            return {"idx": list(idx), "values": {}, "error": f"{type(exc).__name__}: {exc}"}

    limit = ctx.max_cells
    with partial.open("a") as fh, ThreadPoolExecutor(ctx.threads) as pool:
        it = pool.map(work, todo[:limit] if limit is not None else todo)
        for count, rec in enumerate(it, 1):
            fh.write(json.dumps(rec, default=_json_default) + "\n")
            fh.flush()
            done[tuple(rec["idx"])] = rec
            if total >= 10 and count % max(1, total // 10) == 0:
                log.info("%s: %d/%d", name, count, total)
    if limit is not None and limit < total:
        raise ScanInterrupted(f"{name}: stopped after {limit} of {total} cells")

    rows, records = [], []
    for idx in cells:
        pt = [float(a.values()[i]) for a, i in zip(axes, idx)]
        if flagged is not None and flagged[idx]:
            rows.append(pt + [math.nan] * len(columns) + [1, ""])
            continue
        rec = done[idx]
        rows.append(pt + [rec["values"].get(c, math.nan) for c in columns] + [0, rec["error"] or ""])
        records.append(rec)
    path = write_csv(ctx.path(f"{name}.csv"), [a.name for a in axes] + columns + ["flagged", "error"], rows)
    partial.unlink()
    return path, records


def _attained(records, key):
    return sorted({int(r["values"][key]) for r in records if key in r["values"]
                   and not math.isnan(r["values"][key])})


def _curve_rows(curves: list[BoundaryCurve]):
    for c in curves:
        meta = c.meta or {}
        for pt in np.asarray(c.points):
            yield [c.label, meta.get("family", ""), meta.get("n1"), meta.get("n2"), meta.get("gamma"),
                   meta.get("sign"), meta.get("n"), meta.get("gap", "")] + list(pt)


def _write_curves(ctx: Context, name: str, axes, curves) -> Path:
    header = ["label", "family", "n1", "n2", "gamma", "sign", "n", "gap"] + [a.name for a in axes]
    return write_csv(ctx.path(name), header, _curve_rows(curves))


# ---------------------------------------------------------------------------
# evaluators


def _chain(p: dict, boundary: str) -> ChainSpec:
    j1, j2, b = chain_params(p)
    return ChainSpec(int(p.get("n", DIPOLE_N)), j1, j2, b, boundary)


def _winding_eval(ctx):
    def ev(p):
        r = winding_number(_chain(p, "periodic"), ctx.kgrid)
        return {"W": r.value, "residual": r.residual}
    return ev


def _dipole_eval(ctx):
    def ev(p):
        r = dipole_moment(_chain(p, "periodic"))
        return {"P": r.value, "residual": r.residual}
    return ev


def _step_drive(p) -> StepDrive:
    return StepDrive(float(p["u1"]), float(p["u2"]), float(p["t1"]), float(p["t2"]))


def _sine_drive(p) -> SineDrive:
    return SineDrive(float(p["b0"]), float(p["omega"]))


def _step_eval(ctx):
    def ev(p):
        inv = chiral_frame_windings(float(p["b"]), _step_drive(p), ctx.kgrid)
        return {"W0": inv.w0, "Wpi": inv.wpi, "W1": inv.w1, "W2": inv.w2,
                "chiral_residual": inv.chiral_residual}
    return ev


def _sine_eval(ctx, which=("W", "P")):
    def ev(p):
        j1, j2 = float(p["j1"]), float(p["j2"])
        out = {}
        if "W" in which:
            out["W"] = sine_winding(j1, j2, _sine_drive(p), ctx.kgrid).value
        if "P" in which:
            out["P"] = sine_dipole(j1, j2, _sine_drive(p), int(p.get("n", DIPOLE_N))).value
        return out
    return ev


# ---------------------------------------------------------------------------
# tasks


def task_spectrum(cfg: RunConfig, ctx: Context) -> dict:
    base = cfg.base_params()
    boundary = cfg.model.get("boundary", "open")
    cells = _cells(cfg.axes)

    def work(idx):
        p = _cell_params(base, cfg.axes, idx)
        spec = _chain(p, boundary)
        if boundary == "open":
            return idx, open_spectrum(spec).eigenvalues
        return idx, np.linalg.eigvalsh(real_space_bdg(spec).matrix)

    rows = []
    with ThreadPoolExecutor(ctx.threads) as pool:
        for idx, energies in pool.map(work, cells):
            pt = [float(a.values()[i]) for a, i in zip(cfg.axes, idx)]
            rows += [pt + [n, e] for n, e in enumerate(energies)]
    write_csv(ctx.path("spectrum.csv"), [a.name for a in cfg.axes] + ["index", "energy"], rows)
    summary = {}
    for inv in cfg.options.get("invariants", []):
        if inv == "W":
            _, recs = resumable_scan(ctx, "winding", cfg.axes, base, _winding_eval(ctx), ["W", "residual"])
            summary["W_values"] = _attained(recs, "W")
        elif inv == "P":
            _, recs = resumable_scan(ctx, "dipole", cfg.axes, base, _dipole_eval(ctx), ["P", "residual"])
            summary["P_values"] = sorted({r["values"]["P"] for r in recs if "P" in r["values"]})
        else:
            raise ConfigError(f"unknown invariant {inv!r}")
    return summary


def task_winding(cfg, ctx):
    _, recs = resumable_scan(ctx, "winding", cfg.axes, cfg.base_params(), _winding_eval(ctx), ["W", "residual"])
    return {"W_values": _attained(recs, "W")}


def task_dipole(cfg, ctx):
    _, recs = resumable_scan(ctx, "dipole", cfg.axes, cfg.base_params(), _dipole_eval(ctx), ["P", "residual"])
    return {"P_values": sorted({r["values"]["P"] for r in recs if "P" in r["values"]})}


def task_boundary(cfg, ctx):
    base = cfg.base_params()
    if len(cfg.axes) == 2:
        curves = static_boundary_curves(cfg.axes, cfg.options.get("invariant", "W"), base)
        _write_curves(ctx, "boundaries.csv", cfg.axes, curves)
        return {"curves": len(curves)}
    rows = []
    for idx in _cells(cfg.axes):
        p = _cell_params(base, cfg.axes, idx)
        j1, j2, _ = chain_params({**p, "b": p.get("b", 0.0)})
        pt = [float(a.values()[i]) for a, i in zip(cfg.axes, idx)]
        rows += [pt + [n, r] for n, r in enumerate(static_boundary(j1, j2))]
    write_csv(ctx.path("boundary.csv"), [a.name for a in cfg.axes] + ["root", "b"], rows)
    return {"roots": len(rows)}


def _sine_curves(axes, base) -> list[BoundaryCurve]:
    def zero_gap(p):
        j1, j2 = float(p["j1"]), float(p["j2"])
        return min(float(closing_residual(p["b0"], j1, j2, p["omega"], k)) for k in (0.0, np.pi)) \
            / max(j1**2 + j2**2, 1e-300)

    curves = [implicit_curve(zero_gap, axes, base, "zero-gap", samples=201)]
    names = {a.name for a in axes}
    if {"b0", "omega"} <= names:
        j1, j2 = float(base["j1"]), float(base["j2"])
        lo, hi = abs(abs(j1) - abs(j2)), abs(j1) + abs(j2)
        w = np.linspace(lo, hi, 201)
        curves.append(BoundaryCurve("b0=omega", np.stack([w, w], axis=1), {"family": "unpaired", "gap": "zero"}))
    return curves


def task_phase_diagram(cfg, ctx):
    base = cfg.base_params()
    inv = cfg.options.get("invariant", "W")
    kind = cfg.drive_kind
    if not cfg.axes:
        raise ConfigError("phase-diagram needs at least one axis")
    if kind is None:
        if inv not in ("W", "P"):
            raise ConfigError("static phase diagrams take invariant W or P")
        curves = static_boundary_curves(cfg.axes, inv, base)
        ev, cols = (_winding_eval(ctx), ["W", "residual"]) if inv == "W" else (_dipole_eval(ctx), ["P", "residual"])
    elif kind == "step":
        if inv not in ("W0", "Wpi"):
            raise ConfigError("step-drive phase diagrams take invariant W0 or Wpi")
        curves = _step_curves(cfg, base)
        ev, cols = _step_eval(ctx), ["W0", "Wpi", "W1", "W2"]
    else:
        if inv not in ("W", "P"):
            raise ConfigError("sine-drive phase diagrams take invariant W or P")
        curves = _sine_curves(cfg.axes, base) if inv == "W" else []
        ev, cols = _sine_eval(ctx, (inv,)), [inv]
    flagged = flag_near_boundaries(cfg.axes, curves) if cfg.options.get("flag_boundaries", True) else None
    _, recs = resumable_scan(ctx, "phase_diagram", cfg.axes, base, ev, cols, flagged)
    _write_curves(ctx, "boundaries.csv", cfg.axes, curves)
    return {"values": _attained(recs, cols[0]), "flagged_cells": int(flagged.sum()) if flagged is not None else 0}


def _step_curves(cfg, base) -> list[BoundaryCurve]:
    names = [a.name for a in cfg.axes]
    drive = _step_drive(base)
    if names == ["b", "t1"]:
        return step_boundary_curves(drive, cfg.axes[0], cfg.axes[1])
    if names == ["b"]:
        a = cfg.axes[0]
        pts = step_boundaries(drive, (a.min - a.step, a.max + a.step))
        return [BoundaryCurve(str(p.label()), np.array([[p.b]]), p.label()) for p in pts]
    return []


def task_floquet_spectrum(cfg, ctx):
    base = cfg.base_params()
    n = int(cfg.options.get("n", base.get("n", 200)))
    tol = float(cfg.options.get("tol", EDGE_TOL))
    kind = cfg.drive_kind
    if kind is None:
        raise ConfigError("floquet-spectrum needs a drive")
    cells = _cells(cfg.axes)

    def work(idx):
        p = _cell_params(base, cfg.axes, idx)
        if kind == "step":
            return idx, step_edge_point(float(p["b"]), _step_drive(p), n, tol)
        return idx, sine_edge_point(float(p["b0"]), float(p["j1"]), float(p["j2"]), float(p["omega"]),
                                    n, tol, method=cfg.options.get("method", "effective"))

    rows, counts = [], []
    with ThreadPoolExecutor(ctx.threads) as pool:
        for idx, pt_res in pool.map(work, cells):
            pt = [float(a.values()[i]) for a, i in zip(cfg.axes, idx)]
            rows += [pt + [i, e] for i, e in enumerate(pt_res.spectrum.quasienergies)]
            counts.append(pt + [pt_res.zero.count, pt_res.pi.count, pt_res.zero.localized_count,
                                pt_res.pi.localized_count])
    names = [a.name for a in cfg.axes]
    write_csv(ctx.path("quasienergies.csv"), names + ["index", "quasienergy"], rows)
    write_csv(ctx.path("edge_modes.csv"), names + ["zero_count", "pi_count", "zero_localized", "pi_localized"],
              counts)
    return {"points": len(cells)}


def task_floquet_invariants(cfg, ctx):
    base = cfg.base_params()
    if cfg.drive_kind == "step":
        _, recs = resumable_scan(ctx, "invariants", cfg.axes, base, _step_eval(ctx),
                                 ["W0", "Wpi", "W1", "W2", "chiral_residual"])
        return {"W0_values": _attained(recs, "W0"), "Wpi_values": _attained(recs, "Wpi")}
    if cfg.drive_kind == "sine":
        _, recs = resumable_scan(ctx, "invariants", cfg.axes, base, _sine_eval(ctx), ["W", "P"])
        return {"W_values": _attained(recs, "W")}
    raise ConfigError("floquet-invariants needs a drive")


def task_floquet_boundaries(cfg, ctx):
    base = cfg.base_params()
    if cfg.drive_kind == "step":
        names = [a.name for a in cfg.axes]
        if names == ["b", "t1"]:
            curves = step_boundary_curves(_step_drive(base), *cfg.axes)
            _write_curves(ctx, "boundaries.csv", cfg.axes, curves)
            return {"curves": len(curves)}
        lo, hi = cfg.options.get("b_range", [0.0, 5.0])
        if names == ["b"]:
            lo, hi = cfg.axes[0].min, cfg.axes[0].max
        elif names:
            raise ConfigError("step boundaries take axes [b] or [b, t1]")
        pts = step_boundaries(_step_drive(base), (lo, hi))
        write_csv(ctx.path("boundary_points.csv"),
                  ["b", "family", "n1", "n2", "gamma", "sign", "n", "gap", "k"],
                  [[p.b, p.family, p.n1, p.n2, p.gamma, p.sign, p.n, p.gap, p.k] for p in pts])
        return {"points": len(pts)}
    if cfg.drive_kind == "sine":
        rows = []
        for idx in _cells(cfg.axes):
            p = _cell_params(base, cfg.axes, idx)
            sb = sine_boundary(float(p["j1"]), float(p["j2"]), float(p["omega"]))
            pt = [float(a.values()[i]) for a, i in zip(cfg.axes, idx)]
            for k, roots in sorted(sb.roots.items()):
                rows += [pt + [k, r, int(sb.nonzero_gap_closed)] for r in roots]
        write_csv(ctx.path("sine_boundaries.csv"),
                  [a.name for a in cfg.axes] + ["k", "b0", "nonzero_gap_closed"], rows)
        return {"roots": len(rows)}
    raise ConfigError("floquet-boundaries needs a drive")


def task_oracle_check(cfg, ctx):
    p = cfg.base_params()
    j1, j2, b = chain_params(p)
    spec = SpinChainSpec(int(p.get("n", 8)), j1, j2, b)
    if spec.n > MAX_DENSE_SITES:
        raise ConfigError(f"oracle-check is capped at {MAX_DENSE_SITES} sites for full spectra")
    ed, psi = spin_ed(spec)
    fermion = fermion_spectrum_reconstruction(spec)
    rows = [[i, e, ed.provenance] for i, e in enumerate(ed.energies)]
    rows += [[i, e, fermion.provenance] for i, e in enumerate(fermion.energies)]
    write_csv(ctx.path("oracle_spectrum.csv"), ["index", "energy", "provenance"], rows)
    m2, corr = magnetization_probes(spec, psi)
    return {"max_abs_difference": spectrum_distance(ed, fermion), "levels": len(ed),
            "squared_moment": m2, "end_to_end_correlator": corr, "note": fermion.note}


def task_couplings(cfg, ctx):
    c = cfg.couplings
    if not c:
        raise ConfigError("couplings task needs a 'couplings' block")
    kind = c.get("kind")
    try:
        if kind == "geometric":
            if "positions" in c:
                g = GeometricCoupling(float(c["j0"]), float(c["beta"]), np.array(c["positions"], dtype=float))
            else:
                g = GeometricCoupling.dimerized(float(c["j0"]), float(c["beta"]), float(c["delta1"]),
                                                float(c["delta2"]), int(c["n"]))
            j = power_law_couplings(g)
            extra = {"prefactor_c": None}
        elif kind == "phonon":
            ps = PhononSpec.from_dict(c)
            j = phonon_couplings(ps)
            extra = {"prefactor_c": ps.prefactor}
        else:
            raise ConfigError(f"couplings kind must be 'geometric' or 'phonon', got {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"couplings block is missing {exc.args[0]!r}") from None
    write_matrix_csv(ctx.path("couplings.csv"), j)
    j1, j2 = nearest_neighbor(j) if len(j) > 2 else (float(j[0, 1]), float("nan"))
    return {"j1": j1, "j2": j2, **extra}


HANDLERS = {
    "spectrum": task_spectrum, "winding": task_winding, "dipole": task_dipole,
    "boundary": task_boundary, "phase-diagram": task_phase_diagram,
    "floquet-spectrum": task_floquet_spectrum, "floquet-invariants": task_floquet_invariants,
    "floquet-boundaries": task_floquet_boundaries, "oracle-check": task_oracle_check,
    "couplings": task_couplings,
}


# ---------------------------------------------------------------------------
# entry points


def frozen_constants(cfg: RunConfig, kgrid: int) -> dict:
    prefactor = (cfg.couplings or {}).get("prefactor", DEFAULT_PREFACTOR)
    return {"dipole_length": DIPOLE_LENGTH, "dipole_normalization": DIPOLE_NORMALIZATION,
            "prefactor_c": prefactor, "kgrid": kgrid, "max_phase_step": MAX_PHASE_STEP,
            "max_refinements": MAX_REFINEMENTS, "edge_tol_over_T": EDGE_TOL}


def load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


def run(config, out=None, threads=None, kgrid=None, max_cells=None) -> dict:
    """Execute a config (dict or path) and return the manifest. Exceptions propagate."""
    raw = load_config(config) if not isinstance(config, dict) else config
    cfg = RunConfig.from_dict(raw)
    kgrid = int(kgrid or cfg.options.get("kgrid", DEFAULT_KGRID))
    out_dir = Path(out or cfg.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = Context(out_dir, threads or os.cpu_count() or 1, kgrid, max_cells)
    summary = HANDLERS[cfg.task](cfg, ctx)
    for name in ctx.outputs:
        p = out_dir / name
        if not p.exists() or p.stat().st_size == 0:
            raise RuntimeError(f"output {name} is missing or empty")
    manifest = {
        "task": cfg.task,
        "config_hash": config_hash({**cfg.to_dict(), "kgrid": kgrid}),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(ctx.outputs),
        "frozen_constants": frozen_constants(cfg, kgrid),
        "summary": summary,
    }
    write_json(out_dir / "manifest.json", manifest)
    return manifest


def _error_record(out_dir: Path, exc: BaseException, code: int):
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / "error.json", {"error": type(exc).__name__, "message": str(exc), "exit_code": code})
    except OSError:
        pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ion-majorana", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="execute a JSON run config")
    r.add_argument("config", help="path to a config file, or preset:<name>")
    r.add_argument("--out", help="output directory (default: config 'out' or ./out)")
    r.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    r.add_argument("--kgrid", type=int, help="momentum grid size")
    sub.add_parser("presets", help="list bundled presets")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    if args.command == "presets":
        for name in list_presets():
            print(name)
        return 0
    out_dir = Path(args.out or "out")
    try:
        config = args.config
        if config.startswith("preset:"):
            config = load_preset(config.split(":", 1)[1])
        else:
            config = load_config(config)
        out_dir = Path(args.out or config.get("out") or "out")
        manifest = run(config, args.out, args.threads, args.kgrid)
    except (ConfigError, KeyError, TypeError) as exc:
        log.error("config error: %s", exc)
        _error_record(out_dir, exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except (ArithmeticError, AssertionError, RuntimeError, ValueError) as exc:
        log.error("computation error: %s", exc)
        _error_record(out_dir, exc, EXIT_COMPUTE)
        return EXIT_COMPUTE
    log.info("wrote %s", ", ".join(manifest["outputs"] + ["manifest.json"]))
    return 0


def list_presets() -> list[str]:
    from importlib.resources import files

    return sorted(p.name[:-5] for p in files("ion_majorana.presets").iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    from importlib.resources import files

    res = files("ion_majorana.presets") / f"{name}.json"
    if not res.is_file():
        raise ConfigError(f"no preset named {name!r}")
    return json.loads(res.read_text())


if __name__ == "__main__":
    sys.exit(main())
