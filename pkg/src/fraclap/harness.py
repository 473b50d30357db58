"""Experiment driver: sweeps, assertions and machine-readable reports.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport`. A report holds one record per sweep cell and one
record per assertion. Inequality records carry ``lhs``, ``rhs`` and
``slack = rhs - lhs`` and pass when ``slack >= -tol * max(|lhs|, |rhs|, 1)``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .forms import NonlocalForm, scaled_energy
from .lattice import GridFunction, LatticeGrid, interval, l2_inner, l2_norm
from .oracles import (bump, bump_profile, fourier_energy, gagliardo_constant, gaussian, local_baseline_lambda,
                      montecarlo_gagliardo)
from .reduction import (LoadSpec, average_rho, cutoff_profile, cylinder_grid, equicoercivity_bounds, functional_I,
                        minimum_value, recovery_sequence, reduction_error, section_load_norm, solve_dirichlet_cylinder,
                        solve_dirichlet_section, unbreve, unit_grid)
from .solvers import smallest_eigenpair, tensor_min_eigenvalue
from .weights import closed_form_weights_1d, compute_weights

SCHEMA_VERSION = "1.0"
EXPERIMENTS = ("scaling", "sandwich", "forms-check", "reduction", "recovery", "gamma-pointwise", "oracle")
DEGENERATE_RTOL = 1e-13

DEFAULT_ELLS = {
    "scaling": [1, 2, 4],
    "sandwich": [1, 2, 4, 8],
    "forms-check": [1, 2, 4, 8],
    "reduction": [1, 2, 4, 8],
    "recovery": [2, 4, 8, 16, 32, 64, 128, 256, 512],
    "gamma-pointwise": [1, 2, 4, 8],
    "oracle": [1],
}
DEFAULT_S = {"reduction": [0.5]}
DEFAULT_TOLERANCES = {
    "eigen": 1e-12,        # eigenvalue error bound, relative
    "cg": 1e-12,           # linear solve residual, relative
    "identity": 1e-10,     # eigenvalue identities
    "inequality": 1e-12,   # exact form inequalities
    "chain": 1e-10,        # averaging chain and Poincare-type bounds
    "pointwise": 1e-12,    # rescaled split energy identity
}

_TIMING_KEYS = ("elapsed", "timings")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """Inputs of one experiment run. Every field has a default.

    ``ell_values`` and ``s_values`` default per experiment. ``ht`` defaults
    to ``hx``. ``baseline`` adds ``s = 1`` rows where the experiment has a
    local counterpart. ``ratio_window`` bounds the ``ell`` range used for the
    recovery ratio checks.
    """

    experiment: str = "sandwich"
    s_values: Optional[list] = None
    ell_values: Optional[list] = None
    hx: float = 1.0 / 32
    ht: Optional[float] = None
    omega: tuple = (-1.0, 1.0)
    load: dict = field(default_factory=lambda: {"profile": "one", "perturbation": None, "alpha": 1.0})
    tolerances: dict = field(default_factory=dict)
    samples: int = 200
    baseline: bool = False
    recovery_ht: Optional[float] = None
    ratio_window: tuple = (2, 64)
    mc_samples: int = 400_000
    out: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.s_values is None:
            self.s_values = list(DEFAULT_S.get(self.experiment, [0.25, 0.5, 0.75]))
        if self.ell_values is None:
            self.ell_values = list(DEFAULT_ELLS[self.experiment])
        self.s_values = [float(s) for s in self.s_values]
        self.ell_values = [float(e) for e in self.ell_values]
        if any(not 0.0 < s < 1.0 for s in self.s_values):
            raise ConfigError("s_values must lie in (0, 1); use baseline=true for s = 1 rows")
        if any(e <= 0 for e in self.ell_values) or any(b <= a for a, b in zip(self.ell_values, self.ell_values[1:])):
            raise ConfigError("ell_values must be positive and strictly ascending")
        if self.ht is None:
            self.ht = self.hx
        if not (self.hx > 0 and self.ht > 0):
            raise ConfigError("hx and ht must be positive")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        self.omega = tuple(float(v) for v in self.omega)
        self.ratio_window = tuple(float(v) for v in self.ratio_window)
        try:
            self.load_spec = LoadSpec(**self.load)
        except TypeError as exc:
            raise ConfigError(f"bad load specification: {exc}") from None

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict({**data, **{k: v for k, v in overrides.items() if v is not None}})

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    @property
    def omega_grid(self) -> LatticeGrid:
        try:
            return LatticeGrid.from_spacing(interval(*self.omega), self.hx)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


class ExperimentReport:
    """Cells and assertions of one run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.cells: list[dict] = []
        self.assertions: list[dict] = []
        self.timings: dict[str, float] = {}

    # -- assertion recorders -------------------------------------------------

    def inequality(self, name: str, reference: str, lhs: float, rhs: float, tol: float, **extra) -> bool:
        """Record ``lhs <= rhs`` with relative tolerance ``tol``."""
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs
        scale = max(abs(lhs), abs(rhs), 1.0)
        ok = slack >= -tol * scale
        self.assertions.append({"name": name, "reference": reference, "kind": "inequality", "lhs": lhs,
                                "rhs": rhs, "slack": slack, "tolerance": tol, "passed": bool(ok),
                                "degenerate": bool(abs(slack) < DEGENERATE_RTOL * scale), **extra})
        return ok

    def equality(self, name: str, reference: str, value: float, target: float, rtol: float, **extra) -> bool:
        """Record ``|value - target| <= rtol * max(|value|, |target|)``."""
        value, target = float(value), float(target)
        err = abs(value - target) / max(abs(value), abs(target), 1e-300)
        ok = err <= rtol
        self.assertions.append({"name": name, "reference": reference, "kind": "equality", "lhs": value,
                                "rhs": target, "relative_error": err, "tolerance": rtol, "passed": bool(ok), **extra})
        return ok

    def predicate(self, name: str, reference: str, ok: bool, **detail) -> bool:
        self.assertions.append({"name": name, "reference": reference, "kind": "predicate", "passed": bool(ok),
                                **{k: _plain(v) for k, v in detail.items()}})
        return bool(ok)

    # -- summaries -------------------------------------------------------------

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    @property
    def failures(self) -> list[dict]:
        return [a for a in self.assertions if not a["passed"]]

    def to_dict(self) -> dict:
        cfg = self.config.to_dict()
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.config.experiment,
            "config": _plain(cfg),
            "cells": _plain(self.cells),
            "assertions": _plain(self.assertions),
            "summary": {"assertions": len(self.assertions), "failed": len(self.failures), "passed": self.passed},
            "timings": dict(self.timings),
        }


def _plain(obj):
    """Convert numpy scalars and tuples for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def strip_timings(data):
    """Report dictionary without timing fields (for determinism checks)."""
    if isinstance(data, dict):
        return {k: strip_timings(v) for k, v in data.items() if k not in _TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timings(v) for v in data]
    return data


def write_json(report: ExperimentReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
        fh.write("\n")
    return path


def write_csv(rows: list[dict], columns: list[str], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_value(row.get(c)) for c in columns])
    return path


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


CSV_COLUMNS = {
    "scaling": ["s", "ell", "nodes", "h", "lambda", "scaled_lambda"],
    "sandwich": ["s", "ell", "hx", "ht", "lambda_omega", "lambda_B1", "lambda_Omega", "lower_slack",
                 "upper_slack", "gap", "envelope"],
    "forms-check": ["s", "ell", "vectors", "min_lower_slack", "min_upper_slack", "min_slice_x_slack",
                    "min_slice_t_slack", "min_jensen_slack", "min_chain_slack", "min_poincare_slack"],
    "reduction": ["s", "ell", "hs_error", "l2_error", "M_breve", "M_inf", "minima_gap", "load_residual",
                  "iterations"],
    "recovery": ["s", "ell", "ht", "mean_defect", "grad_over_ell", "energy_over_ell_s", "E_ell", "E_bound",
                 "I_ell", "I_inf"],
    "gamma-pointwise": ["s", "ell", "sample", "E_tilde", "E_scaled", "E_tilde_inf", "t_part_scaled"],
    "oracle": ["check", "s", "value", "reference_value", "error"],
}


def write_outputs(report: ExperimentReport, out_dir) -> list[Path]:
    """Write ``<experiment>.json`` and ``<experiment>.csv`` into ``out_dir``."""
    out = Path(out_dir)
    stem = report.config.experiment.replace("-", "_")
    paths = [write_json(report, out / f"{stem}.json")]
    paths.append(write_csv(report.cells, CSV_COLUMNS[report.config.experiment], out / f"{stem}.csv"))
    return paths


# ---------------------------------------------------------------------------
# sweep plumbing

def pool_size() -> int:
    try:
        return max(1, int(os.environ.get("FRACLAP_THREADS", "1")))
    except ValueError:
        return 1


def _map_cells(fn: Callable[[tuple], dict], keys: list[tuple]) -> list[dict]:
    """Evaluate cells (possibly concurrently) and return them sorted by key."""
    keys = sorted(keys)
    workers = pool_size()
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, keys))
    return [fn(k) for k in keys]


def _eig(grid, s, kind, cfg):
    return smallest_eigenpair(NonlocalForm(grid, s, kind), cfg.tolerances["eigen"])


def _s_grid(cfg):
    return list(cfg.s_values) + ([1.0] if cfg.baseline else [])


def check_congruent(grids: list[LatticeGrid]) -> None:
    """Raise :class:`ConfigError` unless all grids have the same node counts."""
    if len({g.shape for g in grids}) > 1:
        raise ConfigError("scaling requires congruent grids (equal node counts across ell)")


# ---------------------------------------------------------------------------
# experiments

def run_scaling(cfg: ExperimentConfig) -> ExperimentReport:
    """Eigenvalues of ``ell U`` on congruent grids against ``ell**(-2s) lambda(U)``."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    base = cfg.omega_grid
    grids = {ell: base.scaled(ell) for ell in cfg.ell_values}
    check_congruent(list(grids.values()))

    def cell(key):
        s, ell = key
        start = time.perf_counter()
        pair = _eig(grids[ell], s, "full", cfg)
        return {"s": s, "ell": ell, "nodes": grids[ell].size, "h": grids[ell].spacing[0], "lambda": pair.value,
                "scaled_lambda": ell ** (2 * s) * pair.value, "residual": pair.residual,
                "positive": bool(pair.vector.values.min() > 0), "gap": pair.gap_estimate,
                "elapsed": time.perf_counter() - start}

    rep.cells = _map_cells(cell, [(s, ell) for s in _s_grid(cfg) for ell in cfg.ell_values])
    for s in _s_grid(cfg):
        rows = [c for c in rep.cells if c["s"] == s]
        ref = rows[0]["scaled_lambda"]
        for c in rows[1:]:
            rep.equality(f"scaling s={s} ell={c['ell']:g}", "lambda(ell U) = ell^(-2s) lambda(U)",
                         c["scaled_lambda"], ref, cfg.tolerances["identity"], s=s, ell=c["ell"])
        for c in rows:
            rep.predicate(f"positive eigenvector s={s} ell={c['ell']:g}", "principal eigenfunction > 0",
                          c["positive"])
            rep.predicate(f"spectral gap s={s} ell={c['ell']:g}", "first eigenvalue is simple", c["gap"] > 0,
                          gap=c["gap"])
        if s == 1.0:
            rep.equality("local baseline closed form", "lambda^1 = (4/h^2) sin^2(pi h / 2L)", ref,
                         local_baseline_lambda(base), 1e-12)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def sandwich_cell(s: float, ell: float, cfg: ExperimentConfig, full: bool = True, tensor: bool = True) -> dict:
    """Eigenvalues of one ``(s, ell)`` cell of the sandwich sweep.

    ``lambda_B1`` is taken on the unit section congruent to the cylinder's
    section (spacing ``ht / ell``); ``lambda_B1_fixed`` on the unit section
    with spacing ``ht``.
    """
    start = time.perf_counter()
    om = cfg.omega_grid
    cyl = cylinder_grid(om, ell, cfg.ht)
    sec_t = cyl.axis_grid(1)
    b1 = sec_t.scaled(1.0 / ell)
    b1_fixed = cylinder_grid(om, 1.0, cfg.ht).axis_grid(1)
    lam_w = _eig(om, s, "full", cfg).value
    lam_bl = _eig(sec_t, s, "full", cfg).value
    lam_b1 = _eig(b1, s, "full", cfg).value
    lam_b1_fixed = _eig(b1_fixed, s, "full", cfg).value
    row = {"s": s, "ell": ell, "hx": cfg.hx, "ht": cfg.ht, "shape": list(cyl.shape), "lambda_omega": lam_w,
           "lambda_Bell": lam_bl, "lambda_B1": lam_b1, "lambda_B1_fixed": lam_b1_fixed,
           "envelope": lam_b1 / ell ** (2 * s), "envelope_fixed": lam_b1_fixed / ell ** (2 * s)}
    if tensor:
        row["lambda_tensor"] = _eig(cyl, s, "tensor", cfg).value
    if full:
        pair = _eig(cyl, s, "full", cfg)
        lam = pair.value
        row.update({"lambda_Omega": lam, "lower_slack": lam - lam_w, "upper_slack": lam_w + lam_bl - lam,
                    "gap": lam - lam_w, "gap_certificate": pair.gap_estimate, "iterations": pair.iterations,
                    "positive": bool(pair.vector.values.min() > 0)})
    row["elapsed"] = time.perf_counter() - start
    return row


def record_tensor_identities(rep: ExperimentReport, row: dict, cfg: ExperimentConfig) -> None:
    s, ell = row["s"], row["ell"]
    tol = cfg.tolerances["identity"]
    rep.equality(f"tensor additivity s={s} ell={ell:g}", "min eig(A_x (x) I + I (x) A_t) = lambda(omega) + lambda(B_ell)",
                 row["lambda_tensor"], tensor_min_eigenvalue(row["lambda_omega"], row["lambda_Bell"]), tol)
    rep.equality(f"section scaling s={s} ell={ell:g}", "lambda(B_ell) = lambda(B_1) / ell^(2s)",
                 row["lambda_Bell"], row["envelope"], tol)


def run_sandwich(cfg: ExperimentConfig) -> ExperimentReport:
    """Two-sided eigenvalue bounds on cylinders and the decay of the gap."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    rep.cells = _map_cells(lambda k: sandwich_cell(k[0], k[1], cfg),
                           [(s, ell) for s in _s_grid(cfg) for ell in cfg.ell_values])
    tol = cfg.tolerances["identity"]
    for row in rep.cells:
        s, ell = row["s"], row["ell"]
        tag = f"s={s} ell={ell:g}"
        rep.inequality(f"lower bound {tag}", "lambda(omega) <= lambda(Omega_ell)", row["lambda_omega"],
                       row["lambda_Omega"], tol)
        rep.inequality(f"upper bound {tag}", "lambda(Omega_ell) <= lambda(omega) + lambda(B_ell)",
                       row["lambda_Omega"], row["lambda_omega"] + row["lambda_Bell"], tol)
        rep.inequality(f"gap below envelope {tag}", "lambda(Omega_ell) - lambda(omega) <= lambda(B_1) / ell^(2s)",
                       row["gap"], row["envelope"], tol)
        if s < 1.0:
            # fixed-spacing B_1 eigenvalues decrease under refinement only for s < 1
            rep.inequality(f"gap below fixed-grid envelope {tag}",
                           "lambda(Omega_ell) - lambda(omega) <= lambda_h(B_1) / ell^(2s)", row["gap"],
                           row["envelope_fixed"], tol)
        record_tensor_identities(rep, row, cfg)
        rep.predicate(f"positive eigenvector {tag}", "principal eigenfunction > 0", row["positive"])
        rep.predicate(f"spectral gap {tag}", "first eigenvalue is simple", row["gap_certificate"] > 0,
                      gap=row["gap_certificate"])
        if s == 1.0:
            rep.equality(f"local gap identity ell={ell:g}", "lambda^1(Omega_ell) = lambda^1(omega) + lambda^1(B_1)/ell^2",
                         row["gap"], row["envelope"], tol)
    for s in _s_grid(cfg):
        rows = [c for c in rep.cells if c["s"] == s]
        gaps = [c["gap"] for c in rows]
        lams = [c["lambda_Omega"] for c in rows]
        rep.predicate(f"gaps strictly decreasing s={s}", "ell -> lambda(Omega_ell) - lambda(omega) decreasing",
                      all(b < a for a, b in zip(gaps, gaps[1:])), gaps=gaps)
        rep.predicate(f"eigenvalue monotone in ell s={s}", "ell -> lambda(Omega_ell) nonincreasing",
                      all(b <= a for a, b in zip(lams, lams[1:])), values=lams)
        if len(rows) > 1:
            first, last = rows[0], rows[-1]
            rep.inequality(f"gap decay s={s}", "gap(ell_max) / gap(ell_min) <= 1.05 (ell_max / ell_min)^(-2s)",
                           last["gap"] / first["gap"], 1.05 * (last["ell"] / first["ell"]) ** (-2 * s), 0.0)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def _random_vectors(rng, shape, count):
    """Mixture of white noise and smooth random fields."""
    out = []
    nx, nt = shape
    x = np.linspace(0, 1, nx)[:, None]
    t = np.linspace(0, 1, nt)[None, :]
    for i in range(count):
        if i % 2 == 0:
            v = rng.standard_normal(shape)
        else:
            k = rng.integers(1, 6, size=2)
            ph = rng.uniform(0, 2 * np.pi, size=2)
            v = np.sin(k[0] * np.pi * x + ph[0]) * np.cos(k[1] * np.pi * t + ph[1]) + 0.1 * rng.standard_normal(shape)
        out.append(v.reshape(-1))
    return out


def run_forms_check(cfg: ExperimentConfig) -> ExperimentReport:
    """Form inequalities and the averaging chain on seeded random vectors.

    For every ``(s, ell)`` the vectors live on the unit grid; their breve
    rescaling lives on the cylinder grid. Each inequality is recorded once per
    cell at its worst vector.
    """
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    om = cfg.omega_grid
    lam_w = {s: _eig(om, s, "full", cfg).value for s in cfg.s_values}

    def cell(key):
        s, ell = key
        start = time.perf_counter()
        cyl = cylinder_grid(om, ell, cfg.ht)
        unit = unit_grid(om, ell, cfg.ht)
        full = NonlocalForm(cyl, s, "full")
        sx = NonlocalForm(cyl, s, "slice_x")
        st = NonlocalForm(cyl, s, "slice_t")
        sec = NonlocalForm(om, s)
        b_ell, b_one = cyl.axis_mass(-1), unit.axis_mass(-1)
        rng = np.random.default_rng([cfg.seed, int(round(s * 1e6)), int(round(ell * 1e3))])
        vecs = _random_vectors(rng, cyl.shape, cfg.samples)
        checks = {k: [] for k in ("lower", "upper", "slice_x", "slice_t", "jensen", "chain", "poincare")}
        for vals in vecs:
            v_cyl = GridFunction(cyl, vals)
            e = full.energy(v_cyl)
            ex, et = sx.energy(v_cyl), st.energy(v_cyl)
            et_total = ex + et
            checks["lower"].append((2 ** (s - 1) * et_total, e))
            checks["upper"].append((e, et_total))
            checks["slice_x"].append((ex, e))
            checks["slice_t"].append((et, e))
            v_unit = GridFunction(unit, vals)
            e_avg = sec.energy(average_rho(v_unit))
            mean_slice = ex / b_ell
            e_scaled = e / b_ell
            checks["jensen"].append((e_avg, mean_slice))
            checks["chain"].append((mean_slice, e_scaled))
            checks["poincare"].append((lam_w[s] * l2_inner(v_unit, v_unit) / b_one, e_scaled))
        return {"s": s, "ell": ell, "vectors": len(vecs), "checks": checks, "elapsed": time.perf_counter() - start}

    cells = _map_cells(cell, [(s, ell) for s in cfg.s_values for ell in cfg.ell_values])
    refs = {
        "lower": ("2^(s-1) E_split(u) <= E(u)", "inequality"),
        "upper": ("E(u) <= E_split(u)", "inequality"),
        "slice_x": ("int E_x(u(.,t)) dt <= E(u)", "inequality"),
        "slice_t": ("int E_t(u(x,.)) dx <= E(u)", "inequality"),
        "jensen": ("E_x(rho v) <= mean_t E_x(v(.,t))", "chain"),
        "chain": ("mean_t E_x(v(.,t)) <= |B_ell|^-1 E(v_breve)", "chain"),
        "poincare": ("lambda(omega) ||v||^2 / |B_1| <= E_ell(v)", "chain"),
    }
    for c in cells:
        row = {"s": c["s"], "ell": c["ell"], "vectors": c["vectors"], "elapsed": c["elapsed"]}
        for key, pairs in c["checks"].items():
            rel = [(rhs - lhs) / max(abs(lhs), abs(rhs), 1.0) for lhs, rhs in pairs]
            worst = int(np.argmin(rel))
            lhs, rhs = pairs[worst]
            ref, tol_key = refs[key]
            rep.inequality(f"{key} s={c['s']} ell={c['ell']:g}", ref, lhs, rhs, cfg.tolerances[tol_key],
                           vectors=len(pairs), worst_vector=worst)
            column = {"lower": "min_lower_slack", "upper": "min_upper_slack", "slice_x": "min_slice_x_slack",
                      "slice_t": "min_slice_t_slack", "jensen": "min_jensen_slack", "chain": "min_chain_slack",
                      "poincare": "min_poincare_slack"}[key]
            row[column] = float(min(rel))
        rep.cells.append(row)

    # zero vector: every quantity vanishes
    s0, ell0 = cfg.s_values[0], cfg.ell_values[0]
    cyl = cylinder_grid(om, ell0, cfg.ht)
    zero = GridFunction.zeros(cyl)
    vals = [NonlocalForm(cyl, s0, k).energy(zero) for k in ("full", "tensor", "slice_x", "slice_t")]
    rep.predicate("zero vector", "E(0) = E_split(0) = 0", all(v == 0.0 for v in vals))
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def run_reduction(cfg: ExperimentConfig) -> ExperimentReport:
    """Averaged cylinder solutions against the section solution along the sweep."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    om = cfg.omega_grid
    load = cfg.load_spec
    tol = cfg.tolerances["cg"]
    section = {}
    for s in cfg.s_values:
        u_inf = solve_dirichlet_section(s, om, load.f_inf(s, om), tol)
        section[s] = (u_inf, functional_I(s, math.inf, u_inf, load), _eig(om, s, "full", cfg).value)

    def cell(key):
        s, ell = key
        start = time.perf_counter()
        u_inf, m_inf, lam_w = section[s]
        u, report = solve_dirichlet_cylinder(s, om, ell, cfg.ht, load, tol, with_report=True)
        hs, l2 = reduction_error(s, u, u_inf)
        m_breve = minimum_value(s, u, ell, load)
        v = unbreve(u, ell)
        f_breve = load.f_breve(s, v.grid, ell)
        f_inf_ext = GridFunction(v.grid, np.repeat(load.f_inf(s, om).values, v.grid.shape[-1]))
        full = NonlocalForm(u.grid, s)
        energy = full.energy(u)
        work = l2_inner(load.f_ell(s, u.grid, ell), u)
        a_bound, e_bound = equicoercivity_bounds(lam_w, section_load_norm(s, v.grid, ell, load), m_breve)
        return {"s": s, "ell": ell, "hs_error": hs, "l2_error": l2, "M_breve": m_breve, "M_inf": m_inf,
                "minima_gap": abs(m_breve - m_inf), "load_residual": l2_norm(f_breve - f_inf_ext),
                "iterations": report.iterations, "residual": report.relative_residual, "energy": energy,
                "work": work, "v_norm": l2_norm(v) / math.sqrt(v.grid.axis_mass(-1)), "a_bound": a_bound,
                "avg_energy": NonlocalForm(om, s).energy(average_rho(v)), "energy_bound": e_bound,
                "elapsed": time.perf_counter() - start}

    rep.cells = _map_cells(cell, [(s, ell) for s in cfg.s_values for ell in cfg.ell_values])
    for c in rep.cells:
        tag = f"s={c['s']} ell={c['ell']:g}"
        rep.equality(f"energy identity {tag}", "E(u_ell) = (f_ell, u_ell)", c["energy"], c["work"], 10 * tol)
        rep.inequality(f"bounded averages {tag}", "||v|| / sqrt|B_1| <= a(I_ell(v))", c["v_norm"], c["a_bound"],
                       cfg.tolerances["chain"])
        rep.inequality(f"bounded average energy {tag}", "E_x(rho v) <= 2 (I_ell(v) + F a)", c["avg_energy"],
                       c["energy_bound"], cfg.tolerances["chain"])
    for s in cfg.s_values:
        rows = [c for c in rep.cells if c["s"] == s]
        hs = [c["hs_error"] for c in rows]
        gaps = [c["minima_gap"] for c in rows]
        rep.predicate(f"averages converge s={s}", "||rho(u_ell) - u_inf||_H^s strictly decreasing",
                      all(b < a for a, b in zip(hs, hs[1:])), errors=hs)
        rep.predicate(f"minima converge s={s}", "|M_breve_ell - M_inf| decreasing",
                      all(b < a for a, b in zip(gaps, gaps[1:])), gaps=gaps)
        if load.perturbation is None:
            rep.inequality(f"reduction factor s={s}", "error(ell_max) <= error(ell_min) / 4", hs[-1], hs[0] / 4,
                           0.0)
            rep.inequality(f"minima factor s={s}", "|M_breve(ell_max) - M_inf| <= |M_breve(ell_min) - M_inf| / 4",
                           gaps[-1], gaps[0] / 4, 0.0)
        if load.profile == "eigen":
            u_inf, _, lam_w = section[s]
            target = load.f_inf(s, om) / lam_w
            rep.inequality(f"eigen load s={s}", "u_inf = e_1 / lambda(omega)", l2_norm(u_inf - target),
                           1e-8 * l2_norm(target), 0.0)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def recovery_spacing(cfg: ExperimentConfig, ell: float) -> float:
    """``t``-spacing on ``B_1`` resolving the cut-off transition (width about 2/ell)."""
    if cfg.recovery_ht is not None:
        return cfg.recovery_ht
    return 1.0 / (16 * 2 ** math.ceil(math.log2(max(ell, 64))))


def run_recovery(cfg: ExperimentConfig) -> ExperimentReport:
    """Cut-off recovery sequences ``u_inf(x) phi(|t|**ell)`` and their energies."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    om = cfg.omega_grid
    load = cfg.load_spec
    section = {}
    for s in cfg.s_values:
        u_inf = solve_dirichlet_section(s, om, load.f_inf(s, om), cfg.tolerances["cg"])
        section[s] = (u_inf, functional_I(s, math.inf, u_inf, load), NonlocalForm(om, s).energy(u_inf))

    def cell(key):
        s, ell = key
        start = time.perf_counter()
        u_inf, i_inf, e_inf = section[s]
        tg = LatticeGrid.from_spacing(interval(-1.0, 1.0), recovery_spacing(cfg, ell))
        phi = GridFunction(tg, cutoff_profile(tg.coords(0), ell))
        grad = NonlocalForm(tg, 1.0).energy(phi)
        e_k = NonlocalForm(tg, s).energy(phi)
        v = recovery_sequence(u_inf, ell, tg)
        b_one = tg.axis_mass(0)
        e_ell = scaled_energy(s, v.grid, ell, v)
        bound = e_inf * float(np.mean(phi.values**2)) + ell ** (-2 * s) * e_k * l2_inner(u_inf, u_inf) / b_one
        centre = tg.shape[0] // 2
        return {"s": s, "ell": ell, "ht": tg.spacing[0], "mean_defect": abs(float(phi.values.mean()) - 1.0),
                "grad_over_ell": grad / ell, "energy_over_ell_s": e_k / ell**s, "E_ell": e_ell, "E_bound": bound,
                "I_ell": functional_I(s, ell, v, load), "I_inf": i_inf,
                "centre_row_exact": bool(abs(tg.coords(0)[centre]) < 1e-15
                                         and np.array_equal(v.array[:, centre], u_inf.values)),
                "elapsed": time.perf_counter() - start}

    rep.cells = _map_cells(cell, [(s, ell) for s in cfg.s_values for ell in cfg.ell_values])
    lo, hi = cfg.ratio_window
    for s in cfg.s_values:
        rows = [c for c in rep.cells if c["s"] == s]
        window = [c for c in rows if lo <= c["ell"] <= hi]
        defects = [c["mean_defect"] for c in rows]
        rep.predicate(f"mean defect decreasing s={s}", "|mean(phi_ell) - 1| decreasing",
                      all(b < a for a, b in zip(defects, defects[1:])), defects=defects)
        if window:
            rep.inequality(f"mean defect at ell={window[-1]['ell']:g} s={s}", "|mean(phi_ell) - 1| < 0.05",
                           window[-1]["mean_defect"], 0.05, 0.0)
            for key, ref in (("grad_over_ell", "||grad phi_ell||^2 <= c ell"),
                             ("energy_over_ell_s", "E_k(phi_ell) <= c ell^s")):
                vals = [c[key] for c in window]
                rep.inequality(f"{key} bounded s={s}", ref + " (max/min <= 10)", max(vals) / min(vals), 10.0, 0.0,
                               window=[lo, hi])
        for c in rows:
            rep.inequality(f"recovery energy bound s={s} ell={c['ell']:g}",
                           "E_ell(u phi_ell) <= E(u) mean(phi^2) + ell^(-2s) E_k(phi) ||u||^2 / |B_1|",
                           c["E_ell"], c["E_bound"], cfg.tolerances["inequality"])
            rep.predicate(f"centre row s={s} ell={c['ell']:g}", "phi_ell(0) = 1", c["centre_row_exact"])
        last = rows[-1]
        rep.inequality(f"limsup s={s}", "I_ell(u phi_ell) <= I_inf(u_inf) + 1e-3 (1 + |I_inf|) at largest ell",
                       last["I_ell"], last["I_inf"] + 1e-3 * (1 + abs(last["I_inf"])), 0.0, ell=last["ell"])
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def run_gamma_pointwise(cfg: ExperimentConfig) -> ExperimentReport:
    """Rescaled split energies of fixed functions as ``ell`` grows."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()
    om = cfg.omega_grid
    unit = unit_grid(om, 1.0, cfg.ht)
    b_one = unit.axis_mass(-1)
    count = max(1, min(cfg.samples, 8))

    def cell(key):
        s, ell = key
        start = time.perf_counter()
        rng = np.random.default_rng([cfg.seed, int(round(s * 1e6))])
        rows = []
        sec = NonlocalForm(om, s)
        sx_unit = NonlocalForm(unit, s, "slice_x")
        for i, vals in enumerate(_random_vectors(rng, unit.shape, count)):
            v = GridFunction(unit, vals)
            tilde = scaled_energy(s, unit, ell, v, kind="tensor")
            full = scaled_energy(s, unit, ell, v, kind="full")
            tilde_inf = sx_unit.energy(v) / b_one
            slices = float(np.mean([sec.energy(GridFunction(om, v.array[:, j])) for j in range(unit.shape[1])]))
            rows.append({"s": s, "ell": ell, "sample": i, "E_tilde": tilde, "E_scaled": full, "E_tilde_inf": tilde_inf,
                         "slice_mean": slices, "t_part_scaled": (tilde - tilde_inf) * ell ** (2 * s)})
        return {"key": key, "rows": rows, "elapsed": time.perf_counter() - start}

    results = _map_cells(cell, [(s, ell) for s in cfg.s_values for ell in cfg.ell_values])
    for res in results:
        for r in res["rows"]:
            rep.cells.append({**r, "elapsed": res["elapsed"]})
    tol = cfg.tolerances["pointwise"]
    for s in cfg.s_values:
        for i in range(count):
            rows = [c for c in rep.cells if c["s"] == s and c["sample"] == i]
            ref = rows[0]["t_part_scaled"]
            for c in rows[1:]:
                rep.equality(f"t-part scaling s={s} sample={i} ell={c['ell']:g}",
                             "E_split_ell(v) - E_split_inf(v) = ell^(-2s) const", c["t_part_scaled"], ref, tol)
            tildes = [c["E_tilde"] for c in rows]
            rep.predicate(f"monotone decrease s={s} sample={i}", "ell -> E_split_ell(v) decreasing",
                          all(b < a for a, b in zip(tildes, tildes[1:])), values=tildes)
            for c in rows:
                tag = f"s={s} sample={i} ell={c['ell']:g}"
                rep.inequality(f"squeeze lower {tag}", "E_split_inf(v) <= E_ell(v)", c["E_tilde_inf"], c["E_scaled"],
                               tol)
                rep.inequality(f"squeeze upper {tag}", "E_ell(v) <= E_split_ell(v)", c["E_scaled"], c["E_tilde"], tol)
            rep.equality(f"slice average s={s} sample={i}", "E_split_inf(v) = mean_t E_x(v(.,t))",
                         rows[0]["E_tilde_inf"], rows[0]["slice_mean"], tol)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


ORACLE_ORDERS = (0.1, 0.25, 0.5, 0.75, 0.9)


def richardson_pair(values: list[float], rate: float = 1.0) -> tuple[float, float]:
    """First-order extrapolations from the two coarser and the two finer of three halvings."""
    f = 2.0**rate
    a, b, c = values
    return (f * b - a) / (f - 1), (f * c - b) / (f - 1)


def run_oracle(cfg: ExperimentConfig) -> ExperimentReport:
    """Lattice scheme against independent references."""
    rep = ExperimentReport(cfg)
    t0 = time.perf_counter()

    def add(check, s, value, ref, err):
        rep.cells.append({"check": check, "s": s, "value": float(value), "reference_value": float(ref),
                          "error": float(err)})

    m = np.arange(65)
    for s in ORACLE_ORDERS:
        cf = closed_form_weights_1d(s, m)
        for method in ("fft", "heat"):
            w = compute_weights(s, 1.0, 64, oversample=8, method=method).weights[64:]
            err = float(np.max(np.abs(w - cf) / np.abs(cf)))
            add(f"weights_{method}_vs_gamma_ratio", s, w[1], cf[1], err)
            rep.inequality(f"{method} weights vs gamma ratio s={s}", "w_m = Gamma-ratio closed form, |m| <= 64",
                           err, 1e-8, 0.0)

    g = gaussian()
    big = LatticeGrid.from_spacing(interval(-12.0, 12.0), 0.05)
    samples = GridFunction.sample(big, g.evaluate)
    for s in cfg.s_values:
        exact = math.gamma(s + 0.5)
        lat = NonlocalForm(big, s).energy(samples)
        add("gaussian_lattice_energy", s, lat, exact, abs(lat / exact - 1))
        rep.inequality(f"gaussian lattice energy s={s}", "E_h(exp(-x^2/2)) = Gamma(s+1/2) within 1%",
                       abs(lat / exact - 1), 0.01, 0.0)
        four = fourier_energy(g, s)
        add("gaussian_fourier_energy", s, four, exact, abs(four / exact - 1))
        rep.equality(f"gaussian fourier energy s={s}", "int |xi|^2s e^(-xi^2) = Gamma(s+1/2)", four, exact, 1e-8)
        est, err = montecarlo_gagliardo(g, s, samples=cfg.mc_samples, seed=cfg.seed)
        add("gaussian_montecarlo", s, est, four, abs(est - four))
        rep.inequality(f"gaussian monte carlo s={s}", "|E_MC - E_Fourier| <= 3 stderr + 1e-6", abs(est - four),
                       3 * err + 1e-6, 0.0, stderr=err)

    # s = 1 baseline
    om = LatticeGrid.from_spacing(interval(-1.0, 1.0), 0.01)
    lam1 = _eig(om, 1.0, "full", cfg).value
    ref1 = local_baseline_lambda(om)
    add("local_eigenvalue", 1.0, lam1, ref1, abs(lam1 / ref1 - 1))
    rep.equality("local baseline eigenvalue", "lambda_h^1 = (4/h^2) sin^2(pi h/4)", lam1, ref1, 1e-12)
    rep.equality("local baseline limit", "lambda_h^1 -> pi^2/4", lam1, math.pi**2 / 4, 1e-4)
    near = _eig(om, 0.99, "full", cfg).value
    add("continuity_at_s_1", 0.99, near, ref1, abs(near / ref1 - 1))
    rep.inequality("continuity at s=1", "|lambda^0.99 / lambda^1 - 1| <= 5%", abs(near / ref1 - 1), 0.05, 0.0)

    c_half = gagliardo_constant(1, 0.5)
    add("gagliardo_constant", 0.5, c_half, 1 / math.pi, abs(c_half * math.pi - 1))
    rep.equality("gagliardo constant", "C_{1,1/2} = 1/pi", c_half, 1 / math.pi, 1e-12)

    # smooth bump: Fourier, Monte Carlo and lattice
    b = bump()
    four_b = fourier_energy(b, 0.5)
    est_b, err_b = montecarlo_gagliardo(b, 0.5, samples=cfg.mc_samples, seed=cfg.seed)
    lattice_b = []
    for k in (5, 6, 7):
        gr = LatticeGrid.from_spacing(interval(-1.0, 1.0), 2.0**-k)
        lattice_b.append(NonlocalForm(gr, 0.5).energy(GridFunction.sample(gr, bump_profile)))
    add("bump_fourier_vs_montecarlo", 0.5, est_b, four_b, abs(est_b - four_b))
    rep.inequality("bump monte carlo vs lattice", "|E_MC - E_h| <= 3 stderr + 2% E_h", abs(est_b - lattice_b[-1]),
                   3 * err_b + 0.02 * lattice_b[-1], 0.0)
    dists = [abs(v - four_b) for v in lattice_b]
    rep.predicate("bump lattice energy converges", "|E_h - E_Fourier| decreasing as h halves",
                  all(b2 < a2 for a2, b2 in zip(dists, dists[1:])), energies=lattice_b, fourier_value=four_b)
    for k, v in zip((5, 6, 7), lattice_b):
        add(f"bump_lattice_h=2^-{k}", 0.5, v, four_b, abs(v - four_b))

    # self-convergence of the fractional eigenvalue
    lams = []
    for k in (5, 6, 7):
        gr = LatticeGrid.from_spacing(interval(-1.0, 1.0), 2.0**-k)
        lams.append(_eig(gr, 0.5, "full", cfg).value)
    r_coarse, r_fine = richardson_pair(lams)
    add("richardson_coarse", 0.5, r_coarse, r_fine, abs(r_coarse / r_fine - 1))
    rep.equality("self-convergence", "Richardson(h=2^-5,2^-6) = Richardson(2^-6,2^-7) within 1e-3", r_coarse,
                 r_fine, 1e-3, eigenvalues=lams)
    rep.predicate("monotone in h", "lambda_h decreases as h halves", all(b2 < a2 for a2, b2 in zip(lams, lams[1:])),
                  eigenvalues=lams)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "scaling": run_scaling,
    "sandwich": run_sandwich,
    "forms-check": run_forms_check,
    "reduction": run_reduction,
    "recovery": run_recovery,
    "gamma-pointwise": run_gamma_pointwise,
    "oracle": run_oracle,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    report = RUNNERS[cfg.experiment](cfg)
    if cfg.out:
        write_outputs(report, cfg.out)
    return report


__all__ = ["ExperimentConfig", "ExperimentReport", "ConfigError", "EXPERIMENTS", "SCHEMA_VERSION", "run_experiment",
           "run_scaling", "run_sandwich", "run_forms_check", "run_reduction", "run_recovery", "run_gamma_pointwise",
           "run_oracle", "sandwich_cell", "write_json", "write_csv", "write_outputs", "strip_timings",
           "check_congruent", "richardson_pair"]
