"""Experiment orchestration: regularization schedules, the ``A + sqrt(t) G``
experiment over a list of sizes, sweeps over ``t``, configuration files and
report persistence.

Random streams.  Cell ``(n, trial)`` of a run with root seed ``s`` uses
``SeedSpec(s).spawn(n, trial)``; the base matrix ``A`` comes from its child
``0`` and the Gaussian matrix ``G`` from its child ``1``.  Sweeps use the same
streams for every ``t`` (common random numbers), so a sweep row at ``t`` is
directly comparable with a run cell at the same ``(n, trial, t)``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import scipy

from ._version import __version__
from .brown import (
    BrownDensityGrid,
    BrownOracle,
    EmpiricalMeasure,
    GridSpec,
    LogPotentialField,
    brown_density,
    log_potential_field,
    measure_distance,
    oracle_brown,
)
from .ensembles import MODELS, EnsembleSpec, realize, sample_ginibre
from .exceptions import (
    BrownRegError,
    ConfigError,
    FidelityWarning,
    IngestionError,
    ScheduleError,
)
from .fkdet import _trace_log_from_sv
from .linalg import _svdvals, eigenvalues
from .seeding import SeedSpec, check_seed
from .validation import check_dimension

SCHEDULE_KINDS = ("power", "fixed", "explicit")
DISTANCE_METHODS = ("radial_ks", "energy")

#: a regularization with ``sqrt(t) < FIDELITY_FACTOR * eps * ||A||`` is below
#: the backward error of the eigensolver
FIDELITY_FACTOR = 1e3


# --------------------------------------------------------------------------- schedules


@dataclass(frozen=True)
class Schedule:
    """Regularization size ``t_N`` as a function of the matrix size ``N``.

    ``power``: ``t0 * N**(-alpha)``; ``fixed``: ``t`` for every ``N``;
    ``explicit``: a lookup ``table`` of ``(N, t)`` pairs with increasing ``N``.
    """

    kind: str = "power"
    t0: float = 1.0
    alpha: float = 1.0
    t: float = 0.0
    table: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigError(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if self.kind == "power" and not (self.t0 > 0 and self.alpha > 0):
            raise ConfigError("power schedule needs t0 > 0 and alpha > 0")
        if self.kind == "fixed" and not self.t >= 0:
            raise ConfigError("fixed schedule needs t >= 0")
        if self.kind == "explicit":
            if not self.table:
                raise ConfigError("explicit schedule needs at least one (n, t) entry")
            ns = [n for n, _ in self.table]
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ConfigError("explicit schedule entries must have strictly increasing n")
            if any(not t >= 0 for _, t in self.table):
                raise ConfigError("explicit schedule values must be >= 0")

    @classmethod
    def power(cls, t0: float = 1.0, alpha: float = 1.0) -> "Schedule":
        return cls("power", t0=float(t0), alpha=float(alpha))

    @classmethod
    def fixed(cls, t: float) -> "Schedule":
        return cls("fixed", t=float(t))

    @classmethod
    def explicit(cls, pairs) -> "Schedule":
        return cls("explicit", table=tuple((int(n), float(t)) for n, t in pairs))

    def to_flat(self) -> dict:
        d: dict[str, Any] = {"schedule.kind": self.kind}
        if self.kind == "power":
            d.update({"schedule.t0": self.t0, "schedule.alpha": self.alpha})
        elif self.kind == "fixed":
            d["schedule.t"] = self.t
        else:
            d["schedule.table"] = [[n, t] for n, t in self.table]
        return d


def schedule_t(s: Schedule, n: int) -> float:
    """``t_N`` for the schedule ``s``."""
    n = check_dimension(n)
    if s.kind == "power":
        return float(s.t0 * n ** (-s.alpha))
    if s.kind == "fixed":
        return float(s.t)
    for m, t in s.table:
        if m == n:
            return float(t)
    raise ScheduleError(f"explicit schedule has no entry for n={n}")


# --------------------------------------------------------------------------- configuration


def _as_float(v) -> float:
    return float(v)


def _as_int(v) -> int:
    if isinstance(v, str):
        v = v.strip()
        return int(v)
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"{v} is not an integer")
    return int(v)


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    if isinstance(v, str):
        return complex(v.strip().replace(" ", ""))
    return complex(v)


def _split(v) -> list:
    if isinstance(v, str):
        return [p for p in (x.strip() for x in v.split(",")) if p]
    return list(v)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _as_table(v) -> tuple[tuple[int, float], ...]:
    if isinstance(v, str):
        pairs = []
        for item in _split(v):
            n, _, t = item.partition(":")
            pairs.append((_as_int(n), _as_float(t)))
        return tuple(pairs)
    return tuple((_as_int(n), _as_float(t)) for n, t in v)


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


KNOWN_KEYS = (
    "ensemble.model", "ensemble.n", "ensemble.tau", "ensemble.values", "ensemble.path",
    "schedule.kind", "schedule.t0", "schedule.alpha", "schedule.t", "schedule.table",
    "n_list", "trials", "root_seed", "seed", "distance_method",
    "target.model", "target.t", "target.shift", "target.a", "target.tau",
    "grid.enabled", "grid.center", "grid.half_width", "grid.nodes_per_side",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run; ``to_flat`` echoes it for reports."""

    ensemble: EnsembleSpec
    schedule: Schedule = field(default_factory=Schedule)
    n_list: tuple[int, ...] = ()
    trials: int = 1
    grid: GridSpec | None = None
    target: BrownOracle | None = None
    distance_method: str = "radial_ks"
    root_seed: int = 0

    def __post_init__(self):
        n_list = tuple(int(n) for n in (self.n_list or (self.ensemble.n,)))
        object.__setattr__(self, "n_list", n_list)
        for n in n_list:
            check_dimension(n, name="n_list entry")
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ConfigError("n_list must be strictly ascending")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if self.distance_method not in DISTANCE_METHODS:
            raise ConfigError(f"unknown distance method {self.distance_method!r}; "
                              f"expected one of {DISTANCE_METHODS}")
        if self.ensemble.model == "sum":
            raise ConfigError("sum ensembles cannot be driven from a configuration")
        SeedSpec(self.root_seed)  # range check
        if self.ensemble.model in ("diagonal", "file") and n_list != (self.ensemble.n,):
            raise ConfigError(f"a {self.ensemble.model} ensemble has fixed n={self.ensemble.n}")

    def ensemble_at(self, n: int) -> EnsembleSpec:
        return self.ensemble if n == self.ensemble.n else dataclasses.replace(self.ensemble, n=n)

    def to_flat(self) -> dict:
        e = self.ensemble
        d: dict[str, Any] = {"ensemble.model": e.model, "ensemble.n": e.n}
        if e.model == "elliptic":
            d["ensemble.tau"] = e.tau
        if e.model == "diagonal":
            d["ensemble.values"] = [_pair(v) for v in e.values]
        if e.model == "file":
            d["ensemble.path"] = e.path
        d.update(self.schedule.to_flat())
        d.update({"n_list": list(self.n_list), "trials": int(self.trials),
                  "root_seed": int(self.root_seed), "distance_method": self.distance_method})
        if self.target is not None:
            o = self.target
            d.update({"target.model": o.model, "target.t": o.t, "target.shift": _pair(o.shift),
                      "target.a": _pair(o.a), "target.tau": o.tau})
        if self.grid is not None:
            g = self.grid
            d.update({"grid.enabled": True, "grid.center": _pair(g.center),
                      "grid.half_width": g.half_width, "grid.nodes_per_side": g.nodes_per_side})
        return d

    @classmethod
    def from_flat(cls, mapping: Mapping[str, Any]) -> "ExperimentConfig":
        """Build a config from dot-namespaced keys (strings or JSON values)."""
        unknown = sorted(set(mapping) - set(KNOWN_KEYS))
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        m = dict(mapping)

        def get(key, conv, default=None):
            if key not in m or m[key] is None:
                return default
            try:
                return conv(m[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {m[key]!r} ({exc})") from None

        model = get("ensemble.model", str, None)
        if model is None:
            raise ConfigError("ensemble.model is required")
        model = model.strip()
        if model not in MODELS:
            raise ConfigError(f"unknown ensemble model {model!r}; expected one of {MODELS}")
        n_list = get("n_list", lambda v: tuple(_as_int(x) for x in _split(v)), ())
        values = get("ensemble.values", lambda v: tuple(_as_complex(x) for x in _split_values(v)), ())
        n_default = len(values) if model == "diagonal" and values else (n_list[-1] if n_list else None)
        n = get("ensemble.n", _as_int, n_default)
        if n is None:
            raise ConfigError("either ensemble.n or n_list is required")
        ensemble = EnsembleSpec(model, n, tau=get("ensemble.tau", _as_float, 0.0),
                                values=values, path=get("ensemble.path", str, None))

        kind = get("schedule.kind", lambda v: str(v).strip(), "power")
        schedule = Schedule(kind, t0=get("schedule.t0", _as_float, 1.0),
                            alpha=get("schedule.alpha", _as_float, 1.0),
                            t=get("schedule.t", _as_float, 0.0),
                            table=get("schedule.table", _as_table, ()))

        target = None
        target_model = get("target.model", lambda v: str(v).strip(), None)
        if target_model not in (None, "", "none"):
            target = BrownOracle(target_model, t=get("target.t", _as_float, 1.0),
                                 shift=get("target.shift", _as_complex, 0.0),
                                 a=get("target.a", _as_complex, 0.0),
                                 tau=get("target.tau", _as_float, 0.0))

        grid = None
        grid_keys = [k for k in m if k.startswith("grid.") and k != "grid.enabled"]
        if get("grid.enabled", _as_bool, bool(grid_keys)):
            grid = GridSpec(center=get("grid.center", _as_complex, 0.0),
                            half_width=get("grid.half_width", _as_float, 1.6),
                            nodes_per_side=get("grid.nodes_per_side", _as_int, 101))

        seed = get("root_seed", _as_int, None)
        if seed is None:
            seed = get("seed", _as_int, 0)
        return cls(ensemble=ensemble, schedule=schedule, n_list=n_list or (n,),
                   trials=get("trials", _as_int, 1), grid=grid, target=target,
                   distance_method=get("distance_method", lambda v: str(v).strip(), "radial_ks"),
                   root_seed=seed)


def _split_values(v):
    # JSON echo stores complex numbers as [re, im] pairs
    if isinstance(v, (list, tuple)):
        return list(v)
    return _split(v)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown configuration key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    """Read a configuration file into its flat key/value mapping."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read configuration: {exc.strerror or exc}", path=str(path)) from exc
    return parse_config_text(text, str(path))


# --------------------------------------------------------------------------- experiment


@dataclass
class Cell:
    """Outcome of one ``(n, trial)`` cell; ``error`` is set when it failed."""

    n: int
    t: float
    trial: int
    eigenvalues: np.ndarray | None = None
    distance: float | None = None
    correction_norm: float | None = None
    log_fk: float | None = None
    t_below_floor: bool = False
    error: dict | None = None
    field: LogPotentialField | None = None
    density: BrownDensityGrid | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self, files: dict | None = None) -> dict:
        return {"n": self.n, "t": self.t, "trial": self.trial, "distance": self.distance,
                "correction_norm": self.correction_norm, "log_fk": self.log_fk,
                "t_below_floor": self.t_below_floor, "error": self.error,
                "files": dict(files or {})}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: list[Cell]
    summary: list[dict]
    versions: dict = field(default_factory=dict)


def _versions() -> dict:
    return {"brownreg": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _below_floor(t: float, a: np.ndarray) -> bool:
    return t > 0 and math.sqrt(t) < FIDELITY_FACTOR * np.finfo(float).eps * float(_svdvals(a)[0])


def _warn_floor(t: float) -> None:
    warnings.warn(f"sqrt(t) for t={t:g} is below the eigensolver backward error; "
                  "the computed spectrum is not a faithful regularization", FidelityWarning,
                  stacklevel=3)


def _cell_streams(root: SeedSpec, n: int, trial: int) -> tuple[SeedSpec, SeedSpec]:
    cell = root.spawn(n, trial)
    return cell.spawn(0), cell.spawn(1)


def _run_cell(config: ExperimentConfig, n: int, trial: int) -> Cell:
    t = schedule_t(config.schedule, n)
    cell = Cell(n=n, t=t, trial=trial)
    try:
        a_seed, g_seed = _cell_streams(SeedSpec(config.root_seed), n, trial)
        a = realize(config.ensemble_at(n), a_seed)
        g = sample_ginibre(n, g_seed)
        cell.t_below_floor = _below_floor(t, a)
        x = a + math.sqrt(t) * g
        w = eigenvalues(x).values
        cell.eigenvalues = w
        cell.correction_norm = math.sqrt(t) * float(_svdvals(g)[0])
        cell.log_fk = _trace_log_from_sv(_svdvals(x)).value
        if config.target is not None:
            cell.distance = measure_distance(EmpiricalMeasure.from_eigenvalues(w),
                                             oracle_brown(config.target), config.distance_method)
        if config.grid is not None:
            cell.field = log_potential_field(x, config.grid)
            cell.density = brown_density(cell.field)
    except (BrownRegError, np.linalg.LinAlgError, ArithmeticError) as exc:
        cell.error = {"type": type(exc).__name__, "message": str(exc)}
    return cell


def _mean_stderr(vals: list[float]) -> tuple[float | None, float | None]:
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=np.float64)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else None
    return float(arr.mean()), se


def _summarize(cells: list[Cell], n_list) -> list[dict]:
    out = []
    for n in n_list:
        group = [c for c in cells if c.n == n]
        ok = [c for c in group if c.ok]
        dist = [c.distance for c in ok if c.distance is not None]
        corr = [c.correction_norm for c in ok]
        logfk = [c.log_fk for c in ok]
        d_mean, d_se = _mean_stderr(dist)
        l_mean, l_se = _mean_stderr(logfk)
        out.append({
            "n": n,
            "t": group[0].t if group else None,
            "trials_ok": len(ok),
            "trials_failed": len(group) - len(ok),
            "distance_mean": d_mean,
            "distance_stderr": d_se,
            "correction_norm_mean": float(np.mean(corr)) if corr else None,
            "correction_norm_max": float(np.max(corr)) if corr else None,
            "log_fk_mean": l_mean,
            "log_fk_stderr": l_se,
            "fk_det_mean": float(np.mean(np.exp(logfk))) if logfk else None,
        })
    return out


def run_regularization(config: ExperimentConfig, *, n_jobs: int = 1) -> ExperimentReport:
    """Eigenvalues of ``A + sqrt(t_N) G`` for every ``N`` in ``config.n_list`` and every trial.

    Each cell also records the distance of its empirical eigenvalue measure to
    the target's Brown measure, the operator norm ``sqrt(t) s_1(G)`` of the
    correction and ``tr ln|A + sqrt(t) G|``.  A failing cell records a
    diagnostic instead and the others proceed.  The result does not depend on
    ``n_jobs``.
    """
    jobs = [(n, k) for n in config.n_list for k in range(config.trials)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            cells = list(pool.map(lambda job: _run_cell(config, *job), jobs))
    else:
        cells = [_run_cell(config, n, k) for n, k in jobs]
    for t in sorted({c.t for c in cells if c.t_below_floor}):
        _warn_floor(t)
    return ExperimentReport(config, cells, _summarize(cells, config.n_list), _versions())


# --------------------------------------------------------------------------- t sweeps


@dataclass(frozen=True)
class SweepRow:
    t: float
    mean: float | None
    stderr: float | None
    median_modulus: float | None
    trials_ok: int
    below_floor: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SweepResult:
    n: int
    method: str
    rows: list[SweepRow]
    spectra: list[np.ndarray]  # per t: (trials, n), NaN rows for failed trials
    config: dict = field(default_factory=dict)

    def distances(self) -> np.ndarray:
        return np.array([np.nan if r.mean is None else r.mean for r in self.rows])

    def to_dict(self) -> dict:
        return {"n": self.n, "method": self.method, "config": self.config,
                "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return _dumps(self.to_dict())


def sweep_t(ensemble: EnsembleSpec, n: int, t_list, trials: int, target: BrownOracle,
            seed=None, *, method: str = "energy") -> SweepResult:
    """Distance from the eigenvalues of ``A + sqrt(t) G`` to ``target`` for each ``t``.

    ``A`` and ``G`` are drawn once per trial and reused for every ``t``.
    ``method`` defaults to ``energy``: ``radial_ks`` against a measure on a
    circle only counts mass on the wrong side of the circle and cannot see
    how tightly the eigenvalues cluster around it.
    """
    n = check_dimension(n)
    t_list = [float(t) for t in t_list]
    if not t_list or any(not t > 0 for t in t_list) or any(b <= a for a, b in zip(t_list, t_list[1:])):
        raise ConfigError("t_list must be nonempty, positive and strictly ascending")
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ConfigError("trials must be a positive integer")
    if method not in DISTANCE_METHODS:
        raise ConfigError(f"unknown distance method {method!r}")
    root = check_seed(seed)
    spec = ensemble if ensemble.n == n else dataclasses.replace(ensemble, n=n)
    ref = oracle_brown(target)

    bases = []
    for k in range(int(trials)):
        a_seed, g_seed = _cell_streams(root, n, k)
        bases.append((realize(spec, a_seed), sample_ginibre(n, g_seed)))

    rows, spectra = [], []
    for t in t_list:
        dist, spec_t, below = [], np.full((len(bases), n), np.nan + 0j), False
        for k, (a, g) in enumerate(bases):
            below |= _below_floor(t, a)
            try:
                w = eigenvalues(a + math.sqrt(t) * g).values
            except BrownRegError:
                continue
            spec_t[k] = w
            dist.append(measure_distance(EmpiricalMeasure.from_eigenvalues(w), ref, method))
        if below:
            _warn_floor(t)
        mean, se = _mean_stderr(dist)
        ok = spec_t[~np.isnan(spec_t.real).any(axis=1)]
        med = float(np.median(np.abs(ok))) if ok.size else None
        rows.append(SweepRow(t, mean, se, med, len(dist), bool(below)))
        spectra.append(spec_t)
    echo = {"ensemble": spec.to_dict(), "n": n, "t_list": t_list, "trials": int(trials),
            "target": target.to_dict(), "seed": root.to_dict(), "method": method}
    return SweepResult(n, method, rows, spectra, echo)


# --------------------------------------------------------------------------- persistence


def _clean(obj):
    """Replace non-finite floats by ``None`` so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_eigenvalue_csv(path, spectra) -> None:
    """Write ``trial,index,re,im`` rows; ``spectra`` is a sequence of per-trial arrays."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "index", "re", "im"])
            for trial, vals in spectra:
                for i, z in enumerate(np.asarray(vals, dtype=np.complex128)):
                    w.writerow([trial, i, f"{z.real:.17g}", f"{z.imag:.17g}"])
    except OSError as exc:
        raise IngestionError(f"cannot write eigenvalues: {exc.strerror or exc}", path=str(path)) from exc


def read_eigenvalue_csv(path) -> dict[int, np.ndarray]:
    """Inverse of :func:`write_eigenvalue_csv`: trial id to eigenvalue array."""
    out: dict[int, list] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["trial", "index", "re", "im"]:
                raise IngestionError(f"unexpected header {header}", path=str(path), line=1)
            for lineno, row in enumerate(reader, start=2):
                try:
                    trial, idx, re, im = int(row[0]), int(row[1]), float(row[2]), float(row[3])
                except (ValueError, IndexError):
                    raise IngestionError("malformed eigenvalue row", path=str(path), line=lineno) from None
                vals = out.setdefault(trial, [])
                if idx != len(vals):
                    raise IngestionError("eigenvalue indices out of order", path=str(path), line=lineno)
                vals.append(complex(re, im))
    except OSError as exc:
        if isinstance(exc, IngestionError):
            raise
        raise IngestionError(f"cannot read eigenvalues: {exc.strerror or exc}", path=str(path)) from exc
    return {k: np.array(v, dtype=np.complex128) for k, v in out.items()}


def _mkdir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IngestionError(f"cannot create output directory: {exc.strerror or exc}", path=str(path)) from exc


def emit_report(report: ExperimentReport, path) -> Path:
    """Write ``report.json`` and per-size eigenvalue CSVs (plus field and density
    CSVs when a grid is configured) into the directory ``path``."""
    out = Path(path)
    _mkdir(out)
    files_by_cell = {}
    for n in sorted({c.n for c in report.cells}):
        name = f"eigenvalues_n{n}.csv"
        group = [c for c in report.cells if c.n == n and c.eigenvalues is not None]
        write_eigenvalue_csv(out / name, [(c.trial, c.eigenvalues) for c in group])
        for c in group:
            files = {"eigenvalues": name}
            if c.field is not None:
                files["field"] = f"field_n{n}_trial{c.trial}.csv"
                c.field.to_csv(out / files["field"])
            if c.density is not None:
                files["density"] = f"density_n{n}_trial{c.trial}.csv"
                c.density.to_csv(out / files["density"])
            files_by_cell[(c.n, c.trial)] = files
    doc = {
        "config": report.config.to_flat(),
        "cells": [c.to_dict(files_by_cell.get((c.n, c.trial))) for c in report.cells],
        "summary": report.summary,
        "versions": report.versions,
    }
    target = out / "report.json"
    try:
        target.write_text(_dumps(doc), encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot write report: {exc.strerror or exc}", path=str(target)) from exc
    return target


def load_report(path) -> ExperimentReport:
    """Read a report written by :func:`emit_report` (a directory or its ``report.json``)."""
    p = Path(path)
    target = p / "report.json" if p.is_dir() else p
    try:
        doc = json.loads(target.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestionError(f"cannot read report: {exc.strerror or exc}", path=str(target)) from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"invalid JSON: {exc.msg}", path=str(target), line=exc.lineno,
                             column=exc.colno) from None
    config = ExperimentConfig.from_flat(doc["config"])
    base = target.parent
    cache: dict[str, dict[int, np.ndarray]] = {}
    cells = []
    for d in doc["cells"]:
        eig = None
        name = d.get("files", {}).get("eigenvalues")
        if name:
            if name not in cache:
                cache[name] = read_eigenvalue_csv(base / name)
            eig = cache[name].get(d["trial"])
        cells.append(Cell(n=d["n"], t=d["t"], trial=d["trial"], eigenvalues=eig,
                          distance=d["distance"], correction_norm=d["correction_norm"],
                          log_fk=d["log_fk"], t_below_floor=d["t_below_floor"], error=d["error"]))
    return ExperimentReport(config, cells, doc["summary"], doc.get("versions", {}))


def emit_sweep(result: SweepResult, path) -> Path:
    """Write ``sweep.json``, ``sweep.csv`` and one eigenvalue CSV per ``t``."""
    out = Path(path)
    _mkdir(out)
    doc = result.to_dict()
    doc["files"] = []
    for i, spec in enumerate(result.spectra):
        name = f"eigenvalues_t{i}.csv"
        write_eigenvalue_csv(out / name, [(k, w) for k, w in enumerate(spec)
                                          if not np.isnan(w.real).any()])
        doc["files"].append(name)
    try:
        with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean", "stderr", "median_modulus", "trials_ok", "below_floor"])
            for r in result.rows:
                w.writerow([f"{r.t:.17g}", "" if r.mean is None else f"{r.mean:.17g}",
                            "" if r.stderr is None else f"{r.stderr:.17g}",
                            "" if r.median_modulus is None else f"{r.median_modulus:.17g}",
                            r.trials_ok, int(r.below_floor)])
        (out / "sweep.json").write_text(_dumps(doc), encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot write sweep output: {exc.strerror or exc}", path=str(out)) from exc
    return out / "sweep.json"
