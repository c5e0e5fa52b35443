"""Log-potential fields, Brown densities via the discrete Laplacian, empirical
spectral measures, analytic reference measures and distances between them.

For an ``n x n`` matrix the log-potential ``L(lam) = tr ln|A - lam|`` equals
``(1/n) ln|det(A - lam)|``; its Laplacian divided by ``2 pi`` is the eigenvalue
counting measure.  On a uniform grid the 5-point stencil turns that identity
into a discrete flux count.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .exceptions import IngestionError, UsageError
from .fkdet import SV_FLOOR, _trace_log_from_sv
from .linalg import _svdvals
from .stats import energy_distance
from .validation import check_matrix

#: size of the low-discrepancy reference discretization used by ``energy``
REFERENCE_POINTS = 2048

_CHUNK_BYTES = 64 * 2**20


@dataclass(frozen=True)
class GridSpec:
    center: complex = 0.0
    half_width: float = 1.6
    nodes_per_side: int = 101

    def __post_init__(self):
        if not self.half_width > 0:
            raise UsageError(f"half_width must be positive, got {self.half_width}")
        m = self.nodes_per_side
        if int(m) != m or m < 3 or m % 2 == 0:
            raise UsageError(f"nodes_per_side must be an odd integer >= 3, got {m}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.nodes_per_side - 1)

    @property
    def offsets(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.nodes_per_side)

    def points(self) -> np.ndarray:
        """Node coordinates; ``[j, k]`` has imaginary index ``j`` and real index ``k``."""
        c = complex(self.center)
        off = self.offsets
        return (c.real + off)[None, :] + 1j * (c.imag + off)[:, None]

    def interior_points(self) -> np.ndarray:
        return self.points()[1:-1, 1:-1]

    def shifted(self, mu: complex) -> "GridSpec":
        return GridSpec(complex(self.center) + mu, self.half_width, self.nodes_per_side)


@dataclass(frozen=True)
class LogPotentialField:
    grid: GridSpec
    values: np.ndarray
    clamped_mask: np.ndarray

    def to_csv(self, path) -> None:
        pts = self.grid.points()
        rows = zip(pts.real.ravel(), pts.imag.ravel(), self.values.ravel(), self.clamped_mask.ravel())
        _write_csv(path, ["re", "im", "L", "clamped"],
                   ([f"{r:.17g}", f"{i:.17g}", f"{v:.17g}", int(c)] for r, i, v, c in rows))


@dataclass(frozen=True)
class BrownDensityGrid:
    """Density on the interior nodes of ``grid`` (shape ``(m-2, m-2)``)."""

    grid: GridSpec
    density: np.ndarray

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    def points(self) -> np.ndarray:
        return self.grid.interior_points()

    def to_csv(self, path, *, clip: bool = True) -> None:
        """Export; negative discretization noise is clipped at 0 unless ``clip=False``."""
        pts = self.points()
        dens = np.maximum(self.density, 0.0) if clip else self.density
        rows = zip(pts.real.ravel(), pts.imag.ravel(), dens.ravel())
        _write_csv(path, ["re", "im", "density"],
                   ([f"{r:.17g}", f"{i:.17g}", f"{d:.17g}"] for r, i, d in rows))


@dataclass(frozen=True)
class EmpiricalMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_eigenvalues(cls, w) -> "EmpiricalMeasure":
        w = np.asarray(w, dtype=np.complex128).ravel()
        if w.size == 0:
            raise UsageError("an empirical measure needs at least one atom")
        return cls(w, np.full(w.size, 1.0 / w.size))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def to_json(self) -> str:
        return json.dumps({"atoms": [{"re": float(z.real), "im": float(z.imag), "w": float(p)}
                                     for z, p in zip(self.atoms, self.weights)]})

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalMeasure":
        data = json.loads(text)
        atoms = np.array([a["re"] + 1j * a["im"] for a in data["atoms"]], dtype=np.complex128)
        return cls(atoms, np.array([a["w"] for a in data["atoms"]], dtype=np.float64))


ORACLE_MODELS = ("circular_scaled", "haar_unitary", "atom", "elliptic")


@dataclass(frozen=True)
class BrownOracle:
    """Operators whose log-potential and Brown measure are known in closed form.

    ``circular_scaled``: ``shift + sqrt(t) c`` with ``c`` circular;
    ``haar_unitary``; ``atom``: the scalar ``a``; ``elliptic``: limit of the
    elliptic ensemble with parameter ``tau``.
    """

    model: str
    t: float = 1.0
    shift: complex = 0.0
    a: complex = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.model not in ORACLE_MODELS:
            raise UsageError(f"unknown oracle model {self.model!r}; expected one of {ORACLE_MODELS}")
        if self.t < 0:
            raise UsageError("t must be >= 0")
        if not -1.0 <= self.tau <= 1.0:
            raise UsageError("tau must lie in [-1, 1]")

    def to_dict(self) -> dict:
        d = {"model": self.model}
        if self.model == "circular_scaled":
            d.update(t=self.t, shift=[complex(self.shift).real, complex(self.shift).imag])
        elif self.model == "atom":
            d["a"] = [complex(self.a).real, complex(self.a).imag]
        elif self.model == "elliptic":
            d["tau"] = self.tau
        return d


@dataclass(frozen=True)
class ReferenceMeasure:
    """Analytic measure: ``disk`` / ``circle`` of ``radius``, ``atom``, or
    uniform ``ellipse`` with ``semiaxes`` (horizontal, vertical)."""

    kind: str
    center: complex = 0.0
    radius: float = 0.0
    semiaxes: tuple[float, float] = (0.0, 0.0)

    @property
    def rotation_invariant(self) -> bool:
        return self.kind != "ellipse" or self.semiaxes[0] == self.semiaxes[1]

    def radial_cdf(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if not self.rotation_invariant:
            raise UsageError("radial CDF needs a rotation-invariant reference measure")
        if self.kind == "atom":
            return np.where(r >= 0, 1.0, 0.0)
        if self.kind == "circle":
            return np.where(r >= self.radius, 1.0, 0.0)
        radius = self.radius if self.kind == "disk" else self.semiaxes[0]
        return np.clip((r / radius) ** 2, 0.0, 1.0)

    def discretize(self, m: int = REFERENCE_POINTS) -> np.ndarray:
        """``m`` deterministic points: first ``m`` unscrambled Halton points
        (bases 2, 3) pushed onto the measure."""
        u = qmc.Halton(d=2, scramble=False).random(m)
        c = complex(self.center)
        if self.kind == "atom":
            return np.full(m, c, dtype=np.complex128)
        if self.kind == "circle":
            return c + self.radius * np.exp(2j * np.pi * u[:, 0])
        rho = np.sqrt(u[:, 0])
        ang = 2 * np.pi * u[:, 1]
        if self.kind == "disk":
            return c + self.radius * rho * np.exp(1j * ang)
        a, b = self.semiaxes
        return c + a * rho * np.cos(ang) + 1j * b * rho * np.sin(ang)


# --------------------------------------------------------------------------- fields


def _log_potential_values(a: np.ndarray, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``tr ln|a - lam|`` for a flat array of ``lam``.

    LU-based log-determinants are used where a lower bound on the smallest
    singular value shows no clamping can occur; all other nodes go through
    the singular values so that the floor applies exactly.
    """
    n = a.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    values = np.empty(lams.size)
    clamped = np.zeros(lams.size, dtype=bool)
    norm_a = float(_svdvals(a)[0])
    log_floor = math.log(SV_FLOOR)

    step = max(1, _CHUNK_BYTES // (16 * n * n))
    for i in range(0, lams.size, step):
        chunk = lams[i:i + step]
        mats = a[None, :, :] - chunk[:, None, None] * eye[None, :, :]
        _, logdet = np.linalg.slogdet(mats)
        smax_bound = norm_a + np.abs(chunk)
        with np.errstate(divide="ignore", invalid="ignore"):
            smin_lower = logdet - (n - 1) * np.log(smax_bound)
        safe = np.isfinite(logdet) & (smin_lower > log_floor + 1.0)
        values[i:i + step][safe] = logdet[safe] / n
        for k in np.flatnonzero(~safe):
            v, c = _trace_log_from_sv(_svdvals(mats[k]))
            values[i + k] = v
            clamped[i + k] = c
    return values, clamped


def log_potential_field(a, grid: GridSpec) -> LogPotentialField:
    """Evaluate ``tr ln|a - lam|`` at every node of ``grid``."""
    a = check_matrix(a)
    pts = grid.points()
    vals, mask = _log_potential_values(a, pts.ravel())
    return LogPotentialField(grid, vals.reshape(pts.shape), mask.reshape(pts.shape))


def log_potential(a, lams) -> np.ndarray:
    """``tr ln|a - lam|`` at arbitrary points (same evaluation path as the grid field)."""
    a = check_matrix(a)
    lams = np.asarray(lams, dtype=np.complex128)
    vals, _ = _log_potential_values(a, lams.ravel())
    return vals.reshape(lams.shape)


def brown_density(field: LogPotentialField) -> BrownDensityGrid:
    """``(1/2pi)`` times the 5-point discrete Laplacian, on interior nodes."""
    L = field.values
    h = field.grid.spacing
    lap = (L[1:-1, 2:] + L[1:-1, :-2] + L[2:, 1:-1] + L[:-2, 1:-1] - 4.0 * L[1:-1, 1:-1]) / h**2
    return BrownDensityGrid(field.grid, lap / (2.0 * np.pi))


def region_mass(density: BrownDensityGrid, region: Callable) -> float:
    """``h^2 * sum(density)`` over interior nodes where ``region(z)`` is true.

    ``region`` is called on the complex array of node coordinates; plain scalar
    predicates are vectorized automatically.
    """
    pts = density.points()
    try:
        mask = np.asarray(region(pts), dtype=bool)
        if mask.shape != pts.shape:
            raise TypeError
    except (TypeError, ValueError):
        mask = np.vectorize(lambda z: bool(region(z)), otypes=[bool])(pts)
    return float(density.spacing**2 * density.density[mask].sum())


def disk_region(radius: float, center: complex = 0.0):
    return lambda z: np.abs(z - center) <= radius


def annulus_region(r_min: float, r_max: float, center: complex = 0.0):
    return lambda z: (np.abs(z - center) >= r_min) & (np.abs(z - center) <= r_max)


# --------------------------------------------------------------------------- oracles


def oracle_potential(o: BrownOracle, lam) -> np.ndarray | float:
    """``ln Delta(x - lam)`` for the analytically known operators ``x``."""
    lam_arr = np.asarray(lam, dtype=np.complex128)
    if o.model == "circular_scaled" and o.t == 0:
        o = BrownOracle("atom", a=o.shift)

    if o.model == "atom":
        out = np.log(np.maximum(np.abs(lam_arr - o.a), SV_FLOOR))
    elif o.model == "haar_unitary":
        with np.errstate(divide="ignore"):
            out = np.maximum(0.0, np.log(np.abs(lam_arr)))
    elif o.model == "circular_scaled":
        st = math.sqrt(o.t)
        r = np.abs(lam_arr - o.shift) / st
        with np.errstate(divide="ignore"):
            out = math.log(st) + np.where(r <= 1.0, (r**2 - 1.0) / 2.0, np.log(np.maximum(r, 1.0)))
    else:
        out = _ellipse_potential(lam_arr, o.tau)
    return float(out) if out.ndim == 0 else out


def _ellipse_potential(z: np.ndarray, tau: float) -> np.ndarray:
    # uniform ellipse with semiaxes (1+tau, 1-tau); outside it the field equals
    # that of a semicircle law on the focal segment (foci at +-2 sqrt(tau))
    a, b = 1.0 + tau, 1.0 - tau
    x, y = z.real, z.imag
    if tau == 0.0:
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            return np.where(r <= 1.0, (r**2 - 1.0) / 2.0, np.log(np.maximum(r, 1.0)))
    c2 = 4.0 * tau
    w = np.sqrt(z * z - c2)
    w = np.where(np.abs(z - w) > np.abs(z + w), -w, w)
    outside = ((z * z - z * w) / c2).real + np.log(np.abs(z + w)) - 0.5 - math.log(2.0)
    if a == 0.0 or b == 0.0:
        return outside
    inside = -0.5 + x**2 / (2 * a) + y**2 / (2 * b)
    return np.where((x / a) ** 2 + (y / b) ** 2 <= 1.0, inside, outside)


def oracle_brown(o: BrownOracle) -> ReferenceMeasure:
    """Brown measure of the oracle operator as an analytic descriptor."""
    if o.model == "circular_scaled":
        if o.t == 0:
            return ReferenceMeasure("atom", center=o.shift)
        return ReferenceMeasure("disk", center=o.shift, radius=math.sqrt(o.t))
    if o.model == "haar_unitary":
        return ReferenceMeasure("circle", center=0.0, radius=1.0)
    if o.model == "atom":
        return ReferenceMeasure("atom", center=o.a)
    return ReferenceMeasure("ellipse", center=0.0, semiaxes=(1.0 + o.tau, 1.0 - o.tau))


# --------------------------------------------------------------------------- distances


def radial_ks(mu: EmpiricalMeasure, ref: ReferenceMeasure) -> float:
    """Sup-distance between radial CDFs about ``ref.center``, left and right limits included."""
    r = np.abs(mu.atoms - ref.center)
    if ref.kind == "circle":
        # moduli computed as 1 - ulp must not fall off the circle
        r = np.where(np.abs(r - ref.radius) <= 1e-12 * ref.radius, ref.radius, r)
    order = np.argsort(r, kind="stable")
    r, w = r[order], mu.weights[order]
    cum = np.cumsum(w)
    knots = np.unique(np.concatenate([r, [ref.radius]]))

    def emp(x, left):
        idx = np.searchsorted(r, x, side="left" if left else "right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    eps = np.spacing(np.maximum(knots, 1.0))
    ref_right = ref.radial_cdf(knots)
    ref_left = ref.radial_cdf(knots - eps)
    gaps = np.concatenate([np.abs(emp(knots, False) - ref_right), np.abs(emp(knots, True) - ref_left)])
    return float(min(1.0, gaps.max()))


def measure_distance(mu: EmpiricalMeasure, ref: ReferenceMeasure, method: str = "radial_ks") -> float:
    if method == "radial_ks":
        if not ref.rotation_invariant:
            raise UsageError("radial_ks requires a rotation-invariant reference measure")
        return radial_ks(mu, ref)
    if method == "energy":
        pts = ref.discretize(REFERENCE_POINTS)
        return energy_distance(mu.atoms, pts, mu.weights, None)
    raise UsageError(f"unknown distance method {method!r}; expected 'radial_ks' or 'energy'")


# --------------------------------------------------------------------------- io


def _write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IngestionError(f"cannot write CSV: {exc.strerror or exc}", path=str(path)) from exc


def read_field_csv(path, grid: GridSpec) -> LogPotentialField:
    m = grid.nodes_per_side
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IngestionError(f"cannot read field CSV: {exc}", path=str(path)) from exc
    if len(rows) != m * m:
        raise IngestionError(f"expected {m * m} rows, found {len(rows)}", path=str(path))
    vals = np.array([float(r["L"]) for r in rows]).reshape(m, m)
    mask = np.array([r["clamped"] == "1" for r in rows]).reshape(m, m)
    return LogPotentialField(grid, vals, mask)


def write_measure(path, mu: EmpiricalMeasure) -> None:
    try:
        Path(path).write_text(mu.to_json(), encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot write measure JSON: {exc.strerror or exc}", path=str(path)) from exc
