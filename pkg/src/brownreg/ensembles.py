"""Seeded random-matrix ensembles, deterministic test matrices and matrix files.

Normalization: a standard Gaussian (Ginibre) matrix has independent real and
imaginary parts of every entry with mean 0 and variance ``1/(2n)``, so that
``E tr(G G*) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, IngestionError
from .seeding import check_seed
from .validation import check_dimension, check_matrix

MODELS = ("ginibre", "gue", "elliptic", "nilpotent_shift", "diagonal", "file", "sum")


@dataclass(frozen=True)
class EnsembleSpec:
    """Description of a random (or deterministic) ``n x n`` matrix model.

    ``scale`` multiplies the realization; it is how ``sqrt(t) * G`` enters a
    ``sum`` spec.
    """

    model: str
    n: int
    tau: float = 0.0
    values: tuple[complex, ...] = ()
    path: str | None = None
    parts: tuple["EnsembleSpec", ...] = ()
    scale: complex = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown ensemble model {self.model!r}; expected one of {MODELS}")
        check_dimension(self.n)
        if not -1.0 <= self.tau <= 1.0:
            raise ConfigError(f"elliptic tau must lie in [-1, 1], got {self.tau}")
        if self.model == "diagonal" and len(self.values) != self.n:
            raise ConfigError(f"diagonal spec needs {self.n} values, got {len(self.values)}")
        if self.model == "file" and not self.path:
            raise ConfigError("file spec needs a path")
        if self.model == "sum":
            if not self.parts:
                raise ConfigError("sum spec needs at least one part")
            if any(p.n != self.n for p in self.parts):
                raise ConfigError("all parts of a sum spec must share n")

    def scaled(self, factor: complex) -> "EnsembleSpec":
        return EnsembleSpec(self.model, self.n, self.tau, self.values, self.path, self.parts,
                            self.scale * factor)

    def to_dict(self) -> dict:
        d = {"model": self.model, "n": self.n}
        if self.model == "elliptic":
            d["tau"] = self.tau
        if self.model == "diagonal":
            d["values"] = [[complex(v).real, complex(v).imag] for v in self.values]
        if self.model == "file":
            d["path"] = self.path
        if self.model == "sum":
            d["parts"] = [p.to_dict() for p in self.parts]
        if self.scale != 1.0:
            d["scale"] = [complex(self.scale).real, complex(self.scale).imag]
        return d


def _gaussian_complex(rng: np.random.Generator, n: int, var: float) -> np.ndarray:
    sd = math.sqrt(var)
    z = rng.standard_normal((2, n, n))
    return sd * (z[0] + 1j * z[1])


def sample_ginibre(n: int, seed=None) -> np.ndarray:
    """Standard Gaussian matrix: real and imaginary parts i.i.d. ``N(0, 1/(2n))``."""
    n = check_dimension(n)
    return _gaussian_complex(check_seed(seed).generator(), n, 1.0 / (2 * n))


def _gue_from_rng(rng: np.random.Generator, n: int) -> np.ndarray:
    z = _gaussian_complex(rng, n, 1.0 / (2 * n))
    # off-diagonal: (z + z*)/sqrt(2) keeps variance 1/(2n) per real coordinate;
    # diagonal becomes sqrt(2) * Re z, real with variance 1/n
    h = (z + z.conj().T) / math.sqrt(2.0)
    return (h + h.conj().T) / 2  # bit-exact Hermitian


def sample_gue(n: int, seed=None) -> np.ndarray:
    """GUE matrix normalized so that ``E tr H^2 = 1`` (semicircle on ``[-2, 2]``)."""
    n = check_dimension(n)
    return _gue_from_rng(check_seed(seed).generator(), n)


def sample_elliptic(n: int, tau: float, seed=None) -> np.ndarray:
    """``sqrt((1+tau)/2) H1 + i sqrt((1-tau)/2) H2`` with independent GUE ``H1, H2``.

    ``E X_ij X_ji = tau/n``; ``tau = 0`` is Ginibre, ``tau = 1`` is GUE.
    """
    n = check_dimension(n)
    if not -1.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [-1, 1], got {tau}")
    rng = check_seed(seed).generator()
    h1 = _gue_from_rng(rng, n)
    h2 = _gue_from_rng(rng, n)
    if tau == 1.0:
        return h1
    return math.sqrt((1 + tau) / 2) * h1 + 1j * math.sqrt((1 - tau) / 2) * h2


def brownian_increment(n: int, dt: float, seed=None) -> np.ndarray:
    """Increment of a standard matrix Brownian motion over a time step ``dt``."""
    n = check_dimension(n)
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    return _gaussian_complex(check_seed(seed).generator(), n, dt / (2 * n))


def nilpotent_shift(n: int) -> np.ndarray:
    """Ones on the first subdiagonal, zeros elsewhere."""
    n = check_dimension(n)
    return np.eye(n, k=-1, dtype=np.complex128)


def realize(spec: EnsembleSpec, seed=None) -> np.ndarray:
    """Draw one matrix from ``spec``; a pure function of ``(spec, seed)``."""
    seed = check_seed(seed)
    m = spec.model
    if m == "ginibre":
        a = sample_ginibre(spec.n, seed)
    elif m == "gue":
        a = sample_gue(spec.n, seed)
    elif m == "elliptic":
        a = sample_elliptic(spec.n, spec.tau, seed)
    elif m == "nilpotent_shift":
        a = nilpotent_shift(spec.n)
    elif m == "diagonal":
        a = np.diag(np.asarray(spec.values, dtype=np.complex128))
    elif m == "file":
        a = read_matrix(spec.path)
        if a.shape[0] != spec.n:
            raise IngestionError(f"file holds a {a.shape[0]}x{a.shape[0]} matrix, spec says n={spec.n}",
                                 path=spec.path)
    else:  # sum
        a = np.zeros((spec.n, spec.n), dtype=np.complex128)
        for i, part in enumerate(spec.parts):
            a = a + realize(part, seed.spawn(i))
    if spec.scale != 1.0:
        a = spec.scale * a
    return a


def write_matrix(path, a) -> None:
    """Write ``a`` in the text format: ``n`` then ``n`` rows of ``re im re im ...``."""
    a = check_matrix(a)
    n = a.shape[0]
    lines = [str(n)]
    for row in a:
        parts = []
        for z in row:
            parts.append(f"{z.real:.17g}")
            parts.append(f"{z.imag:.17g}")
        lines.append(" ".join(parts))
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot write matrix file: {exc.strerror or exc}", path=str(path)) from exc


def read_matrix(path) -> np.ndarray:
    """Parse a matrix file; errors carry the offending line and element position."""
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise IngestionError("matrix file not found", path=path) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestionError(f"cannot read matrix file: {exc}", path=path) from exc

    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise IngestionError("empty file", path=path, line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise IngestionError(f"first line must be the dimension, got {lines[0]!r}", path=path, line=1) from None
    if n < 1:
        raise IngestionError("dimension must be >= 1", path=path, line=1)
    if len(lines) - 1 != n:
        bad_line = len(lines) + 1 if len(lines) - 1 < n else n + 2
        raise IngestionError(f"expected {n} matrix rows, found {len(lines) - 1}", path=path, line=bad_line)

    a = np.empty((n, n), dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != 2 * n:
            raise IngestionError(f"expected {2 * n} numbers, found {len(tokens)}", path=path, line=i + 2)
        vals = np.empty(2 * n)
        for j, tok in enumerate(tokens):
            try:
                vals[j] = float(tok)
            except ValueError:
                raise IngestionError(f"not a number: {tok!r}", path=path, line=i + 2, column=j + 1) from None
            if not math.isfinite(vals[j]):
                raise IngestionError(f"non-finite value {tok!r}", path=path, line=i + 2, column=j + 1)
        a[i] = vals[0::2] + 1j * vals[1::2]
    return a
