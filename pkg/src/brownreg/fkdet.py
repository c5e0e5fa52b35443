"""Fuglede-Kadison determinants, log-determinant statistics of Gaussian matrices
and the Gram-volume decomposition ``|det G| = l_1 l_2 ... l_n``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .ensembles import sample_ginibre
from .exceptions import DomainError, UsageError
from .linalg import _svdvals
from .seeding import check_seed
from .validation import check_dimension, check_matrix

#: singular values below this are clamped before taking logarithms
SV_FLOOR = 1e-150


class TraceLog(NamedTuple):
    value: float
    clamped: bool


@dataclass(frozen=True)
class GramVolumes:
    lengths: np.ndarray
    volumes: np.ndarray

    @property
    def log_volume(self) -> float:
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log(self.lengths)))


@dataclass(frozen=True)
class MCEstimate:
    n: int
    trials: int
    mean: float
    stderr: float
    seed: dict

    def to_dict(self) -> dict:
        return {"n": self.n, "trials": self.trials, "mean": self.mean,
                "stderr": self.stderr, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fk_determinant(a) -> float:
    """``|det a|^(1/n)`` evaluated as the geometric mean of the singular values."""
    s = _svdvals(check_matrix(a))
    if s[-1] < SV_FLOOR:
        return 0.0
    return float(np.exp(np.mean(np.log(s))))


def _trace_log_from_sv(s: np.ndarray) -> TraceLog:
    clamped = bool(s[-1] < SV_FLOOR)
    return TraceLog(float(np.mean(np.log(np.maximum(s, SV_FLOOR)))), clamped)


def trace_log_abs(a, lam: complex = 0.0) -> TraceLog:
    """``tr ln|a - lam|`` with singular values floored at :data:`SV_FLOOR`.

    Returns ``(value, clamped)``; ``clamped`` is set when some singular value
    of ``a - lam`` fell below the floor.
    """
    a = check_matrix(a)
    shifted = a - lam * np.eye(a.shape[0])
    return _trace_log_from_sv(_svdvals(shifted))


def _mgs_lengths(g: np.ndarray) -> np.ndarray:
    """Projection lengths by right-looking modified Gram-Schmidt.

    Works on a single ``(n, n)`` matrix or a stack ``(..., n, n)``; columns are
    processed left to right.
    """
    cols = np.array(g, dtype=np.complex128, copy=True)
    n = cols.shape[-1]
    lengths = np.empty(cols.shape[:-2] + (n,), dtype=np.float64)
    for i in range(n):
        v = cols[..., :, i]
        li = np.sqrt(np.sum(v.real**2 + v.imag**2, axis=-1))
        lengths[..., i] = li
        if i == n - 1:
            break
        safe = np.where(li > 0, li, 1.0)
        q = v / safe[..., None]
        q = np.where((li > 0)[..., None], q, 0.0)
        # remove the q-component from every later column
        coef = np.einsum("...k,...kj->...j", q.conj(), cols[..., :, i + 1:])
        cols[..., :, i + 1:] -= q[..., :, None] * coef[..., None, :]
    return lengths


def gram_volumes(g) -> GramVolumes:
    """Lengths ``l_i`` of each column's component orthogonal to the previous
    columns, and the running volumes ``V_i = l_1 ... l_i``."""
    g = check_matrix(g)
    lengths = _mgs_lengths(g)
    return GramVolumes(lengths, np.cumprod(lengths))


def sample_gram_lengths(n: int, trials: int, seed=None, *, batch: int = 10_000) -> np.ndarray:
    """Projection lengths of ``trials`` independent Ginibre matrices, shape ``(trials, n)``.

    Matrices are drawn in batches from the single stream ``seed``.
    """
    n = check_dimension(n)
    if trials < 1:
        raise UsageError("trials must be >= 1")
    rng = check_seed(seed).generator()
    sd = math.sqrt(1.0 / (2 * n))
    out = np.empty((trials, n))
    for start in range(0, trials, batch):
        m = min(batch, trials - start)
        z = rng.standard_normal((2, m, n, n))
        out[start:start + m] = _mgs_lengths(sd * (z[0] + 1j * z[1]))
    return out


def l_moment_oracle(n: int, i: int, h: float) -> float:
    """Exact ``E l_i^{-h}`` for a standard Gaussian ``n x n`` matrix:
    ``n^{h/2} Gamma(n-i+1-h/2) / Gamma(n-i+1)``."""
    n = check_dimension(n)
    if not 1 <= i <= n:
        raise UsageError(f"column index i must satisfy 1 <= i <= n, got i={i}, n={n}")
    k = n - i + 1
    if not h < 2 * k:
        raise DomainError(f"moment E l_{i}^(-h) diverges for h={h} >= {2 * k}")
    if h == 0:
        return 1.0
    return float(math.exp(0.5 * h * math.log(n) + gammaln(k - 0.5 * h) - gammaln(k)))


def mc_fk_gaussian(n: int, trials: int, seed=None, *, n_jobs: int = 1) -> MCEstimate:
    """Monte Carlo mean and standard error of ``tr ln|G|`` over fresh Ginibre draws.

    Trial ``k`` uses the stream ``seed.spawn(k)``; results do not depend on ``n_jobs``.
    """
    n = check_dimension(n)
    if trials < 2:
        raise UsageError("trials must be >= 2 to estimate a standard error")
    seed = check_seed(seed)

    def one(k):
        return trace_log_abs(sample_ginibre(n, seed.spawn(k)), 0.0).value

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            vals = np.fromiter(pool.map(one, range(trials)), dtype=np.float64, count=trials)
    else:
        vals = np.fromiter((one(k) for k in range(trials)), dtype=np.float64, count=trials)
    return MCEstimate(n, int(trials), float(vals.mean()),
                      float(vals.std(ddof=1) / math.sqrt(trials)), seed.to_dict())
