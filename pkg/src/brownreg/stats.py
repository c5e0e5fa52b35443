"""Energy statistics for comparing point clouds in R^d (complex numbers count as R^2)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import check_seed

_CHUNK_BYTES = 64 * 2**20


def _as_points(x) -> np.ndarray:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        x = np.stack([x.real.ravel(), x.imag.ravel()], axis=1)
    elif x.ndim == 1:
        x = x[:, None]
    return np.ascontiguousarray(x, dtype=np.float64)


def _distance_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def weighted_mean_distance(x, y, wx=None, wy=None) -> float:
    """``sum_ij wx_i wy_j |x_i - y_j|`` with uniform weights by default; chunked."""
    x, y = _as_points(x), _as_points(y)
    wx = np.full(len(x), 1.0 / len(x)) if wx is None else np.asarray(wx, dtype=np.float64)
    wy = np.full(len(y), 1.0 / len(y)) if wy is None else np.asarray(wy, dtype=np.float64)
    step = max(1, _CHUNK_BYTES // (8 * max(1, len(y)) * x.shape[1]))
    total = 0.0
    for i in range(0, len(x), step):
        total += float(wx[i:i + step] @ (_distance_rows(x[i:i + step], y) @ wy))
    return total


def energy_distance(x, y, wx=None, wy=None) -> float:
    """V-statistic ``2 E|X-Y| - E|X-X'| - E|Y-Y'|`` (clipped at 0 against rounding)."""
    exy = weighted_mean_distance(x, y, wx, wy)
    exx = weighted_mean_distance(x, x, wx, wx)
    eyy = weighted_mean_distance(y, y, wy, wy)
    return max(0.0, 2.0 * exy - exx - eyy)


@dataclass(frozen=True)
class EnergyTest:
    statistic: float
    critical_value: float
    p_value: float
    n_permutations: int
    level: float

    @property
    def rejected(self) -> bool:
        return self.statistic >= self.critical_value


def energy_permutation_test(x, y, *, n_permutations: int = 199, level: float = 0.01,
                            seed=None) -> EnergyTest:
    """Two-sample permutation test on the energy distance.

    All permutations share one pass over the pooled distance matrix: each row
    block is multiplied against the full matrix of group indicators.
    """
    x, y = _as_points(x), _as_points(y)
    z = np.concatenate([x, y])
    n, m = len(x), len(y)
    total = n + m
    rng = check_seed(seed).generator()

    labels = np.zeros((total, n_permutations + 1))
    labels[:n, 0] = 1.0
    base = np.zeros(total)
    base[:n] = 1.0
    for p in range(1, n_permutations + 1):
        labels[:, p] = rng.permutation(base)

    du = np.empty_like(labels)
    rowsum = np.empty(total)
    step = max(1, _CHUNK_BYTES // (8 * total * max(z.shape[1], 2)))
    for i in range(0, total, step):
        block = _distance_rows(z[i:i + step], z)
        du[i:i + step] = block @ labels
        rowsum[i:i + step] = block.sum(axis=1)

    s_all = rowsum.sum()
    s_xx = np.einsum("ip,ip->p", labels, du)
    r_u = rowsum @ labels
    s_xy = r_u - s_xx
    s_yy = s_all - 2.0 * r_u + s_xx
    stats = 2.0 * s_xy / (n * m) - s_xx / n**2 - s_yy / m**2

    observed = float(stats[0])
    perm = stats[1:]
    crit = float(np.quantile(perm, 1.0 - level))
    p_value = float((1 + np.sum(perm >= observed)) / (n_permutations + 1))
    return EnergyTest(observed, crit, p_value, n_permutations, level)
