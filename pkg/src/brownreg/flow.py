"""Stochastic flow of the singular values of ``A + M(t)``, ``M`` a matrix Brownian motion.

The ordered singular values ``lam_1 > ... > lam_N > 0`` satisfy

    d lam_i = Re dB_ii + dt / (2 lam_i) * (1 - 1/(2N)
              + sum_{j != i} (lam_i^2 + lam_j^2) / (N (lam_i^2 - lam_j^2)))

with ``Re dB_ii ~ N(0, dt/(2N))`` independent across ``i``.  The drift is the
gradient of the concave potential ``phi`` below, which tends to ``-inf`` on the
boundary of the cone ``lam_1 > ... > lam_N > 0``.  With noise each step is
drift-implicit Euler-Maruyama: ``x = lam + dB + dt grad phi(x)``.  The solution
always lies inside the cone and is increasing in ``lam + dB``, because
``I - dt hess phi`` is an M-matrix.  The noise-free ODE uses the explicit step
capped by the distance to the nearest barrier.  A step that fails (Newton does
not converge, or an explicit step leaves the cone) is rejected, halved and
redrawn; after an accepted step ``dt`` doubles again, up to its initial value.

Two systems driven by the same noise path form the comparison coupling:
entrywise ordering of the initial data persists for all time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, FlowError, UsageError
from .seeding import check_seed
from .validation import check_flow_values, is_strictly_decreasing

DT_MIN = 1e-12
#: without noise, a step may move a value by at most this fraction of its
#: distance to the nearest barrier (zero or a neighbouring value)
DRIFT_FRACTION = 0.1
#: ties and zeros in the initial data are broken by ``JITTER * (N - i + 1)``
JITTER = 1e-9


@dataclass(frozen=True)
class FlowState:
    time: float
    values: np.ndarray

    def __post_init__(self):
        if self.time < 0:
            raise UsageError("flow time must be >= 0")
        v = np.asarray(self.values, dtype=np.float64)
        if v.size == 0 or np.any(v <= 0) or not is_strictly_decreasing(v):
            raise DomainError("flow state must be strictly decreasing and strictly positive")
        object.__setattr__(self, "values", v)


@dataclass
class NoisePath:
    """Accepted steps ``(dt, increments)``; replaying it reproduces a run exactly."""

    dts: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    implicit: bool = True

    def __len__(self):
        return len(self.dts)


@dataclass
class FlowTrajectory:
    times: np.ndarray
    values: np.ndarray  # (steps + 1, N)
    dt_history: np.ndarray
    seed_info: dict
    jittered: bool = False
    rejections: int = 0

    @property
    def states(self) -> list[FlowState]:
        return [FlowState(float(t), v) for t, v in zip(self.times, self.values)]

    @property
    def final(self) -> FlowState:
        return FlowState(float(self.times[-1]), self.values[-1])

    def to_csv(self, path) -> None:
        n = self.values.shape[1]
        header = "time," + ",".join(f"lambda_{i + 1}" for i in range(n))
        lines = [header]
        for t, v in zip(self.times, self.values):
            lines.append(",".join([f"{t:.17g}"] + [f"{x:.17g}" for x in v]))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class CoupledResult:
    preserved: bool
    trajectories: tuple[FlowTrajectory, FlowTrajectory]
    steps: int
    min_gap: float
    noise_path: NoisePath

    def verdict(self) -> dict:
        return {"preserved": self.preserved, "steps": self.steps, "min_gap": self.min_gap}

    def verdict_json(self) -> str:
        return json.dumps(self.verdict())


# --------------------------------------------------------------------------- drift


def _drift(v: np.ndarray) -> np.ndarray:
    """Vectorized drift over the last axis; no domain checks."""
    n = v.shape[-1]
    sq = v * v
    num = sq[..., :, None] + sq[..., None, :]
    den = sq[..., :, None] - sq[..., None, :]
    idx = np.arange(n)
    den[..., idx, idx] = 1.0
    num[..., idx, idx] = 0.0
    inter = np.sum(num / den, axis=-1) / n
    return (1.0 - 1.0 / (2 * n) + inter) / (2.0 * v)


def drift(values, n: int | None = None) -> np.ndarray:
    """Drift coefficient of each singular value (multiply by ``dt``)."""
    v = check_flow_values(values)
    if n is not None and n != v.size:
        raise UsageError(f"expected {n} values, got {v.size}")
    return _drift(v)


# The drift is the gradient of the concave potential
#     phi(x) = 1/(4N) sum_i ln x_i + 1/(2N) sum_{i<j} ln(x_i^2 - x_j^2)
# on the cone x_1 > ... > x_N > 0, and phi -> -inf at its boundary.


def _phi(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    out = np.sum(np.log(x), axis=-1) / (4 * n)
    if n > 1:
        sq = x * x
        iu = np.triu_indices(n, 1)
        diff = sq[..., iu[0]] - sq[..., iu[1]]
        out = out + np.sum(np.log(diff), axis=-1) / (2 * n)
    return out


def _phi_hessian(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    sq = x * x
    den = (sq[..., :, None] - sq[..., None, :]) ** 2
    idx = np.arange(n)
    den[..., idx, idx] = 1.0
    off = 2.0 * x[..., :, None] * x[..., None, :] / (n * den)
    diag_terms = (sq[..., :, None] + sq[..., None, :]) / (n * den)
    diag_terms[..., idx, idx] = 0.0
    hess = off
    hess[..., idx, idx] = -1.0 / (4 * n * sq) - diag_terms.sum(axis=-1)
    return hess


def _in_cone(x: np.ndarray) -> np.ndarray:
    ok = np.all(x > 0, axis=-1)
    if x.shape[-1] > 1:
        ok &= np.all(x[..., :-1] > x[..., 1:], axis=-1)
    return ok


_NEWTON_ITER = 60
_NEWTON_TOL = 1e-10


def _implicit_solve(y: np.ndarray, h: np.ndarray, x0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``x = y + h grad phi(x)`` row by row over the last axis.

    The solution maximizes the strictly concave ``-|x - y|^2 / 2 + h phi(x)``;
    damped Newton from the feasible ``x0`` never leaves the cone.  Returns the
    solutions and a mask of rows that converged.
    """
    shape = y.shape
    n = shape[-1]
    y = y.reshape(-1, n)
    x = np.array(x0, dtype=np.float64).reshape(-1, n)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), shape[:-1] + (1,)).reshape(-1, 1)
    done = np.zeros(len(y), dtype=bool)
    eye = np.eye(n)
    for _ in range(_NEWTON_ITER):
        rows = np.flatnonzero(~done)
        if rows.size == 0:
            break
        xr, yr, hr = x[rows], y[rows], h[rows]
        g = yr - xr + hr * _drift(xr)
        jac = hr[:, :, None] * _phi_hessian(xr) - eye
        dx = -np.linalg.solve(jac, g[:, :, None])[:, :, 0]
        small = np.all(np.abs(dx) <= _NEWTON_TOL * _barrier_distance(xr), axis=-1)
        f0 = -0.5 * np.sum((xr - yr) ** 2, axis=-1) + hr[:, 0] * _phi(xr)
        slope = np.sum(g * dx, axis=-1)
        alpha = np.ones(rows.size)
        pending = ~small
        for _ in range(60):
            if not pending.any():
                break
            trial = xr[pending] + alpha[pending, None] * dx[pending]
            ok = _in_cone(trial)
            f1 = np.full(ok.shape, -np.inf)
            if ok.any():
                t_ok = trial[ok]
                f1[ok] = (-0.5 * np.sum((t_ok - yr[pending][ok]) ** 2, axis=-1)
                          + hr[pending][ok, 0] * _phi(t_ok))
            f_ref = f0[pending]
            good = f1 >= f_ref + 1e-4 * alpha[pending] * slope[pending] - 1e-14 * (1.0 + np.abs(f_ref))
            idx = np.flatnonzero(pending)
            alpha[idx[~good]] *= 0.5
            pending[idx[good]] = False
        step = np.where(pending[:, None], 0.0, alpha[:, None] * dx)
        new = xr + step
        new[small] = np.where(_in_cone(xr[small] + dx[small])[:, None], xr[small] + dx[small], xr[small])
        x[rows] = new
        done[rows[small]] = True
    return x.reshape(shape), done.reshape(shape[:-1])


def _propose(v: np.ndarray, noise: np.ndarray, mu: np.ndarray, h, implicit: bool) -> np.ndarray:
    """Euler-Maruyama proposal ``v + noise + mu h``, explicit or drift-implicit.

    The implicit form solves ``x = v + noise + h grad phi(x)``.  It always stays
    in the cone and is increasing in ``v + noise``, so systems driven by the
    same noise keep their order.  Rows where Newton fails come back as NaN and
    are rejected.
    """
    if not implicit:
        return v + noise + mu * h
    y = v + noise
    guess = y + mu * h
    guess = np.where(_in_cone(guess)[..., None], guess, v)
    x, ok = _implicit_solve(y, h, guess)
    return np.where(ok[..., None], x, np.nan)


def em_step(state: FlowState, dt: float, noise, *, implicit: bool = False) -> FlowState | None:
    """One Euler-Maruyama step with the given ``Re dB_ii`` draws; ``None`` marks rejection.

    ``implicit=True`` selects the drift-implicit scheme the noisy integrator uses.
    """
    if not dt > 0:
        raise UsageError("dt must be positive")
    v = state.values
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != v.shape:
        raise UsageError("noise must have one entry per singular value")
    new = _propose(v, noise, _drift(v), dt, implicit)
    if not np.all(new > 0) or not is_strictly_decreasing(new):
        return None
    return FlowState(state.time + dt, new)


# --------------------------------------------------------------------------- integration


def _prepare_initial(values) -> tuple[np.ndarray, bool]:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)) or np.any(v < 0):
        raise DomainError("initial singular values must be finite and nonnegative")
    v = np.sort(v)[::-1].copy()
    if np.all(v > 0) and is_strictly_decreasing(v):
        return v, False
    n = v.size
    v = v + JITTER * (n - np.arange(n))
    return v, True


def _barrier_distance(v: np.ndarray) -> np.ndarray:
    """Distance of each value to zero and to its neighbours, shape ``(..., N)``."""
    d = v.copy()
    if v.shape[-1] > 1:
        gaps = v[..., :-1] - v[..., 1:]
        d[..., :-1] = np.minimum(d[..., :-1], gaps)
        d[..., 1:] = np.minimum(d[..., 1:], gaps)
    return d


def _step_cap(states: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Largest explicit step of each row of ``(B, k, N)`` moving no value by
    more than ``DRIFT_FRACTION`` of its distance to the nearest barrier."""
    d = _barrier_distance(states)
    move = np.abs(mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        cap = np.where(move > 0, DRIFT_FRACTION * d / move, np.inf)
    return cap.min(axis=(-2, -1))


def _valid(prop: np.ndarray) -> np.ndarray:
    """Rows (axis 0) whose every system is positive and strictly decreasing."""
    return np.all(_in_cone(prop), axis=-1)


def _draw(rng, active: np.ndarray, n: int) -> np.ndarray:
    """Standard normals for each row: one shared generator, or one per row
    (inactive rows then draw nothing, so a row's stream does not depend on
    its batch)."""
    if isinstance(rng, np.random.Generator):
        return rng.standard_normal((active.size, n))
    z = np.zeros((active.size, n))
    for r in np.flatnonzero(active):
        z[r] = rng[r].standard_normal(n)
    return z


def _integrate(states: np.ndarray, t_final: float, dt_init: float, rng, *, noise: bool,
               on_accept=None) -> tuple[np.ndarray, np.ndarray]:
    """Advance ``states`` of shape ``(B, k, N)`` to ``t_final``.

    The ``k`` systems in a row share one noise draw.  ``rng`` is a generator
    or a sequence of ``B`` generators.  Returns the final states and the
    number of rejected steps per row.
    """
    if not t_final > 0:
        raise UsageError("t_final must be positive")
    if not dt_init > 0:
        raise UsageError("dt_init must be positive")
    b, _, n = states.shape
    t = np.zeros(b)
    dt = np.full(b, float(dt_init))
    active = np.ones(b, dtype=bool)
    rejections = np.zeros(b, dtype=np.int64)
    scale = 1.0 / (2 * n)
    while active.any():
        mu = _drift(states)
        want = dt if noise else np.minimum(dt, np.maximum(_step_cap(states, mu), DT_MIN))
        remaining = t_final - t
        last = want >= remaining
        h = np.where(active, np.where(last, remaining, want), 0.0)
        if noise:
            z = _draw(rng, active, n) * np.sqrt(h * scale)[:, None]
        else:
            z = np.zeros((b, n))
        prop = _propose(states, z[:, None, :], mu, h[:, None, None], noise)
        ok = _valid(prop)
        acc = active & ok
        rej = active & ~ok
        if acc.any():
            states[acc] = prop[acc]
            t[acc] = np.where(last[acc], t_final, t[acc] + h[acc])
            grow = acc & (h >= dt)
            dt[grow] = np.minimum(dt[grow] * 2.0, dt_init)
            if on_accept is not None:
                on_accept(acc, t, h, z, states)
        if rej.any():
            rejections[rej] += 1
            dt[rej] = 0.5 * h[rej]
            if np.any(dt[rej] < DT_MIN):
                row = int(np.flatnonzero(rej & (dt < DT_MIN))[0])
                raise FlowError(
                    f"step size fell below {DT_MIN:g} at t={t[row]:.17g}",
                    state=[FlowState(float(t[row]), s) for s in states[row]],
                )
        active &= ~(t >= t_final)
    return states, rejections


class _Recorder:
    """Collects the accepted steps of every row."""

    def __init__(self, initial: np.ndarray, implicit: bool = True):
        b = initial.shape[0]
        self.times = [[0.0] for _ in range(b)]
        self.values = [[row.copy()] for row in initial]
        self.noise = [NoisePath(implicit=implicit) for _ in range(b)]

    def __call__(self, acc, t, h, z, states):
        for r in np.flatnonzero(acc):
            self.times[r].append(float(t[r]))
            self.values[r].append(states[r].copy())
            self.noise[r].dts.append(float(h[r]))
            self.noise[r].increments.append(z[r].copy())


def simulate_flow(initial, t_final: float, dt_init: float = 1e-3, seed=None, *,
                  noise: bool = True) -> FlowTrajectory:
    """Integrate one trajectory from ``initial`` (any order; ties are jittered).

    ``noise=False`` switches the Brownian term off and solves the drift ODE
    with the explicit scheme.
    """
    seed = check_seed(seed)
    v0, jittered = _prepare_initial(initial)
    rec = _Recorder(v0[None, None, :], implicit=noise)
    _, rejections = _integrate(v0[None, None, :].copy(), t_final, dt_init, seed.generator(),
                               noise=noise, on_accept=rec)
    vals = np.array([v[0] for v in rec.values[0]])
    return FlowTrajectory(np.array(rec.times[0]), vals, np.array(rec.noise[0].dts),
                          seed.to_dict(), jittered, int(rejections[0]))


def simulate_flow_endpoints(initial, t_final: float, n_paths: int, dt_init: float = 1e-3,
                            seed=None) -> np.ndarray:
    """Endpoints of ``n_paths`` independent trajectories, integrated as one batch.

    All paths draw from the single stream ``seed``.
    """
    seed = check_seed(seed)
    v0, _ = _prepare_initial(initial)
    states = np.broadcast_to(v0, (n_paths, 1, v0.size)).copy()
    out, _ = _integrate(states, t_final, dt_init, seed.generator(), noise=True)
    return out[:, 0, :]


def replay_flow(initial, path: NoisePath) -> FlowTrajectory:
    """Re-run a trajectory along a recorded noise path (no adaptivity)."""
    v, _ = _prepare_initial(initial)
    state = FlowState(0.0, v)
    times, values = [0.0], [v]
    for dt, z in zip(path.dts, path.increments):
        nxt = em_step(state, dt, z, implicit=path.implicit)
        if nxt is None:
            raise FlowError(f"replayed step rejected at t={state.time:.17g}", state=state)
        state = nxt
        times.append(state.time)
        values.append(state.values)
    return FlowTrajectory(np.array(times), np.array(values), np.array(path.dts), {})


def _coupled_initial(s1, s2):
    a = np.asarray(s1, dtype=np.float64).ravel()
    b = np.asarray(s2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise UsageError("both systems need the same number of singular values")
    a_sorted, b_sorted = np.sort(a)[::-1], np.sort(b)[::-1]
    if not np.all(a_sorted < b_sorted):
        raise UsageError("comparison requires s1_k < s2_k for every k (strict)")
    v1, j1 = _prepare_initial(a_sorted)
    v2, j2 = _prepare_initial(b_sorted)
    if not np.all(v1 < v2):
        raise UsageError("jittered initial data no longer strictly ordered")
    return v1, v2, j1, j2


def coupled_compare_many(s1, s2, t_final: float, dt_init: float = 1e-3,
                         seeds=()) -> list[CoupledResult]:
    """:func:`coupled_compare` for several seeds, integrated as one batch.

    Entry ``r`` equals ``coupled_compare(s1, s2, t_final, dt_init, seeds[r])``.
    """
    seeds = [check_seed(sd) for sd in seeds]
    if not seeds:
        raise UsageError("at least one seed is required")
    v1, v2, j1, j2 = _coupled_initial(s1, s2)
    pair = np.stack([v1, v2])
    states = np.broadcast_to(pair, (len(seeds),) + pair.shape).copy()
    rec = _Recorder(states)
    _, rejections = _integrate(states, t_final, dt_init, [sd.generator() for sd in seeds],
                               noise=True, on_accept=rec)
    out = []
    for r, sd in enumerate(seeds):
        vals = np.array(rec.values[r])  # (steps + 1, 2, N)
        gaps = vals[:, 1, :] - vals[:, 0, :]
        times = np.array(rec.times[r])
        dts = np.array(rec.noise[r].dts)
        info = sd.to_dict()
        t1 = FlowTrajectory(times, vals[:, 0, :], dts, info, j1, int(rejections[r]))
        t2 = FlowTrajectory(times, vals[:, 1, :], dts, info, j2, int(rejections[r]))
        out.append(CoupledResult(bool(np.all(gaps > 0)), (t1, t2), len(dts),
                                 float(gaps.min()), rec.noise[r]))
    return out


def coupled_compare(s1, s2, t_final: float, dt_init: float = 1e-3, seed=None) -> CoupledResult:
    """Drive two flows with one noise path and check ``lam1_i < lam2_i`` at every step."""
    return coupled_compare_many(s1, s2, t_final, dt_init, [seed])[0]


# --------------------------------------------------------------------------- perturbation


def sv_perturbation(s, delta) -> np.ndarray:
    """Second-order prediction of the singular values of ``diag(s) + delta``.

    Index ``i`` of the result corresponds to ``s_i``; the ``O(|delta|^3)``
    remainder is dropped.
    """
    s = check_flow_values(s)
    d = np.asarray(delta, dtype=np.complex128)
    n = s.size
    if d.shape != (n, n):
        raise UsageError(f"delta must be {n}x{n}")
    sq = s * s
    abs2 = d.real**2 + d.imag**2
    col = abs2.sum(axis=0)  # sum_j |d_ji|^2
    cross = (d * d.T).real  # Re(d_ij d_ji)
    num = sq[:, None] * abs2 + 2.0 * np.outer(s, s) * cross + sq[None, :] * abs2.T
    den = sq[:, None] - sq[None, :]
    idx = np.arange(n)
    num[idx, idx] = 0.0
    den[idx, idx] = 1.0
    pred = sq + 2.0 * s * np.diag(d).real + col + np.sum(num / den, axis=1)
    return np.sqrt(np.maximum(pred, 0.0))


def sv_perturbation_matrix(x, delta_x) -> np.ndarray:
    """Predicted singular values of ``x + delta_x`` (descending ``x`` order).

    With ``x = U diag(s) Vh`` the perturbation is rotated to ``U* delta_x Vh*``.
    """
    x = np.asarray(x, dtype=np.complex128)
    u, s, vh = np.linalg.svd(x)
    return sv_perturbation(s, u.conj().T @ np.asarray(delta_x, dtype=np.complex128) @ vh.conj().T)


def repulsion_laplacian(s) -> float:
    """``4 * sum_{i<j} (s_i^2 + s_j^2) / (s_i^2 - s_j^2)^2``: the matrix-space Laplacian
    of ``sum_{i<j} ln|s_i^2 - s_j^2|``."""
    s = check_flow_values(s)
    sq = s * s
    iu = np.triu_indices(s.size, k=1)
    num = (sq[:, None] + sq[None, :])[iu]
    den = (sq[:, None] - sq[None, :])[iu] ** 2
    return float(4.0 * np.sum(num / den))


def repulsion_potential(m) -> float:
    """``sum_{i<j} ln|s_i(m)^2 - s_j(m)^2|`` for a square matrix ``m``."""
    s = np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)
    sq = s * s
    iu = np.triu_indices(s.size, k=1)
    return float(np.sum(np.log(np.abs((sq[:, None] - sq[None, :])[iu]))))
