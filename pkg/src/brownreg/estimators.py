"""scikit-learn style wrappers around the functional API.

Each estimator takes its settings in ``__init__`` (so ``get_params`` /
``set_params`` / ``clone`` work) and learns attributes ending in ``_`` in
``fit``.  The matrix being analysed plays the role of ``X``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .brown import (
    BrownOracle,
    EmpiricalMeasure,
    GridSpec,
    brown_density,
    log_potential_field,
    measure_distance,
    oracle_brown,
    region_mass,
)
from .ensembles import sample_ginibre
from .exceptions import UsageError
from .fkdet import _trace_log_from_sv
from .flow import simulate_flow, simulate_flow_endpoints
from .linalg import _svdvals, eigenvalues
from .seeding import SeedSpec, check_seed
from .validation import check_matrix


def _regularize(a: np.ndarray, t: float, seed: SeedSpec) -> tuple[np.ndarray, float]:
    if t < 0:
        raise UsageError("t must be >= 0")
    if t == 0:
        return a, 0.0
    g = sample_ginibre(a.shape[0], seed)
    return a + math.sqrt(t) * g, math.sqrt(t) * float(_svdvals(g)[0])


class RegularizedSpectrum(BaseEstimator):
    """Eigenvalues of ``X + sqrt(t) G`` over independent Gaussian draws ``G``.

    Parameters
    ----------
    t : float
        Variance of the Gaussian regularization.
    n_trials : int
        Number of independent draws of ``G``; trial ``k`` uses ``seed.spawn(k)``.
    target : BrownOracle or None
        Reference operator used by :meth:`score`.
    distance : {"radial_ks", "energy"}
    random_state : int, SeedSpec or None

    Attributes
    ----------
    eigenvalues_ : ndarray of shape (n_trials, n)
    correction_norms_ : ndarray of shape (n_trials,)
        ``sqrt(t) * s_1(G)`` per trial.
    log_fk_ : ndarray of shape (n_trials,)
        ``tr ln|X + sqrt(t) G|`` per trial.
    """

    def __init__(self, t=1e-2, n_trials=1, target=None, distance="radial_ks", random_state=None):
        self.t = t
        self.n_trials = n_trials
        self.target = target
        self.distance = distance
        self.random_state = random_state

    def fit(self, X, y=None):
        a = check_matrix(X, name="X")
        seed = check_seed(self.random_state)
        if int(self.n_trials) < 1:
            raise UsageError("n_trials must be >= 1")
        eig, norms, logs = [], [], []
        for k in range(int(self.n_trials)):
            x, norm = _regularize(a, float(self.t), seed.spawn(k))
            eig.append(eigenvalues(x).values)
            norms.append(norm)
            logs.append(_trace_log_from_sv(_svdvals(x)).value)
        self.eigenvalues_ = np.array(eig)
        self.correction_norms_ = np.array(norms)
        self.log_fk_ = np.array(logs)
        self.n_features_in_ = a.shape[0]
        return self

    @property
    def measure_(self) -> EmpiricalMeasure:
        check_is_fitted(self, "eigenvalues_")
        return EmpiricalMeasure.from_eigenvalues(self.eigenvalues_.ravel())

    def distances(self, target: BrownOracle | None = None) -> np.ndarray:
        """Distance of each trial's eigenvalue measure to the target's Brown measure."""
        check_is_fitted(self, "eigenvalues_")
        target = target or self.target
        if target is None:
            raise UsageError("no target given")
        ref = oracle_brown(target)
        return np.array([measure_distance(EmpiricalMeasure.from_eigenvalues(w), ref, self.distance)
                         for w in self.eigenvalues_])

    def score(self, X=None, y=None) -> float:
        """Minus the mean distance to ``target`` (larger is better); refits when ``X`` is given."""
        if X is not None:
            self.fit(X)
        return -float(np.mean(self.distances()))


class BrownDensityEstimator(BaseEstimator):
    """Brown density of ``X + sqrt(t) G`` from the discrete Laplacian of its log-potential.

    With ``t = 0`` the density of ``X`` itself is computed.  ``predict`` evaluates
    the grid density at arbitrary complex points by bilinear interpolation
    (zero outside the interior grid).
    """

    def __init__(self, t=0.0, center=0.0, half_width=1.6, nodes_per_side=101, random_state=None):
        self.t = t
        self.center = center
        self.half_width = half_width
        self.nodes_per_side = nodes_per_side
        self.random_state = random_state

    def fit(self, X, y=None):
        a = check_matrix(X, name="X")
        x, _ = _regularize(a, float(self.t), check_seed(self.random_state))
        grid = GridSpec(complex(self.center), float(self.half_width), int(self.nodes_per_side))
        self.field_ = log_potential_field(x, grid)
        self.density_ = brown_density(self.field_)
        self.n_features_in_ = a.shape[0]
        return self

    def predict(self, Z) -> np.ndarray:
        check_is_fitted(self, "density_")
        z = np.asarray(Z, dtype=np.complex128)
        g = self.density_.grid
        c = complex(g.center)
        off = g.offsets[1:-1]
        interp = RegularGridInterpolator((c.imag + off, c.real + off), self.density_.density,
                                         bounds_error=False, fill_value=0.0)
        pts = np.stack([z.imag.ravel(), z.real.ravel()], axis=1)
        return interp(pts).reshape(z.shape)

    def mass(self, region) -> float:
        """Mass of the density inside ``region`` (a predicate on complex nodes)."""
        check_is_fitted(self, "density_")
        return region_mass(self.density_, region)


class SingularValueFlow(BaseEstimator):
    """Singular-value flow started from the singular values of ``X``.

    ``fit`` runs one trajectory; ``sample`` draws independent endpoints, whose
    law is that of the singular values of ``X + sqrt(t_final) G``.
    """

    def __init__(self, t_final=0.25, dt=1e-3, noise=True, random_state=None):
        self.t_final = t_final
        self.dt = dt
        self.noise = noise
        self.random_state = random_state

    @staticmethod
    def _initial(X) -> np.ndarray:
        arr = np.asarray(X)
        if arr.ndim == 2:
            return _svdvals(check_matrix(arr, name="X"))
        return np.asarray(arr, dtype=np.float64).ravel()

    def fit(self, X, y=None):
        v0 = self._initial(X)
        self.trajectory_ = simulate_flow(v0, float(self.t_final), float(self.dt),
                                         check_seed(self.random_state), noise=bool(self.noise))
        self.initial_ = self.trajectory_.values[0]
        self.final_ = self.trajectory_.final.values
        return self

    def sample(self, n_paths: int, seed=None) -> np.ndarray:
        """``(n_paths, N)`` endpoints from the fitted initial values."""
        check_is_fitted(self, "initial_")
        seed = check_seed(self.random_state if seed is None else seed).spawn(1)
        return simulate_flow_endpoints(self.initial_, float(self.t_final), int(n_paths),
                                       float(self.dt), seed)
