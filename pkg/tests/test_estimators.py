import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from brownreg import (
    BrownDensityEstimator,
    BrownOracle,
    RegularizedSpectrum,
    SeedSpec,
    SingularValueFlow,
    UsageError,
    disk_region,
    nilpotent_shift,
    simulate_flow,
)


def test_params_and_clone():
    est = RegularizedSpectrum(t=0.02, n_trials=3, random_state=4)
    assert est.get_params()["t"] == 0.02
    twin = clone(est).set_params(n_trials=2)
    assert twin.n_trials == 2 and est.n_trials == 3


def test_regularized_spectrum():
    est = RegularizedSpectrum(t=1e-2, n_trials=3, target=BrownOracle("haar_unitary"), random_state=1)
    est.fit(nilpotent_shift(50))
    assert est.eigenvalues_.shape == (3, 50)
    assert est.n_features_in_ == 50
    assert np.all(est.correction_norms_ <= 2.5 * 0.1)
    assert est.measure_.total_weight == pytest.approx(1)
    assert est.score() == -np.mean(est.distances())


def test_regularized_spectrum_reproducible():
    a = RegularizedSpectrum(t=0.1, n_trials=2, random_state=3).fit(nilpotent_shift(10))
    b = RegularizedSpectrum(t=0.1, n_trials=2, random_state=SeedSpec(3)).fit(nilpotent_shift(10))
    np.testing.assert_array_equal(a.eigenvalues_, b.eigenvalues_)


def test_requires_target_and_fit():
    est = RegularizedSpectrum()
    with pytest.raises(NotFittedError):
        est.distances()
    est.fit(np.eye(3))
    with pytest.raises(UsageError):
        est.distances()


def test_density_estimator():
    est = BrownDensityEstimator(t=0.0, half_width=1.5, nodes_per_side=61).fit(np.diag([0.5, -0.5]))
    assert est.mass(disk_region(1.0)) == pytest.approx(1, abs=0.05)
    far = est.predict(np.array([1.2 + 1.2j, 10.0]))
    assert abs(far[0]) < 1e-3 and far[1] == 0


def test_flow_estimator():
    est = SingularValueFlow(t_final=0.05, random_state=2).fit(np.diag([2.0, 1.0]))
    direct = simulate_flow([2.0, 1.0], 0.05, 1e-3, SeedSpec(2))
    np.testing.assert_array_equal(est.final_, direct.final.values)
    ends = est.sample(20, seed=5)
    assert ends.shape == (20, 2) and np.all(ends[:, 0] > ends[:, 1])
    assert SingularValueFlow().fit([3.0, 1.0]).initial_.tolist() == [3.0, 1.0]
