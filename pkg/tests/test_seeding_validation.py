import numpy as np
import pytest

from brownreg import ConfigError, DomainError, SeedSpec, UsageError
from brownreg.seeding import check_seed
from brownreg.validation import check_dimension, check_flow_values, check_matrix, is_strictly_decreasing


def test_same_key_same_stream():
    a = SeedSpec(7, 3).generator().standard_normal(5)
    b = SeedSpec(7, 3).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_distinct_keys_differ():
    draws = {SeedSpec(7, k).generator().integers(2**63) for k in range(50)}
    assert len(draws) == 50
    assert SeedSpec(7).spawn(1) != SeedSpec(7).spawn(2)


def test_splitting_function_documented():
    seq = np.random.SeedSequence(entropy=9, spawn_key=(4, 1))
    expected = np.random.Generator(np.random.PCG64(seq)).random(3)
    np.testing.assert_array_equal(SeedSpec(9, 4, (1,)).generator().random(3), expected)
    assert SeedSpec(9).trial(4).spawn(1) == SeedSpec(9, 4, (1,))


@pytest.mark.parametrize("root", [-1, 2**64])
def test_root_range(root):
    with pytest.raises(ConfigError):
        SeedSpec(root)


def test_check_seed():
    assert check_seed(None) == SeedSpec()
    assert check_seed(np.uint64(5)) == SeedSpec(5)
    with pytest.raises(ConfigError):
        check_seed(True)
    with pytest.raises(ConfigError):
        check_seed("5")


def test_check_matrix():
    assert check_matrix([[1]]).dtype == np.complex128
    for bad in ([1, 2], [[1, 2]], np.zeros((0, 0)), [[np.inf]]):
        with pytest.raises(UsageError):
            check_matrix(bad)


def test_check_dimension():
    assert check_dimension(3.0) == 3
    for bad in (0, 2.5, True):
        with pytest.raises(UsageError):
            check_dimension(bad)


def test_flow_values():
    assert check_flow_values([1.0, 3.0]).tolist() == [1.0, 3.0]
    for bad in ([], [np.nan], [0.0], [1.0, 1.0]):
        with pytest.raises(DomainError):
            check_flow_values(bad)
    assert check_flow_values([1.0, 1.0], strict=False).size == 2
    assert is_strictly_decreasing([3, 2, 1]) and not is_strictly_decreasing([3, 3])
