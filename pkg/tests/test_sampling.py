import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affcurve import InputError
from affcurve.sampling import PARTITION, ordered_grid_tuples, partitions, sample_box


@given(st.integers(1, 3 * PARTITION), st.integers(0, 2**32 - 1))
def test_random_prefix_property(n, seed):
    short = np.concatenate(sample_box([0, -1], [1, 1], n, "random", seed))
    longer = np.concatenate(sample_box([0, -1], [1, 1], n + 100, "random", seed))
    np.testing.assert_array_equal(short, longer[:n])


@pytest.mark.parametrize("sampler", ["random", "sobol", "grid"])
def test_samples_stay_in_box_and_are_deterministic(sampler):
    lo, hi = np.array([0.0, 2.0, -1.0]), np.array([1.0, 3.0, 1.0])
    a = np.concatenate(sample_box(lo, hi, 5000, sampler, 7))
    b = np.concatenate(sample_box(lo, hi, 5000, sampler, 7))
    np.testing.assert_array_equal(a, b)
    assert a.shape[1] == 3 and a.shape[0] <= 5000
    assert np.all((a >= lo) & (a <= hi))


def test_partitions_cover_range():
    parts = partitions(10_000)
    assert parts[0][1] == 0 and parts[-1][2] == 10_000
    assert all(p[2] == q[1] for p, q in zip(parts, parts[1:]))


def test_ordered_grid_tuples_are_increasing():
    T = ordered_grid_tuples(0.0, 1.0, 3, 500)
    assert T.shape == (500, 3)
    assert np.all(np.diff(T, axis=1) > 0)


def test_bad_inputs():
    with pytest.raises(InputError):
        sample_box([0], [0], 5)
    with pytest.raises(InputError):
        sample_box([0], [1], 5, "latin")
