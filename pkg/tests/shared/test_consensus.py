import numpy as np
import pytest

from kinopt.shared.consensus import gibbs_mean, gibbs_weights
from kinopt.shared.errors import NumericError


def test_weights_sum_to_one():

    w = gibbs_weights([3.0, 1.0, 2.0, 10.0], alpha=2.0)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.argmax(w) == 1


def test_alpha_zero_gives_plain_mean():

    X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]])
    np.testing.assert_allclose(gibbs_mean(X, [5.0, 1.0, 0.0], 0.0), X.mean(axis=0))


def test_large_alpha_selects_minimum():

    X = np.array([[0.0], [1.0], [2.0]])
    np.testing.assert_allclose(gibbs_mean(X, [3.0, 0.5, 1.0], 1e4), [1.0])


def test_huge_energies_do_not_underflow():

    m = gibbs_mean(np.array([[1.0], [3.0]]), [1e6, 1e6], alpha=100.0)
    np.testing.assert_allclose(m, [2.0])


def test_consensus_is_exact_fixed_point():

    X = np.tile([0.1, 0.7, -0.3], (7, 1))
    m = gibbs_mean(X, np.arange(7.0), 3.0)
    np.testing.assert_array_equal(m, X[0])


def test_non_finite_energy():

    with pytest.raises(NumericError):
        gibbs_weights([1.0, np.nan], 1.0)


def test_negative_alpha():

    with pytest.raises(ValueError):
        gibbs_weights([1.0, 2.0], -1.0)


def test_mismatched_lengths():

    with pytest.raises(ValueError):
        gibbs_mean(np.zeros((3, 2)), [1.0, 2.0], 1.0)
