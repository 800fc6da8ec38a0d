import numpy as np

from kinopt.shared.rng import RngStream


def test_same_seed_same_draws():

    np.testing.assert_array_equal(RngStream(7).normal(10), RngStream(7).normal(10))


def test_substreams_are_independent_of_sibling_draws():

    a = RngStream(3)
    a.substream(0).normal(1000)
    b = RngStream(3)
    np.testing.assert_array_equal(a.substream(1).uniform(5), b.substream(1).uniform(5))


def test_substreams_differ():

    rng = RngStream(11)
    assert not np.array_equal(rng.substream(0).normal(5), rng.substream(1).normal(5))


def test_spawn_matches_substreams():

    rng = RngStream(5)
    for i, stream in enumerate(rng.spawn(3)):
        np.testing.assert_array_equal(stream.normal(4), rng.substream(i).normal(4))


def test_draw_ranges():

    rng = RngStream(1)
    u = rng.uniform(1000, -2.0, 3.0)
    assert u.min() >= -2.0 and u.max() < 3.0
    c = rng.choice(3, 500, p=np.array([0.0, 1.0, 0.0]))
    assert np.all(c == 1)
