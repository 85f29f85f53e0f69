import numpy as np

from ergoscope.rng import CounterStream, chunk_ranges


def test_single_index_matches_bulk():
    s = CounterStream(42, stream=0, width=6)
    bulk = s.uniforms(0, 100)
    for i in (0, 1, 7, 63, 99):
        assert np.array_equal(s.at(i), bulk[i])
    assert np.array_equal(s.uniforms(37, 20), bulk[37:57])


def test_deviates_in_unit_interval_and_roughly_uniform():
    u = CounterStream(1, width=7).uniforms(0, 50_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert np.allclose(u.mean(axis=0), 0.5, atol=0.01)


def test_streams_and_seeds_differ():
    a = CounterStream(3, 0).uniforms(0, 10)
    assert not np.array_equal(a, CounterStream(3, 1).uniforms(0, 10))
    assert not np.array_equal(a, CounterStream(4, 0).uniforms(0, 10))
    assert np.array_equal(a, CounterStream(3, 0).uniforms(0, 10))


def test_negative_seed_is_accepted():
    assert CounterStream(-1).uniforms(0, 3).shape == (3, 6)


def test_chunk_ranges_cover_everything():
    chunks = chunk_ranges(10, 4)
    assert chunks == [(0, 4), (4, 4), (8, 2)]
