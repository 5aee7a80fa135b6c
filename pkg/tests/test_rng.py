import numpy as np

from irsnet.rng import as_generator, stream


def test_stream_reproducible_and_independent():
    a = stream(42, 3).random(8)
    assert np.array_equal(a, stream(42, 3).random(8))
    assert not np.array_equal(a, stream(42, 4).random(8))
    assert not np.array_equal(a, stream(43, 3).random(8))


def test_stream_is_philox():
    assert isinstance(stream(1).bit_generator, np.random.Philox)


def test_as_generator_variants():
    g = stream(5)
    assert as_generator(g) is g
    assert np.array_equal(as_generator(7).random(3), stream(7).random(3))
    assert np.array_equal(as_generator(None).random(3), stream(0).random(3))
