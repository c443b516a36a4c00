import numpy as np

from defzeros.rng import GOE, KOSTLAN, trial_generator


def test_same_key_same_stream():
    a = trial_generator(5, 3, KOSTLAN).standard_normal(16)
    b = trial_generator(5, 3, KOSTLAN).standard_normal(16)
    assert np.array_equal(a, b)


def test_trials_and_streams_are_distinct():
    base = trial_generator(5, 3, KOSTLAN).standard_normal(8)
    assert not np.array_equal(base, trial_generator(5, 4, KOSTLAN).standard_normal(8))
    assert not np.array_equal(base, trial_generator(6, 3, KOSTLAN).standard_normal(8))
    assert not np.array_equal(base, trial_generator(5, 3, GOE).standard_normal(8))
