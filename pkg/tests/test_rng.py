import numpy as np

from ncdk import rng


def test_scalar_and_array_agree():
    seeds = [(0, 0, 0, 0), (7, 3, 11, 5), (2**63 + 5, 123456, 999, 2)]
    for s in seeds:
        a = rng.normal(np.uint64(s[0]), s[1], s[2], s[3])
        b = rng.normal_array(s[0], s[1], s[2], s[3])
        assert np.isclose(a, b, rtol=1e-15, atol=1e-15)
        assert rng.uniform(np.uint64(s[0]), s[1], s[2], s[3]) == rng.uniform_array(*s)


def test_counter_hash_is_a_pure_function():
    a = rng.counter_hash_array(5, np.arange(10), 3, 1)
    b = rng.counter_hash_array(5, np.arange(10), 3, 1)
    assert np.array_equal(a, b)
    assert len(set(a.tolist())) == 10
    assert not np.array_equal(a, rng.counter_hash_array(6, np.arange(10), 3, 1))


def test_uniform_range():
    u = rng.uniform_array(1, np.arange(100000), 0, 0)
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)


def test_normal_moments():
    z = rng.normal_array(42, np.arange(400000), 7, 3)
    se = 1 / np.sqrt(z.size)
    assert abs(z.mean()) < 4 * se
    assert abs(z.var() - 1) < 4 * np.sqrt(2) * se
    assert abs(np.mean(z**4) - 3) < 4 * np.sqrt(96) * se


def test_neighbouring_keys_are_uncorrelated():
    a = rng.normal_array(9, np.arange(200000), 0, 0)
    b = rng.normal_array(9, np.arange(200000), 0, 1)
    c = rng.normal_array(9, np.arange(200000), 1, 0)
    lim = 4 / np.sqrt(a.size)
    assert abs(np.corrcoef(a, b)[0, 1]) < lim
    assert abs(np.corrcoef(a, c)[0, 1]) < lim


def test_seed_words_distinct():
    w = rng.seed_words(3, 8)
    assert len(set(w.tolist())) == 8
