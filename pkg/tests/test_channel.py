import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddest.channel import (
    ChannelGenConfig,
    ChannelPath,
    ChannelRealization,
    effective_channel,
    generate_channel,
)
from ddest.kernel import kernel


def test_single_path_pdp_is_one():
    rng = np.random.default_rng(0)
    draws = [abs(generate_channel(ChannelGenConfig(num_paths=1), 32, rng)[0].coeff) ** 2 for _ in range(20000)]
    assert np.mean(draws) == pytest.approx(1.0, abs=0.03)


def test_generation_is_deterministic():
    a = generate_channel(ChannelGenConfig(rng_seed=7))
    b = generate_channel(ChannelGenConfig(rng_seed=7))
    assert a == b
    assert len(a) == 5


def test_power_normalization_monte_carlo():
    rng = np.random.default_rng(11)
    cfg = ChannelGenConfig()
    total = np.array([sum(abs(p.coeff) ** 2 for p in generate_channel(cfg, 32, rng)) for _ in range(100_000)])
    assert 0.99 <= total.mean() <= 1.01


def test_draws_within_bounds():
    rng = np.random.default_rng(2)
    for _ in range(200):
        for p in generate_channel(ChannelGenConfig(), 32, rng):
            assert -3 < p.k_nu < 3
            assert 0 < p.l_tau < 4


def test_phase_absorption():
    cfg = ChannelGenConfig(num_paths=3)
    paths = generate_channel(cfg, 32, np.random.default_rng(5))
    # replay the raw draws to recover h before phase absorption
    rng = np.random.default_rng(5)
    k = rng.uniform(-3, 3, 3)
    l = rng.uniform(0, 4, 3)
    q = np.exp(-0.1 * l) / np.exp(-0.1 * l).sum()
    h = np.sqrt(q / 2) * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    for p, hi, ki, li in zip(paths, h, k, l):
        assert p.coeff == pytest.approx(hi * np.exp(-2j * np.pi * ki * li / 32), abs=1e-14)


def test_invalid_config():
    with pytest.raises(ValueError):
        ChannelGenConfig(num_paths=0)
    with pytest.raises(ValueError):
        ChannelGenConfig(k_max=0)


def test_origin_path_is_impulse():
    h = effective_channel([ChannelPath(0.0, 0.0, 1.0)], 16, 16)
    expect = np.zeros((16, 16), complex)
    expect[0, 0] = 1
    np.testing.assert_allclose(h, expect, atol=1e-12)


def test_integer_shift_path():
    c = 0.3 - 0.7j
    h = effective_channel([ChannelPath(2.0, 3.0, c)], 32, 32)
    assert h[2, 3] == pytest.approx(c, abs=1e-12)
    h[2, 3] = 0
    assert np.max(np.abs(h)) < 1e-12


def test_half_sample_doppler_column():
    h = effective_channel([ChannelPath(0.5, 0.0, 1.0)], 16, 16)
    np.testing.assert_allclose(h[:, 0], [kernel(a - 0.5, 16) for a in range(16)], atol=1e-12)
    np.testing.assert_allclose(h[:, 1:], 0, atol=1e-12)


def test_empty_paths_rejected():
    with pytest.raises(ValueError):
        effective_channel([], 8, 8)
    with pytest.raises(ValueError):
        ChannelRealization([], 8, 8)


def test_periodic_extension():
    # evaluate the defining sum at a + N, b + M directly
    paths = generate_channel(ChannelGenConfig(rng_seed=3), 16)
    h = effective_channel(paths, 16, 12)
    for a, b in [(0, 0), (3, 5), (15, 11)]:
        v = sum(p.coeff * kernel(a + 16 - p.k_nu, 16) * kernel(b + 12 - p.l_tau, 12) for p in paths)
        assert v == pytest.approx(h[a, b], abs=1e-10)


@given(st.floats(-3, 3), st.floats(0, 4), st.floats(-3, 3), st.floats(0, 4))
def test_linearity(k1, l1, k2, l2):
    p1, p2 = ChannelPath(k1, l1, 0.4 + 0.1j), ChannelPath(k2, l2, -0.2j)
    both = effective_channel([p1, p2], 16, 16)
    np.testing.assert_allclose(both, effective_channel([p1], 16, 16) + effective_channel([p2], 16, 16), atol=1e-14)


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 4)), min_size=1, max_size=5, unique=True))
def test_integer_sparsity(cells):
    paths = [ChannelPath(float(k), float(l), 1.0 + 0.5j) for k, l in cells]
    h = effective_channel(paths, 32, 32)
    assert np.count_nonzero(np.abs(h) > 1e-12) == len(cells)


def test_realization_from_matrix():
    m = np.arange(12, dtype=complex).reshape(3, 4)
    r = ChannelRealization.from_matrix(m)
    assert r.effective is m or np.array_equal(r.effective, m)
    assert (r.N, r.M) == (3, 4)
