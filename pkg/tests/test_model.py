"""Closed-form photon statistics: frozen values, identities, inversions."""

import math
from dataclasses import replace

import numpy as np
import pytest

from muxmem.model import (
    UNBOUNDED,
    MemoryParams,
    cavity_gain,
    coincidence_prob,
    cross_correlation,
    g2_vs_storage,
    max_modes,
    noise_given_write,
    read_prob,
    retrieval_given_write,
    write_prob,
)

# Ten-mode working point used throughout.
BASE = MemoryParams(p=0.045, eta_w=0.3, eta_r=0.25, p_int0=0.4,
                    beta_ratio=14.0, xi_eg=1.0, n_modes=10)
# Five-mode point with a rounder excitation probability.
FIVE = replace(BASE, p=0.05, n_modes=5)


def random_params(rng):
    return MemoryParams(
        p=rng.uniform(0.005, 0.2),
        eta_w=rng.uniform(0.05, 0.9),
        eta_r=rng.uniform(0.05, 0.9),
        p_int0=rng.uniform(0.1, 1.0),
        beta_ratio=rng.uniform(1.0, 60.0),
        xi_eg=rng.uniform(0.1, 1.0),
        n_modes=int(rng.integers(1, 30)),
    )


def scan_max_modes(params, threshold, n_cap=5000):
    """Linear-scan oracle: count up until g2 falls to the threshold."""
    best = 0
    for n in range(1, n_cap + 1):
        if cross_correlation(replace(params, n_modes=n)) > threshold:
            best = n
        else:
            break
    return best


def test_write_prob():
    assert write_prob(BASE) == pytest.approx(0.045 * 0.3)
    assert write_prob(FIVE) == pytest.approx(0.015)


def test_read_prob_frozen():
    assert read_prob(BASE) == pytest.approx(0.012214285714285716, rel=1e-12)
    assert read_prob(FIVE) == pytest.approx(0.05 * 0.25 * (0.4 + 4.6 / 14), rel=1e-12)


def test_coincidence_prob_frozen():
    assert coincidence_prob(BASE) == pytest.approx(0.0014541428571428572, rel=1e-12)


def test_retrieval_given_write_frozen():
    assert retrieval_given_write(BASE) == pytest.approx(0.10771428571428572, rel=1e-12)
    assert retrieval_given_write(replace(BASE, beta_ratio=1.0)) == pytest.approx(0.208, rel=1e-12)


def test_noise_given_write_frozen():
    assert noise_given_write(BASE) == pytest.approx(0.007714285714285714, rel=1e-12)
    # The noise channel vanishes with the branching ratio.
    assert noise_given_write(replace(BASE, xi_eg=0.0)) == 0.0


def test_cross_correlation_frozen():
    assert cross_correlation(BASE) == pytest.approx(8.818713450292396, rel=1e-12)
    assert cross_correlation(replace(BASE, beta_ratio=1.0)) == pytest.approx(
        1.848888888888889, rel=1e-12)
    assert cross_correlation(FIVE) == pytest.approx(11.431372549019606, rel=1e-12)
    assert cross_correlation(replace(FIVE, beta_ratio=1.0)) == pytest.approx(2.52, rel=1e-12)


def test_g2_equals_conditional_over_unconditional():
    # g2 = p(r|w) / p_r: detection efficiencies cancel in the ratio.
    rng = np.random.default_rng(7)
    for _ in range(1000):
        params = random_params(rng)
        g2 = cross_correlation(params)
        ratio = retrieval_given_write(params) / read_prob(params)
        assert g2 == pytest.approx(ratio, rel=1e-12)


def test_coincidence_decomposition():
    # p_wr = p_w * p(r|w), exactly, for any parameters and storage time.
    rng = np.random.default_rng(11)
    for _ in range(1000):
        params = random_params(rng)
        t = rng.uniform(0.0, 2e-4)
        assert coincidence_prob(params, t) == pytest.approx(
            write_prob(params) * retrieval_given_write(params, t), rel=1e-12)


def test_retrieval_splits_into_signal_and_noise():
    rng = np.random.default_rng(13)
    for _ in range(200):
        params = random_params(rng)
        signal = params.p_int0 * params.eta_r
        assert retrieval_given_write(params) == pytest.approx(
            signal + noise_given_write(params), rel=1e-12)


def test_g2_strictly_decreasing_in_modes():
    values = [cross_correlation(replace(BASE, n_modes=n)) for n in range(1, 40)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_g2_increases_with_beta():
    values = [cross_correlation(replace(BASE, beta_ratio=b)) for b in (1, 2, 5, 14, 50)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_p_int_decay_laws():
    tau = BASE.tau_mem
    assert BASE.p_int(0.0) == pytest.approx(0.4)
    assert BASE.p_int(tau) == pytest.approx(0.4 / math.e, rel=1e-12)
    gauss = replace(BASE, decay_shape="gaussian")
    assert gauss.p_int(tau) == pytest.approx(0.4 / math.e, rel=1e-12)
    # Both laws agree at t=0 and t=tau but not in between.
    assert gauss.p_int(tau / 2) > BASE.p_int(tau / 2)
    # Array evaluation.
    times = np.array([0.0, tau, 2 * tau])
    np.testing.assert_allclose(BASE.p_int(times), 0.4 * np.exp(-times / tau))


def test_p_int_rejects_negative_time():
    with pytest.raises(ValueError):
        BASE.p_int(-1e-9)


def test_g2_decreases_with_storage():
    g2 = [cross_correlation(BASE, t) for t in (0.0, 20e-6, 72e-6, 150e-6)]
    assert all(a > b for a, b in zip(g2, g2[1:]))


def test_g2_vs_storage_shape():
    times = np.linspace(0.0, 100e-6, 11)
    out = g2_vs_storage(BASE, times)
    assert out.shape == (11, 2)
    np.testing.assert_allclose(out[:, 0], times)
    assert out[0, 1] == pytest.approx(cross_correlation(BASE))
    assert out[-1, 1] == pytest.approx(cross_correlation(BASE, times[-1]))


def test_storage_decay_drop_of_excess_correlation():
    # Fractional drop of g2-1 over one lifetime: 1-1/e without suppression
    # (the denominator is then independent of p_int), much less with it.
    single = replace(BASE, p=0.1, n_modes=1)
    for beta, expected in ((1.0, 0.6321205588285577), (14.0, 0.21700185288724871)):
        mem = replace(single, beta_ratio=beta)
        g0 = cross_correlation(mem) - 1.0
        gt = cross_correlation(mem, mem.tau_mem) - 1.0
        assert 1.0 - gt / g0 == pytest.approx(expected, rel=1e-10)


def test_cavity_gain_frozen():
    single = replace(BASE, n_modes=1)
    gain = cavity_gain(single, replace(single, beta_ratio=1.0))
    assert gain == pytest.approx(2.258064516129032, rel=1e-12)


def test_cavity_gain_trivia():
    assert cavity_gain(BASE, BASE) == pytest.approx(1.0)
    perfect = replace(BASE, p_int0=1.0, n_modes=1)
    assert cavity_gain(perfect, replace(perfect, beta_ratio=3.0)) == pytest.approx(1.0)


def test_cavity_gain_independent_of_p_and_efficiencies():
    rng = np.random.default_rng(3)
    single = replace(BASE, n_modes=1)
    ref = cavity_gain(single, replace(single, beta_ratio=1.0))
    for _ in range(50):
        scaled = replace(single, p=rng.uniform(0.001, 0.3),
                         eta_w=rng.uniform(0.01, 1.0), eta_r=rng.uniform(0.01, 1.0))
        gain = cavity_gain(scaled, replace(scaled, beta_ratio=1.0))
        assert gain == pytest.approx(ref, rel=1e-10)


def test_cavity_gain_requires_matching_params():
    other = replace(BASE, p=0.05)
    with pytest.raises(ValueError):
        cavity_gain(BASE, other)


def test_max_modes_working_point():
    assert max_modes(BASE, 5.8) == 19


def test_max_modes_matches_linear_scan():
    rng = np.random.default_rng(5)
    for _ in range(200):
        params = random_params(rng)
        threshold = rng.uniform(1.05, 8.0)
        got = max_modes(params, threshold)
        if got == UNBOUNDED or got > 3000:
            continue
        assert got == scan_max_modes(params, threshold)


def test_max_modes_versus_beta_sweep():
    betas = [1, 11, 21, 31, 41, 51, 61, 71, 81]
    counts = [max_modes(replace(BASE, beta_ratio=b), 5.8) for b in betas]
    assert counts == [1, 15, 29, 42, 56, 70, 83, 97, 111]


def test_max_modes_unbounded_without_noise_channel():
    clean = replace(BASE, xi_eg=0.0)
    assert cross_correlation(replace(clean, n_modes=1)) > 5.8
    assert max_modes(clean, 5.8) == UNBOUNDED
    assert math.isinf(max_modes(clean, 5.8))


def test_max_modes_zero_when_single_mode_fails():
    assert max_modes(BASE, cross_correlation(replace(BASE, n_modes=1)) + 1.0) == 0


def test_max_modes_threshold_validation():
    with pytest.raises(ValueError):
        max_modes(BASE, 1.0)


def test_cross_correlation_undefined_at_zero_excitation():
    with pytest.raises(ValueError):
        cross_correlation(replace(BASE, p=0.0))


@pytest.mark.parametrize("kwargs", [
    {"p": -0.1}, {"p": 1.5}, {"eta_w": 1.2}, {"eta_r": -0.2},
    {"p_int0": 1.0001}, {"beta_ratio": 0.5}, {"xi_eg": 2.0},
    {"n_modes": 0}, {"tau_mem": 0.0}, {"decay_shape": "linear"},
])
def test_param_validation(kwargs):
    fields = dict(p=0.045, eta_w=0.3, eta_r=0.25, p_int0=0.4, beta_ratio=14.0)
    fields.update(kwargs)
    with pytest.raises(ValueError):
        MemoryParams(**fields)
