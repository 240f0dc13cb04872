"""Trial engine, tallies, and correlation estimators."""

import math
from dataclasses import replace

import numpy as np
import pytest

from muxmem.ensemble import FieldTimeline
from muxmem.model import MemoryParams, cross_correlation, retrieval_given_write, write_prob
from muxmem.protocol import (
    CYCLE,
    FEED_FORWARD,
    CountsTally,
    ModeSchedule,
    build_schedule,
    coincidence_scaling,
    crosstalk_matrix,
    estimate_statistics,
    heralded_autocorrelation,
    run_trials,
)

FIVE = MemoryParams(p=0.05, eta_w=0.3, eta_r=0.25, p_int0=0.4,
                    beta_ratio=14.0, xi_eg=1.0, n_modes=5, tau_mem=1.0)


def quick_schedule(n_modes, spacing=800e-9, write_duration=266e-9):
    t_last = (n_modes - 1) * spacing + write_duration
    timeline = FieldTimeline.reversal(2.0, t_last)
    return build_schedule(n_modes, spacing, write_duration, timeline)


def test_build_schedule_single_mode():
    timeline = FieldTimeline.reversal(2.0, 1.2e-6)
    schedule = build_schedule(1, 800e-9, 266e-9, timeline)
    assert schedule.write_times[0] == 0.0
    assert schedule.readout_times[0] == pytest.approx(2.4e-6, abs=1e-12)
    assert schedule.storage_times[0] == pytest.approx(2.4e-6, abs=1e-12)


def test_build_schedule_readout_order_reversed():
    # Last written rephases first: readout times decrease with write index.
    schedule = quick_schedule(6)
    assert all(a < b for a, b in zip(schedule.write_times, schedule.write_times[1:]))
    assert all(a > b for a, b in zip(schedule.readout_times, schedule.readout_times[1:]))
    for t_w, t_r in zip(schedule.write_times, schedule.readout_times):
        t_last = 5 * 800e-9 + 266e-9
        assert t_r == pytest.approx(2 * t_last - t_w, abs=1e-12)


def test_build_schedule_freeze_release_uniform_shift():
    n, spacing, wd = 4, 800e-9, 266e-9
    t_last = (n - 1) * spacing + wd
    immediate = build_schedule(n, spacing, wd, FieldTimeline.reversal(2.0, t_last))
    frozen = build_schedule(
        n, spacing, wd,
        FieldTimeline.freeze_release(2.0, t_last, t_last + 5e-6),
        policy="freeze_release")
    shift = np.array(frozen.readout_times) - np.array(immediate.readout_times)
    np.testing.assert_allclose(shift, 5e-6, atol=1e-12)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ModeSchedule(1, 200e-9, 800e-9, "immediate_after_last", (0.0,), (2e-6,))
    with pytest.raises(ValueError):
        ModeSchedule(1, 800e-9, 266e-9, "immediate_after_last", (1e-6,), (0.5e-6,))


def test_run_trials_zero_excitation():
    mem = replace(FIVE, p=0.0)
    tally = run_trials(mem, quick_schedule(5), 5000, seed=1)
    assert tally.n_trials == 5000
    assert tally.write_counts.sum() == 0
    assert tally.coincidence_counts.sum() == 0
    assert tally.unconditional_read_counts.sum() == 0
    # Without heralds only the interleaved fixed passes read anything.
    assert tally.n_reads.sum() == tally.n_uncond_reads.sum() == 2500


def test_fixed_mode_estimates_match_model():
    tally = run_trials(FIVE, quick_schedule(5), 400000, seed=42, readout=2)
    stats = estimate_statistics(tally)
    g2 = stats.g2_cell(2, 2)
    assert abs(g2.value - 11.431372549019606) < 3 * g2.stderr
    p_w = stats.p_w[2]
    assert abs(p_w - write_prob(FIVE)) < 3 * stats.p_w_err[2]
    # p(r|w) via the decomposition g2 * p_r.
    p_rw = stats.g2[2, 2] * stats.p_r[2]
    assert abs(p_rw - retrieval_given_write(FIVE)) < 4 * p_rw * (g2.stderr / g2.value)


def test_fixed_mode_estimates_match_model_no_suppression():
    mem = replace(FIVE, beta_ratio=1.0)
    tally = run_trials(mem, quick_schedule(5), 400000, seed=43, readout=2)
    g2 = estimate_statistics(tally).g2_cell(2, 2)
    assert abs(g2.value - 2.52) < 3 * g2.stderr


def test_feed_forward_diagonal_matches_model():
    tally = run_trials(FIVE, quick_schedule(5), 400000, seed=44, readout=FEED_FORWARD)
    stats = estimate_statistics(tally)
    model = cross_correlation(FIVE)
    for j in range(5):
        cell = stats.g2_cell(j, j)
        assert cell
        assert abs(cell.value - model) < 3.5 * cell.stderr


def test_feed_forward_diagonal_dominates():
    # Matched write-read pairs are strongly correlated; mismatched pairs
    # (collected through the fixed passes) sit near the uncorrelated level.
    tally = run_trials(FIVE, quick_schedule(5), 400000, seed=2, readout=FEED_FORWARD)
    stats = estimate_statistics(tally)
    diag = np.diag(stats.g2)
    off = stats.g2[~np.eye(5, dtype=bool)]
    off = off[np.isfinite(off)]
    assert off.size > 0
    assert diag.mean() > 3 * off.mean()


def test_read_accounting_per_policy():
    # Unconditional-pass and feed-forward reads partition the trials.
    tally = run_trials(FIVE, quick_schedule(5), 12288, seed=3, readout=FEED_FORWARD)
    assert tally.n_uncond_reads.sum() == 12288 // 2
    assert tally.n_reads.sum() <= 12288
    assert tally.n_reads.sum() >= 12288 // 2
    for readout in (CYCLE, 1):
        tally = run_trials(FIVE, quick_schedule(5), 12288, seed=3, readout=readout)
        assert tally.n_reads.sum() == 12288
        assert tally.n_uncond_reads.sum() == 12288


def test_tally_conservation():
    tally = run_trials(FIVE, quick_schedule(5), 100000, seed=4, readout=FEED_FORWARD)
    assert np.all(tally.read_counts <= tally.herald_reads)
    assert np.all(tally.herald_reads <= tally.write_counts[:, None])
    assert np.all(tally.herald_reads.sum(axis=0) <= tally.n_reads.sum())
    assert np.all(tally.uncond_coincidence_counts.diagonal()
                  <= tally.unconditional_read_counts)
    assert np.all(tally.split_ab <= np.minimum(tally.split_a, tally.split_b))
    assert np.all(tally.n_heralded_splits <= tally.n_reads)
    assert np.all(tally.write_counts <= tally.n_trials)


def test_worker_count_does_not_change_tally():
    base = run_trials(FIVE, quick_schedule(5), 50000, seed=7, n_workers=1)
    for workers in (2, 5, 16):
        other = run_trials(FIVE, quick_schedule(5), 50000, seed=7, n_workers=workers)
        for name in ("write_counts", "n_reads", "herald_reads", "coincidence_counts",
                     "read_counts", "n_uncond_reads", "unconditional_read_counts",
                     "uncond_coincidence_counts", "n_heralded_splits",
                     "split_a", "split_b", "split_ab"):
            np.testing.assert_array_equal(getattr(base, name), getattr(other, name),
                                          err_msg=name)


def test_thread_env_variable_respected(monkeypatch):
    monkeypatch.setenv("MUXMEM_THREADS", "4")
    a = run_trials(FIVE, quick_schedule(5), 30000, seed=8)
    monkeypatch.setenv("MUXMEM_THREADS", "1")
    b = run_trials(FIVE, quick_schedule(5), 30000, seed=8)
    np.testing.assert_array_equal(a.coincidence_counts, b.coincidence_counts)


def test_same_seed_same_tally_different_seed_consistent():
    t1 = run_trials(FIVE, quick_schedule(5), 200000, seed=11, readout=1)
    t2 = run_trials(FIVE, quick_schedule(5), 200000, seed=11, readout=1)
    np.testing.assert_array_equal(t1.coincidence_counts, t2.coincidence_counts)
    t3 = run_trials(FIVE, quick_schedule(5), 200000, seed=12, readout=1)
    assert not np.array_equal(t1.coincidence_counts, t3.coincidence_counts)
    a = estimate_statistics(t1).g2_cell(1, 1)
    b = estimate_statistics(t3).g2_cell(1, 1)
    assert abs(a.value - b.value) < 3 * math.hypot(a.stderr, b.stderr)


def test_degenerate_tally_gives_unit_g2():
    n = 100
    tally = CountsTally.zeros(1)
    tally.n_trials = n
    tally.write_counts[:] = n
    tally.n_reads[:] = n
    tally.herald_reads[:] = n
    tally.coincidence_counts[:] = n
    tally.read_counts[:] = n
    tally.n_uncond_reads[:] = n
    tally.unconditional_read_counts[:] = n
    tally.uncond_coincidence_counts[:] = n
    stats = estimate_statistics(tally)
    assert stats.p_w[0] == 1.0
    assert stats.p_r[0] == 1.0
    assert stats.g2[0, 0] == pytest.approx(1.0)


def test_zero_coincidences_one_sided():
    tally = CountsTally.zeros(1)
    tally.n_trials = 1000
    tally.write_counts[:] = 100
    tally.n_reads[:] = 1000
    tally.herald_reads[:] = 100
    tally.n_uncond_reads[:] = 500
    tally.unconditional_read_counts[:] = 50
    stats = estimate_statistics(tally)
    assert stats.g2[0, 0] == 0.0
    assert stats.g2_err[0, 0] == pytest.approx((1 / 100) / 0.1)
    assert stats.g2_cell(0, 0)


def test_empty_cells_are_nan():
    tally = CountsTally.zeros(2)
    tally.n_trials = 10
    stats = estimate_statistics(tally)
    assert np.isnan(stats.p_r).all()
    assert np.isnan(stats.g2).all()
    assert not stats.g2_cell(0, 1)


def test_autocorrelation_noise_free_is_zero():
    # Single retrieved photons never coincide across the splitter.
    mem = replace(FIVE, xi_eg=0.0)
    tally = run_trials(mem, quick_schedule(5), 200000, seed=21)
    est = heralded_autocorrelation(tally)
    assert est.value == 0.0
    assert est.stderr > 0.0


def test_autocorrelation_noise_only_is_thermal():
    # No retrieval at all: the read field is thermal, so g2_rr|w -> 2.
    # Mean photon number kept small so click thresholding stays unbiased.
    mem = MemoryParams(p=0.5, eta_w=1.0, eta_r=0.04, p_int0=0.0,
                       beta_ratio=1.0, xi_eg=1.0, n_modes=1, tau_mem=1.0)
    tally = run_trials(mem, quick_schedule(1), 2000000, seed=22)
    est = heralded_autocorrelation(tally)
    assert est.stderr < 0.3
    assert abs(est.value - 2.0) < 3 * est.stderr


def test_autocorrelation_no_data_is_nan():
    tally = CountsTally.zeros(1)
    tally.n_trials = 10
    est = heralded_autocorrelation(tally)
    assert math.isnan(est.value)
    assert not est


def test_crosstalk_matrix_structure():
    mem = replace(FIVE, n_modes=3)
    g2, g2_err = crosstalk_matrix(mem, quick_schedule(3), 150000, seed=31)
    assert g2.shape == (3, 3)
    diag = np.diag(g2)
    off = g2[~np.eye(3, dtype=bool)]
    assert diag.mean() > 5 * off.mean()
    model = cross_correlation(mem)
    for j in range(3):
        assert abs(g2[j, j] - model) < 4 * g2_err[j, j]


def test_crosstalk_single_mode_equals_g2():
    mem = replace(FIVE, n_modes=1)
    g2, g2_err = crosstalk_matrix(mem, quick_schedule(1), 200000, seed=32)
    assert g2.shape == (1, 1)
    assert abs(g2[0, 0] - cross_correlation(mem)) < 3 * g2_err[0, 0]


def test_coincidence_scaling_linear_without_noise_or_decay():
    mem = replace(FIVE, xi_eg=0.0, tau_mem=1.0)
    rows = coincidence_scaling(mem, [1, 4, 8], 800e-9, 266e-9,
                               gradient=2.0, drift_rate=0.0,
                               n_trials=300000, seed=41)
    n = rows[:, 0]
    p_wr = rows[:, 2]
    # Totals per train scale with the number of modes.
    ratio = p_wr / p_wr[0]
    stderr = 3.0 / np.sqrt(p_wr * 300000)  # generous Poisson band
    assert np.all(np.abs(ratio - n) <= n * stderr[0] + n * stderr)


def test_coincidence_scaling_single_mode_ratio_is_one():
    rows = coincidence_scaling(FIVE, [1], 800e-9, 266e-9,
                               gradient=2.0, drift_rate=0.0,
                               n_trials=50000, seed=42)
    assert rows.shape == (1, 3)
    assert rows[0, 0] == 1


def test_run_trials_validation():
    with pytest.raises(ValueError):
        run_trials(FIVE, quick_schedule(4), 1000, seed=1)  # mode count mismatch
    with pytest.raises(ValueError):
        run_trials(FIVE, quick_schedule(5), 1000, seed=1,
                   retrieval_scale=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        run_trials(FIVE, quick_schedule(5), 1000, seed=1,
                   retrieval_scale=np.full(5, 1.5))
    with pytest.raises(ValueError):
        run_trials(FIVE, quick_schedule(5), 1000, seed=1, readout="sometimes")
    with pytest.raises(ValueError):
        run_trials(FIVE, quick_schedule(5), 1000, seed=1, readout=7)


def test_retrieval_scale_reduces_signal():
    scaled = run_trials(FIVE, quick_schedule(5), 200000, seed=51,
                        readout=2, retrieval_scale=np.full(5, 0.25))
    plain = run_trials(FIVE, quick_schedule(5), 200000, seed=51, readout=2)
    s = estimate_statistics(scaled)
    p = estimate_statistics(plain)
    assert s.g2[2, 2] < p.g2[2, 2]
