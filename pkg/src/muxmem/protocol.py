"""Stochastic click-level engine for multiplexed write/read trials.

Each trial writes every temporal mode of a train (at most one excitation per
mode), records heralding write clicks, reads one mode back at its programmed
readout time, and tallies detected read photons together with a virtual
balanced splitter for autocorrelation estimates.  Background light in the
read window is thermal with the analytic model's mean, so the tallies
reproduce the closed-form statistics of :mod:`muxmem.model` in expectation.

Trials are partitioned into fixed-size blocks, each driven by its own
counter-derived Philox stream, and block tallies are integers summed in block
order.  Results are therefore byte-identical for any worker count; the
``MUXMEM_THREADS`` environment variable caps the thread pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .ensemble import FieldTimeline, collective_efficiency, rephasing_time
from .model import MemoryParams

#: Trials per RNG block.  Fixed: it is part of the determinism contract.
BLOCK_SIZE = 4096

#: Readout policies: read the first heralded mode (odd trials run fixed-mode
#: normalization passes), or read mode (trial index mod n_modes) every trial.
FEED_FORWARD = "feed_forward"
CYCLE = "cycle"


@dataclass(frozen=True)
class ModeSchedule:
    """Write and readout timing for one train of temporal modes.

    ``write_times[m]`` is the (idealized, instantaneous) creation time of mode
    m and ``readout_times[m]`` its programmed readout, normally the rephasing
    time of the gradient timeline the schedule was built from.
    """

    n_modes: int
    mode_spacing: float
    write_duration: float
    reversal_policy: str
    write_times: np.ndarray
    readout_times: np.ndarray

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if not 0.0 < self.write_duration < self.mode_spacing:
            raise ValueError("need 0 < write_duration < mode_spacing")
        if len(self.write_times) != self.n_modes or len(self.readout_times) != self.n_modes:
            raise ValueError("write_times and readout_times must have n_modes entries")
        if np.any(self.readout_times <= self.write_times):
            raise ValueError("each readout must come after its write")

    @property
    def storage_times(self) -> np.ndarray:
        return self.readout_times - self.write_times


def build_schedule(
    n_modes: int,
    mode_spacing: float,
    write_duration: float,
    timeline: FieldTimeline,
    policy: str = "immediate_after_last",
    horizon: float = 0.01,
) -> ModeSchedule:
    """Schedule a train of modes against a gradient timeline.

    Mode m is written at m * mode_spacing and read at the timeline's
    rephasing time for that write.  Readouts must land strictly after the
    final gradient step (the reversal, or the release for a freeze program);
    with a reversal right after the last mode this makes the readout order
    the reverse of the write order.
    """
    if policy not in ("immediate_after_last", "freeze_release"):
        raise ValueError(f"unknown reversal policy {policy!r}")
    write_times = np.arange(n_modes) * mode_spacing
    readout_times = np.array(
        [rephasing_time(timeline, float(tw), horizon=horizon) for tw in write_times]
    )
    final_step = timeline.segments[-1][0]
    if np.any(readout_times <= final_step):
        raise ValueError(
            "schedule is inconsistent: a readout falls before the final gradient step"
        )
    return ModeSchedule(
        n_modes=n_modes,
        mode_spacing=mode_spacing,
        write_duration=write_duration,
        reversal_policy=policy,
        write_times=write_times,
        readout_times=readout_times,
    )


@dataclass
class CountsTally:
    """Integer click, photon, and pair tallies from :func:`run_trials`.

    Write clicks are binary per trial and mode.  Read tallies count detected
    photons (coherent retrieval plus thermal background), and coincidences
    count write-read photon pairs; ``read_counts`` keeps the thresholded
    click version of the same cells.  Matrix cells are indexed
    (herald mode, read mode).  Unconditional rows come from fixed-mode
    readout passes and normalize the correlation estimates.
    """

    n_trials: int
    n_modes: int
    write_counts: np.ndarray          # (M,)   trials with a write click
    n_reads: np.ndarray               # (M,)   trials in which mode j was read
    herald_reads: np.ndarray          # (M,M)  read-j trials that had a write click in i
    coincidence_counts: np.ndarray    # (M,M)  write-read photon pairs over read-j trials
    read_counts: np.ndarray           # (M,M)  read-j trials with write click i and >=1 photon
    n_uncond_reads: np.ndarray        # (M,)   unconditional (fixed-pass) reads of j
    unconditional_read_counts: np.ndarray  # (M,) photons detected in those passes
    uncond_coincidence_counts: np.ndarray  # (M,M) photon pairs restricted to those passes
    n_heralded_splits: np.ndarray     # (M,)   heralded reads of j sent through the splitter
    split_a: np.ndarray               # (M,)   splitter arm A clicks
    split_b: np.ndarray               # (M,)   splitter arm B clicks
    split_ab: np.ndarray              # (M,)   both-arm coincidences

    @classmethod
    def zeros(cls, n_modes: int) -> "CountsTally":
        m = n_modes
        vec = lambda: np.zeros(m, dtype=np.int64)
        mat = lambda: np.zeros((m, m), dtype=np.int64)
        return cls(0, m, vec(), vec(), mat(), mat(), mat(), vec(), vec(), mat(),
                   vec(), vec(), vec(), vec())

    def merge(self, other: "CountsTally") -> "CountsTally":
        if self.n_modes != other.n_modes:
            raise ValueError("cannot merge tallies with different mode counts")
        kw = {"n_trials": self.n_trials + other.n_trials, "n_modes": self.n_modes}
        for name in ("write_counts", "n_reads", "herald_reads", "coincidence_counts",
                     "read_counts", "n_uncond_reads", "unconditional_read_counts",
                     "uncond_coincidence_counts", "n_heralded_splits",
                     "split_a", "split_b", "split_ab"):
            kw[name] = getattr(self, name) + getattr(other, name)
        return CountsTally(**kw)


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a first-order standard error; NaN marks undefined."""

    value: float
    stderr: float

    def __bool__(self):
        return not math.isnan(self.value)


def _worker_count(n_workers) -> int:
    if n_workers is not None:
        return max(int(n_workers), 1)
    env = os.environ.get("MUXMEM_THREADS")
    return max(int(env), 1) if env else 1


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(block_index,))
    return np.random.Generator(np.random.Philox(ss))


def run_trials(
    mem: MemoryParams,
    schedule: ModeSchedule,
    n_trials: int,
    seed: int,
    readout=FEED_FORWARD,
    retrieval_scale=None,
    n_workers=None,
) -> CountsTally:
    """Simulate ``n_trials`` write/read trials and return the merged tally.

    ``readout`` is :data:`FEED_FORWARD` (read the first heralded mode;
    odd-indexed trials instead run a fixed-mode pass cycling through the modes
    to normalize the statistics), :data:`CYCLE` (every trial is an
    unconditional fixed-mode pass, cycling through the modes), or an integer
    mode index for fixed-mode readout of every trial.  ``retrieval_scale``
    optionally multiplies the decayed intrinsic retrieval per mode, for
    coupling in externally computed rephasing deficits.  Deterministic for
    fixed (seed, n_trials) regardless of ``n_workers``.
    """
    m = mem.n_modes
    if schedule.n_modes != m:
        raise ValueError(
            f"schedule has {schedule.n_modes} modes but params expect {m}"
        )
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if readout not in (FEED_FORWARD, CYCLE):
        readout = int(readout)
        if not 0 <= readout < m:
            raise ValueError(f"fixed readout mode {readout} out of range")
    scale = np.ones(m) if retrieval_scale is None else np.asarray(retrieval_scale, float)
    if scale.shape != (m,) or np.any(scale < 0.0) or np.any(scale > 1.0):
        raise ValueError("retrieval_scale must be per-mode factors in [0, 1]")

    pint_t = mem.p_int(schedule.storage_times)      # decayed retrieval per mode
    pint_eff = pint_t * scale                        # with external deficits
    nbar = mem.p * (m - pint_t) * mem.xi_eg / mem.beta_ratio * mem.eta_r
    p_coh = pint_eff * mem.eta_r

    n_blocks = (n_trials + BLOCK_SIZE - 1) // BLOCK_SIZE

    def run_block(b: int) -> CountsTally:
        start = b * BLOCK_SIZE
        size = min(BLOCK_SIZE, n_trials - start)
        rng = _block_rng(seed, b)
        idx = start + np.arange(size)
        spin = rng.random((size, m)) < mem.p
        write = spin & (rng.random((size, m)) < mem.eta_w)

        # Which mode each trial reads: -1 marks "no read" (unheralded
        # feed-forward trials).  Fixed passes are flagged unconditional.
        if readout == FEED_FORWARD:
            read_mode = np.full(size, -1, dtype=np.int64)
            uncond = idx % 2 == 1
            read_mode[uncond] = (idx[uncond] // 2) % m
            ff = ~uncond
            heralded = write.any(axis=1)
            first = write.argmax(axis=1)
            sel = ff & heralded
            read_mode[sel] = first[sel]
        elif readout == CYCLE:
            read_mode = idx % m
            uncond = np.ones(size, dtype=bool)
        else:
            read_mode = np.full(size, readout, dtype=np.int64)
            uncond = np.ones(size, dtype=bool)

        tally = CountsTally.zeros(m)
        tally.n_trials = size
        tally.write_counts += write.sum(axis=0)

        # Coherent photon and thermal background for every reading trial.
        u_coh = rng.random(size)
        u_geom = rng.random(size)
        n_photons = np.zeros(size, dtype=np.int64)
        for r in range(m):
            sel = read_mode == r
            if not sel.any():
                continue
            coh = spin[sel, r] & (u_coh[sel] < p_coh[r])
            # Bose-Einstein photon number via inverse-CDF of the geometric law
            q = 1.0 / (1.0 + nbar[r])
            noise = np.floor(np.log1p(-u_geom[sel]) / math.log1p(-q)).astype(np.int64) \
                if nbar[r] > 0 else np.zeros(sel.sum(), dtype=np.int64)
            n_photons[sel] = coh.astype(np.int64) + noise

        # Splitter: binomial split of each reading trial's photons.
        n_a = rng.binomial(n_photons, 0.5)
        n_b = n_photons - n_a

        for r in range(m):
            sel = read_mode == r
            if not sel.any():
                continue
            w_sel = write[sel].astype(np.int64)
            ph = n_photons[sel]
            tally.n_reads[r] += sel.sum()
            tally.herald_reads[:, r] += w_sel.sum(axis=0)
            tally.coincidence_counts[:, r] += w_sel.T @ ph
            tally.read_counts[:, r] += w_sel.T @ (ph > 0).astype(np.int64)
            us = uncond[sel]
            tally.n_uncond_reads[r] += us.sum()
            tally.unconditional_read_counts[r] += ph[us].sum()
            tally.uncond_coincidence_counts[:, r] += w_sel[us].T @ ph[us]
            her = w_sel[:, r].astype(bool)
            tally.n_heralded_splits[r] += her.sum()
            tally.split_a[r] += ((n_a[sel] > 0) & her).sum()
            tally.split_b[r] += ((n_b[sel] > 0) & her).sum()
            tally.split_ab[r] += ((n_a[sel] > 0) & (n_b[sel] > 0) & her).sum()
        return tally

    workers = _worker_count(n_workers)
    total = CountsTally.zeros(m)
    if workers == 1:
        for b in range(n_blocks):
            total = total.merge(run_block(b))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for block_tally in pool.map(run_block, range(n_blocks)):
                total = total.merge(block_tally)
    return total


@dataclass(frozen=True)
class TallyStatistics:
    """Per-mode(-pair) estimates derived from a :class:`CountsTally`."""

    p_w: np.ndarray
    p_w_err: np.ndarray
    p_r: np.ndarray
    p_r_err: np.ndarray
    p_wr: np.ndarray
    p_wr_err: np.ndarray
    g2: np.ndarray
    g2_err: np.ndarray

    def g2_cell(self, i: int, j: int) -> Estimate:
        return Estimate(float(self.g2[i, j]), float(self.g2_err[i, j]))


def _ratio_err(k, n):
    """Binomial-ish standard error of k/n, with a one-count floor for k = 0."""
    k = np.asarray(k, dtype=float)
    p = k / n
    return np.sqrt(np.maximum(k, 1.0) * np.maximum(1.0 - np.minimum(p, 1.0), 0.0)) / n


def estimate_statistics(tally: CountsTally) -> TallyStatistics:
    """Estimate p_w, p_r, p_wr, and g2 per mode (pair) with standard errors.

    g2(i, j) is computed as p(r|w) / p_r, algebraically identical to
    p_wr / (p_w p_r) but unbiased when reads are herald-conditioned
    (feed-forward data): the heralded retrieval estimate comes from read-j
    trials with a herald in i, the normalization from unconditional passes.
    Cells without data are NaN; zero coincidences with nonzero singles give 0
    with a one-sided single-count error.
    """
    m = tally.n_modes
    with np.errstate(invalid="ignore", divide="ignore"):
        p_w = tally.write_counts / tally.n_trials
        p_w_err = _ratio_err(tally.write_counts, tally.n_trials)

        n_ur = tally.n_uncond_reads.astype(float)
        p_r = np.where(n_ur > 0, tally.unconditional_read_counts / np.maximum(n_ur, 1), np.nan)
        p_r_err = np.where(
            n_ur > 0,
            np.sqrt(np.maximum(tally.unconditional_read_counts, 1)) / np.maximum(n_ur, 1),
            np.nan,
        )

        nu = tally.n_uncond_reads[None, :].astype(float)
        p_wr = np.where(nu > 0, tally.uncond_coincidence_counts / np.maximum(nu, 1), np.nan)
        p_wr_err = np.where(
            nu > 0,
            np.sqrt(np.maximum(tally.uncond_coincidence_counts, 1)) / np.maximum(nu, 1),
            np.nan,
        )

        hr = tally.herald_reads.astype(float)
        pairs = tally.coincidence_counts.astype(float)
        p_rw = np.where(hr > 0, pairs / np.maximum(hr, 1), np.nan)  # p(r|w)
        g2 = p_rw / p_r[None, :]
        rel = np.sqrt(
            1.0 / np.maximum(pairs, 1.0)
            + 1.0 / np.maximum(tally.unconditional_read_counts[None, :], 1.0)
        )
        g2_err = np.where(pairs > 0, g2 * rel, np.nan)
        # zero pairs with data present: report 0 with a one-count upper bound
        zero = (pairs == 0) & (hr > 0) & (p_r[None, :] > 0)
        one_sided = (1.0 / np.maximum(hr, 1)) / p_r[None, :]
        g2 = np.where(zero, 0.0, g2)
        g2_err = np.where(zero, one_sided, g2_err)
    return TallyStatistics(p_w, p_w_err, p_r, p_r_err, p_wr, p_wr_err, g2, g2_err)


def heralded_autocorrelation(tally: CountsTally, mode=None) -> Estimate:
    """Heralded read-field autocorrelation from the virtual splitter.

        g2_rr|w = (both-arm coincidences) * (heralded reads) / (A clicks * B clicks)

    Pooled over all modes unless ``mode`` selects one.  A retrieved single
    photon never fires both arms (exactly 0); pure thermal background tends
    to 2.  Zero coincidences with nonzero singles give 0 with a one-sided
    single-count error; zero singles are undefined (NaN).
    """
    sl = slice(None) if mode is None else slice(mode, mode + 1)
    c = int(tally.split_ab[sl].sum())
    sa = int(tally.split_a[sl].sum())
    sb = int(tally.split_b[sl].sum())
    n = int(tally.n_heralded_splits[sl].sum())
    if sa == 0 or sb == 0 or n == 0:
        return Estimate(math.nan, math.nan)
    if c == 0:
        return Estimate(0.0, n / (sa * sb))
    val = c * n / (sa * sb)
    rel = math.sqrt(1.0 / c + 1.0 / sa + 1.0 / sb + 1.0 / n)
    return Estimate(val, val * rel)


def _child_seed(seed: int, salt: int) -> int:
    return int(np.random.SeedSequence(entropy=[int(seed), int(salt)]).generate_state(1)[0])


def crosstalk_matrix(
    mem: MemoryParams,
    schedule: ModeSchedule,
    n_trials: int,
    seed: int,
    n_workers=None,
):
    """g2 between every write mode and every read mode.

    Column j comes from a fixed-mode-j run of ``n_trials`` trials (reads are
    then unconditional, so every cell of the column is populated).  Returns
    (values, stderrs) as (M, M) arrays indexed (write mode, read mode).
    Diagonal cells follow the analytic cross correlation at each mode's
    storage time; off-diagonal cells sit at the accidental floor of 1.
    """
    m = mem.n_modes
    g2 = np.full((m, m), np.nan)
    err = np.full((m, m), np.nan)
    for j in range(m):
        tally = run_trials(
            mem, schedule, n_trials, _child_seed(seed, j), readout=j, n_workers=n_workers
        )
        stats = estimate_statistics(tally)
        g2[:, j] = stats.g2[:, j]
        err[:, j] = stats.g2_err[:, j]
    return g2, err


def coincidence_scaling(
    mem: MemoryParams,
    n_modes_values,
    mode_spacing: float,
    write_duration: float,
    gradient: float,
    drift_rate: float,
    n_trials: int,
    seed: int,
    ens=None,
    bias: float = 0.0,
):
    """Per-train write and coincidence totals versus mode count.

    For each N in ``n_modes_values`` the gradient reverses right after the
    last write, readout times are programmed from the drift-free timeline,
    and trials run with cycled fixed-mode readout so every mode's joint
    write/read-pair probability is sampled.  The totals are

        p_w_total  = sum_m p_hat_w(m)          (write clicks per train)
        p_wr_total = sum_m p_hat_wr(m, m)      (write-read pairs per train,
                                                each mode read in its slot)

    With ``drift_rate`` nonzero the actually applied timeline drifts, so each
    mode's retrieval at its programmed time is scaled by the ensemble-averaged
    rephasing deficit computed from ``ens`` (pass a motion-frozen ensemble;
    motional decay is already in ``mem.tau_mem``).  Without decay, drift, and
    background (xi_eg = 0) the coincidence total is exactly linear in N;
    background pairs add a weak super-linear component since every stored
    mode contributes noise.

    Returns an array of rows (n_modes, p_w_total, p_wr_total).
    """
    if drift_rate != 0.0 and ens is None:
        raise ValueError("drift_rate != 0 requires an ensemble for the deficit factors")
    rows = []
    for n in n_modes_values:
        n = int(n)
        mem_n = replace(mem, n_modes=n)
        t_rev = (n - 1) * mode_spacing + write_duration
        nominal = FieldTimeline.reversal(gradient, t_rev, bias=bias)
        schedule = build_schedule(n, mode_spacing, write_duration, nominal)
        if drift_rate != 0.0:
            drifted = FieldTimeline.reversal(gradient, t_rev, bias=bias, drift_rate=drift_rate)
            scale = np.array([
                collective_efficiency(ens, drifted, float(tw), float(tr), 1.0)
                for tw, tr in zip(schedule.write_times, schedule.readout_times)
            ])
        else:
            scale = None
        tally = run_trials(mem_n, schedule, n_trials, _child_seed(seed, n),
                           readout=CYCLE, retrieval_scale=scale)
        p_w_total = tally.write_counts.sum() / tally.n_trials
        per_mode = np.diag(tally.uncond_coincidence_counts) / tally.n_uncond_reads
        p_wr_total = float(per_mode.sum())
        rows.append((n, p_w_total, p_wr_total))
    return np.array(rows)
