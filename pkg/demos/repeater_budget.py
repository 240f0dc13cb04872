"""
What multiplexing buys over a long fiber link
=============================================

Entanglement distribution over a lossy link is a game of rare successes and
long waits: after each attempt the memory must hold its excitation until the
far station's herald arrives.  A memory that stores N modes per roundtrip
multiplies the success probability per attempt, and a programmable readout
lets the stored modes wait for the verdict.
"""

from dataclasses import replace

import numpy as np

from muxmem import (
    FREEZE_RELEASE,
    IMMEDIATE_REVERSAL,
    LinkParams,
    MemoryParams,
    coincidence_scaling,
    multiplexed_rate,
    readout_latency,
    repetition_rate,
    sample_ensemble,
)

link = LinkParams(distance=100e3, signal_velocity=2e8,
                  herald_time=500e-6, decision_delay=1e-6)

# One attempt per link roundtrip.
rate = repetition_rate(link)
print(f"100 km link: {rate:.0f} attempts per second")
print()

# With success probability q per mode per attempt, storing N modes raises
# the per-attempt success to 1 - (1 - q)^N, a factor approaching N while
# N q << 1.
q = 1e-3
single = multiplexed_rate(replace(link, n_modes=1), q)
print(f"entanglement rate versus mode count (q = {q:g} per mode)")
for n in (1, 2, 5, 10, 50, 100, 1000):
    r = multiplexed_rate(replace(link, n_modes=n), q)
    print(f"  N = {n:5d}:  {r:8.3f} Hz   (gain {r / single:6.2f})")
print()

# The storage requirement depends on the readout policy.  Reversing the
# gradient immediately means every mode is back in phase after twice the
# herald time; freezing the gradient lets the memory idle until the herald
# actually arrives and only then run the dephasing backwards.
lat_rev = readout_latency(link, IMMEDIATE_REVERSAL)
lat_frz = readout_latency(link, FREEZE_RELEASE, frozen_interval=510e-6)
print(f"readout latency, immediate reversal: {lat_rev * 1e6:7.1f} us")
print(f"readout latency, freeze for 510 us:  {lat_frz * 1e6:7.1f} us")
print()

# Scaling check with the trial engine.  The per-train coincidence total
# would grow linearly with the mode count for an ideal memory; the finite
# lifetime already bends it (modes written first wait longest), and a slowly
# drifting gradient bends it further by spoiling the rephasing of the
# long-stored modes.
mem = MemoryParams(p=0.045, eta_w=0.3, eta_r=0.25, p_int0=0.4,
                   beta_ratio=14.0, xi_eg=1.0, n_modes=1, tau_mem=72e-6)
ens = sample_ensemble(4000, 1e-3, 0.0, seed=5)
counts = [1, 2, 4, 6, 8, 10]
ideal = coincidence_scaling(mem, counts, 800e-9, 266e-9, gradient=2.0,
                            drift_rate=0.0, n_trials=200000, seed=41)
real = coincidence_scaling(mem, counts, 800e-9, 266e-9, gradient=2.0,
                           drift_rate=20000.0, n_trials=200000, seed=41, ens=ens)
print("write-read coincidences per train, relative to one mode")
print("  modes   stable gradient   drifting gradient")
for (n, _, p_ideal), (_, _, p_real) in zip(ideal, real):
    print(f"  {int(n):5d}   {p_ideal / ideal[0][2]:15.2f}   {p_real / real[0][2]:17.2f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    ns = np.arange(1, 201)
    rates = [multiplexed_rate(replace(link, n_modes=int(n)), q) for n in ns]
    plt.plot(ns, rates)
    plt.xlabel("stored modes N")
    plt.ylabel("entanglement rate (Hz)")
    plt.tight_layout()
    plt.savefig("repeater_budget.png", dpi=120)
    print("\nwrote repeater_budget.png")
