"""Monte Carlo model of collective spin-wave dephasing and gradient echoes.

A spin wave stored in a cold ensemble accumulates position- and
velocity-dependent phase: atomic motion along the spin-wave grating
contributes ``k_sw * v_j * (t - t_w)``, and a magnetic field with a spatial
gradient contributes the integrated Zeeman shift at each (moving) atom.
Retrieval efficiency is proportional to the squared magnitude of the mean
atomic phasor, so reversing the gradient rephases the ensemble and produces
an echo at the time where the position-proportional phase integral returns
to zero.

Conventions: positions and the spin-wave wavevector are in meters and rad/m,
times in seconds, bias fields in gauss, gradients in gauss per centimeter,
and the Zeeman coefficient in Hz per gauss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import k as _KB, physical_constants
from scipy.optimize import brentq

_AMU = physical_constants["atomic mass constant"][0]

#: Mass of the stored species (Rb-87), kg.
ATOM_MASS = 86.909 * _AMU

#: Linear Zeeman coefficient of the storage transition, Hz per gauss.
ZEEMAN_COEFF_DEFAULT = 1.4e6

#: Reference temperature for the default spin-wave wavevector, K.
_T_REF = 40e-6

#: Default spin-wave wavevector, rad/m: motional 1/e time of 72 us at 40 uK.
K_SW_DEFAULT = 1.0 / (math.sqrt(_KB * _T_REF / ATOM_MASS) * 72e-6)

_CM_PER_M = 100.0


class NoRephasingError(RuntimeError):
    """The position-proportional phase integral never crosses zero."""


@dataclass(frozen=True)
class AtomEnsemble:
    """Sampled atomic positions (m) and velocities (m/s) along the grating axis."""

    positions: np.ndarray
    velocities: np.ndarray
    k_sw: float = K_SW_DEFAULT
    zeeman_coeff: float = ZEEMAN_COEFF_DEFAULT

    def __post_init__(self):
        if self.positions.shape != self.velocities.shape or self.positions.ndim != 1:
            raise ValueError("positions and velocities must be 1-d arrays of equal length")
        if len(self.positions) < 1:
            raise ValueError("ensemble must contain at least one atom")
        if self.k_sw < 0.0 or self.zeeman_coeff < 0.0:
            raise ValueError("k_sw and zeeman_coeff must be >= 0")

    @property
    def n_atoms(self) -> int:
        return len(self.positions)


def sample_ensemble(
    n_atoms: int,
    cloud_sigma: float,
    temperature: float,
    seed: int,
    k_sw: float = K_SW_DEFAULT,
    zeeman_coeff: float = ZEEMAN_COEFF_DEFAULT,
) -> AtomEnsemble:
    """Draw a thermal ensemble: Gaussian positions and Maxwell velocities.

    ``cloud_sigma`` is the rms cloud extent along the gradient (m) and
    ``temperature`` the kinetic temperature (K); 0 freezes the motion.
    Deterministic for a given seed.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if cloud_sigma < 0.0 or temperature < 0.0:
        raise ValueError("cloud_sigma and temperature must be >= 0")
    rng = np.random.default_rng(seed)
    z = rng.normal(0.0, cloud_sigma, size=n_atoms) if cloud_sigma > 0 else np.zeros(n_atoms)
    sigma_v = math.sqrt(_KB * temperature / ATOM_MASS)
    v = rng.normal(0.0, sigma_v, size=n_atoms) if sigma_v > 0 else np.zeros(n_atoms)
    return AtomEnsemble(z, v, k_sw=k_sw, zeeman_coeff=zeeman_coeff)


def zeeman_detuning(ens: AtomEnsemble, field: float) -> float:
    """Two-photon detuning (rad/s) of the storage transition in a field (gauss)."""
    return 2.0 * math.pi * ens.zeeman_coeff * field


@dataclass(frozen=True)
class FieldTimeline:
    """Piecewise-constant gradient program with a uniform bias and a slow drift.

    ``segments`` is a sequence of (start_time_s, gradient_g_per_cm) with
    strictly increasing start times; each gradient holds until the next
    segment starts (the last one holds forever).  Before the first segment
    the gradient is zero.  The instantaneous gradient is scaled by
    ``(1 + drift_rate * t)``, modelling a slow amplitude drift; the bias
    (gauss) is constant and spatially uniform.
    """

    segments: tuple
    bias: float = 0.0
    drift_rate: float = 0.0

    def __post_init__(self):
        segs = tuple((float(t), float(g)) for t, g in self.segments)
        if not segs:
            raise ValueError("timeline needs at least one segment")
        starts = [t for t, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def reversal(cls, gradient: float, reverse_time: float,
                 start_time: float = 0.0, bias: float = 0.0,
                 drift_rate: float = 0.0) -> "FieldTimeline":
        """+gradient from start_time, -gradient from reverse_time on."""
        if reverse_time <= start_time:
            raise ValueError("reverse_time must follow start_time")
        return cls(((start_time, gradient), (reverse_time, -gradient)),
                   bias=bias, drift_rate=drift_rate)

    @classmethod
    def freeze_release(cls, gradient: float, freeze_time: float, release_time: float,
                       start_time: float = 0.0, bias: float = 0.0,
                       drift_rate: float = 0.0) -> "FieldTimeline":
        """+gradient, then zero between freeze and release, then -gradient."""
        if not start_time < freeze_time < release_time:
            raise ValueError("need start_time < freeze_time < release_time")
        return cls(((start_time, gradient), (freeze_time, 0.0), (release_time, -gradient)),
                   bias=bias, drift_rate=drift_rate)

    def gradient_at(self, t: float) -> float:
        """Programmed gradient at time t, without the drift factor."""
        g = 0.0
        for start, grad in self.segments:
            if t >= start:
                g = grad
            else:
                break
        return g

    def _bounds(self):
        """Per-segment (start, end, gradient) with the last end at +inf."""
        out = []
        for i, (start, grad) in enumerate(self.segments):
            end = self.segments[i + 1][0] if i + 1 < len(self.segments) else math.inf
            out.append((start, end, grad))
        return out


@dataclass(frozen=True)
class PhaseState:
    """Per-atom accumulated phases (rad) at ``time`` for a mode written at ``write_time``."""

    phases: np.ndarray
    time: float
    write_time: float


def _phase_coefficients(timeline: FieldTimeline, write_time: float, times: np.ndarray):
    """Position and velocity gradient-phase coefficients for each readout time.

    The gradient phase of atom j is linear in its write-time position and
    velocity: phi_grad = a(t) * z_j + q(t) * v_j with

        a(t) = 2 pi zc * 100 * integral A(t') (1 + d t') dt'
        q(t) = 2 pi zc * 100 * integral A(t') (1 + d t') (t' - t_w) dt'

    (the factor 100 converts gauss/cm * m to gauss).  Returns (a, q) arrays.
    """
    d = timeline.drift_rate
    tw = write_time
    p_int = np.zeros_like(times)
    q_int = np.zeros_like(times)
    for start, end, grad in timeline._bounds():
        if grad == 0.0:
            continue
        lo = max(start, tw)
        if not math.isinf(end) and end <= lo:
            continue
        hi = np.clip(times, lo, end)
        lo_arr = np.minimum(hi, lo)  # collapses to zero width when t < lo
        p_int += grad * ((hi - lo_arr) + d * (hi * hi - lo_arr * lo_arr) / 2.0)
        # antiderivative of (1 + d t)(t - tw): t^2/2 - tw t + d (t^3/3 - tw t^2/2)
        def f(t):
            return t * t / 2.0 - tw * t + d * (t ** 3 / 3.0 - tw * t * t / 2.0)
        q_int += grad * (f(hi) - f(lo_arr))
    scale = 2.0 * math.pi * _CM_PER_M
    return scale * p_int, scale * q_int


def accumulate_phase(
    ens: AtomEnsemble, timeline: FieldTimeline, write_time: float, time: float
) -> PhaseState:
    """Per-atom phase at ``time`` for a spin wave written at ``write_time``.

        phi_j = k_sw v_j (t - t_w)
              + 2 pi zc [bias (t - t_w) + integral A(t')(1 + d t') z_j(t') dt']

    with the atom coasting from its write-time position,
    z_j(t') = z_j + v_j (t' - t_w).
    """
    if time < write_time:
        raise ValueError("time must be >= write_time")
    t = np.array([time], dtype=float)
    a, q = _phase_coefficients(timeline, write_time, t)
    zc = ens.zeeman_coeff
    dt = time - write_time
    phases = (
        ens.k_sw * ens.velocities * dt
        + zc * (a[0] * ens.positions + q[0] * ens.velocities)
        + 2.0 * math.pi * zc * timeline.bias * dt
    )
    return PhaseState(phases, time, write_time)


def collective_efficiency(
    ens: AtomEnsemble, timeline: FieldTimeline, write_time: float,
    time: float, p_int0: float = 1.0,
) -> float:
    """Retrieval efficiency p_int0 * |mean_j exp(i phi_j)|^2 at ``time``.

    The spatially uniform bias only adds a global phase and drops out.
    """
    state = accumulate_phase(ens, timeline, write_time, time)
    return p_int0 * float(np.abs(np.exp(1j * state.phases).mean()) ** 2)


def _efficiency_curve(ens, timeline, write_time, times, p_int0, chunk=512):
    """Vectorized collective efficiency on a time grid (bias omitted, it cancels)."""
    times = np.asarray(times, dtype=float)
    a, q = _phase_coefficients(timeline, write_time, times)
    zc = ens.zeeman_coeff
    z = ens.positions[:, None]
    vel = ens.velocities[:, None]
    out = np.empty_like(times)
    for i in range(0, len(times), chunk):
        sl = slice(i, i + chunk)
        b = ens.k_sw * (times[sl] - write_time) + zc * q[sl]
        ph = z * (zc * a[sl])[None, :] + vel * b[None, :]
        out[sl] = np.abs(np.exp(1j * ph).mean(axis=0)) ** 2
    return p_int0 * out


def _gradient_integral(timeline: FieldTimeline, write_time: float, t: float) -> float:
    """Position-proportional phase integral I(t) = int_tw^t A(t')(1 + d t') dt'."""
    a, _ = _phase_coefficients(timeline, write_time, np.array([t], dtype=float))
    return float(a[0])


def rephasing_time(
    timeline: FieldTimeline, write_time: float, horizon: float = 0.01
) -> float:
    """Earliest time after ``write_time`` where the gradient phase integral crosses zero.

    Solved segment by segment: within a segment the integral is linear (or
    quadratic, with drift) in time, so candidate intervals are located from
    sign changes at segment boundaries and at the interior extremum where the
    drifting gradient itself changes sign; the root is then polished with
    ``brentq`` to 1 ns absolute tolerance.  Raises :class:`NoRephasingError`
    when no crossing exists before ``write_time + horizon``.
    """
    t_end = write_time + horizon
    f = lambda t: _gradient_integral(timeline, write_time, t)
    knots = [write_time]
    for start, end, _ in timeline._bounds():
        if write_time < start < t_end:
            knots.append(start)
        # interior sign change of the drifting gradient A (1 + d t)
        if timeline.drift_rate != 0.0:
            t_flip = -1.0 / timeline.drift_rate
            lo = max(start, write_time)
            hi = min(end, t_end)
            if lo < t_flip < hi:
                knots.append(t_flip)
    knots.append(t_end)
    knots = sorted(set(knots))
    eps = 1e-15
    for a, b in zip(knots, knots[1:]):
        fa, fb = f(a), f(b)
        if a > write_time and abs(fa) < eps:
            return a
        if fa == 0.0 and a == write_time:
            continue
        if fa * fb <= 0.0 and (fa != 0.0 or fb != 0.0):
            if fb == 0.0:
                return b
            return brentq(f, a, b, xtol=1e-9)
    raise NoRephasingError(
        f"phase integral does not return to zero within {horizon:g} s of the write"
    )


def echo_profile(
    ens: AtomEnsemble,
    timeline: FieldTimeline,
    write_time: float,
    pulse,
    p_int0: float,
    times,
    nodes: int = 33,
) -> np.ndarray:
    """Retrieval-efficiency profile for a spin wave created by a finite pulse.

    Creation times are distributed over the write pulse's Gaussian intensity
    envelope (FWHM ``pulse.duration_fwhm``, centred on ``write_time``); the
    profile is the envelope-weighted average of the single-creation-time
    efficiency, evaluated by Gauss-Hermite quadrature with ``nodes`` nodes
    (33 by default).

    Returns an array of shape (len(times), 2) with columns (time, efficiency).
    """
    if nodes < 3:
        raise ValueError("need at least 3 quadrature nodes")
    times = np.asarray(times, dtype=float)
    sigma_t = pulse.duration_fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    x, w = np.polynomial.hermite.hermgauss(nodes)
    w = w / w.sum()
    eff = np.zeros_like(times)
    for xk, wk in zip(x, w):
        t_created = write_time + math.sqrt(2.0) * sigma_t * xk
        eff += wk * _efficiency_curve(ens, timeline, t_created, times, p_int0)
    return np.column_stack([times, eff])
