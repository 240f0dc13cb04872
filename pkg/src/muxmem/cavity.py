"""Low-finesse optical resonator design math.

Covers the figures of merit for a two-mirror standing-wave resonator built
around an atomic ensemble: finesse and linewidth from the outcoupler
transmission ``T`` and the residual round-trip loss ``L``, the escape
probability of an intracavity photon, the emission enhancement into the
resonant mode, and the spectral overlap of a finite-bandwidth pulse with the
resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.constants import c as _C


@dataclass(frozen=True)
class CavityParams:
    """Outcoupler transmission, residual round-trip loss, round-trip length (m)."""

    transmission: float
    loss: float
    roundtrip_length: float = 0.877

    def __post_init__(self):
        if not 0.0 < self.transmission < 1.0:
            raise ValueError(f"transmission must lie in (0, 1), got {self.transmission}")
        if not 0.0 < self.loss < 1.0:
            raise ValueError(f"loss must lie in (0, 1), got {self.loss}")
        if not self.roundtrip_length > 0.0:
            raise ValueError(f"roundtrip_length must be positive, got {self.roundtrip_length}")


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian pulse described by its intensity FWHM in seconds."""

    duration_fwhm: float
    shape: str = "gaussian"

    def __post_init__(self):
        if not self.duration_fwhm > 0.0:
            raise ValueError(f"duration_fwhm must be positive, got {self.duration_fwhm}")
        if self.shape != "gaussian":
            raise ValueError(f"only gaussian pulses are supported, got {self.shape!r}")

    @property
    def spectral_fwhm(self) -> float:
        """Power-spectrum FWHM in Hz, 2 ln2 / (pi * duration_fwhm)."""
        return 2.0 * math.log(2.0) / (math.pi * self.duration_fwhm)


def finesse(cav: CavityParams) -> float:
    """Finesse of a lossy two-mirror resonator.

        F = pi * ((1 - T)(1 - L))^(1/4) / (1 - ((1 - T)(1 - L))^(1/2))
    """
    x = (1.0 - cav.transmission) * (1.0 - cav.loss)
    return math.pi * x ** 0.25 / (1.0 - math.sqrt(x))


def escape_efficiency(cav: CavityParams) -> float:
    """Probability that an intracavity photon leaves through the outcoupler, T / (T + L)."""
    return cav.transmission / (cav.transmission + cav.loss)


def enhancement_factor(cav: CavityParams) -> float:
    """Emission enhancement into the resonant mode, 2 F / pi."""
    return enhancement_from_finesse(finesse(cav))


def enhancement_from_finesse(f: float) -> float:
    """Emission enhancement 2 F / pi for a given (possibly measured) finesse."""
    if f <= 0.0:
        raise ValueError("finesse must be positive")
    return 2.0 * f / math.pi


def rate_gain(cav: CavityParams) -> float:
    """Usable rate gain over free space: enhancement times escape efficiency.

    (2 F / pi) * T / (T + L).  Larger T widens the line (lower enhancement)
    but wins more of the intracavity light, so the product has an interior
    optimum near T = L.
    """
    return enhancement_factor(cav) * escape_efficiency(cav)


def optimal_outcoupler(
    loss: float, t_min: float = 1e-4, t_max: float = 0.9999
) -> tuple[float, float]:
    """Outcoupler transmission maximizing :func:`rate_gain` at fixed loss.

    Returns (T_opt, gain_max).  The search window may be narrowed through
    ``t_min`` / ``t_max``.
    """
    if not 0.0 < loss < 1.0:
        raise ValueError(f"loss must lie in (0, 1), got {loss}")
    if not 0.0 < t_min < t_max < 1.0:
        raise ValueError("need 0 < t_min < t_max < 1")

    def neg_gain(t: float) -> float:
        return -rate_gain(CavityParams(t, loss))

    res = minimize_scalar(neg_gain, bounds=(t_min, t_max), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


def fsr(cav: CavityParams) -> float:
    """Free spectral range in Hz, c / roundtrip_length."""
    return _C / cav.roundtrip_length


def linewidth(cav: CavityParams) -> float:
    """Resonance FWHM in Hz, FSR / finesse."""
    return fsr(cav) / finesse(cav)


def transmission_spectrum(cav: CavityParams, detuning) -> np.ndarray | float:
    """Single-resonance Lorentzian transmission, normalized to 1 on resonance.

        T(delta) = 1 / (1 + (2 delta / linewidth)^2)

    Valid for |detuning| well below FSR/2 where neighbouring orders are far.
    """
    gamma = linewidth(cav)
    d = np.asarray(detuning, dtype=float)
    out = 1.0 / (1.0 + (2.0 * d / gamma) ** 2)
    return float(out) if np.isscalar(detuning) else out


def effective_enhancement(
    cav: CavityParams, pulse: PulseSpec, cavity_detuning: float = 0.0
) -> float:
    """Enhancement after averaging the pulse spectrum over the cavity line.

    The pulse's normalized Gaussian power spectrum (FWHM ``pulse.spectral_fwhm``,
    centred at zero) is integrated against the Lorentzian resonance shifted by
    ``cavity_detuning``; the overlap in [0, 1] scales :func:`enhancement_factor`.
    In the narrow-band limit this reduces to
    enhancement * transmission_spectrum(detuning).
    """
    gamma = linewidth(cav)
    sigma = pulse.spectral_fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    delta = cavity_detuning
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    def integrand(nu: float) -> float:
        s = norm * math.exp(-nu * nu / (2.0 * sigma * sigma))
        return s / (1.0 + (2.0 * (nu - delta) / gamma) ** 2)

    # Finite span with subdivision points at both peaks: quad on an infinite
    # interval misses the Gaussian spike when it is orders narrower than the
    # Lorentzian (and vice versa).
    span = 10.0 * sigma + 4.0 * gamma + abs(delta)
    raw = (-8 * sigma, -4 * sigma, -sigma, 0.0, sigma, 4 * sigma, 8 * sigma,
           delta - gamma, delta, delta + gamma)
    points = sorted(p for p in set(raw) if -span < p < span)
    overlap, _ = quad(integrand, -span, span, points=points, epsrel=1e-8, limit=400)
    return enhancement_factor(cav) * min(overlap, 1.0)
