"""Exact and approximate coherence for a single non-dissipative fluctuator.

The fluctuator shifts the TLS splitting by +/- 2 lambda depending on its
state, so the exact coherence is a thermally weighted four-frequency sum.
Weak-coupling (g >> |lambda|) and strong-coupling (|lambda| >> g) limits admit
simple envelope formulas, the latter with a higher-order refinement that also
captures the residual fast ripple.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigensystemError, InvalidInputError, RegimeWarning
from .model import JcParams, ThermalContext, coherence_gr, thermal_population, _as_time

__all__ = [
    "TlfSpec",
    "coherence_exact_single",
    "coherence_weak_envelope",
    "coherence_strong_leading",
    "coherence_strong_higher",
]

# Ratio below which a regime precondition triggers a warning. The reference
# comparisons deliberately go outside strict validity (ratios down to ~3), so
# warnings are advisory, never errors.
_REGIME_RATIO = 3.0


@dataclass(frozen=True)
class TlfSpec:
    """One fluctuator: splitting, coupling to the TLS and optional bath rate.

    The coupling sign is meaningful (it encodes dipole orientation) but all
    scale-separated coherences are invariant under lam -> -lam.
    """

    epsilon: float
    lam: float
    gamma: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidInputError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        if not math.isfinite(self.lam):
            raise InvalidInputError(f"lam must be finite, got {self.lam!r}")
        if self.gamma is not None and not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise InvalidInputError(f"gamma must be finite and >= 0, got {self.gamma!r}")


def _shifted_eigensystem(params: JcParams, alpha: int, lam: float) -> tuple[float, float]:
    """(delta, Omega) of the JC system with the detuning shifted by 2*alpha*lam."""
    delta = params.delta + 2.0 * alpha * lam
    omega = math.hypot(2.0 * params.g, delta)
    if omega == 0.0:
        raise DegenerateEigensystemError(
            f"shifted eigensystem degenerate for fluctuator state alpha={alpha:+d}"
        )
    return delta, omega


def coherence_exact_single(params: JcParams, tlf: TlfSpec, ctx: ThermalContext, t):
    """Exact four-frequency coherence for one non-dissipative fluctuator.

    Thermally weighted sum over the two fluctuator states, each contributing a
    JC coherence amplitude with detuning shifted by 2*alpha*lam and an extra
    phase exp(-i alpha lam t).  Reduces to the bare JC result when lam = 0.
    """
    arr = _as_time(t)
    p_plus, p_minus = thermal_population(tlf.epsilon, ctx)
    total = np.zeros(arr.shape, dtype=complex)
    for alpha, p_alpha in ((+1, p_plus), (-1, p_minus)):
        delta_a, omega_a = _shifted_eigensystem(params, alpha, tlf.lam)
        half = omega_a * arr / 2.0
        amp = np.cos(half) + 1j * (delta_a / omega_a) * np.sin(half)
        total += p_alpha * np.exp(-1j * alpha * tlf.lam * arr) * amp
    out = np.abs(total)
    return out if arr.ndim else float(out)


def _thermal_envelope(phase: np.ndarray, tanh_factor: float) -> np.ndarray:
    """sqrt(cos^2 x + tanh^2 sin^2 x): oscillates between 1 and |tanh|."""
    return np.sqrt(np.cos(phase) ** 2 + tanh_factor**2 * np.sin(phase) ** 2)


def coherence_weak_envelope(params: JcParams, tlf: TlfSpec, ctx: ThermalContext, t):
    """Weak-coupling approximation: Rabi oscillation times a slow envelope.

    Valid for g >> |lam| sufficiently close to resonance; outside that regime
    a warning is emitted and the formula is still evaluated.
    """
    lam = abs(tlf.lam)
    if lam > 0 and params.g < _REGIME_RATIO * lam:
        warnings.warn(
            f"weak-coupling envelope outside regime: g/|lam| = {params.g / lam:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    if lam > 0 and abs(params.delta) * lam >= 4.0 * params.g**2:
        warnings.warn(
            "weak-coupling envelope requires |delta| << 4 g^2 / |lam|",
            RegimeWarning,
            stacklevel=2,
        )
    arr = _as_time(t)
    th = ctx.tanh_factor(tlf.epsilon)
    out = np.asarray(coherence_gr(params, arr)) * _thermal_envelope(tlf.lam * arr, th)
    return out if arr.ndim else float(out)


def _check_strong_regime(params: JcParams, tlf: TlfSpec) -> None:
    if tlf.lam == 0.0:
        raise InvalidInputError(
            "strong-coupling formulas divide by lam; lam = 0 is outside the regime"
        )
    if abs(tlf.lam) < _REGIME_RATIO * params.g:
        warnings.warn(
            f"strong-coupling formula outside regime: |lam|/g = {abs(tlf.lam) / params.g:.3g}",
            RegimeWarning,
            stacklevel=3,
        )
    if params.delta != 0.0:
        warnings.warn(
            "strong-coupling formulas assume delta = 0; "
            "use coherence_exact_single for detuned systems",
            RegimeWarning,
            stacklevel=3,
        )


def coherence_strong_leading(params: JcParams, tlf: TlfSpec, ctx: ThermalContext, t):
    """Leading strong-coupling envelope at frequency g^2 / 2 lam.

    Oscillates between unity and tanh(eps / 2kT); in the scale-separated limit
    it reaches zero, at zero temperature it stays pinned at 1.
    """
    _check_strong_regime(params, tlf)
    arr = _as_time(t)
    th = ctx.tanh_factor(tlf.epsilon)
    out = _thermal_envelope(params.g**2 * arr / (2.0 * tlf.lam), th)
    return out if arr.ndim else float(out)


def coherence_strong_higher(params: JcParams, tlf: TlfSpec, ctx: ThermalContext, t):
    """Strong-coupling formula with the O(g^2/lam^2) fast-ripple terms kept.

    Adds a small component at frequency 2 lam with weight B = g^2 / 4 lam^2 to
    the leading envelope (weight A = 1 - B); B -> 0 recovers the leading form.
    """
    _check_strong_regime(params, tlf)
    arr = _as_time(t)
    th = ctx.tanh_factor(tlf.epsilon)
    b = params.g**2 / (4.0 * tlf.lam**2)
    a = 1.0 - b
    slow = params.g**2 * arr / (2.0 * tlf.lam)
    fast = 2.0 * tlf.lam * arr
    out = np.sqrt(
        (a * np.cos(slow) + b * np.cos(fast)) ** 2
        + th**2 * (a * np.sin(slow) + b * np.sin(fast)) ** 2
    )
    return out if arr.ndim else float(out)
