"""Reduced dynamics for a single dissipative fluctuator at resonance.

The coherence follows from four coupled amplitudes (sum/difference
combinations of the lowest lowering operators in the coupled eigenbasis and
their fluctuator-weighted partners), here integrated numerically and compared
against closed-form damped envelopes for each coupling/damping regime.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidInputError, RegimeWarning, StiffnessError
from .model import CoherenceTrace, _as_time

__all__ = [
    "ReducedState",
    "DampingRegime",
    "DampingCharacter",
    "reduced_rhs",
    "integrate_reduced",
    "coherence_weak_damped",
    "coherence_strong_damped",
    "slow_root_cubic",
    "classify_regime",
    "damping_character",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ReducedState:
    """Sum/difference amplitudes (X+, X-, Y+, Y-) in the frame rotating at omega0.

    X+- combine the two lowering-operator expectations, Y+- their
    fluctuator-weighted counterparts.  The initial condition for the
    |0>+|1> superposition is X+ = 1/sqrt(2), all others zero, and the
    coherence is C(t) = sqrt(2) |X+(t)|.
    """

    x_plus: complex
    x_minus: complex
    y_plus: complex
    y_minus: complex

    @classmethod
    def initial(cls) -> "ReducedState":
        return cls(1.0 / _SQRT2, 0.0, 0.0, 0.0)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x_plus, self.x_minus, self.y_plus, self.y_minus], complex)


class DampingRegime(enum.Enum):
    WEAK_COUPLING = "weak-coupling"
    STRONG_WEAK_DAMP = "strong-weak-damp"
    STRONG_INTERMEDIATE = "strong-intermediate"
    STRONG_STRONG_DAMP = "strong-strong-damp"


class DampingCharacter(enum.Enum):
    UNDERDAMPED = "underdamped"
    OVERDAMPED = "overdamped"
    CRITICAL = "critical"


def _rhs_matrix(g: float, lam: float, gamma: float) -> np.ndarray:
    return np.array(
        [
            [0.0, -1j * g, 0.0, 0.0],
            [-1j * g, 0.0, 0.0, -2j * lam],
            [0.0, 0.0, -2.0 * gamma, -1j * g],
            [0.0, -2j * lam, -1j * g, -2.0 * gamma],
        ],
        dtype=complex,
    )


def reduced_rhs(state: ReducedState, g: float, lam: float, gamma: float) -> ReducedState:
    """Time derivative of the four coupled amplitudes (resonant, rotating frame)."""
    dx = _rhs_matrix(g, lam, gamma) @ state.as_vector()
    return ReducedState(dx[0], dx[1], dx[2], dx[3])


def integrate_reduced(
    g: float,
    lam: float,
    gamma: float,
    t_grid,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> CoherenceTrace:
    """Adaptive integration of the reduced system; returns C(t) = sqrt(2)|X+|.

    The reduced system is exact for the |0>+|1> initial state at zero
    detuning, so this agrees with the dense Lindblad evolution to integrator
    accuracy.
    """
    t_arr = _as_time(t_grid)
    if np.any(np.diff(t_arr) < 0):
        raise InvalidInputError("t_grid must be sorted")
    m = _rhs_matrix(g, lam, gamma)
    y0 = ReducedState.initial().as_vector()
    if t_arr[-1] == 0.0:
        values = np.full(t_arr.shape, 1.0)
        return CoherenceTrace(t=t_arr, values=values, label="reduced-ode")
    sol = solve_ivp(
        lambda _t, y: m @ y,
        (0.0, float(t_arr[-1])),
        y0,
        method="DOP853",
        t_eval=t_arr,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StiffnessError(
            f"reduced-system integration failed at t ~ {sol.t[-1]:.6g}: {sol.message}"
        )
    values = _SQRT2 * np.abs(sol.y[0])
    return CoherenceTrace(t=t_arr, values=values, label="reduced-ode")


def _damped_bracket(gamma_eff: float, kappa_sq: float, t: np.ndarray) -> np.ndarray:
    """cos(kappa t) + (Gamma/kappa) sin(kappa t), analytically continued.

    kappa_sq may be negative (overdamped: cosh/sinh) or zero (critical:
    1 + Gamma t); the expression is continuous in kappa_sq.
    """
    scale = max(gamma_eff**2, abs(kappa_sq), 1e-300)
    if abs(kappa_sq) < 1e-12 * scale:
        return 1.0 + gamma_eff * t
    kappa = complex(math.sqrt(abs(kappa_sq)))
    if kappa_sq < 0:
        kappa = 1j * kappa
    out = np.cos(kappa * t) + (gamma_eff / kappa) * np.sin(kappa * t)
    return out.real


def coherence_weak_damped(g: float, lam: float, gamma: float, t):
    """Weak-coupling damped coherence: Rabi oscillation under a decaying envelope.

    e^(-gamma t) |cos(g t)| times |cos(eta t) + (gamma/eta) sin(eta t)| with
    eta = sqrt(lam^2 - gamma^2), continued through critical damping at
    gamma = |lam|.
    """
    if abs(lam) > 0 and g < 3.0 * abs(lam):
        warnings.warn(
            f"weak-coupling damped formula outside regime: g/|lam| = {g / abs(lam):.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    arr = _as_time(t)
    env = np.exp(-gamma * arr) * _damped_bracket(gamma, lam**2 - gamma**2, arr)
    out = np.abs(np.cos(g * arr) * env)
    return out if arr.ndim else float(out)


def coherence_strong_damped(
    g: float, lam: float, gamma: float, t, regime: DampingRegime | None = None
):
    """Strong-coupling damped coherence in the requested (or classified) regime.

    Weak damping: damped oscillation at g^2/2|lam| with rate gamma.
    Intermediate: pure exponential at g^2 gamma / 2 lam^2.
    Strong damping: damped oscillation at ~g with rate lam^2/gamma
    (re-emergent Rabi oscillations).
    """
    if lam == 0.0:
        raise InvalidInputError("strong-coupling formulas require lam != 0")
    if abs(lam) < 3.0 * g:
        warnings.warn(
            f"strong-coupling damped formula outside regime: |lam|/g = {abs(lam) / g:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    if regime is None:
        regime = classify_regime(g, lam, gamma)
    arr = _as_time(t)
    if regime is DampingRegime.STRONG_INTERMEDIATE:
        out = np.exp(-(g**2) * gamma * arr / (2.0 * lam**2))
    elif regime is DampingRegime.STRONG_WEAK_DAMP:
        gamma_eff = gamma
        kappa_sq = (g**2 / (2.0 * abs(lam))) ** 2 - gamma_eff**2
        out = np.exp(-gamma_eff * arr) * np.abs(_damped_bracket(gamma_eff, kappa_sq, arr))
    elif regime is DampingRegime.STRONG_STRONG_DAMP:
        gamma_eff = lam**2 / gamma
        kappa_sq = g**2 - gamma_eff**2
        out = np.exp(-gamma_eff * arr) * np.abs(_damped_bracket(gamma_eff, kappa_sq, arr))
    else:
        raise InvalidInputError(
            f"regime {regime} is not a strong-coupling regime; "
            "use coherence_weak_damped instead"
        )
    return out if arr.ndim else float(out)


def slow_root_cubic(g: float, lam: float, gamma: float) -> float:
    """Slow real root of x^3 + 2 gamma x^2 + (g^2 + 4 lam^2) x + 2 gamma g^2 = 0.

    Returns the real root continuously connected to x = 0 as g -> 0; for
    g << gamma, lam it approaches -g^2 gamma / 2 lam^2.  The full cubic is
    solved, not the quadratic shortcut.
    """
    if g <= 0 or lam == 0.0 or gamma <= 0:
        raise InvalidInputError("slow_root_cubic requires g, |lam|, gamma > 0")
    roots = np.roots([1.0, 2.0 * gamma, g**2 + 4.0 * lam**2, 2.0 * gamma * g**2])
    scale = max(gamma, abs(lam), g)
    real_roots = [r.real for r in roots if abs(r.imag) < 1e-9 * scale]
    assert real_roots, "cubic with positive coefficients always has a real root"
    return min(real_roots, key=abs)


def classify_regime(
    g: float,
    lam: float,
    gamma: float,
    weak_coupling_ratio: float = 5.0,
    damping_ratio: float = 5.0,
) -> DampingRegime:
    """Map (g, |lam|, gamma) to a damping regime with configurable thresholds."""
    if g < 0 or gamma < 0:
        raise InvalidInputError("rates must be nonnegative")
    al = abs(lam)
    if g >= weak_coupling_ratio * al:
        return DampingRegime.WEAK_COUPLING
    if gamma <= al / damping_ratio:
        return DampingRegime.STRONG_WEAK_DAMP
    if gamma >= damping_ratio * al:
        return DampingRegime.STRONG_STRONG_DAMP
    return DampingRegime.STRONG_INTERMEDIATE


def damping_character(g: float, lam: float, gamma: float) -> DampingCharacter | None:
    """Under/over/critical sub-flag for the damped-oscillator regimes.

    Returns None in the intermediate regime, where the decay is a plain
    exponential with no oscillator analogue.
    """
    regime = classify_regime(g, lam, gamma)
    if regime is DampingRegime.WEAK_COUPLING:
        kappa_sq = lam**2 - gamma**2
        scale = max(lam**2, gamma**2)
    elif regime is DampingRegime.STRONG_WEAK_DAMP:
        kappa_sq = (g**2 / (2.0 * abs(lam))) ** 2 - gamma**2
        scale = max((g**2 / (2.0 * abs(lam))) ** 2, gamma**2)
    elif regime is DampingRegime.STRONG_STRONG_DAMP:
        gamma_eff = lam**2 / gamma
        kappa_sq = g**2 - gamma_eff**2
        scale = max(g**2, gamma_eff**2)
    else:
        return None
    if abs(kappa_sq) < 1e-12 * max(scale, 1e-300):
        return DampingCharacter.CRITICAL
    return DampingCharacter.UNDERDAMPED if kappa_sq > 0 else DampingCharacter.OVERDAMPED
