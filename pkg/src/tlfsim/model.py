"""Core parameter types and the closed Jaynes--Cummings coherence formulas.

All frequencies are angular frequencies expressed in units of a chosen base
frequency (the oscillator frequency ``omega0``, equal to 1 by default).  Every
function here is a pure function of immutable inputs and is safe to call
concurrently.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEigensystemError, InvalidInputError

__all__ = [
    "JcParams",
    "ThermalContext",
    "JcEigensystem",
    "CoherenceTrace",
    "thermal_population",
    "jc_eigensystem",
    "coherence_gr",
    "coherence_gr_short_time",
]


@dataclass(frozen=True)
class JcParams:
    """Oscillator frequency, TLS splitting and exchange coupling.

    Attributes
    ----------
    omega0 : float
        Oscillator angular frequency (> 0).
    epsilon_t : float
        TLS energy splitting (> 0).
    g : float
        Oscillator--TLS exchange coupling (>= 0).
    """

    omega0: float
    epsilon_t: float
    g: float

    def __post_init__(self) -> None:
        for name in ("omega0", "epsilon_t", "g"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value!r}")
        if self.omega0 <= 0:
            raise InvalidInputError(f"omega0 must be positive, got {self.omega0}")
        if self.epsilon_t <= 0:
            raise InvalidInputError(f"epsilon_t must be positive, got {self.epsilon_t}")
        if self.g < 0:
            raise InvalidInputError(f"g must be nonnegative, got {self.g}")
        if not self.is_weakly_coupled:
            warnings.warn(
                f"g = {self.g} is not small compared to min(epsilon_t, omega0); "
                "the exchange-coupling model may not apply",
                stacklevel=2,
            )

    @property
    def delta(self) -> float:
        """Detuning epsilon_t - omega0 (exact in floating arithmetic)."""
        return self.epsilon_t - self.omega0

    @property
    def is_weakly_coupled(self) -> bool:
        return self.g < min(self.epsilon_t, self.omega0)


@dataclass(frozen=True)
class ThermalContext:
    """Temperature handling for fluctuator populations.

    Either scale-separated (temperature far above every fluctuator splitting,
    so both states are equally populated) or a finite temperature with thermal
    energy ``kt``.
    """

    kt: float | None = None

    @classmethod
    def scale_separated(cls) -> "ThermalContext":
        return cls(kt=None)

    @classmethod
    def finite_temperature(cls, kt: float) -> "ThermalContext":
        if not (math.isfinite(kt) and kt > 0):
            raise InvalidInputError(f"kt must be positive and finite, got {kt!r}")
        return cls(kt=kt)

    @property
    def is_scale_separated(self) -> bool:
        return self.kt is None

    def tanh_factor(self, epsilon: float) -> float:
        """tanh(epsilon / 2 kT); zero in the scale-separated limit."""
        if not math.isfinite(epsilon) or epsilon < 0:
            raise InvalidInputError(f"epsilon must be finite and >= 0, got {epsilon!r}")
        if self.kt is None:
            return 0.0
        # math.tanh saturates to +/-1 without overflow for large arguments
        return math.tanh(epsilon / (2.0 * self.kt))

    def sech2_factor(self, epsilon: float) -> float:
        """sech^2(epsilon / 2 kT); unity in the scale-separated limit."""
        return 1.0 - self.tanh_factor(epsilon) ** 2


@dataclass(frozen=True)
class JcEigensystem:
    """First-doublet eigensystem of the exchange-coupled oscillator--TLS pair."""

    omega: float  # generalized Rabi frequency, sqrt(4 g^2 + delta^2)
    cos_theta_plus: float
    sin_theta_plus: float
    cos_theta_minus: float
    sin_theta_minus: float
    omega1_plus: float
    omega1_minus: float
    omega_ground: float


@dataclass(frozen=True)
class CoherenceTrace:
    """Time grid plus coherence magnitudes with a provenance label."""

    t: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.t.shape != self.values.shape:
            raise InvalidInputError(
                f"shape mismatch: t {self.t.shape} vs values {self.values.shape}"
            )


def thermal_population(epsilon: float, ctx: ThermalContext) -> tuple[float, float]:
    """Thermal populations (p_plus, p_minus) of a fluctuator with splitting epsilon.

    p_plus = (1 - tanh(eps/2kT)) / 2 is the excited-state population and
    p_minus = (1 + tanh(eps/2kT)) / 2 the ground-state one; they always sum
    to 1.  In the scale-separated limit both are 1/2 regardless of epsilon.
    """
    th = ctx.tanh_factor(epsilon)
    return (1.0 - th) / 2.0, (1.0 + th) / 2.0


def jc_eigensystem(params: JcParams) -> JcEigensystem:
    """Mixing angles and eigenfrequencies of the first excited doublet.

    Raises
    ------
    DegenerateEigensystemError
        If g = 0 and delta = 0 simultaneously (the doublet splitting vanishes
        and the mixing angles are undefined).
    """
    delta = params.delta
    omega = math.hypot(2.0 * params.g, delta)
    if omega == 0.0:
        raise DegenerateEigensystemError(
            "g = 0 and delta = 0: doublet splitting vanishes"
        )
    cos_p = math.sqrt((omega - delta) / (2.0 * omega))
    sin_p = math.sqrt((omega + delta) / (2.0 * omega))
    return JcEigensystem(
        omega=omega,
        cos_theta_plus=cos_p,
        sin_theta_plus=sin_p,
        cos_theta_minus=sin_p,
        sin_theta_minus=cos_p,
        omega1_plus=(params.omega0 + omega) / 2.0,
        omega1_minus=(params.omega0 - omega) / 2.0,
        omega_ground=-params.epsilon_t / 2.0,
    )


def _as_time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidInputError("t must be finite and nonnegative")
    return arr


def coherence_gr(params: JcParams, t) -> np.ndarray | float:
    """Coherence of the bare oscillator--TLS system at time(s) t.

    Evaluates sqrt(cos^2(Omega t / 2) + (delta/Omega)^2 sin^2(Omega t / 2)),
    which oscillates between 1 and |delta|/Omega.  At resonance this is
    |cos(g t)|.
    """
    eig = jc_eigensystem(params)
    arr = _as_time(t)
    half = eig.omega * arr / 2.0
    ratio2 = (params.delta / eig.omega) ** 2
    out = np.sqrt(np.cos(half) ** 2 + ratio2 * np.sin(half) ** 2)
    return out if arr.ndim else float(out)


def coherence_gr_short_time(g: float, t) -> np.ndarray | float:
    """Quadratic short-time law 1 - g^2 t^2 / 2.

    Valid only while Omega t / 2 << 1; the caller is responsible for the
    regime.  Independent of the detuning.
    """
    arr = _as_time(t)
    out = 1.0 - (g * arr) ** 2 / 2.0
    return out if arr.ndim else float(out)
