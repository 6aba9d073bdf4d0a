"""Coherence of an ensemble of frozen (non-dissipative) fluctuators.

The exact coherence is a thermally weighted sum over all 2^N fluctuator
configurations, each shifting the TLS detuning by twice the inner product of
the configuration with the coupling vector.  For large ensembles the inner
product distribution is approximated as Gaussian, giving a continuum-limit
integral plus narrow- and broad-ensemble closed forms.  The coupling samplers
reproduce the uniform and spatially distributed ensembles used in the
reference scenarios.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc, exp1

from ._quadrature import oscillation_edges, panel_nodes
from .errors import (
    CapacityError,
    DegenerateEigensystemError,
    InvalidInputError,
    NumericalError,
    RegimeWarning,
)
from .model import JcParams, ThermalContext, coherence_gr, _as_time
from .single_fluctuator import TlfSpec

__all__ = [
    "TlfEnsemble",
    "EnsembleStats",
    "ensemble_stats",
    "coherence_exact_ensemble",
    "coherence_continuum",
    "coherence_narrow",
    "coherence_broad_integral",
    "coherence_broad_erfc",
    "coherence_broad_linear",
    "sample_uniform_couplings",
    "sample_spatial_couplings",
]

# Default splitting range (units of omega0) for sampled fluctuators; the
# splittings are irrelevant in the scale-separated regime but keep
# finite-temperature runs well-defined.
_DEFAULT_EPS_RANGE = (0.01, 0.2)


@dataclass(frozen=True)
class TlfEnsemble:
    """A list of fluctuators plus the thermal context weighting their states."""

    tlfs: tuple[TlfSpec, ...]
    ctx: ThermalContext
    cap: int = 20  # exact evaluation costs 2^N

    def __init__(self, tlfs, ctx: ThermalContext, cap: int = 20) -> None:
        object.__setattr__(self, "tlfs", tuple(tlfs))
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "cap", cap)

    @property
    def n(self) -> int:
        return len(self.tlfs)


@dataclass(frozen=True)
class EnsembleStats:
    """Thermally weighted mean/variance of the coupling inner product.

    mu = sum_j lam_j tanh(eps_j / 2kT), sigma2 = sum_j lam_j^2 sech^2(...),
    and r = max_j(sigma_j^2) / sigma2 measures whether a single fluctuator
    dominates (r close to 1 breaks the Gaussian continuum limit).  r is NaN
    when sigma2 = 0 (degenerate: all couplings vanish).
    """

    mu: float
    sigma2: float
    r: float = math.nan

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def degenerate(self) -> bool:
        return self.sigma2 == 0.0


def ensemble_stats(ens: TlfEnsemble) -> EnsembleStats:
    """Exact thermally weighted statistics of the ensemble's inner product."""
    if ens.n < 1:
        raise InvalidInputError("ensemble_stats requires at least one fluctuator")
    per_tlf = np.array(
        [tlf.lam**2 * ens.ctx.sech2_factor(tlf.epsilon) for tlf in ens.tlfs]
    )
    mu = sum(tlf.lam * ens.ctx.tanh_factor(tlf.epsilon) for tlf in ens.tlfs)
    sigma2 = float(per_tlf.sum())
    r = float(per_tlf.max() / sigma2) if sigma2 > 0 else math.nan
    return EnsembleStats(mu=mu, sigma2=sigma2, r=r)


def _configuration_table(ens: TlfEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Inner products and probabilities of all 2^N configurations."""
    lam_sum = np.zeros(1)
    prob = np.ones(1)
    for tlf in ens.tlfs:
        th = ens.ctx.tanh_factor(tlf.epsilon)
        p_plus, p_minus = (1.0 - th) / 2.0, (1.0 + th) / 2.0
        lam_sum = np.concatenate([lam_sum + tlf.lam, lam_sum - tlf.lam])
        prob = np.concatenate([prob * p_plus, prob * p_minus])
    return lam_sum, prob


def _jc_amplitude(g: float, delta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """cos(Omega t / 2) + i (delta/Omega) sin(Omega t / 2), broadcast over (t, delta)."""
    omega = np.sqrt(4.0 * g**2 + delta**2)
    half = omega * t / 2.0
    return np.cos(half) + 1j * (delta / omega) * np.sin(half)


def coherence_exact_ensemble(params: JcParams, ens: TlfEnsemble, t):
    """Exact 2^N-configuration coherence sum.

    Raises CapacityError beyond the configured fluctuator cap (use the
    continuum approximation instead) and DegenerateEigensystemError if any
    configuration shifts the system exactly onto the degenerate point.
    """
    if ens.n > ens.cap:
        raise CapacityError(
            f"exact ensemble sum over 2^{ens.n} configurations exceeds cap "
            f"N <= {ens.cap}; use coherence_continuum"
        )
    arr = _as_time(t)
    if ens.n == 0:
        return coherence_gr(params, t)
    lam_sum, prob = _configuration_table(ens)
    delta_cfg = params.delta + 2.0 * lam_sum
    if np.any(4.0 * params.g**2 + delta_cfg**2 == 0.0):
        raise DegenerateEigensystemError(
            "a fluctuator configuration makes the shifted doublet degenerate"
        )
    flat = np.atleast_1d(arr)
    out = np.empty(flat.shape)
    # chunk the time axis so the (t, config) work array stays modest
    chunk = max(1, int(4e6 // lam_sum.size))
    for i in range(0, flat.size, chunk):
        tc = flat[i : i + chunk, None]
        amp = _jc_amplitude(params.g, delta_cfg[None, :], tc)
        total = np.sum(prob[None, :] * np.exp(-1j * lam_sum[None, :] * tc) * amp, axis=1)
        out[i : i + chunk] = np.abs(total)
    return out if arr.ndim else float(out[0])


def _gaussian(stats: EnsembleStats, lam: np.ndarray) -> np.ndarray:
    return np.exp(-((lam - stats.mu) ** 2) / (2.0 * stats.sigma2)) / (
        math.sqrt(2.0 * math.pi) * stats.sigma
    )


def coherence_continuum(
    params: JcParams, stats: EnsembleStats, t, rel_tol: float = 1e-8
):
    """Gaussian continuum-limit coherence, by adaptive panel quadrature.

    Integrates the Gaussian-weighted JC amplitude over inner products within
    eight standard deviations of the mean (tail mass < 1e-15); the panel count
    is doubled until two successive evaluations agree to rel_tol.
    """
    if stats.sigma2 <= 0:
        raise InvalidInputError("coherence_continuum requires sigma2 > 0")
    arr = _as_time(t)
    flat = np.atleast_1d(arr)
    lo, hi = stats.mu - 8.0 * stats.sigma, stats.mu + 8.0 * stats.sigma
    t_max = float(flat.max())
    # phase slope of exp(-i Lam t) exp(+/- i Omega(Lam) t / 2) is at most 2t
    edges = oscillation_edges(lo, hi, 2.0 * t_max)

    def evaluate(edges: np.ndarray) -> np.ndarray:
        nodes, weights = panel_nodes(edges, order=12)
        wts = weights * _gaussian(stats, nodes)
        delta_lam = params.delta + 2.0 * nodes
        out = np.empty(flat.shape)
        chunk = max(1, int(4e6 // nodes.size))
        for i in range(0, flat.size, chunk):
            tc = flat[i : i + chunk, None]
            f = np.exp(-1j * nodes[None, :] * tc) * _jc_amplitude(
                params.g, delta_lam[None, :], tc
            )
            out[i : i + chunk] = np.abs(f @ wts)
        return out

    prev = evaluate(edges)
    for _ in range(3):
        n = edges.size - 1
        edges = np.linspace(lo, hi, 2 * n + 1)
        cur = evaluate(edges)
        err = np.max(np.abs(cur - prev))
        if err <= rel_tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur if arr.ndim else float(cur[0])
        prev = cur
    raise NumericalError(
        f"continuum quadrature did not converge (last refinement change {err:.3g}); "
        "the integrand may be too oscillatory for the requested grid"
    )


def coherence_narrow(params: JcParams, stats: EnsembleStats, t):
    """Narrow-ensemble law: mean-shifted Rabi oscillation times a Gaussian envelope.

    C_GR evaluated with the detuning shifted by 2*mu, multiplied by
    exp(-sigma^2 t^2 / 2).  Intended for g >> sigma and t << g / sigma^2.
    """
    if stats.sigma2 > 0 and params.g < 3.0 * stats.sigma:
        warnings.warn(
            f"narrow-ensemble law outside regime: g/sigma = {params.g / stats.sigma:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    arr = _as_time(t)
    delta_mu = params.delta + 2.0 * stats.mu
    omega_mu = math.hypot(2.0 * params.g, delta_mu)
    if omega_mu == 0.0:
        raise DegenerateEigensystemError("mean-shifted doublet is degenerate")
    half = omega_mu * arr / 2.0
    rabi = np.sqrt(np.cos(half) ** 2 + (delta_mu / omega_mu) ** 2 * np.sin(half) ** 2)
    out = rabi * np.exp(-stats.sigma2 * arr**2 / 2.0)
    return out if arr.ndim else float(out)


def _exp_integrals(z: complex, n_max: int) -> list[complex]:
    """E_1..E_n(z) via the upward recurrence E_{n+1} = (e^-z - z E_n)/n."""
    out = [complex(exp1(z))]
    ez = np.exp(-z)
    for n in range(1, n_max):
        out.append((ez - z * out[-1]) / n)
    return out


# Phase (radians) at the excision edge: lam_cut = g^2 t / (2 * _CUT_PHASE).
_CUT_PHASE = 1000.0


def _excised_window(stats: EnsembleStats, phi: float, lam_cut: float) -> complex:
    """Contribution of |Lam| < lam_cut to the broad integral.

    The Gaussian weight is expanded to second order about zero (the window is
    thousands of times narrower than sigma) and the oscillatory moments
    int Lam^k exp(i phi / Lam) dLam are expressed through generalized
    exponential integrals at the fixed edge phase phi / lam_cut.
    """
    n0 = _gaussian(stats, np.array(0.0))
    c0 = float(n0)
    c1 = c0 * stats.mu / stats.sigma2
    c2 = c0 * (stats.mu**2 / stats.sigma2**2 - 1.0 / stats.sigma2) / 2.0
    z = -1j * phi / lam_cut
    e = _exp_integrals(z, 4)  # E_1 .. E_4
    m = [lam_cut ** (k + 1) * e[k + 1] for k in range(3)]  # int_0^cut Lam^k e^{i phi/Lam}
    big_m0 = 2.0 * m[0].real
    big_m1 = 2j * m[1].imag
    big_m2 = 2.0 * m[2].real
    return c0 * big_m0 + c1 * big_m1 + c2 * big_m2


def coherence_broad_integral(
    g: float, stats: EnsembleStats, t, rel_tol: float = 1e-6
):
    """Broad-ensemble integral |int N(mu, sigma^2) exp(i g^2 t / 2 Lam) dLam|.

    The essential singularity at Lam = 0 is excised over a window whose edge
    phase is fixed at 1000 rad; outside the window the integrand is resolved
    with phase-aligned panels, and the window's own contribution is added via
    an exponential-integral expansion.  Valid at all t, not only short times.
    """
    if stats.sigma2 <= 0:
        raise InvalidInputError("coherence_broad_integral requires sigma2 > 0")
    arr = _as_time(t)
    flat = np.atleast_1d(arr)
    lo, hi = stats.mu - 8.0 * stats.sigma, stats.mu + 8.0 * stats.sigma
    out = np.empty(flat.shape)
    for i, ti in enumerate(flat):
        phi = g**2 * ti / 2.0
        # |C - 1| <= int N min(2, phi/|Lam|) dLam = O(sqrt(phi/sigma)), so for
        # phases this small the integral is 1 to far below every tolerance;
        # evaluating it would also underflow the excision window
        if phi < 1e-18 * stats.sigma:
            out[i] = 1.0
            continue
        lam_cut = phi / _CUT_PHASE
        total = _outer_broad(stats, phi, lam_cut, lo, hi, order=16)
        check = _outer_broad(stats, phi, lam_cut, lo, hi, order=8)
        total += _excised_window(stats, phi, lam_cut)
        check += _excised_window(stats, phi, lam_cut)
        if abs(total - check) > rel_tol * max(abs(total), 0.05):
            raise NumericalError(
                f"broad-ensemble quadrature not converged at t = {ti:.6g} "
                f"(lam_cut = {lam_cut:.3g})"
            )
        out[i] = abs(total)
    return out if arr.ndim else float(out[0])


def _broad_edges(phi: float, lam_cut: float, a: float, b: float) -> np.ndarray:
    """Panel edges on [a, b] (0 < a < b) aligned with the phase phi / Lam."""
    k_hi = math.floor(phi / (math.pi * a))
    k_lo = math.ceil(phi / (math.pi * b))
    breaks = [phi / (k * math.pi) for k in range(max(k_lo, 1), k_hi + 1)]
    base = np.linspace(a, b, 17)
    # geometric edges resolve the 1/Lam phase curvature beyond the last
    # half-period breakpoint, where the phase is < pi but far from linear
    geo = np.geomspace(a, b, 129)
    edges = np.unique(np.concatenate([base, geo, np.asarray(breaks)]))
    return np.clip(edges, a, b)


def _outer_broad(
    stats: EnsembleStats, phi: float, lam_cut: float, lo: float, hi: float, order: int
) -> complex:
    total = 0.0 + 0.0j
    for a, b, sign in ((lam_cut, hi, +1.0), (lam_cut, -lo, -1.0)):
        if b <= a:
            continue
        edges = _broad_edges(phi, lam_cut, a, b)
        nodes, weights = panel_nodes(edges, order=order)
        lam = sign * nodes
        total += np.sum(weights * _gaussian(stats, lam) * np.exp(1j * phi / lam))
    return complex(total)


def coherence_broad_erfc(g: float, stats: EnsembleStats, t):
    """Short-time broad-ensemble law via complementary error functions.

    (1/2)[erfc(g^2 t / 2 sigma + mu / sqrt(2) sigma) + erfc(... - ...)];
    reduces to erfc(g^2 t / 2 sigma) for mu << sigma.  Fails for mu >> sigma
    (the fast-oscillating region leaves the distribution's support).
    """
    if stats.sigma2 <= 0:
        raise InvalidInputError("coherence_broad_erfc requires sigma2 > 0")
    if abs(stats.mu) > stats.sigma:
        warnings.warn(
            f"erfc law unreliable for |mu|/sigma = {abs(stats.mu) / stats.sigma:.3g} > 1",
            RegimeWarning,
            stacklevel=2,
        )
    arr = _as_time(t)
    x = g**2 * arr / (2.0 * stats.sigma)
    shift = stats.mu / (math.sqrt(2.0) * stats.sigma)
    out = 0.5 * (erfc(x + shift) + erfc(x - shift))
    return out if arr.ndim else float(out)


def coherence_broad_linear(g: float, stats: EnsembleStats, t):
    """Shortest-time broad-ensemble law: linear decay, floored at zero."""
    if stats.sigma2 <= 0:
        raise InvalidInputError("coherence_broad_linear requires sigma2 > 0")
    arr = _as_time(t)
    slope = g**2 * math.exp(-(stats.mu**2) / (2.0 * stats.sigma2)) / (
        math.sqrt(math.pi) * stats.sigma
    )
    out = np.maximum(0.0, 1.0 - slope * arr)
    return out if arr.ndim else float(out)


def _sample_epsilons(n: int, rng: np.random.Generator, eps_range) -> np.ndarray:
    lo, hi = eps_range
    if not (0 <= lo <= hi):
        raise InvalidInputError(f"invalid eps_range {eps_range!r}")
    return rng.uniform(lo, hi, n)


def sample_uniform_couplings(
    n: int,
    half_width: float,
    rng: np.random.Generator,
    eps_range=_DEFAULT_EPS_RANGE,
) -> list[TlfSpec]:
    """n couplings i.i.d. uniform on [-half_width, +half_width], seeded rng."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if half_width <= 0:
        raise InvalidInputError("half_width must be > 0")
    lams = rng.uniform(-half_width, half_width, n)
    eps = _sample_epsilons(n, rng, eps_range)
    return [TlfSpec(epsilon=e, lam=l) for e, l in zip(eps, lams)]


def sample_spatial_couplings(
    n: int,
    dim: int,
    box: tuple[float, float],
    scale: float,
    g: float,
    rng: np.random.Generator,
    eps_range=_DEFAULT_EPS_RANGE,
) -> list[TlfSpec]:
    """Couplings from uniform random positions: lam = +/- g * scale / r^dim.

    Positions are uniform in box^dim (units of the short-distance cutoff; the
    box must exclude the origin) and the sign of each coupling is a fair coin.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if dim not in (2, 3):
        raise InvalidInputError(f"dim must be 2 or 3, got {dim}")
    lo, hi = box
    if not (0 < lo < hi):
        raise InvalidInputError(f"box {box!r} must satisfy 0 < lo < hi")
    coords = rng.uniform(lo, hi, (n, dim))
    signs = rng.integers(0, 2, n) * 2 - 1
    r2 = np.sum(coords**2, axis=1)
    lams = signs * g * scale / r2 ** (dim / 2.0)
    eps = _sample_epsilons(n, rng, eps_range)
    return [TlfSpec(epsilon=e, lam=l) for e, l in zip(eps, lams)]
