"""Brute-force dense-matrix reference implementation.

Builds the full Hamiltonian on a truncated Hilbert space and evolves density
matrices either unitarily (by eigendecomposition, exact at any time) or under
the local Lindblad equation with fluctuator jump operators.  Every closed-form
result in the package is tested against this module.

Tensor order
------------
The basis is oscillator (slowest index) x TLS x TLF_1 x ... x TLF_N.  Each
two-level factor is ordered excited state first, so sigma_z = diag(+1, -1)
with basis (|e>, |g>) and tau_z = diag(+1, -1) with basis (|+>, |->).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh

from .errors import (
    CapacityError,
    InvalidInputError,
    NumericalError,
    StiffnessError,
    UndefinedCoherenceError,
)
from .model import CoherenceTrace, JcParams, ThermalContext, thermal_population
from .single_fluctuator import TlfSpec

__all__ = [
    "HilbertSpec",
    "DenseState",
    "build_hamiltonian",
    "initial_state",
    "evolve_unitary",
    "evolve_lindblad",
    "coherence_from_state",
    "annihilation_full",
    "expect_a",
]

_SIGMA_Z = np.diag([1.0, -1.0])
_SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |e><g|
_SIGMA_MINUS = _SIGMA_PLUS.T
_I2 = np.eye(2)


@dataclass(frozen=True)
class HilbertSpec:
    """Truncation of the oscillator Fock space and number of fluctuators."""

    n_osc: int
    n_tlf: int
    cap: int = 4096

    def __post_init__(self) -> None:
        if self.n_osc < 2:
            raise InvalidInputError("n_osc must be >= 2 (initial state spans |0>, |1>)")
        if self.n_tlf < 0:
            raise InvalidInputError("n_tlf must be >= 0")

    @property
    def dim(self) -> int:
        return self.n_osc * 2 * 2**self.n_tlf

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.n_osc, 2) + (2,) * self.n_tlf

    def check_cap(self) -> None:
        if self.dim > self.cap:
            raise CapacityError(
                f"Hilbert dimension {self.dim} exceeds cap {self.cap}; "
                "use the analytic ensemble sums for larger systems"
            )


@dataclass(frozen=True)
class DenseState:
    """Density operator with its tensor factorization.

    ``dims`` is (n_osc, 2, 2, ..., 2) in the documented tensor order.
    """

    rho: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        d = int(np.prod(self.dims))
        if self.rho.shape != (d, d):
            raise InvalidInputError(f"rho shape {self.rho.shape} != ({d}, {d})")

    def validate(self, herm_tol=1e-12, trace_tol=1e-10, psd_tol=1e-10) -> None:
        if np.max(np.abs(self.rho - self.rho.conj().T)) >= herm_tol:
            raise InvalidInputError("state is not Hermitian within tolerance")
        if abs(np.trace(self.rho).real - 1.0) >= trace_tol:
            raise InvalidInputError("state trace differs from 1 beyond tolerance")
        evals = np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2.0)
        if evals.min() < -psd_tol:
            raise InvalidInputError("state has a negative eigenvalue beyond tolerance")


def _kron_chain(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _site_operator(spec: HilbertSpec, site: int, op: np.ndarray) -> np.ndarray:
    """Embed a single-factor operator; site 0 is the oscillator, 1 the TLS."""
    ops: list[np.ndarray] = []
    for k in range(2 + spec.n_tlf):
        d = spec.dims[k]
        ops.append(op if k == site else np.eye(d))
    return _kron_chain(ops)


def annihilation(n_osc: int) -> np.ndarray:
    a = np.zeros((n_osc, n_osc))
    for n in range(1, n_osc):
        a[n - 1, n] = math.sqrt(n)
    return a


def annihilation_full(spec: HilbertSpec) -> np.ndarray:
    """Oscillator lowering operator embedded in the full space."""
    return _site_operator(spec, 0, annihilation(spec.n_osc))


def build_hamiltonian(
    params: JcParams, tlfs: Sequence[TlfSpec], spec: HilbertSpec
) -> np.ndarray:
    """Full Hamiltonian: oscillator + TLS + exchange + fluctuator terms."""
    if len(tlfs) != spec.n_tlf:
        raise InvalidInputError(f"expected {spec.n_tlf} fluctuators, got {len(tlfs)}")
    spec.check_cap()
    a = annihilation(spec.n_osc)
    h = params.omega0 * _site_operator(spec, 0, a.T @ a)
    h = h + (params.epsilon_t / 2.0) * _site_operator(spec, 1, _SIGMA_Z)
    osc_a = _site_operator(spec, 0, a)
    sig_p = _site_operator(spec, 1, _SIGMA_PLUS)
    h = h + params.g * (osc_a @ sig_p + osc_a.conj().T @ sig_p.conj().T)
    sig_z = _site_operator(spec, 1, _SIGMA_Z)
    for j, tlf in enumerate(tlfs):
        tau_z = _site_operator(spec, 2 + j, _SIGMA_Z)
        h = h + (tlf.epsilon / 2.0) * tau_z + tlf.lam * (sig_z @ tau_z)
    return h


def initial_state(
    c0: complex,
    c1: complex,
    tlfs: Sequence[TlfSpec],
    ctx: ThermalContext,
    spec: HilbertSpec,
) -> DenseState:
    """(c0|0> + c1|1>) oscillator, TLS ground, fluctuators thermal.

    The fluctuator factors are diag(p_plus, p_minus) in the excited-first
    basis order.
    """
    if len(tlfs) != spec.n_tlf:
        raise InvalidInputError(f"expected {spec.n_tlf} fluctuators, got {len(tlfs)}")
    spec.check_cap()
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1.0) >= 1e-12:
        raise InvalidInputError(f"|c0|^2 + |c1|^2 = {norm} is not 1 within 1e-12")
    psi_osc = np.zeros(spec.n_osc, dtype=complex)
    psi_osc[0] = c0
    psi_osc[1] = c1
    psi = np.kron(psi_osc, np.array([0.0, 1.0], dtype=complex))  # TLS ground
    rho = np.outer(psi, psi.conj())
    for tlf in tlfs:
        p_plus, p_minus = thermal_population(tlf.epsilon, ctx)
        rho = np.kron(rho, np.diag([p_plus, p_minus]).astype(complex))
    return DenseState(rho=rho, dims=spec.dims)


def evolve_unitary(
    h: np.ndarray, rho0: DenseState, t_grid: Sequence[float]
) -> list[DenseState]:
    """Propagate rho(t) = U rho(0) U^dag with U from the eigendecomposition of H."""
    t_arr = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_arr) < 0) or np.any(t_arr < 0):
        raise InvalidInputError("t_grid must be sorted and nonnegative")
    try:
        evals, vecs = eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalError(
            f"eigendecomposition failed (cond ~ {np.linalg.cond(h):.3g}): {exc}"
        ) from exc
    rho_eig = vecs.conj().T @ rho0.rho @ vecs
    out = []
    for t in t_arr:
        phases = np.exp(-1j * evals * t)
        rho_t = vecs @ (np.outer(phases, phases.conj()) * rho_eig) @ vecs.conj().T
        out.append(DenseState(rho=(rho_t + rho_t.conj().T) / 2.0, dims=rho0.dims))
    return out


def _lindblad_superoperator(h: np.ndarray, jumps: Sequence[np.ndarray]) -> np.ndarray:
    """Column-stacking superoperator for drho/dt = -i[H,rho] + sum_k D[L_k]rho."""
    d = h.shape[0]
    eye = np.eye(d)
    sup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for L in jumps:
        LdL = L.conj().T @ L
        sup = sup + (
            np.kron(L.conj(), L)
            - 0.5 * np.kron(eye, LdL)
            - 0.5 * np.kron(LdL.T, eye)
        )
    return sup


def evolve_lindblad(
    params: JcParams,
    tlf: TlfSpec,
    gamma: float,
    rho0: DenseState,
    t_grid: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-11,
) -> list[DenseState]:
    """Integrate the local Lindblad equation for a single dissipative fluctuator.

    Equal upward and downward fluctuator rates gamma (scale-separated regime).
    The stiff fast phases at the bare frequencies are removed by integrating in
    the frame of the free Hamiltonian (which leaves the dissipator invariant)
    and rotating back at the grid points, so the adaptive steps are set by the
    slow scales g, lam, delta and gamma.
    """
    if gamma < 0:
        raise InvalidInputError(f"gamma must be >= 0, got {gamma}")
    if len(rho0.dims) != 3:
        raise InvalidInputError("evolve_lindblad supports exactly one fluctuator")
    t_arr = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_arr) < 0) or np.any(t_arr < 0):
        raise InvalidInputError("t_grid must be sorted and nonnegative")
    spec = HilbertSpec(n_osc=rho0.dims[0], n_tlf=1)
    h = build_hamiltonian(params, [tlf], spec)

    # Free (diagonal) part generating the fast phases; the exchange term and
    # the sigma_z tau_z coupling commute with its flow, so H - H0 is static in
    # the rotating frame.
    a = annihilation(spec.n_osc)
    h0 = params.omega0 * (
        _site_operator(spec, 0, a.T @ a) + 0.5 * _site_operator(spec, 1, _SIGMA_Z)
    ) + (tlf.epsilon / 2.0) * _site_operator(spec, 2, _SIGMA_Z)
    h_rot = h - h0
    e0 = np.diag(h0).real

    sqrt_g = math.sqrt(gamma)
    tau_m = _site_operator(spec, 2, _SIGMA_MINUS)
    tau_p = _site_operator(spec, 2, _SIGMA_PLUS)
    sup = _lindblad_superoperator(h_rot, [sqrt_g * tau_m, sqrt_g * tau_p])

    y0 = rho0.rho.flatten(order="F")
    sol = solve_ivp(
        lambda _t, y: sup @ y,
        (0.0, float(t_arr[-1]) if t_arr[-1] > 0 else 1e-12),
        y0,
        method="DOP853",
        t_eval=t_arr if t_arr[-1] > 0 else None,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StiffnessError(
            f"Lindblad integration failed at t ~ {sol.t[-1]:.6g}: {sol.message}"
        )
    d = spec.dim
    out = []
    for k, t in enumerate(t_arr):
        if t_arr[-1] > 0:
            rho_rot = sol.y[:, k].reshape((d, d), order="F")
        else:
            rho_rot = rho0.rho
        phases = np.exp(-1j * e0 * t)
        rho_lab = (phases[:, None] * rho_rot) * phases.conj()[None, :]
        out.append(DenseState(rho=(rho_lab + rho_lab.conj().T) / 2.0, dims=rho0.dims))
    return out


def expect_a(state: DenseState) -> complex:
    """<a> = tr(a rho) with the truncated lowering operator."""
    spec = HilbertSpec(n_osc=state.dims[0], n_tlf=len(state.dims) - 2)
    return complex(np.trace(annihilation_full(spec) @ state.rho))


def coherence_from_state(
    states: Sequence[DenseState], a0_expectation: complex, t_grid: Sequence[float]
) -> CoherenceTrace:
    """Normalized coherence |tr(a rho(t))| / |<a(0)>| along a trajectory."""
    if a0_expectation == 0:
        raise UndefinedCoherenceError("initial expectation <a(0)> vanishes")
    spec = HilbertSpec(n_osc=states[0].dims[0], n_tlf=len(states[0].dims) - 2)
    a_full = annihilation_full(spec)
    values = np.array([abs(np.trace(a_full @ s.rho)) for s in states])
    return CoherenceTrace(
        t=np.asarray(t_grid, dtype=float),
        values=values / abs(a0_expectation),
        label="oracle",
    )
