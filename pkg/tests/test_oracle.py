"""Dense-matrix reference evolution: Hamiltonians, states and propagators."""
import math

import numpy as np
import pytest

import tlfsim as ts
from tlfsim.errors import CapacityError, InvalidInputError, UndefinedCoherenceError

from conftest import oracle_lindblad_trace, oracle_single_trace

SQ2 = 1 / math.sqrt(2)


class TestHilbertSpace:
    def test_dims(self):
        spec = ts.HilbertSpec(n_osc=3, n_tlf=2)
        assert spec.dim == 3 * 2 * 2 * 2
        assert spec.dims == (3, 2, 2, 2)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            ts.HilbertSpec(n_osc=2, n_tlf=12).check_cap()

    def test_annihilation(self):
        a = ts.annihilation(4)
        n_op = a.conj().T @ a
        assert np.allclose(np.diag(n_op), [0, 1, 2, 3])


class TestInitialState:
    def test_density_matrix_valid(self, ss):
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        rho = ts.initial_state(SQ2, SQ2, [ts.TlfSpec(0.1, 0.01)], ss, spec)
        rho.validate()
        assert np.trace(rho.rho) == pytest.approx(1.0, abs=1e-12)

    def test_thermal_weights(self):
        ctx = ts.ThermalContext.finite_temperature(0.05)
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        rho = ts.initial_state(SQ2, SQ2, [ts.TlfSpec(0.1, 0.01)], ctx, spec)
        p_plus, p_minus = ts.thermal_population(0.1, ctx)
        # trace over oscillator and TLS leaves the fluctuator populations
        r = rho.rho.reshape(2, 2, 2, 2, 2, 2)
        tlf_pops = np.einsum("abiabj->ij", r)
        assert tlf_pops[0, 0].real == pytest.approx(p_plus, abs=1e-12)
        assert tlf_pops[1, 1].real == pytest.approx(p_minus, abs=1e-12)

    def test_unnormalized_amplitudes_rejected(self, ss):
        spec = ts.HilbertSpec(n_osc=2, n_tlf=0)
        with pytest.raises(InvalidInputError):
            ts.initial_state(1.0, 1.0, [], ss, spec)


class TestUnitary:
    def test_hermitian_hamiltonian(self, ss):
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        h = ts.build_hamiltonian(ts.JcParams(1.0, 1.02, 0.1),
                                 [ts.TlfSpec(0.1, 0.01)], spec)
        assert np.allclose(h, h.conj().T)

    def test_trace_preserved(self, ss):
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        params = ts.JcParams(1.0, 1.02, 0.1)
        tlf = ts.TlfSpec(0.1, 0.02)
        rho0 = ts.initial_state(SQ2, SQ2, [tlf], ss, spec)
        h = ts.build_hamiltonian(params, [tlf], spec)
        t = np.linspace(0.0, 100.0, 51)
        for state in ts.evolve_unitary(h, rho0, t):
            assert abs(np.trace(state.rho) - 1.0) < 1e-10

    def test_matches_exact_single(self, ss):
        params = ts.JcParams(1.0, 1.03, 0.08)
        tlf = ts.TlfSpec(0.1, 0.02)
        t = np.linspace(0.0, 150.0, 301)
        trace = oracle_single_trace(params, tlf, ss, t)
        exact = ts.coherence_exact_single(params, tlf, ss, t)
        assert np.abs(trace.values - exact).max() < 1e-10


class TestLindblad:
    def test_zero_rate_matches_unitary(self, ss):
        params = ts.JcParams(1.0, 1.0, 0.1)
        tlf = ts.TlfSpec(0.1, 0.01)
        t = np.linspace(0.0, 80.0, 101)
        closed = oracle_single_trace(params, tlf, ss, t)
        open_ = oracle_lindblad_trace(params, tlf, 0.0, ss, t)
        assert np.abs(closed.values - open_.values).max() < 1e-8

    def test_trace_and_hermiticity_preserved(self, ss):
        params = ts.JcParams(1.0, 1.0, 0.1)
        tlf = ts.TlfSpec(0.1, 0.01)
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        rho0 = ts.initial_state(SQ2, SQ2, [tlf], ss, spec)
        t = np.linspace(0.0, 200.0, 41)
        for state in ts.evolve_lindblad(params, tlf, 0.02, rho0, t):
            assert abs(np.trace(state.rho) - 1.0) < 1e-8
            assert np.allclose(state.rho, state.rho.conj().T)

    def test_coherence_decays(self, ss):
        params = ts.JcParams(1.0, 1.0, 0.1)
        tlf = ts.TlfSpec(0.1, 0.01)
        t = np.array([0.0, 2000.0])
        trace = oracle_lindblad_trace(params, tlf, 0.01, ss, t)
        assert trace.values[0] == pytest.approx(1.0, abs=1e-9)
        assert trace.values[-1] < 0.05


class TestCoherenceFromState:
    def test_zero_initial_expectation_rejected(self, ss):
        spec = ts.HilbertSpec(n_osc=2, n_tlf=0)
        rho = ts.initial_state(1.0, 0.0, [], ss, spec)
        with pytest.raises(UndefinedCoherenceError):
            ts.coherence_from_state([rho], 0.0, [0.0])

    def test_normalization(self, ss):
        # unequal superposition still normalizes to C(0) = 1
        params = ts.JcParams(1.0, 1.0, 0.1)
        tlf = ts.TlfSpec(0.1, 0.01)
        spec = ts.HilbertSpec(n_osc=2, n_tlf=1)
        rho0 = ts.initial_state(math.sqrt(0.2), math.sqrt(0.8), [tlf], ss, spec)
        h = ts.build_hamiltonian(params, [tlf], spec)
        states = ts.evolve_unitary(h, rho0, np.array([0.0, 5.0]))
        trace = ts.coherence_from_state(states, ts.expect_a(states[0]), [0.0, 5.0])
        assert trace.values[0] == pytest.approx(1.0, abs=1e-12)
