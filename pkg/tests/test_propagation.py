import numpy as np
import pytest
from scipy.linalg import expm

from nonrecip.devices import (
    ChainSpec,
    LindbladChannel,
    ideal_model,
    invert_bessel_drive,
    single_excitation_model,
)
from nonrecip.invariant import (
    AuxiliaryTrajectory,
    synthesize_pulses,
    target_unitary,
)
from nonrecip.propagation import (
    PropagationConfig,
    StepTooLargeError,
    evolution_operator_oracle,
    global_phase_distance,
    propagate_lindblad,
    propagate_schrodinger,
)
from nonrecip.statespace import (
    DensityMatrix,
    Operator,
    PureState,
    make_basis,
)
from nonrecip.units import khz

TAU = 145.0
LAMBDA = 0.4974

B2 = make_basis(["0", "1"])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def ket(dim, idx, basis):
    amps = np.zeros(dim, dtype=complex)
    amps[idx] = 1.0
    return PureState(amps, basis)


@pytest.fixture(scope="module")
def pulses():
    return synthesize_pulses(AuxiliaryTrajectory(LAMBDA, TAU))


class TestSchrodinger:
    def test_zero_hamiltonian_is_identity(self):
        psi0 = PureState(np.array([0.6, 0.8j]), B2)
        traj = propagate_schrodinger(
            lambda t: np.zeros((2, 2)), psi0, 10.0, PropagationConfig(step=0.1)
        )
        assert np.allclose(traj.final, psi0.amplitudes, atol=1e-12)

    def test_rabi_oscillation_period(self):
        # H = (Omega/2) sigma_x flips |0> -> |1> at t = pi/Omega
        omega = 1.0
        h = 0.5 * omega * SIGMA_X
        traj = propagate_schrodinger(
            lambda t: h, ket(2, 0, B2), np.pi / omega,
            PropagationConfig(step=0.001),
        )
        assert abs(traj.final[0]) < 1e-9
        assert abs(traj.final[1]) == pytest.approx(1.0, abs=1e-9)

    def test_expm_method_matches_rk4(self):
        h = 0.5 * SIGMA_X

        def h_t(t):
            return np.cos(0.3 * t) * h

        psi0 = ket(2, 0, B2)
        a = propagate_schrodinger(h_t, psi0, 5.0, PropagationConfig(step=0.002))
        b = propagate_schrodinger(
            h_t, psi0, 5.0, PropagationConfig(step=0.002, method="expm")
        )
        assert np.allclose(a.final, b.final, atol=1e-9)

    def test_ideal_circulator_sends_a_to_minus_b(self, pulses):
        model = ideal_model(pulses)
        psi0 = ket(3, 0, model.basis)
        traj = propagate_schrodinger(
            model.h_of_t, psi0, TAU, PropagationConfig(step=model.default_step)
        )
        target = target_unitary(1.5 * np.pi).matrix[:, 0]  # -|B>
        assert np.linalg.norm(traj.final - target) < 1e-3

    def test_norm_drift_raises(self):
        h = 50.0 * SIGMA_X
        with pytest.raises(StepTooLargeError):
            propagate_schrodinger(
                lambda t: h, ket(2, 0, B2), 10.0, PropagationConfig(step=0.5)
            )

    def test_recording_stride(self):
        traj = propagate_schrodinger(
            lambda t: np.zeros((2, 2)), ket(2, 0, B2), 1.0,
            PropagationConfig(step=0.01, record_stride=10),
        )
        assert len(traj.times) == len(traj.states) == 11
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(1.0)


class TestLindblad:
    def test_no_channels_matches_schrodinger(self, pulses):
        model = ideal_model(pulses)
        psi0 = ket(3, 0, model.basis)
        cfg = PropagationConfig(step=model.default_step)
        pure = propagate_schrodinger(model.h_of_t, psi0, TAU, cfg)
        rho0 = DensityMatrix(np.outer(psi0.amplitudes,
                                      psi0.amplitudes.conj()))
        mixed = propagate_lindblad(model.h_of_t, [], rho0, TAU, cfg)
        expected = np.outer(pure.final, pure.final.conj())
        assert np.max(np.abs(mixed.final - expected)) < 1e-8

    def test_single_qubit_decay(self):
        # O = |0><1| + |0><0| - |1><1| drains the excited population
        op = Operator(np.array([[1.0, 1.0], [0.0, -1.0]], dtype=complex), B2)
        chan = LindbladChannel(operator=op, rate=khz(50.0))
        rho0 = DensityMatrix(np.diag([0.0, 1.0]).astype(complex))
        traj = propagate_lindblad(
            lambda t: np.zeros((2, 2)), [chan], rho0, 500.0,
            PropagationConfig(step=0.05, record_stride=200),
        )
        p1 = np.array([s[1, 1].real for s in traj.states])
        assert np.all(np.diff(p1) < 0)
        assert p1[-1] < 0.9
        for s in traj.states:
            assert np.trace(s).real == pytest.approx(1.0, abs=1e-9)
            assert np.max(np.abs(s - s.conj().T)) < 1e-9
            assert np.linalg.eigvalsh(s).min() > -1e-9

    def test_vanishing_rates_recover_closed_system(self, pulses):
        chain = ChainSpec.reference_defaults()
        model = single_excitation_model(chain, invert_bessel_drive(pulses, chain))
        weak = [
            LindbladChannel(operator=c.operator, rate=1e-12)
            for c in model.channels
        ]
        psi0 = ket(model.dim, model.logical_index("100"), model.basis)
        rho0 = DensityMatrix(np.outer(psi0.amplitudes,
                                      psi0.amplitudes.conj()))
        cfg = PropagationConfig(step=model.default_step)
        closed = propagate_schrodinger(model.h_of_t, psi0, TAU, cfg)
        damped = propagate_lindblad(model.h_of_t, weak, rho0, TAU, cfg)
        expected = np.outer(closed.final, closed.final.conj())
        assert np.max(np.abs(damped.final - expected)) < 1e-8

    def test_device_run_preserves_invariants(self, pulses):
        chain = ChainSpec.reference_defaults()
        model = single_excitation_model(chain, invert_bessel_drive(pulses, chain))
        psi0 = ket(model.dim, model.logical_index("100"), model.basis)
        rho0 = DensityMatrix(np.outer(psi0.amplitudes,
                                      psi0.amplitudes.conj()))
        traj = propagate_lindblad(
            model.h_of_t, model.channels, rho0, 10.0,
            PropagationConfig(step=model.default_step, record_stride=500),
        )
        for s in traj.states:
            assert np.trace(s).real == pytest.approx(1.0, abs=1e-9)
            assert np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() > -1e-8


class TestOracle:
    def test_zero_hamiltonian_gives_identity(self):
        u = evolution_operator_oracle(
            lambda t: np.zeros((3, 3)), 1.0, PropagationConfig(step=0.01)
        )
        assert np.allclose(u.matrix, np.eye(3), atol=1e-12)

    def test_constant_hamiltonian_matches_expm(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = 0.5 * (a + a.conj().T)
        u = evolution_operator_oracle(
            lambda t: h, 2.0, PropagationConfig(step=0.001)
        )
        assert np.allclose(u.matrix, expm(-2.0j * h), atol=1e-9)

    def test_columns_match_state_propagation(self, pulses):
        model = ideal_model(pulses)
        u = evolution_operator_oracle(
            model.h_of_t, TAU, PropagationConfig(step=0.01), basis=model.basis
        )
        for col in range(3):
            traj = propagate_schrodinger(
                model.h_of_t, ket(3, col, model.basis), TAU,
                PropagationConfig(step=0.01),
            )
            assert np.linalg.norm(u.matrix[:, col] - traj.final) < 1e-7

    def test_unitarity(self, pulses):
        model = ideal_model(pulses)
        u = evolution_operator_oracle(
            model.h_of_t, TAU, PropagationConfig(step=0.01)
        ).matrix
        assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < 1e-10


class TestConvergence:
    def test_rk4_step_halving_is_fourth_order(self):
        h = 0.5 * SIGMA_X

        def h_t(t):
            return np.cos(0.7 * t) * h

        psi0 = ket(2, 0, B2)
        ref = propagate_schrodinger(
            h_t, psi0, 4.0, PropagationConfig(step=0.0005)
        ).final
        errs = []
        for step in (0.08, 0.04):
            out = propagate_schrodinger(
                h_t, psi0, 4.0, PropagationConfig(step=step)
            ).final
            errs.append(np.linalg.norm(out - ref))
        ratio = errs[0] / errs[1]
        assert 12.0 < ratio < 20.0


class TestGlobalPhaseDistance:
    def test_phase_rotation_is_ignored(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        q, _ = np.linalg.qr(a)
        dist, phi = global_phase_distance(q, np.exp(-0.7j) * q)
        assert dist < 1e-12
        assert phi == pytest.approx(0.7, abs=1e-12)

    def test_distinct_unitaries_have_positive_distance(self):
        u1 = np.eye(2, dtype=complex)
        u2 = SIGMA_X.astype(complex)
        dist, _ = global_phase_distance(u1, u2)
        assert dist > 1.0
