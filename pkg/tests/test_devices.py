import math

import numpy as np
import pytest

from nonrecip.devices import (
    BESSEL_CLAMP_RTOL,
    ChainSpec,
    DriveWaveform,
    J1_PEAK,
    J1_PEAK_X,
    TransmonSpec,
    UnattainableDriveError,
    bessel_j1,
    chain_basis,
    embed_single_excitation,
    full_chain_hamiltonian,
    ideal_hamiltonian,
    invert_bessel_drive,
    invert_bessel_j1,
    lindblad_channels,
    single_excitation_hamiltonian,
    single_excitation_indices,
)
from nonrecip.invariant import AuxiliaryTrajectory, synthesize_pulses
from nonrecip.units import khz, mhz

TAU = 145.0


@pytest.fixture(scope="module")
def pulses():
    return synthesize_pulses(AuxiliaryTrajectory(0.4974, TAU))


@pytest.fixture(scope="module")
def chain():
    return ChainSpec.reference_defaults()


@pytest.fixture(scope="module")
def drives(pulses, chain):
    return invert_bessel_drive(pulses, chain)


def j1_series(x: float) -> float:
    """Ascending power series of J1, summed to machine precision."""
    term = x / 2.0
    total = term
    k = 1
    while abs(term) > 1e-18 * max(1.0, abs(total)):
        term *= -(x * x / 4.0) / (k * (k + 1))
        total += term
        k += 1
    return total


class TestBesselJ1:
    def test_against_series_oracle(self):
        for x in np.linspace(0.0, 3.5, 71):
            assert bessel_j1(x) == pytest.approx(j1_series(x), abs=1e-14)

    def test_peak_value(self):
        assert bessel_j1(1.8412) == pytest.approx(0.581865, abs=1e-6)
        assert J1_PEAK == pytest.approx(j1_series(J1_PEAK_X), abs=1e-15)

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(23)
        for eta in rng.uniform(0.0, 1.8, 100):
            assert invert_bessel_j1(bessel_j1(eta)) == pytest.approx(eta, abs=1e-9)

    def test_monotone_on_principal_branch(self):
        etas = np.linspace(0.0, J1_PEAK_X, 200)
        vals = bessel_j1(etas)
        assert np.all(np.diff(vals) > 0)


class TestInvertBesselDrive:
    def test_zero_pulse_gives_zero_envelope(self, chain):
        from nonrecip.invariant import PulsePair

        times = np.linspace(0.0, TAU, 11)
        quiet = PulsePair(times, np.zeros(11), np.zeros(11))
        d = invert_bessel_drive(quiet, chain)
        assert np.all(d.eta_a == 0.0) and np.all(d.eta_b == 0.0)

    def test_inversion_residual(self, pulses, chain, drives):
        # clamped samples at the grazing peak are allowed the clamp slack
        recon_a = 2 * chain.g_a * bessel_j1(drives.eta_a)
        recon_b = 2 * chain.g_b * bessel_j1(drives.eta_b)
        scale = 2 * chain.g_a * J1_PEAK
        assert np.max(np.abs(recon_a - np.abs(pulses.g_a))) < BESSEL_CLAMP_RTOL * scale
        assert np.max(np.abs(recon_b - np.abs(pulses.g_b))) < BESSEL_CLAMP_RTOL * scale
        interior = (drives.eta_a > 0) & (drives.eta_a < J1_PEAK_X - 1e-9)
        assert np.max(np.abs(recon_a - np.abs(pulses.g_a))[interior]) < 1e-10

    def test_unattainable_drive(self, chain):
        big = synthesize_pulses(AuxiliaryTrajectory(2.5, TAU))
        with pytest.raises(UnattainableDriveError) as err:
            invert_bessel_drive(big, chain)
        assert 0.0 < err.value.worst_time < TAU
        assert err.value.worst_ratio > J1_PEAK

    def test_envelope_invariants(self, drives):
        for eta in (drives.eta_a, drives.eta_b):
            assert eta[0] == 0.0 and eta[-1] == 0.0
            assert eta.min() >= 0.0 and eta.max() <= J1_PEAK_X + 1e-12


class TestIdealHamiltonian:
    def test_zero_at_endpoints(self, pulses):
        assert np.allclose(ideal_hamiltonian(pulses, 0.0).matrix, 0.0, atol=1e-12)
        assert np.allclose(ideal_hamiltonian(pulses, TAU).matrix, 0.0, atol=1e-12)

    def test_structure(self, pulses):
        for t in np.linspace(1.0, TAU - 1.0, 9):
            h = ideal_hamiltonian(pulses, t).matrix
            assert np.max(np.abs(h - h.conj().T)) < 1e-12
            assert np.all(np.diag(h) == 0)
            assert h[0, 2] == 0 and h[2, 0] == 0

    def test_midpoint_magnitudes(self, pulses):
        h = ideal_hamiltonian(pulses, TAU / 2).matrix
        assert abs(h[0, 1]) == pytest.approx(pulses.g_a_at(TAU / 2) / 2, abs=1e-12)
        assert abs(h[2, 1]) == pytest.approx(pulses.g_b_at(TAU / 2) / 2, abs=1e-12)

    def test_out_of_range(self, pulses):
        with pytest.raises(ValueError):
            ideal_hamiltonian(pulses, TAU + 1.0)


class TestSingleExcitationHamiltonian:
    def test_undriven_at_zero(self, chain):
        quiet = DriveWaveform.zero(TAU, chain.nu_a, chain.nu_b)
        h = single_excitation_hamiltonian(chain, quiet, 0.0).matrix
        g = mhz(10.0)
        assert h[0, 1] == pytest.approx(g, abs=1e-15)
        assert h[2, 1] == pytest.approx(g, abs=1e-15)
        assert g == pytest.approx(0.06283, abs=5e-6)

    def test_phase_preserves_magnitude(self, chain, drives):
        for t in np.linspace(0.0, TAU, 13):
            h = single_excitation_hamiltonian(chain, drives, t).matrix
            assert abs(h[0, 1]) == pytest.approx(chain.g_a, rel=1e-12)
            assert np.max(np.abs(h - h.conj().T)) < 1e-12

    def test_effective_coupling_first_harmonic(self, chain):
        # time average of exp(i(Delta t - F)) over one drive period against
        # the first Jacobi-Anger coefficient, at constant envelope
        eta = 1.1
        period = 2 * np.pi / chain.nu_a
        ts = np.linspace(0.0, period, 20001)
        avg = np.mean(np.exp(1j * (chain.delta_a * ts - eta * np.sin(chain.nu_a * ts))))
        assert abs(avg) == pytest.approx(bessel_j1(eta), rel=0.02)


class TestFullChainHamiltonian:
    def test_single_excitation_projection(self, chain):
        quiet = DriveWaveform.zero(TAU, chain.nu_a, chain.nu_b)
        h_full = full_chain_hamiltonian(chain, quiet, 0.0).matrix
        h_sub = single_excitation_hamiltonian(chain, quiet, 0.0).matrix
        idx = list(single_excitation_indices(2))
        assert np.allclose(h_full[np.ix_(idx, idx)], h_sub, atol=1e-12)

    def test_counter_rotating_magnitude(self, chain, drives):
        # <110|H|000> comes from the excitation-non-conserving term
        for t in np.linspace(0.0, TAU, 7):
            h = full_chain_hamiltonian(chain, drives, t).matrix
            assert abs(h[6, 0]) == pytest.approx(chain.g_a, rel=1e-12)

    def test_does_not_conserve_excitation_number(self, chain, drives):
        n_op = np.zeros((8, 8))
        for i in range(8):
            n_op[i, i] = bin(i).count("1")
        h = full_chain_hamiltonian(chain, drives, 10.0).matrix
        assert np.linalg.norm(h @ n_op - n_op @ h) > 1e-3

    def test_excitation_conserved_in_reduced_model(self, chain, drives):
        idx = list(single_excitation_indices(2))
        n_op = np.eye(3)  # all single-excitation states have N = 1
        for t in np.linspace(0.0, TAU, 7):
            h = single_excitation_hamiltonian(chain, drives, t).matrix
            assert np.linalg.norm(h @ n_op - n_op @ h) == 0.0

    def test_three_level_ladder_enhancement(self, drives):
        chain3 = ChainSpec.reference_defaults(d=3)
        drives3 = DriveWaveform(drives.times, drives.eta_a, drives.eta_b,
                                drives.nu_a, drives.nu_b)
        h = full_chain_hamiltonian(chain3, drives3, 3.0).matrix
        basis = [b.name for b in chain_basis(3)]
        # A-transmon 1<->2 ladder with M 0<->1: |210> vs |100> coupling
        hi = abs(h[basis.index("200"), basis.index("110")])
        lo = abs(h[basis.index("100"), basis.index("010")])
        assert hi == pytest.approx(math.sqrt(2) * lo, rel=1e-12)

    def test_three_level_anharmonicity_on_diagonal(self):
        chain3 = ChainSpec.reference_defaults(d=3)
        quiet = DriveWaveform.zero(TAU, chain3.nu_a, chain3.nu_b)
        h = full_chain_hamiltonian(chain3, quiet, 0.0).matrix
        basis = [b.name for b in chain_basis(3)]
        assert h[basis.index("200"), basis.index("200")] == pytest.approx(
            -mhz(220.0), abs=1e-15
        )
        assert h[basis.index("020"), basis.index("020")] == pytest.approx(
            -mhz(210.0), abs=1e-15
        )

    def test_hermitian_everywhere(self, chain, drives):
        rng = np.random.default_rng(31)
        for t in rng.uniform(0.0, TAU, 25):
            h = full_chain_hamiltonian(chain, drives, t).matrix
            assert np.max(np.abs(h - h.conj().T)) < 1e-12


class TestLindbladChannels:
    def test_reference_rates(self, chain):
        channels = lindblad_channels(chain)
        assert [c.rate for c in channels] == [khz(3.0), khz(4.0), khz(5.0)]
        assert channels[0].rate == pytest.approx(2 * np.pi * 3e-6)

    def test_collapse_action_on_excited(self, chain):
        channels = lindblad_channels(chain)
        # A-transmon channel applied to |100>: |1>_A -> |0>_A - |1>_A
        idx100, idx010, _ = single_excitation_indices(2)
        v = np.zeros(8, dtype=complex)
        v[idx100] = 1.0
        out = channels[0].operator.matrix @ v
        expected = np.zeros(8, dtype=complex)
        expected[0] = 1.0
        expected[idx100] = -1.0
        assert np.allclose(out, expected, atol=1e-15)

    def test_acts_on_one_factor(self, chain):
        site = np.array([[1, 1], [0, -1]], dtype=complex)
        for k, channel in enumerate(lindblad_channels(chain)):
            mats = [np.eye(2, dtype=complex)] * 3
            mats[k] = site
            expected = np.kron(np.kron(mats[0], mats[1]), mats[2])
            assert np.array_equal(channel.operator.matrix, expected)

    def test_three_level_channel_annihilates_top_level(self):
        chain3 = ChainSpec.reference_defaults(d=3)
        channels = lindblad_channels(chain3)
        m = channels[2].operator.matrix  # B transmon
        basis = [b.name for b in chain_basis(3)]
        v = np.zeros(27, dtype=complex)
        v[basis.index("002")] = 1.0
        assert np.allclose(m @ v, 0.0, atol=1e-15)


class TestEmbedding:
    def test_embed_round_trip(self):
        rng = np.random.default_rng(9)
        h3 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h3 = h3 + h3.conj().T
        big = embed_single_excitation(h3, 2)
        idx = list(single_excitation_indices(2))
        assert np.array_equal(big[np.ix_(idx, idx)], h3)
        mask = np.ones(8, dtype=bool)
        mask[idx] = False
        assert np.all(big[mask] == 0) and np.all(big[:, mask] == 0)

    def test_chain_spec_validation(self):
        t = TransmonSpec("A", 1.0, 0.1, 0.0)
        with pytest.raises(ValueError):
            ChainSpec((t, t, t), 0.1, 0.1, 0.3, 0.3, 2)
        with pytest.raises(ValueError):
            ChainSpec.reference_defaults(d=4)
