"""Concrete Hamiltonians of the transmon-chain circulator.

Three models share the same designed pulses:

* the ideal three-level model, driven directly by the effective
  couplings;
* the single-excitation model, where static couplings are modulated by
  frequency-drive phase factors and the effective couplings emerge from
  the first Jacobi-Anger harmonic;
* the full coupled-chain model, including counter-rotating terms and,
  optionally, the second excited level of each transmon.

Drive envelopes are obtained by inverting g'(t) = 2 g J1(eta(t)) on the
principal branch of the Bessel function J1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .invariant import PulsePair
from .statespace import Operator, make_basis
from .units import khz, mhz, ghz

# location and value of the first maximum of J1
J1_PEAK_X = 1.8411837813406593
J1_PEAK = 0.5818652242815964

# relative slack above J1_PEAK tolerated before a drive is declared
# unattainable; requested ratios inside the slack clamp to the peak
BESSEL_CLAMP_RTOL = 5e-4


class UnattainableDriveError(ValueError):
    """Requested effective coupling exceeds the J1 maximum."""

    def __init__(self, message: str, worst_time: float, worst_ratio: float):
        super().__init__(message)
        self.worst_time = worst_time
        self.worst_ratio = worst_ratio


@dataclass(frozen=True)
class TransmonSpec:
    """Single-transmon parameters, angular frequencies in rad/ns."""

    label: str
    omega: float
    alpha: float
    gamma_decoherence: float

    def __post_init__(self):
        if self.label not in ("A", "M", "B"):
            raise ValueError(f"label must be A, M or B, got {self.label!r}")
        if self.alpha <= 0:
            raise ValueError("anharmonicity must be > 0")
        if self.gamma_decoherence < 0:
            raise ValueError("decoherence rate must be >= 0")


@dataclass(frozen=True)
class ChainSpec:
    """Three coupled transmons with drive frequencies and level truncation."""

    transmons: tuple[TransmonSpec, TransmonSpec, TransmonSpec]
    g_a: float
    g_b: float
    nu_a: float
    nu_b: float
    d: int = 2

    def __post_init__(self):
        if tuple(t.label for t in self.transmons) != ("A", "M", "B"):
            raise ValueError("transmons must be ordered (A, M, B)")
        if self.d not in (2, 3):
            raise ValueError("level truncation d must be 2 or 3")

    @property
    def omega_a(self) -> float:
        return self.transmons[0].omega

    @property
    def omega_m(self) -> float:
        return self.transmons[1].omega

    @property
    def omega_b(self) -> float:
        return self.transmons[2].omega

    @property
    def delta_a(self) -> float:
        return self.omega_a - self.omega_m

    @property
    def delta_b(self) -> float:
        return self.omega_b - self.omega_m

    def require_resonant(self):
        if abs(self.delta_a - self.nu_a) > 1e-9 or abs(self.delta_b - self.nu_b) > 1e-9:
            raise ValueError(
                "resonance condition delta_j = nu_j not satisfied by this chain"
            )

    @staticmethod
    def reference_defaults(d: int = 2, omega_m_ghz: float = 5.0) -> "ChainSpec":
        """The transmon-chain parameter set used throughout the reference
        scenarios: g = 2pi x 10 MHz, delta = nu = 2pi x 345 MHz,
        alphas 220/210/230 MHz, decoherence rates 3/4/5 kHz."""
        delta = mhz(345.0)
        omega_m = ghz(omega_m_ghz)
        transmons = (
            TransmonSpec("A", omega_m + delta, mhz(220.0), khz(3.0)),
            TransmonSpec("M", omega_m, mhz(210.0), khz(4.0)),
            TransmonSpec("B", omega_m + delta, mhz(230.0), khz(5.0)),
        )
        return ChainSpec(transmons, mhz(10.0), mhz(10.0), delta, delta, d)


def bessel_j1(x):
    """Bessel function of the first kind, order one."""
    return special.j1(x)


def invert_bessel_j1(y: float) -> float:
    """Principal-branch inverse of J1 on [0, J1_PEAK_X]."""
    if y < 0 or y > J1_PEAK:
        raise ValueError(f"J1 value {y} outside principal range [0, {J1_PEAK}]")
    if y == 0.0:
        return 0.0
    if y == J1_PEAK:
        return J1_PEAK_X
    return float(optimize.brentq(lambda x: special.j1(x) - y, 0.0, J1_PEAK_X,
                                 xtol=1e-14, rtol=1e-15))


@dataclass(frozen=True)
class DriveWaveform:
    """Dimensionless frequency-drive envelopes eta_j(t) on a time grid.

    The instantaneous drive phase is F_j(t) = eta_j(t) * sin(nu_j * t).
    """

    times: np.ndarray
    eta_a: np.ndarray
    eta_b: np.ndarray
    nu_a: float
    nu_b: float

    def __post_init__(self):
        for name in ("times", "eta_a", "eta_b"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for arr in (self.eta_a, self.eta_b):
            if arr.min() < 0 or arr.max() > J1_PEAK_X + 1e-12:
                raise ValueError("envelopes must stay in [0, 1.8412]")
            if abs(arr[0]) > 1e-12 or abs(arr[-1]) > 1e-12:
                raise ValueError("envelopes must vanish at t = 0 and t = tau")

    def eta_a_at(self, t):
        return np.interp(t, self.times, self.eta_a)

    def eta_b_at(self, t):
        return np.interp(t, self.times, self.eta_b)

    def f_a(self, t):
        return self.eta_a_at(t) * np.sin(self.nu_a * t)

    def f_b(self, t):
        return self.eta_b_at(t) * np.sin(self.nu_b * t)

    @staticmethod
    def zero(tau: float, nu_a: float, nu_b: float) -> "DriveWaveform":
        times = np.array([0.0, tau])
        z = np.zeros(2)
        return DriveWaveform(times, z, z, nu_a, nu_b)

    def write_csv(self, path):
        from .reporting import write_csv

        write_csv(
            path,
            ["t_ns", "eta_a", "eta_b"],
            zip(self.times, self.eta_a, self.eta_b),
        )


def invert_bessel_drive(pulses: PulsePair, chain: ChainSpec) -> DriveWaveform:
    """Solve 2 g_j J1(eta_j(t)) = g'_j(t) sample-by-sample.

    Ratios above the J1 maximum by more than BESSEL_CLAMP_RTOL raise
    UnattainableDriveError naming the worst time point; ratios inside
    the slack clamp to the peak argument.
    """

    def invert_track(samples: np.ndarray, g: float, name: str) -> np.ndarray:
        ratios = np.abs(samples) / (2.0 * g)
        worst = int(np.argmax(ratios))
        if ratios[worst] > J1_PEAK * (1.0 + BESSEL_CLAMP_RTOL):
            raise UnattainableDriveError(
                f"effective coupling g'_{name} requires J1 = {ratios[worst]:.6f} "
                f"> {J1_PEAK:.6f} at t = {pulses.times[worst]:.4f} ns",
                worst_time=float(pulses.times[worst]),
                worst_ratio=float(ratios[worst]),
            )
        return np.array(
            [invert_bessel_j1(min(r, J1_PEAK)) for r in ratios], dtype=float
        )

    eta_a = invert_track(pulses.g_a, chain.g_a, "A")
    eta_b = invert_track(pulses.g_b, chain.g_b, "B")
    eta_a[0] = eta_a[-1] = 0.0
    eta_b[0] = eta_b[-1] = 0.0
    return DriveWaveform(pulses.times, eta_a, eta_b, chain.nu_a, chain.nu_b)


SINGLE_EXCITATION_LABELS = ("100", "010", "001")


def single_excitation_basis():
    return make_basis(SINGLE_EXCITATION_LABELS)


def _ideal_h(pulses: PulsePair, t) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = 0.5 * pulses.g_a_at(t)
    h[2, 1] = 0.5 * pulses.g_b_at(t)
    return h + h.conj().T


def ideal_hamiltonian(pulses: PulsePair, t: float) -> Operator:
    """Effective Hamiltonian in the single-excitation basis: the pulses
    couple |100> and |001> to |010> with strength g'_j/2."""
    _check_in_span(pulses.times, t)
    return Operator(_ideal_h(pulses, t), single_excitation_basis())


def _check_in_span(times: np.ndarray, t: float):
    if not (times[0] - 1e-9 <= t <= times[-1] + 1e-9):
        raise ValueError(f"t = {t} outside pulse grid span [0, {times[-1]}]")


def _single_excitation_h(chain: ChainSpec, drives: DriveWaveform, t) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = chain.g_a * np.exp(1j * (chain.delta_a * t - drives.f_a(t)))
    h[2, 1] = chain.g_b * np.exp(1j * (chain.delta_b * t - drives.f_b(t)))
    return h + h.conj().T


def single_excitation_hamiltonian(
    chain: ChainSpec, drives: DriveWaveform, t: float
) -> Operator:
    """Rotating-frame chain Hamiltonian reduced to the single-excitation
    subspace: phase-modulated static couplings of |100> and |001> to
    |010>, magnitudes g_j at all times."""
    chain.require_resonant()
    _check_in_span(drives.times, t)
    return Operator(_single_excitation_h(chain, drives, t), single_excitation_basis())


def chain_basis(d: int):
    labels = [
        f"{a}{m}{b}" for a in range(d) for m in range(d) for b in range(d)
    ]
    return make_basis(labels)


def single_excitation_indices(d: int) -> tuple[int, int, int]:
    """Indices of |100>, |010>, |001> in the a-major product ordering."""
    return (d * d, d, 1)


def _lowering(d: int) -> np.ndarray:
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def _kron3(a, m, b) -> np.ndarray:
    return np.kron(np.kron(a, m), b)


def _full_chain_h(chain: ChainSpec, drives: DriveWaveform, t) -> np.ndarray:
    d = chain.d
    low = _lowering(d)
    eye = np.eye(d, dtype=complex)
    x_a = low * np.exp(1j * (-chain.omega_a * t + drives.f_a(t)))
    x_b = low * np.exp(1j * (-chain.omega_b * t + drives.f_b(t)))
    x_m = low * np.exp(-1j * chain.omega_m * t)
    x_a = x_a + x_a.conj().T
    x_b = x_b + x_b.conj().T
    x_m = x_m + x_m.conj().T
    h = chain.g_a * _kron3(x_a, x_m, eye) + chain.g_b * _kron3(eye, x_m, x_b)
    if d == 3:
        proj2 = np.zeros((3, 3), dtype=complex)
        proj2[2, 2] = 1.0
        for k, spec in enumerate(chain.transmons):
            mats = [eye, eye, eye]
            mats[k] = proj2
            h = h - spec.alpha * _kron3(*mats)
    return h


def full_chain_hamiltonian(
    chain: ChainSpec, drives: DriveWaveform, t: float
) -> Operator:
    """Rotating-frame Hamiltonian of the full chain, counter-rotating
    terms included.

    For d = 3 each transmon keeps its second excited level: the 1<->2
    ladder couples with a sqrt(2) enhancement, drive phases act per
    excitation number, and the anharmonic shift -alpha_k remains on
    level 2.
    """
    _check_in_span(drives.times, t)
    return Operator(_full_chain_h(chain, drives, t), chain_basis(chain.d))


@dataclass(frozen=True)
class LindbladChannel:
    """A single-transmon collapse operator embedded in the chain space."""

    operator: Operator
    rate: float


def _single_site_collapse(d: int) -> np.ndarray:
    """|0><1| + |0><0| - |1><1| on the {|0>, |1>} sub-block; for d = 3 the
    operator annihilates |2> components."""
    o = np.zeros((d, d), dtype=complex)
    o[0, 1] = 1.0
    o[0, 0] = 1.0
    o[1, 1] = -1.0
    return o


def lindblad_channels(chain: ChainSpec, d: int | None = None) -> list[LindbladChannel]:
    """One combined decay-plus-dephasing channel per transmon, embedded
    by identity on the other factors, with the transmon's rate."""
    d = chain.d if d is None else d
    basis = chain_basis(d)
    site_op = _single_site_collapse(d)
    eye = np.eye(d, dtype=complex)
    channels = []
    for k, spec in enumerate(chain.transmons):
        mats = [eye, eye, eye]
        mats[k] = site_op
        channels.append(
            LindbladChannel(Operator(_kron3(*mats), basis), spec.gamma_decoherence)
        )
    return channels


def embed_single_excitation(h3: np.ndarray, d: int = 2) -> np.ndarray:
    """Place a 3x3 single-excitation Hamiltonian into the d^3 chain space."""
    dim = d**3
    idx = single_excitation_indices(d)
    h = np.zeros((dim, dim), dtype=complex)
    for i, gi in enumerate(idx):
        for j, gj in enumerate(idx):
            h[gi, gj] = h3[i, j]
    return h


@dataclass(frozen=True)
class SimulationModel:
    """A propagatable model: Hamiltonian builder, collapse channels and
    the location of the logical circulator states in its basis."""

    name: str
    dim: int
    basis: tuple
    h_of_t: Callable[[float], np.ndarray]
    channels: tuple[LindbladChannel, ...]
    logical_indices: tuple[int, int, int]
    logical_labels: tuple[str, str, str]
    default_step: float
    tau: float

    def logical_index(self, label: str) -> int:
        try:
            return self.logical_indices[self.logical_labels.index(label)]
        except ValueError:
            raise ValueError(
                f"unknown logical label {label!r}; expected one of {self.logical_labels}"
            ) from None

    def embed_logical(self, amplitudes: np.ndarray) -> np.ndarray:
        """Lift a 3-component logical vector into the model space."""
        v = np.zeros(self.dim, dtype=complex)
        for amp, idx in zip(amplitudes, self.logical_indices):
            v[idx] = amp
        return v


IDEAL_STEP = 0.05
DEVICE_STEP = 0.005


def ideal_model(pulses: PulsePair) -> SimulationModel:
    """Closed-system ideal three-level model driven by the pulse pair."""
    return SimulationModel(
        name="ideal",
        dim=3,
        basis=single_excitation_basis(),
        h_of_t=lambda t: _ideal_h(pulses, t),
        channels=(),
        logical_indices=(0, 1, 2),
        logical_labels=SINGLE_EXCITATION_LABELS,
        default_step=IDEAL_STEP,
        tau=pulses.tau,
    )


def single_excitation_model(
    chain: ChainSpec, drives: DriveWaveform
) -> SimulationModel:
    """Single-excitation chain Hamiltonian embedded in the qubit product
    space so the per-transmon collapse channels act exactly."""
    chain.require_resonant()
    d = 2
    return SimulationModel(
        name="single_excitation",
        dim=d**3,
        basis=chain_basis(d),
        h_of_t=lambda t: embed_single_excitation(
            _single_excitation_h(chain, drives, t), d
        ),
        channels=tuple(lindblad_channels(chain, d)),
        logical_indices=single_excitation_indices(d),
        logical_labels=SINGLE_EXCITATION_LABELS,
        default_step=DEVICE_STEP,
        tau=float(drives.times[-1]),
    )


def full_chain_model(chain: ChainSpec, drives: DriveWaveform) -> SimulationModel:
    """Full coupled-chain model at the chain's level truncation."""
    d = chain.d
    return SimulationModel(
        name="full_qubit" if d == 2 else "full_three_level",
        dim=d**3,
        basis=chain_basis(d),
        h_of_t=lambda t: _full_chain_h(chain, drives, t),
        channels=tuple(lindblad_channels(chain, d)),
        logical_indices=single_excitation_indices(d),
        logical_labels=SINGLE_EXCITATION_LABELS,
        default_step=DEVICE_STEP,
        tau=float(drives.times[-1]),
    )
