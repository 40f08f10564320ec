"""Invariant-based pulse design for the three-level circulator.

An auxiliary trajectory (gamma(t), beta(t)) parameterized by a single
dimensionless knob lambda determines, in closed form, a pair of effective
coupling pulses.  The associated dynamical invariant commutes with the
Hamiltonian at the protocol endpoints, and the phase accumulated by its
eigenstates over one period fixes the realized evolution operator.  A
phase of 3*pi/2 yields the one-way circulator; pi yields a reciprocal
swap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .statespace import Operator, PureState, three_level_basis


class TrajectoryRangeError(ValueError):
    """Time argument outside [0, tau]."""


class PulseDivergenceError(ValueError):
    """Synthesized couplings are non-finite (trajectory reaches gamma = pi)."""


class RootBracketError(ValueError):
    """The lambda bracket does not contain the requested phase."""


class NonMonotonicBracketError(ValueError):
    """|theta_plus(lambda)| is not strictly monotonic on the bracket."""


@dataclass(frozen=True)
class AuxiliaryTrajectory:
    """Closed-form auxiliary angles gamma(t), beta(t) on [0, tau].

    gamma(t) = lambda * t^2 (t - tau)^2 / (tau/2)^4 rises from 0 to
    lambda at mid-protocol and returns to 0; beta(t) is a seventh-order
    polynomial ramp from 0 to pi/2 with three vanishing derivatives at
    each end.  All evaluators accept scalars or arrays.
    """

    lambda_: float
    tau: float

    def __post_init__(self):
        if self.lambda_ <= 0:
            raise ValueError(f"lambda must be > 0, got {self.lambda_}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-12) or np.any(t > self.tau + 1e-12):
            raise TrajectoryRangeError(f"t outside [0, {self.tau}]")
        return np.clip(t, 0.0, self.tau)

    def gamma(self, t):
        u = self._check_range(t) / self.tau
        return 16.0 * self.lambda_ * u**2 * (1.0 - u) ** 2

    def beta(self, t):
        u = self._check_range(t) / self.tau
        return np.pi * u**4 * (-10.0 * u**3 + 35.0 * u**2 - 42.0 * u + 17.5)

    def gamma_dot(self, t):
        u = self._check_range(t) / self.tau
        return 32.0 * self.lambda_ * u * (1.0 - u) * (1.0 - 2.0 * u) / self.tau

    def beta_dot(self, t):
        u = self._check_range(t) / self.tau
        return 70.0 * np.pi * u**3 * (1.0 - u) ** 3 / self.tau

    def beta_dot_over_gamma(self, t):
        """beta_dot/gamma with the common t^2 (tau-t)^2 factor cancelled.

        Finite everywhere, including the endpoints where both factors
        vanish; this is the quantity that keeps the cot(gamma) terms of
        the coupling formulas removable.
        """
        u = self._check_range(t) / self.tau
        return 35.0 * np.pi * u * (1.0 - u) / (8.0 * self.lambda_ * self.tau)


def eval_trajectory(traj: AuxiliaryTrajectory, t):
    """(gamma, beta, gamma_dot, beta_dot) at time t in [0, tau]."""
    return (traj.gamma(t), traj.beta(t), traj.gamma_dot(t), traj.beta_dot(t))


def _gamma_over_tan(gamma):
    """gamma * cos(gamma) / sin(gamma), series-safe near gamma = 0."""
    gamma = np.asarray(gamma, dtype=float)
    small = np.abs(gamma) < 1e-6
    safe = np.where(small, 1.0, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = safe * np.cos(safe) / np.sin(safe)
    return np.where(small, 1.0 - gamma**2 / 3.0, ratio)


def _gamma_over_sin(gamma):
    """gamma / sin(gamma), series-safe near gamma = 0."""
    gamma = np.asarray(gamma, dtype=float)
    small = np.abs(gamma) < 1e-6
    safe = np.where(small, 1.0, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = safe / np.sin(safe)
    return np.where(small, 1.0 + gamma**2 / 6.0, ratio)


def coupling_values(traj: AuxiliaryTrajectory, t):
    """Effective couplings (g'_A, g'_B) at time t, in rad/ns.

    g'_A = 2[beta_dot cot(gamma) sin(beta) + gamma_dot cos(beta)] and
    g'_B = 2[beta_dot cot(gamma) cos(beta) - gamma_dot sin(beta)],
    evaluated in a rearranged form whose endpoint limits are exactly 0.
    """
    g = traj.gamma(t)
    b = traj.beta(t)
    gd = traj.gamma_dot(t)
    cot_term = traj.beta_dot_over_gamma(t) * _gamma_over_tan(g)
    g_a = 2.0 * (cot_term * np.sin(b) + gd * np.cos(b))
    g_b = 2.0 * (cot_term * np.cos(b) - gd * np.sin(b))
    return g_a, g_b


@dataclass(frozen=True)
class PulsePair:
    """Sampled effective couplings on a uniform time grid over [0, tau]."""

    times: np.ndarray
    g_a: np.ndarray
    g_b: np.ndarray

    def __post_init__(self):
        for name in ("times", "g_a", "g_b"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.times) == len(self.g_a) == len(self.g_b)):
            raise ValueError("pulse arrays must have equal length")
        if not (np.all(np.isfinite(self.g_a)) and np.all(np.isfinite(self.g_b))):
            raise PulseDivergenceError("pulse samples must be finite")
        for arr in (self.g_a, self.g_b):
            if abs(arr[0]) > 1e-9 or abs(arr[-1]) > 1e-9:
                raise ValueError("pulses must vanish at t = 0 and t = tau")

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    def g_a_at(self, t):
        return np.interp(t, self.times, self.g_a)

    def g_b_at(self, t):
        return np.interp(t, self.times, self.g_b)

    def write_csv(self, path):
        from .reporting import write_csv

        write_csv(
            path,
            ["t_ns", "gprime_a_rad_per_ns", "gprime_b_rad_per_ns"],
            zip(self.times, self.g_a, self.g_b),
        )


def synthesize_pulses(traj: AuxiliaryTrajectory, n_samples: int = 2001) -> PulsePair:
    """Tabulate the coupling pulses on a uniform grid of n_samples points.

    Raises PulseDivergenceError when the trajectory passes through
    gamma = pi (lambda >= pi), where the couplings diverge.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if traj.lambda_ >= np.pi:
        raise PulseDivergenceError(
            f"couplings diverge for lambda = {traj.lambda_} (gamma reaches pi)"
        )
    times = np.linspace(0.0, traj.tau, n_samples)
    g_a, g_b = coupling_values(traj, times)
    g_a = np.array(g_a)
    g_b = np.array(g_b)
    # exact analytic limits at the removable endpoint singularities
    g_a[0] = g_a[-1] = 0.0
    g_b[0] = g_b[-1] = 0.0
    if not (np.all(np.isfinite(g_a)) and np.all(np.isfinite(g_b))):
        raise PulseDivergenceError(
            f"couplings diverge for lambda = {traj.lambda_} (gamma reaches pi)"
        )
    return PulsePair(times, g_a, g_b)


@dataclass(frozen=True)
class InvariantSpec:
    """Overall invariant scale mu (rad/ns); arbitrary, structure-irrelevant."""

    mu: float = 1.0

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be > 0")


def invariant_at(
    traj: AuxiliaryTrajectory, spec: InvariantSpec, t: float
) -> Operator:
    """The dynamical invariant I(t) in the {A, M, B} basis."""
    g = float(traj.gamma(t))
    b = float(traj.beta(t))
    cg, sg, cb, sb = math.cos(g), math.sin(g), math.cos(b), math.sin(b)
    m = 0.5 * spec.mu * np.array(
        [
            [0.0, cg * sb, -1j * sg],
            [cg * sb, 0.0, cg * cb],
            [1j * sg, cg * cb, 0.0],
        ],
        dtype=complex,
    )
    return Operator(m, three_level_basis())


def invariant_derivative_at(
    traj: AuxiliaryTrajectory, spec: InvariantSpec, t: float
) -> np.ndarray:
    """dI/dt by closed-form differentiation of the invariant entries."""
    g = float(traj.gamma(t))
    b = float(traj.beta(t))
    gd = float(traj.gamma_dot(t))
    bd = float(traj.beta_dot(t))
    cg, sg, cb, sb = math.cos(g), math.sin(g), math.cos(b), math.sin(b)
    d_cgsb = -gd * sg * sb + bd * cg * cb
    d_cgcb = -gd * sg * cb - bd * cg * sb
    d_sg = gd * cg
    return 0.5 * spec.mu * np.array(
        [
            [0.0, d_cgsb, -1j * d_sg],
            [d_cgsb, 0.0, d_cgcb],
            [1j * d_sg, d_cgcb, 0.0],
        ],
        dtype=complex,
    )


def invariant_eigenstates(traj: AuxiliaryTrajectory, t: float):
    """(mu_0, mu_plus, mu_minus): closed-form eigenstates of the invariant.

    Eigenvalues are 0, +mu/2 and -mu/2 respectively, independent of t.
    """
    g = float(traj.gamma(t))
    b = float(traj.beta(t))
    cg, sg, cb, sb = math.cos(g), math.sin(g), math.cos(b), math.sin(b)
    mu0 = np.array([cg * cb, -1j * sg, -cg * sb], dtype=complex)
    mup = np.array(
        [sg * cb + 1j * sb, 1j * cg, -sg * sb + 1j * cb], dtype=complex
    ) / math.sqrt(2.0)
    mum = np.array(
        [sg * cb - 1j * sb, 1j * cg, -sg * sb - 1j * cb], dtype=complex
    ) / math.sqrt(2.0)
    return PureState(mu0), PureState(mup), PureState(mum)


@dataclass(frozen=True)
class LRPhaseResult:
    """Accumulated invariant-eigenstate phases over one period.

    theta_plus is the positive reported value (the sign convention is
    fixed so the designed evolution operator matches target_unitary);
    theta_plus_raw is the signed defining integral, and
    theta_plus_mod_2pi the reported value reduced to [0, 2*pi).
    """

    theta_plus: float
    theta_minus: float
    theta_zero: float
    theta_plus_raw: float

    @property
    def theta_plus_mod_2pi(self) -> float:
        return self.theta_plus % (2.0 * math.pi)


def _validate_pulses_match(traj: AuxiliaryTrajectory, pulses: PulsePair):
    if abs(pulses.tau - traj.tau) > 1e-9:
        raise ValueError("pulse grid span does not match trajectory duration")
    probes = traj.tau * np.array([0.211, 0.483, 0.747])
    ga_ref, gb_ref = coupling_values(traj, probes)
    scale = max(np.max(np.abs(ga_ref)), np.max(np.abs(gb_ref)), 1e-12)
    err = max(
        np.max(np.abs(pulses.g_a_at(probes) - ga_ref)),
        np.max(np.abs(pulses.g_b_at(probes) - gb_ref)),
    )
    if err > 1e-3 * scale:
        raise ValueError("pulses were not synthesized from this trajectory")


def phase_integrand(traj: AuxiliaryTrajectory, t):
    """beta_dot/sin(gamma) with removable endpoint limits, equal to
    -d(theta_plus_raw)/dt."""
    return traj.beta_dot_over_gamma(t) * _gamma_over_sin(traj.gamma(t))


def lr_phase(
    traj: AuxiliaryTrajectory, pulses: PulsePair | None = None
) -> LRPhaseResult:
    """Integrate the invariant-eigenstate phase over one period.

    The defining integral reduces in closed form to
    d(theta)/dt = -beta_dot/sin(gamma) for the plus branch; adaptive
    quadrature of that integrand gives the raw (negative) phase, and
    the reported theta_plus is its magnitude.
    """
    if pulses is not None:
        _validate_pulses_match(traj, pulses)
    if traj.lambda_ >= math.pi:
        raise ValueError(
            "phase integrand non-finite: gamma reaches pi on the trajectory"
        )
    mag, err = integrate.quad(
        lambda t: float(phase_integrand(traj, t)),
        0.0,
        traj.tau,
        epsabs=1e-10,
        epsrel=1e-12,
        limit=200,
    )
    if not math.isfinite(mag):
        raise ValueError("phase integrand non-finite on the trajectory")
    raw = -mag
    return LRPhaseResult(
        theta_plus=mag, theta_minus=-mag, theta_zero=0.0, theta_plus_raw=raw
    )


def solve_lambda(
    target_phase: float,
    tau: float,
    bracket: tuple[float, float] = (0.1, 1.0),
    n_prescan: int = 32,
    phase_tol: float = 1e-6,
) -> float:
    """Find lambda with |theta_plus(lambda)| equal to target_phase.

    A prescan over the bracket validates strict monotonicity and the
    presence of a sign change before the root is refined by Brent's
    method; the solved phase is re-verified to phase_tol.
    """
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def theta_of(lam: float) -> float:
        return lr_phase(AuxiliaryTrajectory(lam, tau)).theta_plus

    scan = np.linspace(lo, hi, n_prescan)
    vals = np.array([theta_of(l) for l in scan])
    diffs = np.diff(vals)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise NonMonotonicBracketError(
            "|theta_plus(lambda)| is not strictly monotonic on the bracket"
        )
    f_lo, f_hi = vals[0] - target_phase, vals[-1] - target_phase
    if f_lo * f_hi > 0:
        raise RootBracketError(
            f"target phase {target_phase} rad not attained on bracket {bracket}: "
            f"|theta_plus| spans [{min(vals)}, {max(vals)}]"
        )
    lam = optimize.brentq(
        lambda l: theta_of(l) - target_phase, lo, hi, xtol=1e-12, rtol=1e-14
    )
    residual = abs(theta_of(lam) - target_phase)
    if residual > phase_tol:
        raise RootBracketError(f"root refinement stalled at residual {residual}")
    return float(lam)


def target_unitary(theta_plus: float) -> Operator:
    """The designed evolution operator U[theta_plus] in the {A, M, B} basis."""
    c, s = math.cos(theta_plus), math.sin(theta_plus)
    m = np.array(
        [
            [0.0, -1j * s, c],
            [0.0, c, -1j * s],
            [-1.0, 0.0, 0.0],
        ],
        dtype=complex,
    )
    return Operator(m, three_level_basis())


def lr_predicted_evolution(
    traj: AuxiliaryTrajectory, pulses: PulsePair, spec: InvariantSpec
) -> Operator:
    """Evolution operator from the invariant-eigenstate expansion.

    Sum over n in {0, +, -} of exp(-i*theta_n) |mu_n(tau)><mu_n(0)|,
    with the same positive theta_plus convention as target_unitary.
    """
    del spec  # the invariant scale drops out of the eigenstates
    phases = lr_phase(traj, pulses)
    start = invariant_eigenstates(traj, 0.0)
    end = invariant_eigenstates(traj, traj.tau)
    thetas = (phases.theta_zero, phases.theta_plus, phases.theta_minus)
    u = np.zeros((3, 3), dtype=complex)
    for theta, s0, s1 in zip(thetas, start, end):
        u += np.exp(-1j * theta) * np.outer(s1.amplitudes, s0.amplitudes.conj())
    return Operator(u, three_level_basis())


@dataclass(frozen=True)
class BoundaryDiagnostics:
    """Commutator and von-Neumann residual norms for a designed pulse set."""

    commutator_start: float
    commutator_end: float
    max_von_neumann_residual: float
    mu: float


def _hamiltonian_from_pulses(pulses: PulsePair, t) -> np.ndarray:
    g_a = pulses.g_a_at(t)
    g_b = pulses.g_b_at(t)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = 0.5 * g_a
    h[2, 1] = 0.5 * g_b
    return h + h.conj().T


def check_boundary(
    traj: AuxiliaryTrajectory,
    pulses: PulsePair,
    spec: InvariantSpec,
    n_grid: int = 10001,
) -> BoundaryDiagnostics:
    """Frobenius norms of [H, I] at the endpoints and of the von-Neumann
    residual dI/dt + i[H(t), I(t)] over a uniform grid."""

    def commutator_norm(t: float) -> float:
        h = _hamiltonian_from_pulses(pulses, t)
        i_mat = invariant_at(traj, spec, t).matrix
        return float(np.linalg.norm(h @ i_mat - i_mat @ h))

    worst = 0.0
    for t in np.linspace(0.0, traj.tau, n_grid):
        h = _hamiltonian_from_pulses(pulses, t)
        i_mat = invariant_at(traj, spec, t).matrix
        resid = invariant_derivative_at(traj, spec, t) + 1j * (
            h @ i_mat - i_mat @ h
        )
        worst = max(worst, float(np.linalg.norm(resid)))
    return BoundaryDiagnostics(
        commutator_start=commutator_norm(0.0),
        commutator_end=commutator_norm(traj.tau),
        max_von_neumann_residual=worst,
        mu=spec.mu,
    )
