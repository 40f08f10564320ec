"""Closed-system and Lindblad propagators, plus the brute-force
evolution-operator oracle.

Fixed-step, fixed-order arithmetic throughout: identical inputs produce
bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .statespace import DensityMatrix, Operator, PureState, make_basis


class StepTooLargeError(RuntimeError):
    """Norm drift exceeded the closed-system tolerance."""


class IntegratorError(RuntimeError):
    """A propagated density matrix violated its invariants."""


@dataclass(frozen=True)
class PropagationConfig:
    """Fixed-step integration settings.

    step is in ns; the caller is responsible for resolving the fastest
    Hamiltonian phase (about twenty samples per period).  method is
    "rk4" (classical 4th order) or "expm" (piecewise exponential at the
    midpoint, closed systems only).  States are recorded every
    record_stride steps.
    """

    step: float = 0.05
    method: str = "rk4"
    record_stride: int = 50

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.method not in ("rk4", "expm"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class Trajectory:
    """Time-stamped states from a propagation run."""

    times: np.ndarray
    states: list

    @property
    def final(self):
        return self.states[-1]


def _as_matrix_fn(h_of_t) -> Callable[[float], np.ndarray]:
    def fn(t: float) -> np.ndarray:
        h = h_of_t(t)
        return h.matrix if isinstance(h, Operator) else np.asarray(h)

    return fn


def _grid(tau: float, step: float) -> tuple[int, float]:
    n = max(1, int(round(tau / step)))
    return n, tau / n


def propagate_schrodinger(
    h_of_t, psi0: PureState, tau: float, cfg: PropagationConfig | None = None
) -> Trajectory:
    """Integrate i d|psi>/dt = H(t)|psi> from 0 to tau.

    Raises StepTooLargeError when the norm drifts by more than 1e-6.
    """
    cfg = cfg or PropagationConfig()
    h_fn = _as_matrix_fn(h_of_t)
    n, dt = _grid(tau, cfg.step)
    psi = np.array(psi0.amplitudes, dtype=complex)
    times = [0.0]
    states = [psi.copy()]

    if cfg.method == "expm":
        for k in range(n):
            t_mid = (k + 0.5) * dt
            h = h_fn(t_mid)
            w, v = np.linalg.eigh(h)
            psi = (v * np.exp(-1j * w * dt)) @ (v.conj().T @ psi)
            _record(times, states, psi, k, n, dt, cfg)
    else:
        def deriv(t, p):
            return -1j * (h_fn(t) @ p)

        for k in range(n):
            t = k * dt
            k1 = deriv(t, psi)
            k2 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k1)
            k3 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k2)
            k4 = deriv(t + dt, psi + dt * k3)
            psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _record(times, states, psi, k, n, dt, cfg)

    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > 1e-6:
        raise StepTooLargeError(
            f"norm drift {drift:.3e} exceeds 1e-6; reduce the step"
        )
    return Trajectory(np.array(times), states)


def _record(times, states, state, k, n, dt, cfg):
    if (k + 1) % cfg.record_stride == 0 or k == n - 1:
        times.append((k + 1) * dt)
        states.append(state.copy())


def integrate_master(
    h_fn: Callable[[float], np.ndarray],
    channels: Sequence,
    rho0: np.ndarray,
    tau: float,
    cfg: PropagationConfig,
) -> Trajectory:
    """RK4 integration of the master equation for an arbitrary (not
    necessarily Hermitian) initial matrix.  The generator is linear, so
    coherence blocks may be propagated on their own."""
    ops = [np.asarray(c.operator.matrix) for c in channels]
    rates = [c.rate for c in channels]
    dags = [o.conj().T for o in ops]
    sqs = [d @ o for d, o in zip(dags, ops)]
    n, dt = _grid(tau, cfg.step)
    rho = np.array(rho0, dtype=complex)

    def deriv(t, r):
        h = h_fn(t)
        out = 1j * (r @ h - h @ r)
        for rate, op, dag, sq in zip(rates, ops, dags, sqs):
            out += rate * (op @ r @ dag - 0.5 * (sq @ r + r @ sq))
        return out

    times = [0.0]
    states = [rho.copy()]
    for k in range(n):
        t = k * dt
        k1 = deriv(t, rho)
        k2 = deriv(t + 0.5 * dt, rho + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, rho + 0.5 * dt * k2)
        k4 = deriv(t + dt, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _record(times, states, rho, k, n, dt, cfg)
    return Trajectory(np.array(times), states)


def propagate_lindblad(
    h_of_t,
    channels: Sequence,
    rho0: DensityMatrix,
    tau: float,
    cfg: PropagationConfig | None = None,
) -> Trajectory:
    """Integrate drho/dt = i[rho, H(t)] + sum_k Gamma_k L(O_k).

    Trace and Hermiticity are checked on the final state; positivity
    violations beyond -1e-6 raise IntegratorError.
    """
    cfg = cfg or PropagationConfig(step=0.005)
    traj = integrate_master(
        _as_matrix_fn(h_of_t), channels, rho0.entries, tau, cfg
    )
    final = traj.final
    if abs(np.trace(final).real - 1.0) > 1e-8 or abs(np.trace(final).imag) > 1e-8:
        raise IntegratorError(
            f"trace drifted to {np.trace(final)!r}; reduce the step"
        )
    if np.max(np.abs(final - final.conj().T)) > 1e-9:
        raise IntegratorError("final state lost Hermiticity; reduce the step")
    if np.linalg.eigvalsh(0.5 * (final + final.conj().T)).min() < -1e-6:
        raise IntegratorError("final state lost positivity; reduce the step")
    return traj


def evolution_operator_oracle(
    h_of_t, tau: float, cfg: PropagationConfig | None = None, basis=None
) -> Operator:
    """Time-ordered product of per-step midpoint exponentials.

    This is the brute-force reference for any designed evolution
    operator; accuracy is limited only by the step size.
    """
    cfg = cfg or PropagationConfig(step=0.001)
    h_fn = _as_matrix_fn(h_of_t)
    n, dt = _grid(tau, cfg.step)
    mids = (np.arange(n) + 0.5) * dt
    hs = np.stack([h_fn(t) for t in mids])
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-1j * w * dt)
    steps = np.einsum("kij,kj,klj->kil", v, phases, v.conj())
    dim = steps.shape[1]
    u = np.eye(dim, dtype=complex)
    for k in range(n):
        u = steps[k] @ u
    if basis is None:
        basis = make_basis([str(i) for i in range(dim)])
    return Operator(u, tuple(basis))


def global_phase_distance(u1, u2) -> tuple[float, float]:
    """(distance, phi) minimizing ||u1 - exp(i*phi)*u2|| over the global
    phase, measured in the operator (spectral) norm."""
    m1 = u1.matrix if isinstance(u1, Operator) else np.asarray(u1)
    m2 = u2.matrix if isinstance(u2, Operator) else np.asarray(u2)
    phi = float(np.angle(np.trace(m2.conj().T @ m1)))
    dist = float(np.linalg.norm(m1 - np.exp(1j * phi) * m2, 2))
    return dist, phi
