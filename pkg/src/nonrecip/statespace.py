"""Labeled finite-dimensional complex state-space primitives.

Dense complex matrices over explicitly labeled bases are the universal
carrier for Hamiltonians, invariants, unitaries and density matrices in
this package.  All value types are immutable after construction and all
operations here are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-9
NORM_TOL = 1e-9


class DimensionMismatchError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class BasisLabel:
    """A named basis vector with its position in the basis ordering."""

    name: str
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"basis index must be non-negative, got {self.index}")


def make_basis(names) -> tuple[BasisLabel, ...]:
    """Basis labels with contiguous indices, in the given name order."""
    return tuple(BasisLabel(str(n), i) for i, n in enumerate(names))


def three_level_basis() -> tuple[BasisLabel, ...]:
    """The {|A>, |M>, |B>} basis of the ideal three-level system."""
    return make_basis(["A", "M", "B"])


def _check_contiguous(basis: tuple[BasisLabel, ...]):
    if [b.index for b in basis] != list(range(len(basis))):
        raise ValueError("basis indices must be distinct and contiguous from 0")


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Operator:
    """A dense complex square matrix over a labeled basis."""

    matrix: np.ndarray
    basis: tuple[BasisLabel, ...]

    def __post_init__(self):
        m = _freeze(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("operator entries must be finite")
        if m.shape[0] != len(self.basis):
            raise DimensionMismatchError(
                f"dim {m.shape[0]} != basis length {len(self.basis)}"
            )
        _check_contiguous(self.basis)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol

    @staticmethod
    def identity(basis) -> "Operator":
        basis = tuple(basis)
        return Operator(np.eye(len(basis), dtype=complex), basis)


@dataclass(frozen=True)
class PureState:
    """A complex amplitude vector, unit-norm unless flagged otherwise."""

    amplitudes: np.ndarray
    normalized: bool = field(default=True)

    def __post_init__(self):
        a = _freeze(self.amplitudes)
        object.__setattr__(self, "amplitudes", a)
        if a.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("amplitudes must be finite")
        if self.normalized:
            norm_sq = float(np.sum(np.abs(a) ** 2))
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise ValueError(f"state not normalized: |psi|^2 = {norm_sq!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    @staticmethod
    def basis_state(dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return PureState(v)


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = _freeze(self.entries)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix not Hermitian within 1e-9")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {tr!r} != 1 within 1e-9")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -NORM_TOL:
            raise ValueError(f"density matrix has eigenvalue {evals.min()} < -1e-9")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product with a-major concatenated basis labels."""
    labels = [
        la.name + lb.name for la in a.basis for lb in b.basis
    ]
    return Operator(np.kron(a.matrix, b.matrix), make_basis(labels))


def matrix_exponential_step(h: Operator, dt: float) -> Operator:
    """exp(-i*h*dt) for Hermitian h, via eigendecomposition.

    Raises NonHermitianError if h deviates from Hermiticity by more
    than 1e-9 in max-abs entry.
    """
    if not h.is_hermitian():
        raise NonHermitianError("matrix_exponential_step requires a Hermitian input")
    w, v = np.linalg.eigh(h.matrix)
    u = (v * np.exp(-1j * w * dt)) @ v.conj().T
    return Operator(u, h.basis)


def fidelity_pure_target(target: PureState, rho: DensityMatrix) -> float:
    """<target|rho|target>, clamped to [0, 1].

    Raises DimensionMismatchError on dimension mismatch and ValueError
    if the expectation value has an imaginary part above 1e-9.
    """
    if target.dim != rho.dim:
        raise DimensionMismatchError(
            f"target dim {target.dim} != density matrix dim {rho.dim}"
        )
    val = complex(target.amplitudes.conj() @ rho.entries @ target.amplitudes)
    if abs(val.imag) > 1e-9:
        raise ValueError(f"fidelity expectation has imaginary part {val.imag}")
    return float(min(1.0, max(0.0, val.real)))
