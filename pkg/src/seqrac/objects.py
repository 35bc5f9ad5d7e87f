"""Validated quantum objects: states, POVMs, instruments and whole strategies.

All containers are frozen dataclasses over read-only numpy arrays, so a value
can be shared between threads once built.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from .errors import BadDimension, DimensionMismatch, InvalidObject

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def check_dimension(d: int) -> int:
    if int(d) != d or not C.MIN_DIM <= d <= C.MAX_DIM:
        raise BadDimension(f"dimension must be an integer in [{C.MIN_DIM}, {C.MAX_DIM}], got {d!r}")
    return int(d)


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Real 3-vector r with rho = (I + r.sigma)/2 (qubits only)."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise DimensionMismatch("Bloch vectors are defined for qubits only")
    return np.real(np.einsum("kij,ji->k", PAULIS, rho))


def from_bloch(r, length_scale: float = 1.0) -> np.ndarray:
    """Qubit operator (I + r.sigma)/2."""
    r = np.asarray(r, dtype=float) * length_scale
    return (np.eye(2) + np.einsum("k,kij->ij", r, PAULIS)) / 2


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidObject("density matrix must be square")
        if hermiticity_error(m) > C.HERMITIAN_TOL:
            raise InvalidObject("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > C.TRACE_TOL:
            raise InvalidObject(f"trace {np.trace(m).real!r} differs from 1")
        if min_eigenvalue(m) < C.PSD_FLOOR:
            raise InvalidObject("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def bloch(self) -> np.ndarray:
        return bloch_vector(self.matrix)


@dataclass(frozen=True)
class Povm:
    """Indexed family of PSD effects summing to the identity."""

    effects: np.ndarray
    label: str = ""

    def __post_init__(self):
        e = _frozen(self.effects)
        if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] < 1:
            raise InvalidObject("effects must have shape (outcomes, dim, dim)")
        for k, eff in enumerate(e):
            if hermiticity_error(eff) > C.HERMITIAN_TOL:
                raise InvalidObject(f"effect {k} is not Hermitian")
            if min_eigenvalue(eff) < C.PSD_FLOOR:
                raise InvalidObject(f"effect {k} is not PSD")
        if np.abs(e.sum(axis=0) - np.eye(e.shape[1])).max() > C.POVM_SUM_TOL:
            raise InvalidObject("effects do not sum to the identity")
        object.__setattr__(self, "effects", e)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    def __getitem__(self, b: int) -> np.ndarray:
        return self.effects[b]


@dataclass(frozen=True)
class KrausInstrument:
    """Kraus operators ``kraus[y, b]`` for two settings y and d outcomes b."""

    kraus: np.ndarray

    def __post_init__(self):
        k = _frozen(self.kraus)
        if k.ndim != 4 or k.shape[2] != k.shape[3]:
            raise InvalidObject("kraus must have shape (settings, outcomes, dim, dim)")
        eye = np.eye(k.shape[2])
        for y in range(k.shape[0]):
            total = np.einsum("bji,bjk->ik", k[y].conj(), k[y])
            if np.abs(total - eye).max() > C.KRAUS_COMPLETENESS_TOL:
                raise InvalidObject(f"Kraus operators of setting {y} are not complete")
        object.__setattr__(self, "kraus", k)

    @property
    def dim(self) -> int:
        return self.kraus.shape[2]

    def effects(self) -> np.ndarray:
        """M[y, b] = K[y, b]^dagger K[y, b]."""
        return np.einsum("ybji,ybjk->ybik", self.kraus.conj(), self.kraus)

    def povm(self, y: int) -> Povm:
        return Povm(self.effects()[y], label=f"M|y={y}")

    def channel(self, y: int, rho: np.ndarray) -> np.ndarray:
        """Outcome-averaged update sum_b K rho K^dagger."""
        k = self.kraus[y]
        return np.einsum("bij,jk,blk->il", k, rho, k.conj())


@dataclass(frozen=True)
class Preparation:
    """States ``states[x0, x1]`` for every two-dit message."""

    states: np.ndarray

    def __post_init__(self):
        s = _frozen(self.states)
        if s.ndim != 4 or s.shape[0] != s.shape[1] or s.shape[2] != s.shape[3]:
            raise InvalidObject("states must have shape (d, d, dim, dim)")
        for x0, x1 in itertools.product(range(s.shape[0]), repeat=2):
            DensityMatrix(s[x0, x1])
        object.__setattr__(self, "states", s)

    @property
    def d(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    def state(self, x) -> DensityMatrix:
        return DensityMatrix(self.states[x[0], x[1]])

    def messages(self):
        return list(itertools.product(range(self.d), repeat=2))


@dataclass(frozen=True)
class StrategyBundle:
    """One playable strategy: preparations, Barun's instrument, Chhanda's two POVMs.

    ``chhanda[z]`` is used when Chhanda must decode dit ``z``, i.e. after
    Barun's setting ``1 - z``.
    """

    d: int
    preparation: Preparation
    instrument: KrausInstrument
    chhanda: tuple = field(default_factory=tuple)

    def __post_init__(self):
        check_dimension(self.d)
        object.__setattr__(self, "chhanda", tuple(self.chhanda))
        p, inst = self.preparation, self.instrument
        if p.d != self.d:
            raise DimensionMismatch(f"preparation encodes {p.d}-dit messages, bundle says d={self.d}")
        if inst.kraus.shape[0] != 2 or inst.kraus.shape[1] != self.d:
            raise DimensionMismatch("instrument must have 2 settings with d outcomes each")
        if len(self.chhanda) != 2:
            raise DimensionMismatch("Chhanda needs exactly two POVMs")
        if inst.dim != p.dim:
            raise DimensionMismatch("instrument and states act on different spaces")
        for povm in self.chhanda:
            if povm.dim != p.dim or povm.n_outcomes != self.d:
                raise DimensionMismatch("Chhanda's POVMs must have d outcomes on the system space")

    @property
    def dim(self) -> int:
        return self.preparation.dim
