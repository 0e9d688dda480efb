"""
The collective coupling operator ``A = sum_l (l1 sx_l + l2 sy_l + l3 sz_l)``.

Its variance over a pure qubit state sets the short-time decoherence rate
when all qubits talk to the same bath, and its eigenstates are the
coherence-preserving states.  For uniform couplings every single-qubit term
has eigenvalues ``+a`` and ``-a``; a product of local eigenkets labelled
``i_l = +1/-1`` is then an eigenstate of ``A`` with eigenvalue ``a * m``,
``m = sum_l i_l``.  ``m`` is the sector label, ``a * m`` the eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCouplingError, DimensionError
from .qubit_core import PAULI_XYZ, PureState, apply_local


def _local_matrix(triple) -> np.ndarray:
    l1, l2, l3 = triple
    return l1 * PAULI_XYZ[0] + l2 * PAULI_XYZ[1] + l3 * PAULI_XYZ[2]


@dataclass(frozen=True)
class CouplingSpec:
    """Per-qubit coupling triples ``(lambda_x, lambda_y, lambda_z)``."""

    per_qubit: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        triples = []
        for l, t in enumerate(self.per_qubit):
            t = tuple(float(x) for x in t)
            if len(t) != 3 or not all(math.isfinite(x) for x in t):
                raise DegenerateCouplingError(f"qubit {l}: coupling must be three finite reals, got {t}")
            if math.hypot(*t) == 0.0:
                raise DegenerateCouplingError(f"qubit {l}: zero coupling triple")
            triples.append(t)
        if not triples:
            raise DimensionError("coupling must cover at least one qubit")
        object.__setattr__(self, "per_qubit", tuple(triples))

    @classmethod
    def uniform_coupling(cls, triple, num_qubits: int) -> "CouplingSpec":
        return cls((tuple(triple),) * num_qubits)

    @property
    def num_qubits(self) -> int:
        return len(self.per_qubit)

    @property
    def uniform(self) -> bool:
        first = self.per_qubit[0]
        return all(t == first for t in self.per_qubit)

    def local_operator(self, qubit: int) -> np.ndarray:
        """2x2 matrix of ``A_l``."""
        return _local_matrix(self.per_qubit[qubit])

    def dense(self) -> np.ndarray:
        """Full ``2^L x 2^L`` matrix of ``A``; only meant for small L."""
        n = self.num_qubits
        out = np.zeros((2**n, 2**n), dtype=complex)
        for l in range(n):
            out += np.kron(np.kron(np.eye(2**l), self.local_operator(l)), np.eye(2 ** (n - l - 1)))
        return out


@dataclass(frozen=True)
class LocalEigensystem:
    """Eigenpair of a single-qubit coupling term: ``A_l v_pm = pm a v_pm``."""

    a: float
    plus_vec: np.ndarray
    minus_vec: np.ndarray

    @property
    def change_of_basis(self) -> np.ndarray:
        """Unitary whose columns are ``|+1>_l`` and ``|-1>_l`` (maps bit basis to eigenbasis)."""
        return np.column_stack([self.plus_vec, self.minus_vec])


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.flatnonzero(np.abs(v) > 1e-14)[0])
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def local_eigensystem(triple) -> LocalEigensystem:
    """Eigenvalue magnitude and eigenvectors of ``l1 sx + l2 sy + l3 sz``.

    Each eigenvector has its first nonzero component real and positive.
    """
    t = np.asarray(triple, dtype=float)
    if t.shape != (3,):
        raise DimensionError(f"coupling triple must have 3 entries, got {t.shape}")
    a = float(np.linalg.norm(t))
    if a == 0.0:
        raise DegenerateCouplingError("zero coupling triple has no distinguished eigenbasis")
    _, vecs = np.linalg.eigh(_local_matrix(t))
    minus_vec = _fix_phase(vecs[:, 0])
    plus_vec = _fix_phase(vecs[:, 1])
    # exact-zero cleanup keeps the textbook cases exact
    for v in (plus_vec, minus_vec):
        v[np.abs(v) < 1e-15] = 0.0
        v.setflags(write=False)
    return LocalEigensystem(a, plus_vec, minus_vec)


def _check_cover(c: CouplingSpec, s: PureState) -> None:
    if s.dims != (2,) * c.num_qubits:
        raise DimensionError(f"coupling covers {c.num_qubits} qubits, state has dims {s.dims}")


def apply_A(c: CouplingSpec, s: PureState) -> np.ndarray:
    """Unnormalized vector ``A|s>``."""
    _check_cover(c, s)
    out = np.zeros(s.dim, dtype=complex)
    for l in range(c.num_qubits):
        out += apply_local(s.amplitudes, s.dims, l, c.local_operator(l))
    return out


def variance_A(c: CouplingSpec, s: PureState) -> float:
    """``<A^2> - <A>^2`` over ``s``, computed as ``||(A - <A>)|s>||^2`` so it is never negative."""
    a_psi = apply_A(c, s)
    mean = np.vdot(s.amplitudes, a_psi).real
    return float(np.linalg.norm(a_psi - mean * s.amplitudes) ** 2)


@dataclass(frozen=True)
class EigenspaceTable:
    """Dimensions of the sectors of ``A`` on ``num_qubits`` qubits, keyed by label ``m``."""

    num_qubits: int
    entries: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def eigenvalue(self, m: int, a: float = 1.0) -> float:
        return a * m


def eigenspace_dims(L: int) -> EigenspaceTable:
    """Sector dimensions of ``A`` on ``2L`` uniformly coupled qubits.

    ``m = 0`` has ``C(2L, L)`` states, ``m = +-2k`` each ``C(2L, L-k)``.
    """
    if L < 1:
        raise DimensionError(f"L must be >= 1, got {L}")
    entries = {0: math.comb(2 * L, L)}
    for k in range(1, L + 1):
        entries[2 * k] = math.comb(2 * L, L - k)
        entries[-2 * k] = math.comb(2 * L, L - k)
    return EigenspaceTable(2 * L, entries)


def sector_labels(num_qubits: int) -> np.ndarray:
    """``m = sum_l i_l`` for every flat basis index (bit 0 is ``+1``)."""
    idx = np.arange(2**num_qubits)
    ones = np.zeros_like(idx)
    for k in range(num_qubits):
        ones += (idx >> k) & 1
    return num_qubits - 2 * ones


def to_eigenbasis(c: CouplingSpec, s: PureState) -> np.ndarray:
    """Amplitudes of ``s`` on the product basis of local ``|+-1>_l`` kets."""
    _check_cover(c, s)
    v = s.amplitudes
    for l, t in enumerate(c.per_qubit):
        v = apply_local(v, s.dims, l, local_eigensystem(t).change_of_basis.conj().T)
    return v


def from_eigenbasis(c: CouplingSpec, amps: np.ndarray) -> np.ndarray:
    dims = (2,) * c.num_qubits
    v = np.asarray(amps, dtype=complex)
    for l, t in enumerate(c.per_qubit):
        v = apply_local(v, dims, l, local_eigensystem(t).change_of_basis)
    return v


def project_m(c: CouplingSpec, s: PureState, m: int) -> tuple[PureState | None, float]:
    """Project ``s`` onto sector ``m`` of a uniform coupling.

    Returns the normalized projection and its weight ``||P_m s||^2``.  A
    sector with zero weight gives ``(None, 0.0)``.
    """
    if not c.uniform:
        raise DimensionError("sector projection needs uniform couplings")
    n = c.num_qubits
    if abs(m) > n or (n - m) % 2:
        raise DimensionError(f"m={m} is not a sector label for {n} qubits")
    coeffs = to_eigenbasis(c, s)
    coeffs = np.where(sector_labels(n) == m, coeffs, 0.0)
    weight = float(np.vdot(coeffs, coeffs).real)
    if weight == 0.0:
        return None, 0.0
    projected = from_eigenbasis(c, coeffs) / math.sqrt(weight)
    return PureState(s.dims, projected), weight
