"""
Dense state algebra for small collections of qubits and truncated boson modes.

Conventions used everywhere in the package:

* A composite system is a list of sites with dimensions ``dims``. Amplitude
  vectors are the Kronecker product of the site vectors in list order, so
  site 0 is the *most* significant index of the flattened vector
  (``amplitudes.reshape(dims)[i0, i1, ...]``).
* For qubits, bit ``b`` labels the ket ``|i>`` with ``i = 1 - 2b``; bit 0 is
  ``|+1>`` (the ``+1`` eigenvector of sigma_z), bit 1 is ``|-1>``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_FLOOR = -1e-10


class PauliAxis(enum.Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI[self].copy()


_PAULI = {
    PauliAxis.I: np.eye(2, dtype=complex),
    PauliAxis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliAxis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliAxis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

for _m in _PAULI.values():
    _m.setflags(write=False)
del _m

SIGMA_X = _PAULI[PauliAxis.X]
SIGMA_Y = _PAULI[PauliAxis.Y]
SIGMA_Z = _PAULI[PauliAxis.Z]
PAULI_XYZ = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def bit_to_label(bit: int) -> int:
    """Map a basis bit to its ``+1/-1`` label (bit 0 is ``|+1>``)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return 1 - 2 * bit


def label_to_bit(label: int) -> int:
    if label not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {label!r}")
    return (1 - label) // 2


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over sites with dimensions ``dims``."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidStateError(f"invalid site dimensions {dims}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise InvalidStateError(
                f"{amps.size} amplitudes do not match dims {dims} (product {int(np.prod(dims))})"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidStateError(f"state norm is {norm!r}, expected 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @classmethod
    def qubits(cls, amplitudes, num_qubits: int | None = None, normalize: bool = False) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if num_qubits is None:
            num_qubits = int(round(np.log2(amps.size)))
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls((2,) * num_qubits, amps)

    @classmethod
    def basis(cls, labels: Sequence[int]) -> "PureState":
        """Computational basis ket ``|i_1, i_2, ...>`` from ``+1/-1`` labels."""
        n = len(labels)
        index = 0
        for label in labels:
            index = 2 * index + label_to_bit(label)
        amps = np.zeros(2**n, dtype=complex)
        amps[index] = 1.0
        return cls((2,) * n, amps)

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> "PureState":
        """Haar-distributed random state."""
        size = int(np.prod(dims))
        amps = rng.normal(size=size) + 1j * rng.normal(size=size)
        return cls(tuple(dims), amps / np.linalg.norm(amps))

    @property
    def num_sites(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per site."""
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over sites ``dims``."""

    dims: tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidStateError(f"invalid site dimensions {dims}")
        n = int(np.prod(dims))
        rho = np.array(self.entries, dtype=complex)
        if rho.shape != (n, n):
            raise InvalidStateError(f"matrix shape {rho.shape} does not match dims {dims}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_ATOL:
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
        off_diag = rho - np.diag(np.diag(rho))
        if np.any(off_diag):
            lowest = np.linalg.eigvalsh(rho)[0]
        else:
            lowest = np.min(rho.diagonal().real)
        if lowest < PSD_FLOOR:
            raise InvalidStateError(f"density matrix has eigenvalue {lowest!r} < 0")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", _freeze(rho))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        # tr(rho^2) for Hermitian rho is the squared Frobenius norm
        return float(np.sum(np.abs(self.entries) ** 2))


def tensor(a: PureState, b: PureState) -> PureState:
    """Product state ``a ⊗ b``; the sites of ``a`` come first."""
    return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def apply_local(amps: np.ndarray, dims: Sequence[int], site: int, op: np.ndarray) -> np.ndarray:
    """Apply ``op`` to one site of a flat amplitude vector, without building the full operator."""
    dims = tuple(dims)
    if not 0 <= site < len(dims):
        raise DimensionError(f"site {site} out of range for {len(dims)} sites")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[site], dims[site]):
        raise DimensionError(f"operator shape {op.shape} does not match site dimension {dims[site]}")
    psi = np.asarray(amps, dtype=complex).reshape(dims)
    out = np.tensordot(op, psi, axes=([1], [site]))
    return np.moveaxis(out, 0, site).reshape(-1)


def apply_site_operator(s: PureState, site: int, op: np.ndarray) -> PureState:
    """Return ``(I ⊗ ... ⊗ op ⊗ ... ⊗ I)|s>``.

    The result must still be normalized (e.g. ``op`` unitary); use
    :func:`apply_local` for arbitrary operators.
    """
    return PureState(s.dims, apply_local(s.amplitudes, s.dims, site, op))


def _as_axis(axis) -> PauliAxis:
    return axis if isinstance(axis, PauliAxis) else PauliAxis(str(axis).upper())


def pauli_string_expectation(s: PureState, ops: Iterable[tuple[int, PauliAxis | str]]) -> float:
    """``<s| prod_k sigma_{axis_k}^{(site_k)} |s>`` for a string on distinct sites."""
    ops = [(int(site), _as_axis(axis)) for site, axis in ops]
    sites = [site for site, _ in ops]
    if len(set(sites)) != len(sites):
        raise DimensionError(f"repeated site in Pauli string {sites}")
    v = s.amplitudes
    for site, axis in ops:
        if s.dims[site] != 2:
            raise DimensionError(f"site {site} is not a qubit")
        if axis is not PauliAxis.I:
            v = apply_local(v, s.dims, site, _PAULI[axis])
    value = np.vdot(s.amplitudes, v)
    if abs(value.imag) > 1e-12:
        raise ArithmeticError(f"Pauli string expectation has imaginary part {value.imag!r}")
    return float(value.real)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every site not in ``keep``; kept sites stay in ascending order."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise DimensionError("partial trace needs at least one site to keep")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"keep set {keep} out of range for {n} sites")
    return DensityMatrix(
        tuple(rho.dims[k] for k in keep), _partial_trace_array(rho.entries, rho.dims, keep)
    )


def _partial_trace_array(entries: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    t = entries.reshape(tuple(dims) * 2)
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out_axes = list(keep) + [n + k for k in keep]
    out = np.einsum(t, row + col, out_axes)
    d = int(np.prod([dims[k] for k in keep]))
    return out.reshape(d, d)


def idempotency_defect(rho: DensityMatrix) -> float:
    """``tr(rho) - tr(rho^2)``: zero for pure states, ``1 - 1/dim`` when maximally mixed."""
    return float(np.trace(rho.entries).real - rho.purity())
