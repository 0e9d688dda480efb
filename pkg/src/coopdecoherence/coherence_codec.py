"""
Encoding L qubits into 2L-qubit coherence-preserving states and back.

Layout: data qubit ``l`` sits at position ``2l`` and its ancilla at
``2l + 1``.  The ancillas start in ``|+1>`` of the coupling eigenbasis and one
controlled-NOT per pair, with the sign rule

    |e1>|e2>  ->  |e1>|-e1*e2>        (e = +1/-1 labels)

turns ``sum c_{i} |i_1 ... i_L>`` into ``sum c_{i} |i_1,-i_1, ..., i_L,-i_L>``,
which lies in the ``m = 0`` sector of the collective operator.  The same
layer undoes the encoding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .collective_operator import CouplingSpec, LocalEigensystem, local_eigensystem
from .errors import DimensionError, NotACodewordError
from .qubit_core import PureState, apply_local

CODEWORD_ATOL = 1e-10
UNITARY_ATOL = 1e-12


@dataclass(frozen=True)
class PMCnot:
    """Sign-convention CNOT in the computational basis: flips the target when the control is ``|+1>`` (bit 0)."""

    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise DimensionError("control and target must differ")
        if self.control < 0 or self.target < 0:
            raise DimensionError("qubit indices must be non-negative")


@dataclass(frozen=True)
class LocalRotation:
    site: int
    unitary: np.ndarray

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        if u.shape != (2, 2):
            raise DimensionError(f"rotation must be 2x2, got {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > UNITARY_ATOL:
            raise DimensionError("rotation is not unitary")
        if self.site < 0:
            raise DimensionError("qubit index must be non-negative")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    def __eq__(self, other):
        return (
            isinstance(other, LocalRotation)
            and self.site == other.site
            and np.array_equal(self.unitary, other.unitary)
        )

    def __hash__(self):
        return hash((self.site, self.unitary.tobytes()))


Gate = Union[PMCnot, LocalRotation]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            sites = (g.control, g.target) if isinstance(g, PMCnot) else (g.site,)
            if max(sites) >= self.num_qubits:
                raise DimensionError(f"gate {g} acts outside {self.num_qubits} qubits")
        object.__setattr__(self, "gates", gates)

    def count(self, kind: type) -> int:
        return sum(isinstance(g, kind) for g in self.gates)

    def apply(self, s: PureState) -> PureState:
        if s.dims != (2,) * self.num_qubits:
            raise DimensionError(f"circuit on {self.num_qubits} qubits, state dims {s.dims}")
        v = s.amplitudes
        for g in self.gates:
            if isinstance(g, PMCnot):
                v = _pm_cnot_bits(v, self.num_qubits, g.control, g.target)
            else:
                v = apply_local(v, s.dims, g.site, g.unitary)
        return PureState(s.dims, v)

    def to_text(self) -> str:
        lines = [f"QUBITS {self.num_qubits}"]
        for g in self.gates:
            if isinstance(g, PMCnot):
                lines.append(f"PMCNOT {g.control} {g.target}")
            else:
                nums = []
                for z in g.unitary.reshape(-1):
                    nums += [f"{z.real:.17g}", f"{z.imag:.17g}"]
                lines.append(f"ROT {g.site} " + " ".join(nums))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0][0] != "QUBITS" or len(lines[0]) != 2:
            raise ValueError("circuit text must start with 'QUBITS <n>'")
        n = int(lines[0][1])
        gates: list[Gate] = []
        for lineno, fields in enumerate(lines[1:], start=2):
            if fields[0] == "PMCNOT" and len(fields) == 3:
                gates.append(PMCnot(int(fields[1]), int(fields[2])))
            elif fields[0] == "ROT" and len(fields) == 10:
                vals = [float(x) for x in fields[2:]]
                u = np.array([complex(vals[k], vals[k + 1]) for k in range(0, 8, 2)]).reshape(2, 2)
                gates.append(LocalRotation(int(fields[1]), u))
            else:
                raise ValueError(f"line {lineno}: cannot parse gate {' '.join(fields)!r}")
        return cls(n, tuple(gates))


def _pm_cnot_bits(amps: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    if not (0 <= control < n and 0 <= target < n) or control == target:
        raise DimensionError(f"bad CNOT indices ({control}, {target}) on {n} qubits")
    psi = np.array(amps, dtype=complex).reshape((2,) * n)
    ctl = [slice(None)] * n
    ctl[control] = 0
    sub = psi[tuple(ctl)]
    # target axis index shifts down once the control axis is removed
    axis = target - (target > control)
    psi[tuple(ctl)] = np.flip(sub, axis=axis)
    return psi.reshape(-1)


def _basis_for(c_or_basis) -> LocalEigensystem:
    if isinstance(c_or_basis, LocalEigensystem):
        return c_or_basis
    if isinstance(c_or_basis, CouplingSpec):
        if not c_or_basis.uniform:
            raise DimensionError("encoding needs a uniform coupling")
        return local_eigensystem(c_or_basis.per_qubit[0])
    return local_eigensystem(c_or_basis)


def pm_cnot(s: PureState, control: int, target: int, basis: LocalEigensystem) -> PureState:
    """Map eigenbasis labels ``(e1, e2) -> (e1, -e1*e2)`` on qubits ``control``, ``target``."""
    n = s.num_sites
    if s.dims != (2,) * n:
        raise DimensionError(f"expected a qubit state, got dims {s.dims}")
    v_inv = basis.change_of_basis.conj().T
    v = apply_local(s.amplitudes, s.dims, control, v_inv)
    v = apply_local(v, s.dims, target, v_inv)
    v = _pm_cnot_bits(v, n, control, target)
    v = apply_local(v, s.dims, control, basis.change_of_basis)
    v = apply_local(v, s.dims, target, basis.change_of_basis)
    return PureState(s.dims, v)


def prepare_ancillas(L: int, basis: LocalEigensystem) -> PureState:
    """``|+1>^{⊗L}`` in the coupling eigenbasis."""
    if L < 1:
        raise DimensionError(f"L must be >= 1, got {L}")
    amps = np.ones(1, dtype=complex)
    for _ in range(L):
        amps = np.kron(amps, basis.plus_vec)
    return PureState((2,) * L, amps)


def codec_layout(L: int) -> tuple[list[int], list[int]]:
    """Positions of the data qubits and of their ancillas in the 2L-qubit register."""
    return [2 * l for l in range(L)], [2 * l + 1 for l in range(L)]


def _interleave(data: np.ndarray, ancilla: np.ndarray, L: int) -> np.ndarray:
    joint = np.kron(data, ancilla).reshape((2,) * (2 * L))
    order = [k for l in range(L) for k in (l, L + l)]
    return joint.transpose(order).reshape(-1)


def encoding_circuit(L: int, c_or_basis) -> Circuit:
    """Basis change into the computational frame, L sign-convention CNOTs, basis change back."""
    basis = _basis_for(c_or_basis)
    v = basis.change_of_basis
    to_bits = [LocalRotation(k, v.conj().T) for k in range(2 * L)]
    cnots = [PMCnot(2 * l, 2 * l + 1) for l in range(L)]
    back = [LocalRotation(k, v) for k in range(2 * L)]
    return Circuit(2 * L, tuple(to_bits + cnots + back))


def _cnot_layer(s2: PureState, basis: LocalEigensystem) -> PureState:
    L = s2.num_sites // 2
    for l in range(L):
        s2 = pm_cnot(s2, 2 * l, 2 * l + 1, basis)
    return s2


def encode(s: PureState, c) -> PureState:
    """Encode an L-qubit state into the ``m = 0`` sector of ``2L`` qubits.

    ``c`` is a uniform :class:`CouplingSpec`, a coupling triple, or a
    :class:`LocalEigensystem`.
    """
    basis = _basis_for(c)
    L = s.num_sites
    if s.dims != (2,) * L:
        raise DimensionError(f"expected a qubit state, got dims {s.dims}")
    if isinstance(c, CouplingSpec) and c.num_qubits not in (L, 2 * L):
        raise DimensionError(f"coupling covers {c.num_qubits} qubits, input has {L}")
    joint = PureState((2,) * (2 * L), _interleave(s.amplitudes, prepare_ancillas(L, basis).amplitudes, L))
    return _cnot_layer(joint, basis)


def decode(s2: PureState, c) -> PureState:
    """Undo :func:`encode`; raises :class:`NotACodewordError` unless every ancilla returns to ``|+1>``."""
    basis = _basis_for(c)
    n = s2.num_sites
    if n % 2 or s2.dims != (2,) * n:
        raise DimensionError(f"expected an even number of qubits, got dims {s2.dims}")
    L = n // 2
    joint = _cnot_layer(s2, basis).tensor()
    # bring data qubits first, ancillas last
    order = [2 * l for l in range(L)] + [2 * l + 1 for l in range(L)]
    mat = joint.transpose(order).reshape(2**L, 2**L)
    anc = prepare_ancillas(L, basis).amplitudes
    data = mat @ anc.conj()
    residual = 1.0 - float(np.vdot(data, data).real)
    if residual > CODEWORD_ATOL:
        raise NotACodewordError(f"ancillas not restored to |+1>: residual weight {residual:.3e}")
    return PureState((2,) * L, data / np.linalg.norm(data))


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2``; insensitive to global phase."""
    if a.dims != b.dims:
        raise DimensionError(f"dims differ: {a.dims} vs {b.dims}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


@dataclass(frozen=True)
class EfficiencyBound:
    L: int
    eta: float
    asymptote: float
    cost_pi_L_over_2: float
    cost_pi_over_2L: float


def efficiency_max(L: int) -> EfficiencyBound:
    """Largest encoding efficiency using the whole ``m = 0`` sector of 2L qubits.

    ``eta = log2 C(2L, L) / (2L)``, compared with its large-L form
    ``1 - log2(pi L) / (4L)``.  The two ``cost_*`` fields give the number of
    physical qubits needed for L logical ones under the two readings of
    ``L + 1/2 log2(pi/2 L)``: ``(pi/2)*L`` and ``pi/(2L)``.
    """
    if L < 1:
        raise DimensionError(f"L must be >= 1, got {L}")
    eta = math.log2(math.comb(2 * L, L)) / (2 * L)
    asymptote = 1.0 - math.log2(math.pi * L) / (4 * L)
    return EfficiencyBound(
        L=L,
        eta=eta,
        asymptote=asymptote,
        cost_pi_L_over_2=L + 0.5 * math.log2(math.pi / 2 * L),
        cost_pi_over_2L=L + 0.5 * math.log2(math.pi / (2 * L)),
    )
