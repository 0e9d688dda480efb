"""
Exact dynamics of L qubits coupled to a few truncated harmonic modes.

    H = omega0 sum_l sz_l
        + sum_{w,l} (lx_{wl} sx_l + ly_{wl} sy_l + lz_{wl} sz_l)(b_w^+ + b_w)
        + sum_w omega_w b_w^+ b_w

The register is ordered qubits first, then modes.  The initial state is
``|psi><psi| ⊗ rho_thermal``; the Hamiltonian is diagonalized once and every
requested time is obtained by rotating the eigen-amplitudes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .collective_operator import CouplingSpec
from .decoherence_rate import BathSpec, PerModeCouplings, rate_general
from .errors import CoopDecoherenceError, DimensionCapError, DimensionError
from .qubit_core import PAULI_XYZ, SIGMA_Z, DensityMatrix, PureState

DEFAULT_DIM_CAP = 4096
LEAKAGE_FLAG = 1e-6
FIT_DELTA_MAX = 0.01
FIT_MIN_POINTS = 4


@dataclass(frozen=True)
class Mode:
    omega: float
    kappa: float
    n_max: int

    def __post_init__(self):
        if not self.omega > 0:
            raise CoopDecoherenceError(f"mode frequency must be positive, got {self.omega!r}")
        if int(self.n_max) < 1:
            raise CoopDecoherenceError(f"n_max must be >= 1, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to run one simulation.

    Couplings come either from ``coupling`` times each mode's ``kappa``
    (factored) or, when ``per_mode`` is given, from the explicit
    ``(modes, qubits, 3)`` array and the mode ``kappa`` values are ignored.
    """

    omega0: float
    coupling: CouplingSpec | None
    modes: tuple[Mode, ...]
    temperature: float
    times: tuple[float, ...]
    initial_state: PureState
    per_mode: PerModeCouplings | None = None
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        L = self.initial_state.num_sites
        if L < 1 or self.initial_state.dims != (2,) * L:
            raise DimensionError(f"initial state must be a qubit state, got dims {self.initial_state.dims}")
        if self.coupling is None and self.per_mode is None:
            raise CoopDecoherenceError("either coupling or per_mode couplings are required")
        if self.coupling is not None and self.coupling.num_qubits != L:
            raise DimensionError(f"coupling covers {self.coupling.num_qubits} qubits, state has {L}")
        if self.per_mode is not None and (
            self.per_mode.num_qubits != L or self.per_mode.num_modes != len(self.modes)
        ):
            raise DimensionError("per-mode couplings do not match the qubit / mode counts")
        if not self.temperature >= 0:
            raise CoopDecoherenceError(f"temperature must be >= 0, got {self.temperature!r}")
        if self.times and (self.times[0] < 0 or any(b <= a for a, b in zip(self.times, self.times[1:]))):
            raise CoopDecoherenceError("times must be non-negative and strictly increasing")
        if self.dim > self.dim_cap:
            raise DimensionCapError(f"Hilbert dimension {self.dim} exceeds cap {self.dim_cap}")

    @property
    def num_qubits(self) -> int:
        return self.initial_state.num_sites

    @property
    def qubit_dim(self) -> int:
        return 2**self.num_qubits

    @property
    def bath_dims(self) -> tuple[int, ...]:
        return tuple(m.n_max + 1 for m in self.modes)

    @property
    def bath_dim(self) -> int:
        return int(np.prod(self.bath_dims, dtype=int))

    @property
    def dim(self) -> int:
        return self.qubit_dim * self.bath_dim

    def couplings(self) -> np.ndarray:
        """``lambda[w, l, mu]`` as a dense array."""
        if self.per_mode is not None:
            return np.asarray(self.per_mode.values)
        kappas = np.array([m.kappa for m in self.modes])
        return np.einsum("w,lm->wlm", kappas, np.array(self.coupling.per_qubit)).reshape(
            len(self.modes), self.num_qubits, 3
        )

    def bath_spec(self) -> BathSpec:
        return BathSpec(tuple((m.omega, m.kappa) for m in self.modes), self.temperature)


def _embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == site else np.eye(d))
    return out


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def build_hamiltonian(cfg: SimConfig) -> np.ndarray:
    """Dense Hermitian Hamiltonian on ``qubits ⊗ modes``."""
    if cfg.dim > cfg.dim_cap:
        raise DimensionCapError(f"Hilbert dimension {cfg.dim} exceeds cap {cfg.dim_cap}")
    L = cfg.num_qubits
    qdims = (2,) * L
    dq, db = cfg.qubit_dim, cfg.bath_dim
    h_qubit = sum(_embed(SIGMA_Z, l, qdims) for l in range(L)) * cfg.omega0
    h_bath = np.zeros((db, db), dtype=complex)
    lam = cfg.couplings()
    coupling_terms = []
    for w, mode in enumerate(cfg.modes):
        a = _ladder(mode.n_max)
        h_bath += mode.omega * _embed(a.conj().T @ a, w, cfg.bath_dims)
        x_w = _embed(a + a.conj().T, w, cfg.bath_dims)
        q_op = np.zeros((dq, dq), dtype=complex)
        for l in range(L):
            for mu in range(3):
                if lam[w, l, mu]:
                    q_op += lam[w, l, mu] * _embed(PAULI_XYZ[mu], l, qdims)
        if np.any(q_op):
            coupling_terms.append((q_op, x_w))
    H = np.kron(h_qubit, np.eye(db)) + np.kron(np.eye(dq), h_bath)
    for q_op, x_w in coupling_terms:
        H += np.kron(q_op, x_w)
    return H


def thermal_populations(mode: Mode, temperature: float) -> tuple[np.ndarray, float]:
    """Truncated, renormalized Boltzmann weights of one mode and the discarded mass."""
    if temperature == 0:
        p = np.zeros(mode.n_max + 1)
        p[0] = 1.0
        return p, 0.0
    x = math.exp(-mode.omega / temperature)
    n = np.arange(mode.n_max + 1)
    p = x**n
    leakage = x ** (mode.n_max + 1)
    return p / p.sum(), float(leakage)


def thermal_state(modes: Sequence[Mode], temperature: float) -> DensityMatrix:
    """Product of per-mode thermal states truncated at ``n_max`` (vacuum at T = 0)."""
    probs = _bath_probabilities(modes, temperature)
    return DensityMatrix(tuple(m.n_max + 1 for m in modes), np.diag(probs))


def _bath_probabilities(modes: Sequence[Mode], temperature: float) -> np.ndarray:
    probs = np.ones(1)
    for m in modes:
        probs = np.kron(probs, thermal_populations(m, temperature)[0])
    return probs


def truncation_leakage(cfg: SimConfig) -> list[float]:
    return [thermal_populations(m, cfg.temperature)[1] for m in cfg.modes]


@dataclass
class SimTrace:
    times: np.ndarray
    delta: np.ndarray
    purity: np.ndarray
    fitted_rate: float | None
    closed_form_rate: float
    exact_rate: float
    leakage: list[float] = field(default_factory=list)
    fit_points: int = 0

    @property
    def leakage_flagged(self) -> bool:
        return any(x > LEAKAGE_FLAG for x in self.leakage)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "delta", "purity"])
        for t, d, p in zip(self.times, self.delta, self.purity):
            writer.writerow([f"{t:.17g}", f"{d:.17g}", f"{p:.17g}"])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "schema": 1,
            "fitted_rate": self.fitted_rate,
            "closed_form_rate": self.closed_form_rate,
            "exact_rate": self.exact_rate,
            "fit_points": self.fit_points,
            "leakage": list(self.leakage),
            "leakage_flagged": self.leakage_flagged,
        }


def fit_short_time_rate(times, delta) -> tuple[float | None, int]:
    """Least-squares ``delta ~ r t^2`` on the leading run of times with ``delta < 0.01``.

    Returns ``(None, n)`` when fewer than four positive times qualify.
    """
    times = np.asarray(times, dtype=float)
    delta = np.asarray(delta, dtype=float)
    stop = 0
    while stop < len(times) and delta[stop] < FIT_DELTA_MAX:
        stop += 1
    t, d = times[:stop], delta[:stop]
    mask = t > 0
    t, d = t[mask], d[mask]
    if len(t) < FIT_MIN_POINTS:
        return None, len(t)
    t2 = t**2
    return float(np.dot(d, t2) / np.dot(t2, t2)), len(t)


@dataclass(frozen=True)
class Propagator:
    """Eigendecomposition of H, reused for every evolution time."""

    energies: np.ndarray
    vectors: np.ndarray

    @classmethod
    def of(cls, H: np.ndarray) -> "Propagator":
        e, v = np.linalg.eigh(H)
        return cls(e, v)


def _initial_columns(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``sqrt(p_b) |psi> ⊗ |b>`` over bath Fock states with nonzero weight."""
    probs = _bath_probabilities(cfg.modes, cfg.temperature)
    occupied = np.flatnonzero(probs > 0)
    cols = np.zeros((cfg.dim, occupied.size), dtype=complex)
    for k, b in enumerate(occupied):
        e_b = np.zeros(cfg.bath_dim)
        e_b[b] = 1.0
        cols[:, k] = math.sqrt(probs[b]) * np.kron(cfg.initial_state.amplitudes, e_b)
    return cols, probs


def reduced_qubit_states(
    cfg: SimConfig, times: Sequence[float] | None = None, H: np.ndarray | None = None
) -> list[np.ndarray]:
    """Qubit density matrices ``tr_bath rho(t)`` at each time."""
    times = cfg.times if times is None else times
    prop = Propagator.of(build_hamiltonian(cfg) if H is None else H)
    cols, _ = _initial_columns(cfg)
    coeffs = prop.vectors.conj().T @ cols
    out = []
    for t in times:
        evolved = prop.vectors @ (np.exp(-1j * prop.energies * t)[:, None] * coeffs)
        # rows: qubit index; columns: (bath index, thermal component)
        x = evolved.reshape(cfg.qubit_dim, cfg.bath_dim, -1).reshape(cfg.qubit_dim, -1)
        out.append(x @ x.conj().T)
    return out


def evolve_delta(cfg: SimConfig) -> SimTrace:
    """Idempotency defect and purity of the qubits over ``cfg.times``, with the short-time fit."""
    if not cfg.times:
        raise CoopDecoherenceError("no evolution times given")
    H = build_hamiltonian(cfg)
    rhos = reduced_qubit_states(cfg, H=H)
    purity = np.array([float(np.sum(np.abs(r) ** 2)) for r in rhos])
    delta = np.array([float(np.trace(r).real) for r in rhos]) - purity
    fitted, npts = fit_short_time_rate(cfg.times, delta)
    return SimTrace(
        times=np.array(cfg.times),
        delta=delta,
        purity=purity,
        fitted_rate=fitted,
        closed_form_rate=closed_form_rate(cfg),
        exact_rate=tau2_exact(cfg, H),
        leakage=truncation_leakage(cfg),
        fit_points=npts,
    )


def closed_form_rate(cfg: SimConfig) -> float:
    lam = cfg.couplings()
    if not np.any(lam):
        return 0.0
    return rate_general(PerModeCouplings(lam), cfg.initial_state, cfg.bath_spec())


def tau2_exact(cfg: SimConfig, H: np.ndarray | None = None) -> float:
    """Short-time rate ``1/tau_2^2`` straight from the dense H and the initial product state.

        1/(2 tau_2^2) = <H^2>_12 + <H>_12^2 - <<H>_1^2>_2 - <<H>_2^2>_1

    with ``<H>_1 = <psi|H|psi>`` (a bath operator), ``<H>_2 = tr_bath(rho_bath H)``
    (a qubit operator) and ``<.>_12`` the full average.
    """
    if H is None:
        H = build_hamiltonian(cfg)
    dq, db = cfg.qubit_dim, cfg.bath_dim
    psi = cfg.initial_state.amplitudes
    p = _bath_probabilities(cfg.modes, cfg.temperature)
    H4 = H.reshape(dq, db, dq, db)

    h_over_bath = np.einsum("b,ibjb->ij", p, H4)  # <H>_2
    h_over_qubits = np.einsum("i,ibjc,j->bc", psi.conj(), H4, psi)  # <H>_1

    cols, _ = _initial_columns(cfg)
    h_cols = H @ cols
    h2_full = float(np.sum(np.abs(h_cols) ** 2))
    h_full = float(np.sum(cols.conj() * h_cols).real)
    mean_sq_bath = float(np.sum(p * np.sum(np.abs(h_over_qubits) ** 2, axis=0)))
    mean_sq_qubits = float(np.linalg.norm(h_over_bath @ psi) ** 2)

    value = 2.0 * (h2_full + h_full**2 - mean_sq_bath - mean_sq_qubits)
    if value < -1e-10 * max(1.0, h2_full):
        raise ArithmeticError(f"exact short-time rate came out negative: {value!r}")
    return max(value, 0.0)


def independent_config(
    omega0: float,
    coupling: CouplingSpec,
    modes: Sequence[Mode],
    temperature: float,
    times: Sequence[float],
    initial_state: PureState,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> SimConfig:
    """Give every qubit its own private copy of ``modes`` (separate environments)."""
    L = coupling.num_qubits
    n = len(modes)
    lam = np.zeros((L * n, L, 3))
    for l, triple in enumerate(coupling.per_qubit):
        for w, m in enumerate(modes):
            lam[l * n + w, l] = m.kappa * np.asarray(triple)
    return SimConfig(
        omega0=omega0,
        coupling=None,
        modes=tuple(modes) * L,
        temperature=temperature,
        times=tuple(times),
        initial_state=initial_state,
        per_mode=PerModeCouplings(lam),
        dim_cap=dim_cap,
    )


# -- JSON config ---------------------------------------------------------------


def state_from_interleaved(values, num_qubits: int | None = None) -> PureState:
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size % 2:
        raise DimensionError("state must be an even-length list of interleaved re/im values")
    amps = vals[0::2] + 1j * vals[1::2]
    n = int(round(math.log2(amps.size))) if amps.size else 0
    if amps.size == 0 or 2**n != amps.size:
        raise DimensionError(f"{amps.size} amplitudes is not a power of two")
    if num_qubits is not None and n != num_qubits:
        raise DimensionError(f"expected {num_qubits} qubits, state has {n}")
    return PureState((2,) * n, amps)


def state_to_interleaved(s: PureState) -> list[float]:
    out = []
    for z in s.amplitudes:
        out += [float(z.real), float(z.imag)]
    return out


def _parse_coupling(raw, L: int) -> CouplingSpec:
    arr = np.asarray(raw, dtype=float)
    if arr.shape == (3,):
        return CouplingSpec.uniform_coupling(arr, L)
    return CouplingSpec(tuple(map(tuple, arr)))


def _parse_mode(raw) -> Mode:
    if isinstance(raw, dict):
        return Mode(float(raw["omega"]), float(raw.get("kappa", 0.0)), int(raw["n_max"]))
    omega, kappa, n_max = raw
    return Mode(float(omega), float(kappa), int(n_max))


def config_from_dict(doc: dict) -> SimConfig:
    """Build a :class:`SimConfig` from its JSON form (see README for the schema)."""
    state = state_from_interleaved(doc["initial_state"])
    L = state.num_sites
    coupling = _parse_coupling(doc["coupling"], L) if doc.get("coupling") is not None else None
    per_mode = PerModeCouplings(doc["per_mode"]) if doc.get("per_mode") is not None else None
    return SimConfig(
        omega0=float(doc.get("omega0", 0.0)),
        coupling=coupling,
        modes=tuple(_parse_mode(m) for m in doc["modes"]),
        temperature=float(doc.get("temperature", 0.0)),
        times=tuple(float(t) for t in doc["times"]),
        initial_state=state,
        per_mode=per_mode,
        dim_cap=int(doc.get("dim_cap", DEFAULT_DIM_CAP)),
    )


def config_to_dict(cfg: SimConfig) -> dict:
    doc = {
        "omega0": cfg.omega0,
        "coupling": [list(t) for t in cfg.coupling.per_qubit] if cfg.coupling is not None else None,
        "modes": [{"omega": m.omega, "kappa": m.kappa, "n_max": m.n_max} for m in cfg.modes],
        "temperature": cfg.temperature,
        "times": list(cfg.times),
        "initial_state": state_to_interleaved(cfg.initial_state),
        "dim_cap": cfg.dim_cap,
    }
    if cfg.per_mode is not None:
        doc["per_mode"] = np.asarray(cfg.per_mode.values).tolist()
    return doc


def load_config(path) -> SimConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))
