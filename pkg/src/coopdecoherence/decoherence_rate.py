"""
Closed-form short-time decoherence rates ``1/tau_2^2`` (units hbar = k_B = 1).

The idempotency defect of the qubits starts as ``delta(t) = t^2 / tau_2^2``.
For a product initial state ``|psi><psi| ⊗ rho_bath`` with a thermal bath,
the coefficient reduces to a contraction of bath and qubit second moments::

    1/tau_2^2 = 2 sum_{i,j,mu,nu} B_{i mu, j nu} Cov_{i mu, j nu}

    Cov_{a,b} = <psi| s_a s_b |psi> - <psi|s_a|psi><psi|s_b|psi>
    B_{a,b}   = <H_a H_b>_bath,  H_a = sum_w lambda_{w,a} (b_w^+ + b_w)

Bath correlator.  Every mode is in its own thermal state, which is diagonal
in the Fock basis.  Hence ``<b_w> = <b_w^+> = 0`` and, for two different
modes, ``<X_w X_w'> = <X_w><X_w'> = 0`` with ``X_w = b_w + b_w^+``.  For one
mode ``<X_w^2> = <b b^+> + <b^+ b> = 2 N_w + 1`` (the ``b b`` and ``b^+ b^+``
terms vanish for a diagonal state).  Therefore::

    B_{a,b} = sum_w lambda_{w,a} lambda_{w,b} (2 N_w + 1)

which is real and symmetric.  When ``lambda_{w,l,mu} = lambda_{l,mu} kappa(w)``
the double sum collapses to ``Omega^2 * Var(A)`` with
``Omega^2 = 2 sum_w kappa(w)^2 (2 N_w + 1)``.  The bath simulator evaluates
the same coefficient from the dense Hamiltonian as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .collective_operator import CouplingSpec, variance_A
from .errors import CoopDecoherenceError, DimensionError
from .qubit_core import PAULI_XYZ, PauliAxis, PureState, apply_local, pauli_string_expectation

NEGATIVE_TOL = 1e-10


def _clamp(value: float, what: str) -> float:
    if value < -NEGATIVE_TOL:
        raise ArithmeticError(f"{what} came out negative: {value!r}")
    return max(value, 0.0)


@dataclass(frozen=True)
class BathSpec:
    """Harmonic bath: discrete ``(omega, kappa)`` modes or a continuum grid, at temperature T.

    ``continuum=True`` interprets ``modes`` as samples of ``kappa(omega)`` on a
    strictly increasing frequency grid.
    """

    modes: tuple[tuple[float, float], ...]
    temperature: float = 0.0
    continuum: bool = False

    def __post_init__(self):
        modes = tuple((float(w), float(k)) for w, k in self.modes)
        if not modes:
            raise DimensionError("bath needs at least one mode / grid point")
        if any(not w > 0 or not math.isfinite(w) for w, _ in modes):
            raise CoopDecoherenceError("mode frequencies must be finite and positive")
        if self.continuum and any(b[0] <= a[0] for a, b in zip(modes, modes[1:])):
            raise CoopDecoherenceError("continuum grid must be strictly increasing")
        if not self.temperature >= 0 or not math.isfinite(self.temperature):
            raise CoopDecoherenceError(f"temperature must be >= 0, got {self.temperature!r}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "temperature", float(self.temperature))

    @property
    def omegas(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def kappas(self) -> np.ndarray:
        return np.array([k for _, k in self.modes])

    def occupations(self) -> np.ndarray:
        return np.array([mean_occupation(w, self.temperature) for w, _ in self.modes])


@dataclass(frozen=True)
class PerModeCouplings:
    """Couplings ``lambda[w, l, mu]`` of mode w to sigma_mu on qubit l (array shape modes x qubits x 3)."""

    values: np.ndarray

    def __post_init__(self):
        lam = np.array(self.values, dtype=float)
        if lam.ndim != 3 or lam.shape[2] != 3 or lam.shape[0] == 0 or lam.shape[1] == 0:
            raise DimensionError(f"per-mode couplings must have shape (modes, qubits, 3), got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise CoopDecoherenceError("per-mode couplings must be finite")
        if not np.any(lam):
            raise CoopDecoherenceError("per-mode couplings are all zero")
        lam.setflags(write=False)
        object.__setattr__(self, "values", lam)

    @classmethod
    def factored(cls, c: CouplingSpec, kappas) -> "PerModeCouplings":
        return cls(np.einsum("w,lm->wlm", np.asarray(kappas, dtype=float), np.array(c.per_qubit)))

    @property
    def num_modes(self) -> int:
        return self.values.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.values.shape[1]


def mean_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation ``1/(exp(omega/T) - 1)``; exactly 0 at T = 0."""
    if not omega > 0:
        raise CoopDecoherenceError(f"mode frequency must be positive, got {omega!r}")
    if T < 0:
        raise CoopDecoherenceError(f"temperature must be >= 0, got {T!r}")
    if T == 0:
        return 0.0
    x = omega / T
    if x > 700:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def omega_squared(b: BathSpec) -> float:
    """Bath strength ``4 sum_w kappa^2 (N_w + 1/2)`` (trapezoid rule on a continuum grid)."""
    integrand = b.kappas**2 * (b.occupations() + 0.5)
    if b.continuum:
        if len(b.modes) < 2:
            raise DimensionError("continuum quadrature needs at least two grid points")
        return 4.0 * float(trapezoid(integrand, b.omegas))
    return 4.0 * float(np.sum(integrand))


def rate_collective(c: CouplingSpec, s: PureState, b: BathSpec) -> float:
    """``Omega^2 Var(A)``: all qubits share one bath."""
    return _clamp(omega_squared(b) * variance_A(c, s), "collective rate")


def rate_independent(c: CouplingSpec, s: PureState, b: BathSpec) -> float:
    """``Omega^2 sum_l Var(A_l)``: each qubit has a private copy of the bath.

    Uses ``A_l^2 = a_l^2`` so only the single-qubit Bloch vectors are needed.
    """
    if s.dims != (2,) * c.num_qubits:
        raise DimensionError(f"coupling covers {c.num_qubits} qubits, state has dims {s.dims}")
    total = 0.0
    for l, triple in enumerate(c.per_qubit):
        bloch = [pauli_string_expectation(s, [(l, axis)]) for axis in (PauliAxis.X, PauliAxis.Y, PauliAxis.Z)]
        total += float(np.dot(triple, triple)) - float(np.dot(triple, bloch)) ** 2
    return _clamp(omega_squared(b) * total, "independent rate")


def bath_correlator(pm: PerModeCouplings, b: BathSpec) -> np.ndarray:
    """``B[(i,mu),(j,nu)] = sum_w lambda_{w i mu} lambda_{w j nu} (2 N_w + 1)``, flattened to (3L, 3L)."""
    if b.continuum:
        raise DimensionError("per-mode couplings need a discrete bath")
    if pm.num_modes != len(b.modes):
        raise DimensionError(f"couplings cover {pm.num_modes} modes, bath has {len(b.modes)}")
    weights = 2.0 * b.occupations() + 1.0
    lam = pm.values.reshape(pm.num_modes, -1)
    return np.einsum("w,wa,wb->ab", weights, lam, lam)


def qubit_covariance(s: PureState) -> np.ndarray:
    """``Cov[(i,mu),(j,nu)] = <s_a s_b> - <s_a><s_b>`` over all single-qubit Paulis, shape (3L, 3L)."""
    n = s.num_sites
    if s.dims != (2,) * n:
        raise DimensionError(f"expected a qubit state, got dims {s.dims}")
    vecs = np.array([apply_local(s.amplitudes, s.dims, l, p) for l in range(n) for p in PAULI_XYZ])
    means = (vecs @ s.amplitudes.conj()).real
    gram = vecs.conj() @ vecs.T
    return gram - np.outer(means, means)


def rate_general(pm: PerModeCouplings, s: PureState, b: BathSpec) -> float:
    """Short-time rate for arbitrary (non-factoring) per-mode couplings."""
    if pm.num_qubits != s.num_sites:
        raise DimensionError(f"couplings cover {pm.num_qubits} qubits, state has {s.num_sites} sites")
    value = 2.0 * np.sum(bath_correlator(pm, b) * qubit_covariance(s))
    return _clamp(float(value.real), "general rate")
