import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopdecoherence.errors import DimensionError, InvalidStateError
from coopdecoherence.qubit_core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    PauliAxis,
    PureState,
    apply_site_operator,
    bit_to_label,
    idempotency_defect,
    label_to_bit,
    partial_trace,
    pauli_string_expectation,
    tensor,
)
from oracles import dense_pauli_string

UP = PureState.basis([1])


def random_density(dims, rng, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return DensityMatrix(dims, rho / np.trace(rho))


class TestConventions:
    def test_label_bit_roundtrip(self):
        assert [bit_to_label(b) for b in (0, 1)] == [1, -1]
        assert [label_to_bit(i) for i in (1, -1)] == [0, 1]

    def test_plus_one_is_sigma_z_up(self):
        np.testing.assert_array_equal(UP.amplitudes, [1, 0])
        np.testing.assert_allclose(SIGMA_Z @ UP.amplitudes, UP.amplitudes)

    def test_pauli_axis_matrices(self):
        for axis in (PauliAxis.X, PauliAxis.Y, PauliAxis.Z):
            m = axis.matrix
            assert np.trace(m) == 0
            np.testing.assert_allclose(m, m.conj().T)
            np.testing.assert_allclose(m @ m, np.eye(2))


class TestStates:
    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidStateError):
            PureState((2,), [1, 1])

    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidStateError):
            PureState((2, 2), [1, 0])

    def test_density_checks(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix((2,), [[1, 1], [0, 0]])
        with pytest.raises(InvalidStateError):
            DensityMatrix((2,), np.diag([1.5, -0.5]))
        with pytest.raises(InvalidStateError):
            DensityMatrix((2,), np.diag([0.5, 0.6]))

    def test_amplitudes_immutable(self):
        with pytest.raises(ValueError):
            UP.amplitudes[0] = 0


class TestTensor:
    def test_product_basis_state(self):
        np.testing.assert_array_equal(tensor(UP, UP).amplitudes, [1, 0, 0, 0])

    def test_linearity_example(self):
        alpha, beta = 0.6, 0.8j
        s = tensor(PureState((2,), [alpha, beta]), UP)
        np.testing.assert_allclose(s.amplitudes, [alpha, 0, beta, 0])
        assert s.dims == (2, 2)

    def test_norm_preserved(self, rng):
        for _ in range(100):
            a = PureState.random((2,), rng)
            b = PureState.random((3, 2), rng)
            assert abs(np.linalg.norm(tensor(a, b).amplitudes) - 1) < 1e-12

    def test_associative_exact_on_dyadic_amplitudes(self):
        a = PureState((2,), [0.6, 0.8])
        b = PureState((2,), [0.5j, math.sqrt(0.75)])
        c = PureState((3,), [0, 1, 0])
        np.testing.assert_array_equal(
            tensor(tensor(a, b), c).amplitudes, tensor(a, tensor(b, c)).amplitudes
        )

    def test_associative_random(self, rng):
        # complex products are not associative bit-for-bit
        a, b, c = (PureState.random((2,), rng) for _ in range(3))
        np.testing.assert_allclose(
            tensor(tensor(a, b), c).amplitudes, tensor(a, tensor(b, c)).amplitudes, rtol=0, atol=1e-15
        )


class TestApplySiteOperator:
    def test_z_eigenvector(self):
        np.testing.assert_allclose(apply_site_operator(UP, 0, SIGMA_Z).amplitudes, [1, 0])

    def test_x_flips(self):
        np.testing.assert_allclose(apply_site_operator(UP, 0, SIGMA_X).amplitudes, [0, 1])

    def test_y_gives_i_down(self):
        # 2x2 product [[0,-i],[i,0]] @ (1,0) = (0, i)
        np.testing.assert_allclose(apply_site_operator(UP, 0, SIGMA_Y).amplitudes, [0, 1j])

    def test_matches_kron(self, rng):
        s = PureState.random((2, 3, 2), rng)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        full = np.kron(np.kron(np.eye(2), q), np.eye(2))
        np.testing.assert_allclose(apply_site_operator(s, 1, q).amplitudes, full @ s.amplitudes, atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            apply_site_operator(UP, 0, np.eye(3))
        with pytest.raises(DimensionError):
            apply_site_operator(UP, 1, SIGMA_X)


class TestPauliExpectation:
    def test_examples(self):
        bell = PureState.qubits([1, 0, 0, 1], normalize=True)
        assert pauli_string_expectation(UP, [(0, "Z")]) == 1.0
        assert pauli_string_expectation(UP, [(0, PauliAxis.X)]) == 0.0
        assert pauli_string_expectation(bell, [(0, "Z"), (1, "Z")]) == pytest.approx(1.0, abs=1e-12)

    def test_repeated_site(self):
        with pytest.raises(DimensionError):
            pauli_string_expectation(UP, [(0, "X"), (0, "Z")])

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(1, 4),
        axes=st.lists(st.sampled_from("IXYZ"), min_size=4, max_size=4),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_matches_dense(self, n, axes, seed):
        s = PureState.random((2,) * n, np.random.default_rng(seed))
        ops = list(enumerate(axes[:n]))
        dense = np.vdot(s.amplitudes, dense_pauli_string(ops, n) @ s.amplitudes).real
        assert abs(pauli_string_expectation(s, ops) - dense) < 1e-12


class TestPartialTrace:
    def test_product_state(self, rng):
        a = PureState.random((2,), rng)
        b = PureState.random((3,), rng)
        red = partial_trace(tensor(a, b).density(), [0])
        np.testing.assert_allclose(red.entries, np.outer(a.amplitudes, a.amplitudes.conj()), atol=1e-14)
        red_b = partial_trace(tensor(a, b).density(), [1])
        np.testing.assert_allclose(red_b.entries, np.outer(b.amplitudes, b.amplitudes.conj()), atol=1e-14)

    def test_bell_state(self):
        bell = PureState.qubits([1, 0, 0, 1], normalize=True)
        np.testing.assert_allclose(partial_trace(bell.density(), [0]).entries, np.eye(2) / 2, atol=1e-15)

    def test_trace_preserved(self, rng):
        for _ in range(100):
            rho = random_density((2, 3, 2), rng)
            keep = rng.choice(3, size=rng.integers(1, 4), replace=False)
            red = partial_trace(rho, keep)
            assert abs(np.trace(red.entries) - 1) < 1e-12

    def test_matches_index_loop(self, rng):
        rho = random_density((2, 3), rng)
        manual = np.zeros((3, 3), dtype=complex)
        r = rho.entries.reshape(2, 3, 2, 3)
        for i in range(2):
            manual += r[i, :, i, :]
        np.testing.assert_allclose(partial_trace(rho, [1]).entries, manual, atol=1e-15)

    def test_linear(self, rng):
        r1, r2 = random_density((2, 2, 2), rng), random_density((2, 2, 2), rng)
        a = 0.3
        mix = DensityMatrix((2, 2, 2), a * r1.entries + (1 - a) * r2.entries)
        lhs = partial_trace(mix, [0, 2]).entries
        rhs = a * partial_trace(r1, [0, 2]).entries + (1 - a) * partial_trace(r2, [0, 2]).entries
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_empty_keep(self, rng):
        with pytest.raises(DimensionError):
            partial_trace(random_density((2,), rng), [])


class TestIdempotencyDefect:
    def test_pure(self, rng):
        assert abs(idempotency_defect(PureState.random((2, 2), rng).density())) < 1e-12

    def test_maximally_mixed(self):
        assert idempotency_defect(DensityMatrix((2,), np.eye(2) / 2)) == pytest.approx(0.5, abs=1e-15)

    def test_diag_three_quarters(self):
        # 1 - (9/16 + 1/16)
        assert idempotency_defect(DensityMatrix((2,), np.diag([0.75, 0.25]))) == pytest.approx(0.375, abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(dims=st.sampled_from([(2,), (3,), (2, 2), (2, 3)]), rank=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
    def test_bounds(self, dims, rank, seed):
        rho = random_density(dims, np.random.default_rng(seed), rank=min(rank, int(np.prod(dims))))
        d = idempotency_defect(rho)
        assert -1e-12 <= d <= 1 - 1 / rho.dim + 1e-12
        if rank == 1:
            assert abs(d) < 1e-10
