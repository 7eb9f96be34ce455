import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qforest.circuit import Circuit, CircuitError, Gate, Kind, inverse
from qforest.decompose import (
    StructuralError,
    check_rc3x_pairing,
    gray,
    lower_mcx_recursion,
    lower_mcx_ucg,
    lower_mcz,
    lower_rc3x,
    lower_swap,
    lower_to_basis,
    lower_ucg_ry,
    mcx_table,
    rc3x_inverse_sequence,
    recursion_split,
    select_mcx_strategy,
)
from qforest.simulator import Statevector, run, unitary_of


def _u(gates, width):
    return unitary_of(Circuit(width, list(gates)))


def _mcx(k):
    return _u([Gate(Kind.MCX, tuple(range(k + 1)))], k + 1)


def _cx(gates):
    return sum(g.kind is Kind.CX for g in gates)


class TestSwap:
    def test_sequence(self):
        assert lower_swap(0, 1) == [Gate(Kind.CX, (0, 1)), Gate(Kind.CX, (1, 0)),
                                    Gate(Kind.CX, (0, 1))]

    def test_basis_states(self):
        c = Circuit(2, lower_swap(0, 1))
        np.testing.assert_array_equal(run(c, Statevector.basis(2, 0b01)).amplitudes, [0, 0, 1, 0])
        np.testing.assert_array_equal(run(c).amplitudes, [1, 0, 0, 0])

    def test_same_qubit(self):
        with pytest.raises(CircuitError):
            lower_swap(1, 1)


class TestUcgRy:
    def test_zero_angles_identity(self):
        np.testing.assert_allclose(_u(lower_ucg_ry((0, 1), 2, [0.0] * 4), 3), np.eye(8), atol=1e-12)

    def test_select_independent(self):
        got = _u(lower_ucg_ry((0,), 1, [0.7, 0.7]), 2)
        want = _u([Gate(Kind.RY, (1,), angle=0.7)], 2)
        np.testing.assert_allclose(got, want, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), k=st.integers(1, 4))
    def test_equals_composite_gate(self, seed, k):
        rng = np.random.default_rng(seed)
        perm = [int(q) for q in rng.permutation(k + 1)]
        angles = rng.uniform(-np.pi, np.pi, 2 ** k)
        got = _u(lower_ucg_ry(perm[:-1], perm[-1], angles), k + 1)
        want = _u([Gate(Kind.UCG_RY, tuple(perm), angles=tuple(angles))], k + 1)
        assert np.max(np.abs(got - want)) <= 1e-10

    @pytest.mark.parametrize("k", range(0, 7))
    def test_counts(self, k):
        gates = lower_ucg_ry(range(k), k, [0.1] * 2 ** k)
        assert _cx(gates) == (2 ** k if k else 0)
        assert len(gates) - _cx(gates) == 2 ** k

    def test_wrong_angle_count(self):
        with pytest.raises(CircuitError):
            lower_ucg_ry((0, 1), 2, [0.0] * 3)

    def test_gray_code_neighbours(self):
        for m in range(63):
            assert bin(gray(m) ^ gray(m + 1)).count("1") == 1


class TestMctUcg:
    @pytest.mark.parametrize("k", range(2, 10))
    def test_counts(self, k):
        gates = lower_mcx_ucg(range(k), k)
        assert (len(gates) - _cx(gates), _cx(gates)) == (2 ** k, 2 ** k - 1)

    def test_single_control_is_cx(self):
        assert lower_mcx_ucg((3,), 0) == [Gate(Kind.CX, (3, 0))]

    def test_no_controls(self):
        with pytest.raises(CircuitError):
            lower_mcx_ucg((), 0)

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_same_permutation_as_mcx(self, k):
        got = _u(lower_mcx_ucg(range(k), k), k + 1)
        np.testing.assert_allclose(np.abs(got), _mcx(k), atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_residual_is_the_documented_diagonal(self, k):
        # lowered = MCX @ D, D = Z on the target for patterns with the last
        # control set but not all controls set
        got = _u(lower_mcx_ucg(range(k), k), k + 1)
        d = np.ones(2 ** (k + 1))
        full, msb = 2 ** k - 1, 2 ** (k - 1)
        for idx in range(2 ** (k + 1)):
            s, t = idx & full, idx >> k
            if s & msb and s != full and t:
                d[idx] = -1
        np.testing.assert_allclose(got, _mcx(k) @ np.diag(d), atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_exact_on_clean_target(self, k):
        # residual is invisible when the target starts at 0 ...
        got, want = _u(lower_mcx_ucg(range(k), k), k + 1), _mcx(k)
        clean = list(range(2 ** k))
        np.testing.assert_allclose(got[:, clean], want[:, clean], atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_exact_on_uncompute(self, k):
        # ... and when it holds the AND of the controls
        got, want = _u(lower_mcx_ucg(range(k), k), k + 1), _mcx(k)
        cols = [s | (int(s == 2 ** k - 1) << k) for s in range(2 ** k)]
        np.testing.assert_allclose(got[:, cols], want[:, cols], atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_compute_uncompute_is_identity(self, k):
        gates = lower_mcx_ucg(range(k), k)
        np.testing.assert_allclose(_u(gates + gates, k + 1), np.eye(2 ** (k + 1)), atol=1e-12)


class TestRecursion:
    @pytest.mark.parametrize("k", [3, 4, 5, 6, 7, 8])
    def test_exact_with_clean_ancilla(self, k):
        width = k + 2
        got = _u(lower_mcx_recursion(range(k), k, k + 1), width)
        want = _u([Gate(Kind.MCX, tuple(range(k + 1)))], width)
        clean = [c for c in range(2 ** width) if not (c >> (k + 1)) & 1]
        np.testing.assert_allclose(got[:, clean], want[:, clean], atol=1e-10)

    def test_controls_zero(self):
        out = run(Circuit(5, lower_mcx_recursion((0, 1, 2), 3, 4)))
        assert abs(out.amplitudes[0]) == pytest.approx(1.0)

    def test_cheaper_than_ucg_from_eight(self):
        for row in mcx_table(9, 8):
            assert row.recursion_cx < row.ucg_cx

    def test_errors(self):
        with pytest.raises(CircuitError):
            lower_mcx_recursion((0, 1, 2), 3, None)
        with pytest.raises(CircuitError):
            lower_mcx_recursion((0, 1), 2, 3)
        with pytest.raises(CircuitError):
            lower_mcx_recursion((0, 1, 2), 3, 2)

    def test_split_in_range(self):
        for k in range(3, 12):
            assert 1 <= recursion_split(k) < k


class TestMcz:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_exact(self, k):
        got = _u(lower_mcz(range(k), k), k + 1)
        want = _u([Gate(Kind.MCZ, tuple(range(k)))], k + 1)
        assert np.max(np.abs(got - want)) <= 1e-10

    def test_needs_spare(self):
        with pytest.raises(CircuitError, match="spare"):
            lower_mcz((0, 1, 2))


class TestRc3x:
    def test_counts(self):
        gates = lower_rc3x((0, 1, 2), 3)
        assert (_cx(gates), len(gates) - _cx(gates)) == (6, 12)

    def test_pattern_and_phases_are_diagonal(self):
        u = _u(lower_rc3x((0, 1, 2), 3), 4)
        cccx = _mcx(3)
        np.testing.assert_allclose(np.abs(u), cccx, atol=1e-10)
        d = cccx.T @ u
        np.testing.assert_allclose(d, np.diag(np.diag(d)), atol=1e-10)

    def test_inverse_undoes(self):
        gates = lower_rc3x((0, 1, 2), 3) + rc3x_inverse_sequence((0, 1, 2), 3)
        np.testing.assert_allclose(_u(gates, 4), np.eye(16), atol=1e-10)

    def test_pairing(self):
        c = Circuit(5).rc3x((0, 1, 2), 3).cx(0, 4).ry(0.3, 4)
        c.extend(rc3x_inverse_sequence((0, 1, 2), 3))
        check_rc3x_pairing(c)
        lowered = lower_to_basis(c)
        assert lowered.is_basis

    def test_unpaired_rejected(self):
        with pytest.raises(StructuralError):
            lower_to_basis(Circuit(4).rc3x((0, 1, 2), 3))

    def test_target_touched_between_rejected(self):
        c = Circuit(4).rc3x((0, 1, 2), 3).h(3)
        c.extend(rc3x_inverse_sequence((0, 1, 2), 3))
        with pytest.raises(StructuralError):
            check_rc3x_pairing(c)

    def test_circuit_then_its_inverse_passes(self):
        c = Circuit(4).h(0).rc3x((0, 1, 2), 3)
        both = c + inverse(c)
        lowered = lower_to_basis(both)
        np.testing.assert_allclose(unitary_of(lowered), np.eye(16), atol=1e-10)


class TestSelector:
    def test_threshold(self):
        assert select_mcx_strategy(1).name == "ucg"
        assert select_mcx_strategy(7).name == "ucg"
        assert select_mcx_strategy(8, ancilla=0).is_recursion
        assert select_mcx_strategy(8, ancilla=0).ancilla == 0

    def test_invalid(self):
        with pytest.raises(ValueError):
            select_mcx_strategy(0)


class TestLowerToBasis:
    def test_swap(self):
        assert lower_to_basis(Circuit(2).swap(0, 1)).count_gates().cx_count == 3

    def test_mcx_k3(self):
        r = lower_to_basis(Circuit(4).mcx((0, 1, 2), 3)).count_gates()
        assert (r.u_count, r.cx_count) == (8, 7)

    def test_mcx_with_ancilla_uses_recursion(self):
        c = Circuit(10).mcx(range(8), 8, ancilla=9)
        assert lower_to_basis(c).count_gates().cx_count == 94

    def test_output_is_basis(self):
        c = Circuit(5).swap(0, 1).cz(1, 2).mcz((0, 1, 2), ancilla=3).ucg_ry((0, 1), 4, [1, 2, 3, 4])
        low = lower_to_basis(c)
        assert low.is_basis
        assert low.width == c.width
        assert np.max(np.abs(unitary_of(low) - unitary_of(c))) <= 1e-10


class TestTable:
    def test_rows(self):
        rows = {r.k: r for r in mcx_table()}
        assert (rows[2].ucg_u, rows[2].ucg_cx) == (4, 3)
        assert (rows[4].ucg_u, rows[4].ucg_cx) == (16, 15)
        assert rows[2].recursion_cx is None

    def test_monotone(self):
        rows = mcx_table()
        for a, b in zip(rows, rows[1:]):
            assert b.ucg_cx >= a.ucg_cx
            if a.recursion_cx is not None:
                assert b.recursion_cx >= a.recursion_cx

    def test_bounds(self):
        with pytest.raises(ValueError):
            mcx_table(10)
