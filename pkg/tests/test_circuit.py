import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgqst.circuit import (
    CLASS_I,
    CLASS_II,
    CircuitLayout,
    block_unitary,
    brick_wall,
    circuit_depth,
    circuit_unitary,
    ising_zz,
    random_params,
    single_block_layout,
    su2,
    two_qubit_gate_count,
)
from cgqst.linalg import DimensionMismatch

angles = st.floats(-10, 10, allow_nan=False)


def rz(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def ry(b):
    return np.array([[np.cos(b / 2), -np.sin(b / 2)], [np.sin(b / 2), np.cos(b / 2)]])


class TestSu2:
    def test_zero(self):
        np.testing.assert_allclose(su2(0, 0, 0), np.eye(2), atol=1e-15)

    def test_ry_pi(self):
        np.testing.assert_allclose(su2(0, np.pi, 0), [[0, -1], [1, 0]], atol=1e-15)

    @given(angles, angles, angles)
    @settings(max_examples=50, deadline=None)
    def test_matches_rotation_product_and_is_special_unitary(self, a, b, c):
        u = su2(a, b, c)
        np.testing.assert_allclose(u, rz(a) @ ry(b) @ rz(c), atol=1e-12)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
        assert abs(np.linalg.det(u) - 1) < 1e-12


class TestIsingZZ:
    def test_zero(self):
        np.testing.assert_allclose(ising_zz(0), np.eye(4), atol=1e-15)

    def test_pi(self):
        np.testing.assert_allclose(ising_zz(np.pi), np.diag([-1j, 1j, 1j, -1j]), atol=1e-15)

    @given(angles)
    @settings(max_examples=30, deadline=None)
    def test_inverse(self, t):
        np.testing.assert_allclose(ising_zz(t) @ ising_zz(-t), np.eye(4), atol=1e-12)

    def test_matches_exponential(self):
        from scipy.linalg import expm

        zz = np.diag([1.0, -1, -1, 1])
        np.testing.assert_allclose(ising_zz(0.7), expm(-0.35j * zz), atol=1e-12)


class TestBlocks:
    def test_class1_zero_is_identity(self):
        lay = single_block_layout(2, CLASS_I)
        np.testing.assert_allclose(block_unitary(lay.blocks[0], np.zeros(6)), np.eye(4), atol=1e-15)

    def test_class2_zero_is_identity(self):
        lay = single_block_layout(2, CLASS_II)
        np.testing.assert_allclose(block_unitary(lay.blocks[0], np.zeros(13)), np.eye(4), atol=1e-15)

    def test_class2_without_coupling_is_local(self, rng):
        p = rng.uniform(0, 2 * np.pi, 13)
        p[6] = 0.0
        blk = single_block_layout(2, CLASS_II).blocks[0]
        top = su2(*p[7:10]) @ su2(*p[0:3])
        bottom = su2(*p[10:13]) @ su2(*p[3:6])
        np.testing.assert_allclose(block_unitary(blk, p), np.kron(top, bottom), atol=1e-12)

    def test_class2_order(self, rng):
        p = rng.uniform(0, 2 * np.pi, 13)
        blk = single_block_layout(2, CLASS_II).blocks[0]
        pre = np.kron(su2(*p[0:3]), su2(*p[3:6]))
        post = np.kron(su2(*p[7:10]), su2(*p[10:13]))
        np.testing.assert_allclose(block_unitary(blk, p), post @ ising_zz(p[6]) @ pre, atol=1e-12)

    def test_param_slice_out_of_range(self):
        lay = CircuitLayout.build(2, [[(CLASS_II, 0)]])
        with pytest.raises(IndexError):
            block_unitary(lay.blocks[0], np.zeros(5))

    def test_class2_needs_pair(self):
        with pytest.raises(ValueError):
            CircuitLayout.build(3, [[(CLASS_II, 0, 3)]])


class TestLayout:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            CircuitLayout.build(3, [[(CLASS_II, 0), (CLASS_II, 1)]])

    def test_out_of_register(self):
        with pytest.raises(ValueError):
            CircuitLayout.build(2, [[(CLASS_II, 1)]])

    def test_brick_wall_offsets(self):
        lay = brick_wall(5, 2)
        pairs = [[b.qubit_slot for b in layer if b.kind is CLASS_II] for layer in lay.layers]
        assert pairs == [[0, 2], [1, 3]]
        for layer in lay.layers:
            touched = sorted(q for b in layer for q in b.qubits)
            assert touched == list(range(5))

    def test_json_round_trip(self, rng):
        lay = brick_wall(4, 3)
        params = random_params(lay, rng)
        text = json.dumps({"layout": lay.to_dict(), "params": params.tolist()})
        data = json.loads(text)
        back = CircuitLayout.from_dict(data["layout"])
        assert back == lay
        np.testing.assert_array_equal(np.array(data["params"]), params)
        np.testing.assert_array_equal(circuit_unitary(back, np.array(data["params"])), circuit_unitary(lay, params))


class TestCircuitUnitary:
    def test_empty(self):
        lay = CircuitLayout(3, [])
        np.testing.assert_array_equal(circuit_unitary(lay, np.zeros(0)), np.eye(8))

    def test_zero_class1_layer(self):
        lay = CircuitLayout.build(3, [[(CLASS_I, 0), (CLASS_I, 1), (CLASS_I, 2)]])
        np.testing.assert_allclose(circuit_unitary(lay, np.zeros(9)), np.eye(8), atol=1e-15)

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            circuit_unitary(brick_wall(2, 1), np.zeros(3))

    def test_layer_order_and_embedding(self, rng):
        lay = brick_wall(3, 2)
        p = random_params(lay, rng)
        b = lay.blocks
        # layer 0: class-II on (0,1) then class-I on 2; layer 1: class-I on 0, class-II on (1,2)
        l0 = np.kron(block_unitary(b[0], p), block_unitary(b[1], p))
        l1 = np.kron(block_unitary(b[2], p), block_unitary(b[3], p))
        np.testing.assert_allclose(circuit_unitary(lay, p), l1 @ l0, atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_unitary(self, seed, n, layers):
        lay = brick_wall(n, layers)
        u = circuit_unitary(lay, random_params(lay, np.random.default_rng(seed)))
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2**n), atol=1e-10)


class TestDepthAndCounts:
    def test_single_blocks(self):
        assert circuit_depth(single_block_layout(2, CLASS_II)) == 3
        assert circuit_depth(single_block_layout(2, CLASS_I)) == 1

    def test_stacked_class2(self):
        assert circuit_depth(CircuitLayout.build(2, [[(CLASS_II, 0)], [(CLASS_II, 0)]])) == 6

    def test_path_length_waits_for_partner(self):
        # the (1,2) block must wait for the (0,1) block on qubit 1
        lay = CircuitLayout.build(3, [[(CLASS_II, 0)], [(CLASS_II, 1)]])
        assert circuit_depth(lay) == 6
        lay = CircuitLayout.build(4, [[(CLASS_II, 0), (CLASS_II, 2)]])
        assert circuit_depth(lay) == 3

    @pytest.mark.parametrize("n,layers", [(2, 3), (3, 3), (4, 4), (5, 2)])
    def test_mirror_symmetry(self, n, layers):
        lay = brick_wall(n, layers)
        assert circuit_depth(lay) == circuit_depth(lay.mirrored())
        asym = CircuitLayout.build(4, [[(CLASS_II, 0)], [(CLASS_I, 3)], [(CLASS_II, 1)]])
        assert circuit_depth(asym) == circuit_depth(asym.mirrored())

    def test_two_qubit_counts(self):
        assert two_qubit_gate_count(brick_wall(4, 3, CLASS_I)) == 0
        assert two_qubit_gate_count(brick_wall(4, 2)) == 3
        lay = CircuitLayout.build(4, [[(CLASS_II, 0), (CLASS_II, 2)], [(CLASS_II, 0), (CLASS_II, 2)]])
        assert two_qubit_gate_count(lay) == 2 * 2
        assert two_qubit_gate_count(single_block_layout(2, CLASS_II)) == 1

    def test_depth_bounded_by_layers(self):
        for n in range(1, 6):
            for layers in range(1, 5):
                assert circuit_depth(brick_wall(n, layers)) <= 3 * layers
