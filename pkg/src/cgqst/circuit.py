"""Brick-wall parameterized circuits built from class-I and class-II gate blocks.

A class-I block is a column of single-qubit SU(2) rotations (3 ZYZ Euler angles
per qubit).  A class-II block acts on a nearest-neighbour pair and is an Ising
``exp(-i theta/2 Z(x)Z)`` coupling sandwiched between single-qubit rotations,
13 parameters in the order ``pre_top[3], pre_bottom[3], theta, post_top[3],
post_bottom[3]``.

Layer 0 is applied to the state first, so the circuit unitary is
``U = U_{L-1} ... U_1 U_0``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import DimensionMismatch


class BlockKind(str, enum.Enum):
    CLASS_I = "class1"
    CLASS_II = "class2"


CLASS_I = BlockKind.CLASS_I
CLASS_II = BlockKind.CLASS_II

_DEPTH = {CLASS_I: 1, CLASS_II: 3}


@dataclass(frozen=True)
class GateBlock:
    kind: BlockKind
    qubit_slot: int
    span: int = 1
    param_offset: int = 0

    def __post_init__(self):
        if self.kind is CLASS_II and self.span != 2:
            raise ValueError("class-II blocks act on exactly two neighbouring qubits")
        if self.span < 1:
            raise ValueError("block span must be positive")

    @property
    def qubits(self) -> range:
        return range(self.qubit_slot, self.qubit_slot + self.span)

    @property
    def n_params(self) -> int:
        return 13 if self.kind is CLASS_II else 3 * self.span

    @property
    def param_slice(self) -> slice:
        return slice(self.param_offset, self.param_offset + self.n_params)

    @property
    def depth(self) -> int:
        return _DEPTH[self.kind]


class CircuitLayout:
    """Ordered layers of gate blocks on a line of qubits.

    Use :meth:`build` to create a layout from ``(kind, qubit_slot[, span])``
    tuples; parameter offsets are assigned in layer order.
    """

    def __init__(self, n_qubits: int, layers: Sequence[Sequence[GateBlock]]):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self.layers = tuple(tuple(layer) for layer in layers)
        expected = 0
        for layer in self.layers:
            used = set()
            for blk in layer:
                if blk.qubit_slot < 0 or blk.qubit_slot + blk.span > n_qubits:
                    raise ValueError(f"block {blk} does not fit on {n_qubits} qubits")
                if used.intersection(blk.qubits):
                    raise ValueError("blocks within one layer must act on disjoint qubits")
                used.update(blk.qubits)
                if blk.param_offset != expected:
                    raise ValueError("parameter offsets must be contiguous in layer order")
                expected += blk.n_params
        self.n_params = expected

    @classmethod
    def build(cls, n_qubits: int, layers: Iterable[Iterable[tuple]]) -> "CircuitLayout":
        out, offset = [], 0
        for layer in layers:
            blocks = []
            for entry in layer:
                kind = BlockKind(entry[0])
                slot = int(entry[1])
                span = int(entry[2]) if len(entry) > 2 else (2 if kind is CLASS_II else 1)
                blk = GateBlock(kind, slot, span, offset)
                offset += blk.n_params
                blocks.append(blk)
            out.append(blocks)
        return cls(n_qubits, out)

    @property
    def blocks(self) -> list[GateBlock]:
        return [blk for layer in self.layers for blk in layer]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CircuitLayout)
            and self.n_qubits == other.n_qubits
            and self.layers == other.layers
        )

    def __hash__(self) -> int:
        return hash((self.n_qubits, self.layers))

    def __repr__(self) -> str:
        return f"CircuitLayout(n_qubits={self.n_qubits}, layers={self.to_dict()['layers']})"

    def mirrored(self) -> "CircuitLayout":
        """Same circuit with qubit order reversed."""
        n = self.n_qubits
        return CircuitLayout.build(
            n,
            [
                [(b.kind, n - b.qubit_slot - b.span, b.span) for b in layer]
                for layer in self.layers
            ],
        )

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "layers": [
                [{"kind": b.kind.value, "qubit_slot": b.qubit_slot, "span": b.span} for b in layer]
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitLayout":
        return cls.build(
            int(data["n_qubits"]),
            [
                [(b["kind"], b["qubit_slot"], b.get("span", 2 if b["kind"] == "class2" else 1)) for b in layer]
                for layer in data["layers"]
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CircuitLayout":
        return cls.from_dict(json.loads(text))


def su2(alpha, beta, gamma) -> np.ndarray:
    """ZYZ rotation ``Rz(alpha) Ry(beta) Rz(gamma)``; broadcasts over array angles."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(gamma, float)
    )
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    ps, ms = (alpha + gamma) / 2, (alpha - gamma) / 2
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-1j * ps) * c
    out[..., 0, 1] = -np.exp(-1j * ms) * s
    out[..., 1, 0] = np.exp(1j * ms) * s
    out[..., 1, 1] = np.exp(1j * ps) * c
    return out


_ZZ_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


def ising_zz(theta) -> np.ndarray:
    theta = np.asarray(theta, float)
    diag = np.exp(-0.5j * theta[..., None] * _ZZ_SIGNS)
    out = np.zeros(theta.shape + (4, 4), dtype=complex)
    idx = np.arange(4)
    out[..., idx, idx] = diag
    return out


def _bkron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched Kronecker product over the leading axis."""
    n = a.shape[0]
    return np.einsum("nij,nkl->nikjl", a, b).reshape(n, a.shape[1] * b.shape[1], a.shape[2] * b.shape[2])


def _local_layer(p: np.ndarray, span: int) -> np.ndarray:
    out = su2(p[:, 0], p[:, 1], p[:, 2])
    for q in range(1, span):
        out = _bkron(out, su2(p[:, 3 * q], p[:, 3 * q + 1], p[:, 3 * q + 2]))
    return out


def block_unitaries(block: GateBlock, params: np.ndarray) -> np.ndarray:
    """Block matrices for a batch of full parameter vectors, shape (B, 2^span, 2^span)."""
    params = np.atleast_2d(np.asarray(params, float))
    if block.param_slice.stop > params.shape[1]:
        raise IndexError(f"parameter slice {block.param_slice} out of range for {params.shape[1]} params")
    p = params[:, block.param_slice]
    if block.kind is CLASS_I:
        return _local_layer(p, block.span)
    pre = _local_layer(p[:, 0:6], 2)
    post = _local_layer(p[:, 7:13], 2)
    return post @ ising_zz(p[:, 6]) @ pre


def block_unitary(block: GateBlock, params) -> np.ndarray:
    return block_unitaries(block, np.asarray(params, float)[None])[0]


def circuit_unitaries(layout: CircuitLayout, params) -> np.ndarray:
    """Circuit unitaries for a batch of parameter vectors, shape (B, 2^N, 2^N)."""
    params = np.atleast_2d(np.asarray(params, float))
    if params.shape[1] != layout.n_params:
        raise DimensionMismatch(f"layout takes {layout.n_params} parameters, got {params.shape[1]}")
    n, batch = layout.n_qubits, params.shape[0]
    dim = 2**n
    u = np.broadcast_to(np.eye(dim, dtype=complex), (batch, dim, dim)).copy()
    for layer in layout.layers:
        for blk in layer:
            g = block_unitaries(blk, params)
            left, width = 2**blk.qubit_slot, 2**blk.span
            right = dim // (left * width)
            u = u.reshape(batch, left, width, right, dim)
            u = np.einsum("bij,bajcd->baicd", g, u)
        u = u.reshape(batch, dim, dim)
    return u


def circuit_unitary(layout: CircuitLayout, params) -> np.ndarray:
    params = np.asarray(params, float)
    if params.ndim != 1:
        raise DimensionMismatch("expected a flat parameter vector")
    return circuit_unitaries(layout, params[None])[0]


def circuit_depth(layout: CircuitLayout) -> int:
    """Longest gate path through the circuit.

    Single-qubit gates on different wires run in parallel; a class-II block
    synchronizes its two wires and adds 3 (rotation, ZZ, rotation).
    """
    t = [0] * layout.n_qubits
    for blk in layout.blocks:
        if blk.kind is CLASS_I:
            for q in blk.qubits:
                t[q] += 1
        else:
            q = blk.qubit_slot
            t[q] = t[q + 1] = max(t[q], t[q + 1]) + 3
    return max(t) if t else 0


def two_qubit_gate_count(layout: CircuitLayout) -> int:
    return sum(1 for blk in layout.blocks if blk.kind is CLASS_II)


def brick_wall(n_qubits: int, n_layers: int, pair_kind: BlockKind = CLASS_II) -> CircuitLayout:
    """Brick-wall layout: even layers pair (0,1),(2,3)..., odd layers (1,2),(3,4)...

    Wires left unpaired in a layer get a single-qubit class-I block.
    """
    return CircuitLayout.build(n_qubits, brick_wall_slots(n_qubits, n_layers, pair_kind))


def brick_wall_slots(n_qubits: int, n_layers: int, pair_kind=CLASS_II) -> list[list[tuple]]:
    layers = []
    for layer in range(n_layers):
        slots, paired = [], set()
        for q in range(layer % 2, n_qubits - 1, 2):
            slots.append((pair_kind, q, 2))
            paired.update((q, q + 1))
        for q in range(n_qubits):
            if q not in paired:
                slots.append((CLASS_I, q, 1))
        slots.sort(key=lambda s: s[1])
        layers.append(slots)
    return layers


def single_block_layout(n_qubits: int, kind: BlockKind) -> CircuitLayout:
    """One block spanning the register; class-II needs exactly two qubits."""
    kind = BlockKind(kind)
    if kind is CLASS_II:
        if n_qubits != 2:
            raise ValueError("a single class-II block only covers a two-qubit register")
        return CircuitLayout.build(2, [[(CLASS_II, 0, 2)]])
    return CircuitLayout.build(n_qubits, [[(CLASS_I, 0, n_qubits)]])


def random_params(layout: CircuitLayout, rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (layout.n_params,) if size is None else (size, layout.n_params)
    return rng.uniform(0.0, 2 * np.pi, shape)
