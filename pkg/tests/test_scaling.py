import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgqst.circuit import CLASS_I, CLASS_II, brick_wall, circuit_depth, two_qubit_gate_count
from cgqst.scaling import (
    SCALING_COLUMNS,
    CoverageNeverAchieved,
    ScalingConfig,
    SpanAccumulator,
    contract_layers,
    layout_coverage,
    min_depth,
    placement_layout,
    rank_vs_two_qubit_gates,
    run_scaling,
    scaling_csv,
)

CFG = ScalingConfig()


class TestConfig:
    def test_samples_must_be_positive(self):
        with pytest.raises(ValueError):
            ScalingConfig(samples_per_check=0)

    def test_roundtrip_dict(self):
        assert ScalingConfig(n_qubits=[2, 3]).to_dict()["n_qubits"] == [2, 3]


class TestContractLayers:
    def test_single_qubit(self):
        assert contract_layers(1, CFG) == 1

    def test_two_qubits(self):
        assert contract_layers(2, CFG) == 1

    def test_three_qubits_need_more(self):
        assert contract_layers(3, CFG) > 1

    def test_never_achieved(self):
        # no normalized coefficient exceeds 1
        with pytest.raises(CoverageNeverAchieved):
            contract_layers(2, ScalingConfig(coverage_tol=1.0, max_layers=8))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_coverage_monotone_in_layers(self, n):
        for layers in range(2, 2 * n + 1):
            small = layout_coverage(brick_wall(n, layers - 1), np.random.default_rng(5), 32)
            big = layout_coverage(brick_wall(n, layers), np.random.default_rng(5), 32)
            assert np.all(big >= small)


class TestRankCurve:
    def test_two_qubits(self):
        curve = dict(rank_vs_two_qubit_gates(2, CFG))
        assert curve[0] == 7
        assert curve[1] == 16

    def test_three_qubits(self):
        curve = rank_vs_two_qubit_gates(3, CFG)
        ranks = [r for _, r in curve]
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))
        first = next(g for g, r in curve if r == 64)
        assert first == 3

    def test_budget_cap(self):
        curve = rank_vs_two_qubit_gates(3, ScalingConfig(max_budget=1))
        assert [g for g, _ in curve] == [0, 1]

    def test_deterministic(self):
        assert rank_vs_two_qubit_gates(3, CFG) == rank_vs_two_qubit_gates(3, CFG)


class TestPlacement:
    def test_class2_count(self):
        lay = placement_layout(3, 3, {(0, 0), (1, 1)})
        assert two_qubit_gate_count(lay) == 2
        assert all(b.kind in (CLASS_I, CLASS_II) for b in lay.blocks)

    def test_rejects_single_qubit_slot(self):
        with pytest.raises(ValueError):
            placement_layout(3, 3, {(1, 0)})

    def test_optional_off(self):
        lay = placement_layout(3, 3, {(0, 0)}, optional_on=set())
        assert len(lay.blocks) == 1
        assert circuit_depth(lay) == 3


class TestMinDepth:
    def test_two_qubits(self):
        depth, layout = min_depth(2, CFG)
        assert depth == 3
        assert two_qubit_gate_count(layout) == 1

    def test_three_qubits_bounds(self):
        layers = contract_layers(3, CFG)
        depth, layout = min_depth(3, CFG, layers)
        assert two_qubit_gate_count(layout) == 3
        assert depth <= 3 * layers
        assert depth >= min_depth(2, CFG)[0]

    def test_budget_too_large(self):
        with pytest.raises(CoverageNeverAchieved):
            min_depth(3, CFG, min_layers=1)


class TestSpanAccumulator:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**31 - 1))
    def test_matches_matrix_rank(self, k, seed):
        g = np.random.default_rng(seed)
        rows = g.normal(size=(k, 3)) @ g.normal(size=(3, 8))
        acc = SpanAccumulator(8)
        for chunk in np.array_split(rows, 3):
            acc.add(chunk)
        assert acc.rank == np.linalg.matrix_rank(rows)
        np.testing.assert_allclose(acc.basis @ acc.basis.T, np.eye(acc.rank), atol=1e-10)

    def test_repeated_rows_add_nothing(self):
        acc = SpanAccumulator(4)
        assert acc.add(np.eye(4)[:2]) == 2
        assert acc.add(np.eye(4)[:2] * 3) == 0
        assert acc.add(np.zeros((2, 4))) == 0


class TestRunScaling:
    def test_csv_and_determinism(self):
        cfg = ScalingConfig(n_qubits=(2, 3))
        a, b = run_scaling(cfg), run_scaling(cfg)
        text = scaling_csv(a)
        assert text == scaling_csv(b)
        assert text.splitlines()[0].split(",") == list(SCALING_COLUMNS)
        rows = [line.split(",") for line in text.splitlines()[1:]]
        ffr = {r[0]: r[3] for r in rows if r[1] == "first_full_rank_budget"}
        assert ffr == {"2": "1", "3": "3"}
        depths = {r[0]: int(r[3]) for r in rows if r[1] == "min_depth"}
        assert depths["2"] == 3 and depths["3"] >= depths["2"]

    def test_records_invariants(self):
        res = run_scaling(ScalingConfig(n_qubits=(1, 2)))
        for rec in res.records:
            assert rec.min_layers >= 1
            ranks = [r for _, r in rec.rank_curve]
            assert ranks == sorted(ranks)
        assert res.to_dict()["config"]["seed"] == 0
