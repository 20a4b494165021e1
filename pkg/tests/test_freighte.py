"""One-pass dual-hypergraph partitioner."""

import random

import pytest

import oracle
from conftest import random_edges
from edgestream.cli import format_assignment
from edgestream.freighte import DualState, dual_alpha, freighte_partition_stream, freighte_score
from edgestream.heistreame import RunConfig
from edgestream.metrics import compute_l_max, replication_factor
from edgestream.multilevel import FennelParams


class TestScore:
    def params(self, alpha=1.0, l_max=10**9):
        return FennelParams(alpha=alpha, l_max=l_max)

    def test_unseen_endpoints_min_load(self):
        state = DualState(k=4, n=10, l_max=100)
        assert freighte_score((1, 2), state, self.params()) == 0

    def test_shared_recorded_block_dominates(self):
        state = DualState(k=8, n=10, l_max=100)
        state.record(1, 2, 7)
        state.block_loads[7] += 1
        state.queue.sift_down(7)
        assert freighte_score((1, 2), state, self.params(alpha=0.1)) == 7

    def test_randomized_equivalence_with_naive(self):
        rng = random.Random(123)
        for trial in range(3000):
            k = rng.choice([1, 2, 3, 8, 64, 1024])
            full = rng.random() < 0.3
            state = DualState(k=k, n=4, l_max=10**9, full_record=full)
            for i in range(k):
                state.block_loads[i] = rng.randint(0, 30)
            state.queue = type(state.queue)(state.block_loads)
            if full:
                for v in (1, 2):
                    for b in rng.sample(range(k), rng.randint(0, min(k, 4))):
                        state.block_sets[v].add(b)
            else:
                for v in (1, 2):
                    if rng.random() < 0.7:
                        state.last_block[v] = rng.randrange(k)
            l_max = max(min(state.block_loads) + 1, rng.randint(1, 40))
            params = self.params(alpha=rng.uniform(0.01, 5.0), l_max=l_max)
            # the naive score counts endpoint nets recording each block
            nw: dict[int, float] = {}
            if full:
                for v in (1, 2):
                    for b in state.block_sets[v]:
                        nw[b] = nw.get(b, 0) + 1
            else:
                for v in (1, 2):
                    b = state.last_block[v]
                    if b >= 0:
                        nw[b] = nw.get(b, 0) + 1
            fast = freighte_score((1, 2), state, params)
            slow = oracle.naive_argmax_block(nw, 1, state.block_loads, params, k)
            assert fast == slow, f"trial {trial}"


class TestStream:
    def test_k3_single_block(self, tmp_graph):
        path = tmp_graph(3, [(1, 2), (1, 3), (2, 3)])
        assignments, report = freighte_partition_stream(RunConfig(graph=path, k=1))
        assert assignments[:, 2].tolist() == [0, 0, 0]
        assert report.rf == 1.0

    def test_edgeless(self, tmp_graph):
        path = tmp_graph(5, [])
        assignments, report = freighte_partition_stream(RunConfig(graph=path, k=4))
        assert assignments.shape == (0, 3)
        assert report.rf == 0.0

    def test_deterministic(self, tmp_graph):
        rng = random.Random(6)
        n = 100
        path = tmp_graph(n, random_edges(rng, n, 300))
        cfg = RunConfig(graph=path, k=8, seed=1)
        blobs = {format_assignment(freighte_partition_stream(cfg)[0]) for _ in range(3)}
        assert len(blobs) == 1

    def test_each_edge_once_and_balance(self, tmp_graph):
        rng = random.Random(44)
        for trial in range(6):
            n = rng.randint(5, 250)
            edges = random_edges(rng, n, rng.randint(0, 3 * n))
            path = tmp_graph(n, edges, name=f"f{trial}.metis")
            k = rng.choice([2, 5, 16, 64])
            assignments, report = freighte_partition_stream(RunConfig(graph=path, k=k))
            assert assignments.shape[0] == len(edges)
            emitted = {(min(u, v), max(u, v)) for u, v in assignments[:, :2].tolist()}
            assert emitted == set(edges)
            assert int(report.block_sizes.sum()) == len(edges)
            assert report.max_load <= compute_l_max(len(edges), k, 0.03)

    def test_rf_identity_against_metrics(self, tmp_graph):
        rng = random.Random(50)
        n = 120
        path = tmp_graph(n, random_edges(rng, n, 240))
        assignments, report = freighte_partition_stream(RunConfig(graph=path, k=6))
        rf, total = replication_factor(assignments, n, 6)
        assert report.rf == rf and report.replica_total == total

    def test_full_record_variant(self, tmp_graph):
        rng = random.Random(51)
        n = 80
        path = tmp_graph(n, random_edges(rng, n, 200))
        cfg = RunConfig(graph=path, k=8, freighte_full_record=True)
        assignments, report = freighte_partition_stream(cfg)
        assert assignments.shape[0] == 200
        assert report.max_load <= report.l_max


def test_parse_error_carries_stream_stage(tmp_path):
    from edgestream.errors import PartitionStageError

    bad = tmp_path / "bad.metis"
    bad.write_text("3 2\n2\n1 3\n99\n")
    with pytest.raises(PartitionStageError) as err:
        freighte_partition_stream(RunConfig(graph=bad, k=2))
    assert err.value.stage == "stream"


def test_dual_alpha_uses_header_counts():
    # the dual has m hypervertices and n nets
    assert dual_alpha(100, 1000, 16) == pytest.approx(4 * 100 / 1000**1.5)
    assert dual_alpha(5, 0, 4) == 0.0
