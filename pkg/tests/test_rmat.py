import numpy as np
import pytest

from hierassoclib import RmatConfig, EdgeBatch, TripleList, rmat_stream, degree_stats, ConfigurationError
from hierassoclib.Rmat import rmat_edges, edge_batch, format_vertex_keys, parse_vertex_key


def concat(batches):
    rows, cols = [], []
    for batch in batches:
        rows.extend(np.asarray(batch.triples.rows).tolist())
        cols.extend(np.asarray(batch.triples.cols).tolist())
    return rows, cols


def test_degenerate_corner():
    cfg = RmatConfig(scale=1, total_edges=50, batch_size=7, probs=(1, 0, 0, 0), seed=12345)
    rows, cols = concat(rmat_stream(cfg))
    assert rows == ["0"] * 50
    assert cols == ["0"] * 50


def test_deterministic():
    cfg = RmatConfig(scale=10, total_edges=5000, batch_size=1000, seed=7)
    assert concat(rmat_stream(cfg)) == concat(rmat_stream(cfg))


def test_seed_changes_stream():
    a = RmatConfig(scale=10, total_edges=1000, batch_size=1000, seed=1)
    b = RmatConfig(scale=10, total_edges=1000, batch_size=1000, seed=2)
    assert concat(rmat_stream(a)) != concat(rmat_stream(b))


def test_independent_of_batching():
    small = RmatConfig(scale=12, total_edges=3000, batch_size=128, seed=3)
    large = RmatConfig(scale=12, total_edges=3000, batch_size=3000, seed=3)
    assert concat(rmat_stream(small)) == concat(rmat_stream(large))


def test_edge_ranges_match_full_stream():
    cfg = RmatConfig(scale=14, total_edges=30, batch_size=30, seed=99)
    src, dst = rmat_edges(cfg, 0, 30)
    partSrc, partDst = rmat_edges(cfg, 10, 20)
    assert np.array_equal(src[10:20], partSrc)
    assert np.array_equal(dst[10:20], partDst)
    with pytest.raises(ConfigurationError):
        rmat_edges(cfg, 5, 2)


def test_edge_count_conservation():
    cfg = RmatConfig(scale=8, total_edges=1050, batch_size=100)
    batches = list(rmat_stream(cfg))
    assert cfg.num_batches == 11
    assert [len(b) for b in batches] == [100] * 10 + [50]
    assert sum(len(b) for b in batches) == 1050
    assert [b.start for b in batches][:3] == [0, 100, 200]
    assert np.all(np.asarray(batches[0].triples.vals) == 1.0)


def test_key_format_round_trip():
    cfg = RmatConfig(scale=16, total_edges=2000, batch_size=2000, seed=5)
    assert cfg.key_width == 5
    batch = edge_batch(cfg, 0)
    for key in np.concatenate([batch.triples.rows, batch.triples.cols]).tolist():
        assert len(key) == 5
        assert 0 <= parse_vertex_key(key) < 2 ** 16


def test_format_vertex_keys():
    assert format_vertex_keys(np.array([0, 7, 65535]), 5).tolist() == ["00000", "00007", "65535"]
    assert format_vertex_keys(np.array([], dtype=np.int64), 3).tolist() == []


def test_quadrant_frequencies():
    #The top bit of the source is 0 with probability a+b.
    cfg = RmatConfig(scale=4, total_edges=100000, batch_size=100000, seed=11)
    src, dst = rmat_edges(cfg, 0, cfg.total_edges)
    assert abs(np.mean(src < 8) - 0.76) < 0.01
    assert abs(np.mean(dst < 8) - 0.76) < 0.01


@pytest.mark.parametrize("probs", [(0.5, 0.2, 0.2, 0.2), (0.5, 0.5, 0.5, -0.5), (0.5, 0.5)])
def test_bad_probabilities(probs):
    with pytest.raises(ConfigurationError):
        RmatConfig(probs=probs)


def test_bad_scale():
    with pytest.raises(ConfigurationError):
        RmatConfig(scale=0)


class TestDegreeStats:
    def test_empty(self):
        stats = degree_stats([])
        assert (stats.mean_degree, stats.max_degree, stats.distinct_vertices) == (0, 0, 0)

    def test_self_loops(self):
        batch = EdgeBatch(index=0, start=0, triples=TripleList(["0"] * 4, ["0"] * 4, [1.0] * 4))
        stats = degree_stats([batch])
        assert stats.max_degree == 4
        assert stats.max_in_degree == 4
        assert stats.distinct_vertices == 1
        assert stats.mean_degree == 4

    def test_counts_sources_and_destinations(self):
        batch = EdgeBatch(index=0, start=0, triples=TripleList(["1", "1", "2"], ["3", "4", "3"], [1.0] * 3))
        stats = degree_stats([batch])
        assert stats.distinct_vertices == 4
        assert stats.max_degree == 2
        assert stats.max_in_degree == 2
        assert stats.mean_degree == 0.75


def test_power_law_and_hypersparse():
    cfg = RmatConfig(scale=16, total_edges=10 ** 6, batch_size=10 ** 5, seed=0)
    stats = degree_stats(rmat_stream(cfg))
    assert stats.max_degree >= 20 * stats.mean_degree
    assert stats.distinct_vertices < 2 ** 16
