"""
Desk-scale runs: scale 22, 10**7 R-MAT edges in batches of 10**5. Run with --runslow.
"""
import os

import pytest

from hierassoclib import BenchConfig, RmatConfig, degree_stats, rmat_stream, run_single, run_scaling, run_sweep

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def desk_sweep():
    return run_sweep(BenchConfig(), ["none", "few-wide", "many-narrow"])


def test_single_instance_floor():
    report = run_single(BenchConfig(cuts="many-narrow"))
    assert report.instances[0].total_edges == 10 ** 7
    assert report.instances[0].final_cum_rate > 40000


def test_hierarchy_advantage(desk_sweep):
    rates = {row.preset: row.final_cum_rate for row in desk_sweep.sweep_rows}
    assert rates["many-narrow"] >= 2 * rates["none"]
    assert rates["few-wide"] >= 1.3 * rates["none"]
    assert len({row.flush_nnz for row in desk_sweep.sweep_rows}) == 1


def test_zero_cut_rate_decreases(desk_sweep):
    slope = desk_sweep.instances[0].trend_slope
    assert slope is not None
    assert slope < 0


@pytest.mark.skipif((os.cpu_count() or 1) < 4, reason="needs at least 4 cores")
def test_four_instances_scale():
    cfg = BenchConfig()
    one = run_scaling(cfg, instances=1)
    four = run_scaling(cfg, instances=4)
    assert four.aggregate_rate >= 3 * one.aggregate_rate


def test_rmat_dump_is_bit_identical(tmp_path):
    cfg = RmatConfig(scale=16, total_edges=10 ** 6, batch_size=10 ** 5)
    first = tmp_path / "first.tsv"
    second = tmp_path / "second.tsv"
    for path in (first, second):
        run_single(BenchConfig(rmat=cfg, cuts="none", verify=False, dump_triples=str(path)))
    assert first.read_bytes() == second.read_bytes()
    stats = degree_stats(rmat_stream(cfg))
    assert stats.max_degree / stats.mean_degree >= 20
