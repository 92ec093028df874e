from __future__ import annotations

import dataclasses
import logging
import math
import os
import time
from typing import List, Optional

import numpy as np

from hierassoclib.AssocArray import AssocArray
from hierassoclib.HierArray import HierArray
from hierassoclib.Rmat import edge_batch, rmat_stream
from hierassoclib.Semiring import builtin_semiring
from hierassoclib.helpers import BenchConfig, MetricsRow, RmatConfig, oracle_edge_limit


@dataclasses.dataclass
class InstanceResult:
    """
    The outcome of one benchmark instance.

    Attributes:
        instance (int): The instance index.
        seed (int): The R-MAT seed this instance used.
        rows (list[MetricsRow]): One row per batch.
        timed_edges (int): Edges counted by the final cum_rate.
        timed_seconds (float): Update seconds counted by the final cum_rate.
        generate_seconds (float): Total time spent generating batches (not part of any rate).
        layer_nnz (list[int]): Per-layer nnz after the last batch.
        cascades (list[int]): Per-layer cascade counts after the last batch.
        flush_nnz (int): nnz of the final flush.
        oracle_match (bool|None): Whether the flush matched a flat fold of the stream. None when the check was skipped.
        trend_slope (float|None): Least-squares slope of log(inst_rate) against log(cumulative_edges), over the timed batches.
        pid (int): The process that ran the instance.
    """
    instance: int
    seed: int
    rows: List[MetricsRow]
    timed_edges: int
    timed_seconds: float
    generate_seconds: float
    layer_nnz: List[int]
    cascades: List[int]
    flush_nnz: int
    oracle_match: Optional[bool] = None
    trend_slope: Optional[float] = None
    pid: int = 0

    @property
    def total_edges(self) -> int:
        return self.rows[-1].cumulative_edges if self.rows else 0

    @property
    def final_cum_rate(self) -> float:
        return self.rows[-1].cum_rate if self.rows else 0.0

    @property
    def min_inst_rate(self) -> float:
        return min((row.inst_rate for row in self.rows), default=0.0)

    @property
    def max_inst_rate(self) -> float:
        return max((row.inst_rate for row in self.rows), default=0.0)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance, "seed": self.seed, "batches": len(self.rows), "total_edges": self.total_edges,
            "timed_edges": self.timed_edges, "timed_seconds": self.timed_seconds, "generate_seconds": self.generate_seconds,
            "final_cum_rate": self.final_cum_rate, "min_inst_rate": self.min_inst_rate, "max_inst_rate": self.max_inst_rate,
            "layer_nnz": self.layer_nnz, "cascades": self.cascades, "flush_nnz": self.flush_nnz,
            "oracle_match": self.oracle_match, "trend_slope": self.trend_slope, "pid": self.pid,
        }


def _rate(edges:int, seconds:float) -> float:
    if seconds > 0:
        return edges / seconds
    return math.inf if edges > 0 else 0.0

def trend_slope(rows:List[MetricsRow]) -> Optional[float]:
    """
    Fits log(inst_rate) against log(cumulative_edges) with a straight line.

    Returns:
        float|None: The slope, or None if there are fewer than two usable rows.
    """
    usable = [row for row in rows if row.cumulative_edges > 0 and 0 < row.inst_rate < math.inf]
    if len(usable) < 2:
        return None
    x = np.log([row.cumulative_edges for row in usable])
    y = np.log([row.inst_rate for row in usable])
    if np.ptp(x) == 0:
        return None
    return float(np.polyfit(x, y, 1)[0])

def flat_fold(rmat:RmatConfig, semiring) -> AssocArray:
    """
    The reference result: every batch of the stream added into a single array, no layers.
    """
    total = AssocArray.empty(semiring)
    for batch in rmat_stream(rmat):
        total = total.ew_add(batch.to_assoc(semiring))
    return total

def instance_rmat(cfg:BenchConfig, instance:int) -> RmatConfig:
    """
    The stream of a given instance: the base stream with seed + instance.
    """
    return dataclasses.replace(cfg.rmat, seed=cfg.rmat.seed + instance)

def run_instance(cfg:BenchConfig, instance:int = 0) -> InstanceResult:
    """
    Runs one share-nothing benchmark instance.

    Each batch is generated (timed separately), turned into an array and added into the hierarchical array.
    The batch time covers the construction plus the update.

    Note:
        This is a top-level function so it can be sent to a process pool.
    """
    rmat = instance_rmat(cfg, instance)
    semiring = builtin_semiring(cfg.semiring)
    hier = HierArray(cfg.cut_spec, semiring)
    logging.debug(f"Instance {instance} starting in process {os.getpid()}: seed {rmat.seed}, cuts {list(cfg.cut_spec.cuts)}")

    rows: List[MetricsRow] = []
    cumulativeEdges = 0
    elapsed = 0.0
    timedEdges = 0
    timedSeconds = 0.0
    generateTotal = 0.0
    for index in range(rmat.num_batches):
        genStart = time.perf_counter()
        batch = edge_batch(rmat, index)
        generateSeconds = time.perf_counter() - genStart

        updateStart = time.perf_counter()
        hier.update(batch.to_assoc(semiring))
        batchSeconds = time.perf_counter() - updateStart

        batchEdges = len(batch)
        cumulativeEdges += batchEdges
        elapsed += batchSeconds
        generateTotal += generateSeconds
        if index >= cfg.warmup_batches:
            timedEdges += batchEdges
            timedSeconds += batchSeconds
            cumRate = _rate(timedEdges, timedSeconds)
        else:
            cumRate = _rate(cumulativeEdges, elapsed)
        rows.append(MetricsRow(batch_index=index, batch_nnz=batchEdges, cumulative_edges=cumulativeEdges,
                               batch_seconds=batchSeconds, inst_rate=_rate(batchEdges, batchSeconds), cum_rate=cumRate,
                               layer_nnz=[layer.nnz for layer in hier.layers], cascades=list(hier.stats.cascades),
                               generate_seconds=generateSeconds))
        logging.debug(f"Instance {instance} batch {index}: {batchEdges} edges in {batchSeconds:.6f}s "
                      f"(generated in {generateSeconds:.6f}s), layers {rows[-1].layer_nnz}")

    if timedSeconds == 0 and timedEdges == 0:
        #Every batch was a warmup batch, so the final cum_rate covers all of them.
        timedEdges, timedSeconds = cumulativeEdges, elapsed

    flushed = hier.flush()
    oracleMatch = None
    if cfg.verify and rmat.total_edges <= oracle_edge_limit:
        oracleMatch = flushed == flat_fold(rmat, semiring)
        if not oracleMatch:
            logging.error(f"Instance {instance}: the flushed array does not match the flat fold of the stream.")

    timedRows = [row for row in rows if row.batch_index >= cfg.warmup_batches] or rows
    result = InstanceResult(instance=instance, seed=rmat.seed, rows=rows, timed_edges=timedEdges, timed_seconds=timedSeconds,
                            generate_seconds=generateTotal, layer_nnz=[layer.nnz for layer in hier.layers],
                            cascades=list(hier.stats.cascades), flush_nnz=flushed.nnz, oracle_match=oracleMatch,
                            trend_slope=trend_slope(timedRows), pid=os.getpid())
    logging.debug(f"Instance {instance} finished: {cumulativeEdges} edges, cum_rate {result.final_cum_rate:.1f}/s, flush nnz {flushed.nnz}")
    return result
