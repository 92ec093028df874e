from __future__ import annotations

import concurrent.futures
import dataclasses
import datetime
import logging
import os
import platform
import re
import socket
import time
from typing import List, Optional, Sequence, Dict, Any, Union

from hierassoclib.HierArray import CutSpec
from hierassoclib._bench_worker import InstanceResult, run_instance, instance_rmat
from hierassoclib.Rmat import rmat_stream
from hierassoclib.helpers import BenchConfig, BenchError, ConfigurationError, cut_presets, _normalize_name
from hierassoclib.utils import write_metrics, write_table, write_json, write_triples

aggregate_header = ["instances", "updates", "max_instance_seconds", "aggregate_rate", "sum_cum_rate"]
sweep_header = ["preset", "cuts", "final_cum_rate", "min_inst_rate", "max_inst_rate", "cascades", "flush_nnz"]
scaling_header = ["instances", "updates", "max_instance_seconds", "aggregate_rate", "speedup"]


def environment_stamp() -> Dict[str, Any]:
    """
    Returns:
        dict: Where and when a run happened (host, platform, python version, CPU count, UTC timestamp).
    """
    return {
        "host": socket.gethostname(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


@dataclasses.dataclass
class SweepRow:
    """
    One line of the cut-preset comparison table.
    """
    preset: str
    cuts: str
    final_cum_rate: float
    min_inst_rate: float
    max_inst_rate: float
    cascades: List[int]
    flush_nnz: int

    def to_csv_fields(self) -> List[str]:
        return [self.preset, self.cuts, repr(float(self.final_cum_rate)), repr(float(self.min_inst_rate)),
                repr(float(self.max_inst_rate)), ";".join(str(x) for x in self.cascades), str(self.flush_nnz)]


@dataclasses.dataclass
class RunReport:
    """
    The result of a benchmark run.

    Attributes:
        mode (str): single, scaling or sweep.
        config (BenchConfig): The configuration the run used.
        instances (list[InstanceResult]): Per-instance results. For a sweep, one per preset, in order.
        environment (dict): Host, platform and timestamp.
        wall_seconds (float): Wall-clock time of the whole run, as seen by the caller.
        sweep_rows (list[SweepRow]): The comparison table, for sweeps only.
    """
    mode: str
    config: BenchConfig
    instances: List[InstanceResult]
    environment: Dict[str, Any] = dataclasses.field(default_factory=environment_stamp)
    wall_seconds: float = 0.0
    sweep_rows: List[SweepRow] = dataclasses.field(default_factory=list)
    sweep_configs: List[BenchConfig] = dataclasses.field(default_factory=list)

    @property
    def updates(self) -> int:
        """
        Timed updates (edges) across all instances.
        """
        return sum(result.timed_edges for result in self.instances)

    @property
    def max_instance_seconds(self) -> float:
        return max((result.timed_seconds for result in self.instances), default=0.0)

    @property
    def aggregate_rate(self) -> float:
        """
        Total timed updates across instances divided by the timed seconds of the slowest instance.

        Note:
            With one instance this is exactly that instance's final cum_rate.
        """
        seconds = self.max_instance_seconds
        if seconds <= 0:
            return 0.0
        return self.updates / seconds

    @property
    def sum_cum_rate(self) -> float:
        return sum(result.final_cum_rate for result in self.instances)

    @property
    def verified(self) -> Optional[bool]:
        """
        False if any instance failed the flat-fold check, None if no instance ran it.
        """
        checks = [result.oracle_match for result in self.instances if result.oracle_match is not None]
        if not checks:
            return None
        return all(checks)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "mode": self.mode,
            "config": self.config.to_dict(),
            "environment": self.environment,
            "wall_seconds": self.wall_seconds,
            "updates": self.updates,
            "max_instance_seconds": self.max_instance_seconds,
            "aggregate_rate": self.aggregate_rate,
            "sum_cum_rate": self.sum_cum_rate,
            "verified": self.verified,
            "instances": [result.to_dict() for result in self.instances],
        }
        if self.sweep_rows:
            data["sweep"] = [dataclasses.asdict(row) for row in self.sweep_rows]
        return data

    def write(self, out_dir:str) -> List[str]:
        """
        Writes the run's CSV files and report.json into out_dir.

        Returns:
            list[str]: The paths written.
        """
        os.makedirs(out_dir, exist_ok=True)
        written = []
        echo = self.config.echo()
        if self.mode == "single":
            path = os.path.join(out_dir, "metrics.csv")
            write_metrics(self.instances[0].rows, path, echo)
            written.append(path)
        elif self.mode == "scaling":
            for result in self.instances:
                path = os.path.join(out_dir, f"metrics_instance{result.instance}.csv")
                write_metrics(result.rows, path, echo)
                written.append(path)
            path = os.path.join(out_dir, "aggregate.csv")
            write_table(path, aggregate_header, [[str(len(self.instances)), str(self.updates), repr(float(self.max_instance_seconds)),
                                                  repr(float(self.aggregate_rate)), repr(float(self.sum_cum_rate))]], echo)
            written.append(path)
        elif self.mode == "sweep":
            for index, (row, result, config) in enumerate(zip(self.sweep_rows, self.instances, self.sweep_configs)):
                path = os.path.join(out_dir, f"metrics_sweep{index}_{_file_label(row.preset)}.csv")
                write_metrics(result.rows, path, config.echo())
                written.append(path)
            path = os.path.join(out_dir, "sweep.csv")
            write_table(path, sweep_header, [row.to_csv_fields() for row in self.sweep_rows], echo)
            written.append(path)
        path = os.path.join(out_dir, "report.json")
        write_json(path, self.to_dict())
        written.append(path)
        for path in written:
            logging.info(f"Wrote {path}")
        return written


def _file_label(label:str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "-", label).strip("-") or "none"

def _warn_if_unchecked():
    if not __debug__:
        logging.warning("Running with python -O: the per-update layer bound check is disabled.")

def _dump_triples(cfg:BenchConfig):
    if cfg.dump_triples:
        count = write_triples(rmat_stream(instance_rmat(cfg, 0)), cfg.dump_triples)
        logging.info(f"Wrote {count} triples of instance 0 to {cfg.dump_triples}")

def run_single(cfg:BenchConfig) -> RunReport:
    """
    Runs one instance: generates the R-MAT stream batch by batch and adds every batch into a hierarchical array,
    timing construction plus update of each batch.

    The final flush is checked against a flat fold of the stream when cfg.verify is set and the run has at most 10**6 edges.

    Parameters:
        cfg (BenchConfig): The run configuration. instances must be 1.

    Returns:
        RunReport: The per-batch metrics and the final layer state.

    Raises:
        ConfigurationError: If instances isn't 1.
    """
    if cfg.instances != 1:
        raise ConfigurationError(f"run_single runs one instance, but instances is {cfg.instances}. Use run_scaling instead.")
    _warn_if_unchecked()
    logging.info(f"Single run: scale {cfg.rmat.scale}, {cfg.rmat.total_edges} edges, batches of {cfg.rmat.batch_size}, "
                 f"cuts {cfg.cut_label} {list(cfg.cut_spec.cuts)}, semiring {cfg.semiring}")
    start = time.perf_counter()
    result = run_instance(cfg, 0)
    report = RunReport("single", cfg, [result], wall_seconds=time.perf_counter() - start)
    logging.info(f"Single run finished: cum_rate {result.final_cum_rate:.1f} updates/s, flush nnz {result.flush_nnz}, "
                 f"verified {result.oracle_match}")
    _dump_triples(cfg)
    if cfg.out_dir:
        report.write(cfg.out_dir)
    return report

def run_scaling(cfg:BenchConfig, instances:Optional[int] = None) -> RunReport:
    """
    Runs P share-nothing instances concurrently, one process each. Instance i uses seed + i and its own hierarchical array.

    Parameters:
        cfg (BenchConfig): The run configuration.
        instances (int, optional): P. Defaults to cfg.instances.

    Returns:
        RunReport: Per-instance metrics and the aggregate rate.

    Raises:
        BenchError: If an instance fails. The failing instance's exception is chained.
    """
    if instances is not None:
        cfg = dataclasses.replace(cfg, instances=instances)
    count = cfg.instances
    _warn_if_unchecked()
    cpus = os.cpu_count() or 1
    if cpus < count:
        logging.warning(f"Running {count} instances on {cpus} cores: instances will compete for CPU time.")
    logging.info(f"Scaling run: {count} instances of {cfg.rmat.total_edges} edges, cuts {cfg.cut_label}")

    start = time.perf_counter()
    results: List[InstanceResult] = []
    with concurrent.futures.ProcessPoolExecutor(max_workers=count) as executor:
        futures = [executor.submit(run_instance, cfg, index) for index in range(count)]
        for index, future in enumerate(futures):
            try:
                results.append(future.result())
            except Exception as e:
                for other in futures:
                    other.cancel()
                raise BenchError(f"Instance {index} failed: {e}") from e
    report = RunReport("scaling", cfg, results, wall_seconds=time.perf_counter() - start)
    logging.info(f"Scaling run finished: aggregate rate {report.aggregate_rate:.1f} updates/s over {count} instances")
    _dump_triples(cfg)
    if cfg.out_dir:
        report.write(cfg.out_dir)
    return report

def run_scaling_series(cfg:BenchConfig, counts:Sequence[int]) -> List[RunReport]:
    """
    Runs run_scaling once per instance count. If cfg.out_dir is set, each run writes into out_dir/P{count}
    and scaling.csv compares them.
    """
    if not counts:
        raise ConfigurationError("Give at least one instance count.")
    reports = []
    for count in counts:
        runCfg = dataclasses.replace(cfg, instances=count, out_dir=os.path.join(cfg.out_dir, f"P{count}") if cfg.out_dir else None,
                                     dump_triples=None)
        reports.append(run_scaling(runCfg))
    _dump_triples(cfg)
    if cfg.out_dir:
        path = os.path.join(cfg.out_dir, "scaling.csv")
        write_table(path, scaling_header, scaling_rows(reports), cfg.echo())
        logging.info(f"Wrote {path}")
    return reports

def scaling_rows(reports:Sequence[RunReport]) -> List[List[str]]:
    """
    Rows of the scaling table. speedup is relative to the first report.
    """
    base = reports[0].aggregate_rate if reports else 0.0
    rows = []
    for report in reports:
        speedup = report.aggregate_rate / base if base > 0 else 0.0
        rows.append([str(len(report.instances)), str(report.updates), repr(float(report.max_instance_seconds)),
                     repr(float(report.aggregate_rate)), repr(float(speedup))])
    return rows

def _preset_label(preset:Union[str, Sequence[int], CutSpec]) -> str:
    if isinstance(preset, str) and _normalize_name(preset) in cut_presets:
        return _normalize_name(preset)
    return CutSpec.resolve(preset).to_text() or "none"

def run_sweep(cfg:BenchConfig, presets:Sequence[Union[str, Sequence[int], CutSpec]]) -> RunReport:
    """
    Runs run_single once per cut preset, on the identical stream (same seed), and builds the comparison table.

    Parameters:
        cfg (BenchConfig): The base configuration. Its cuts and layers are replaced by each preset.
        presets (list): Preset names, comma-separated cut lists or CutSpecs. At least two.

    Raises:
        ConfigurationError: If fewer than two presets are given, or one of them is invalid.
    """
    if len(presets) < 2:
        raise ConfigurationError(f"A sweep compares at least two cut presets, got {len(presets)}.")
    #Every preset is resolved before the first run starts.
    configs = [dataclasses.replace(cfg, cuts=preset, layers=None, instances=1, out_dir=None, dump_triples=None)
               for preset in presets]
    labels = [_preset_label(preset) for preset in presets]
    _warn_if_unchecked()
    logging.info(f"Sweep over {len(configs)} cut presets: {', '.join(labels)}")

    start = time.perf_counter()
    results = []
    rows = []
    for label, runCfg in zip(labels, configs):
        result = run_instance(runCfg, 0)
        results.append(result)
        rows.append(SweepRow(preset=label, cuts=runCfg.cut_spec.to_text(), final_cum_rate=result.final_cum_rate,
                             min_inst_rate=result.min_inst_rate, max_inst_rate=result.max_inst_rate,
                             cascades=result.cascades, flush_nnz=result.flush_nnz))
        logging.info(f"Preset {label}: cum_rate {result.final_cum_rate:.1f} updates/s, flush nnz {result.flush_nnz}")
    report = RunReport("sweep", cfg, results, wall_seconds=time.perf_counter() - start, sweep_rows=rows, sweep_configs=configs)
    _dump_triples(cfg)
    if cfg.out_dir:
        report.write(cfg.out_dir)
    return report
