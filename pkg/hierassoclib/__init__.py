from .Semiring import Semiring, builtin_semiring
from .AssocArray import AssocArray, KeySet, TripleList
from .HierArray import HierArray, CutSpec, HierStats
from .Rmat import EdgeBatch, DegreeStats, rmat_stream, rmat_edges, edge_batch, degree_stats, format_vertex_keys, parse_vertex_key
from .helpers import RmatConfig, BenchConfig, MetricsRow, ConfigurationError, MalformedTriplesError, PreconditionError, \
    DomainError, AlgebraError, TripleFormatError, TripleParseError, BenchError
from .utils import write_triples, read_triples, write_metrics, read_metrics
from .Bench import RunReport, run_single, run_scaling, run_sweep

__all__ = ["Semiring", "builtin_semiring",
           "AssocArray", "KeySet", "TripleList",
           "HierArray", "CutSpec", "HierStats",
           "EdgeBatch", "DegreeStats", "rmat_stream", "rmat_edges", "edge_batch", "degree_stats", "format_vertex_keys",
           "parse_vertex_key",
           "RmatConfig", "BenchConfig", "MetricsRow",
           "ConfigurationError", "MalformedTriplesError", "PreconditionError", "DomainError", "AlgebraError",
           "TripleFormatError", "TripleParseError", "BenchError",
           "write_triples", "read_triples", "write_metrics", "read_metrics",
           "RunReport", "run_single", "run_scaling", "run_sweep"
           ]
