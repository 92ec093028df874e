from __future__ import annotations

import dataclasses
import logging
from typing import Iterable, Iterator, Tuple, Union

import numpy as np

from hierassoclib.AssocArray import AssocArray, TripleList
from hierassoclib.Semiring import Semiring
from hierassoclib.helpers import RmatConfig, ConfigurationError

_splitmix_increment = np.uint64(0x9E3779B97F4A7C15)
_splitmix_mult1 = np.uint64(0xBF58476D1CE4E5B9)
_splitmix_mult2 = np.uint64(0x94D049BB133111EB)
_mask64 = (1 << 64) - 1


def _splitmix64(x:np.ndarray) -> np.ndarray:
    #Finalizer of the SplitMix64 generator. Works elementwise on uint64 arrays (wrapping arithmetic).
    with np.errstate(over="ignore"):
        z = x + _splitmix_increment
        z = (z ^ (z >> np.uint64(30))) * _splitmix_mult1
        z = (z ^ (z >> np.uint64(27))) * _splitmix_mult2
    return z ^ (z >> np.uint64(31))

def _uniforms(seed:int, counters:np.ndarray) -> np.ndarray:
    #Counter-based uniforms in [0, 1): a pure function of (seed, counter), no generator state.
    key = _splitmix64(np.array([seed & _mask64], dtype=np.uint64))[0]
    bits = _splitmix64(counters ^ key)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclasses.dataclass
class EdgeBatch:
    """
    One batch of an R-MAT edge stream.

    Attributes:
        index (int): The position of the batch in the stream.
        start (int): The edge index of the first edge in the batch.
        triples (TripleList): Source keys, destination keys and values (always 1).
    """
    index: int
    start: int
    triples: TripleList

    def __len__(self):
        return len(self.triples)

    def to_assoc(self, semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Builds the batch's associative array. Repeated edges add up under plus_times.
        """
        return AssocArray.from_triple_list(self.triples, semiring)


def format_vertex_keys(vertices:np.ndarray, width:int) -> np.ndarray:
    """
    Formats vertex IDs as zero-padded decimal keys, so that key order matches numeric order.

    Returns:
        numpy.ndarray: A unicode array of keys.
    """
    vertices = np.asarray(vertices, dtype=np.uint64)
    if len(vertices) == 0:
        return np.array([], dtype=f"<U{width}")
    powers = np.uint64(10) ** np.arange(width - 1, -1, -1, dtype=np.uint64)
    digits = ((vertices[:, None] // powers[None, :]) % np.uint64(10)).astype(np.uint8) + np.uint8(ord("0"))
    return np.ascontiguousarray(digits).view(f"S{width}").reshape(-1).astype(f"<U{width}")

def parse_vertex_key(key:str) -> int:
    """
    Returns:
        int: The vertex ID encoded in an R-MAT key.
    """
    return int(key, 10)

def rmat_edges(cfg:RmatConfig, start:int, stop:int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Generates the edges with indices start ... stop-1.

    Every edge depends only on (seed, edge index), so disjoint ranges can be generated independently
    (and concurrently) and always match the full stream.

    Returns:
        (numpy.ndarray, numpy.ndarray): Source and destination vertex IDs.
    """
    if not (0 <= start <= stop):
        raise ConfigurationError(f"Invalid edge range [{start}, {stop}).")
    count = stop - start
    if count == 0:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    scale = cfg.scale
    edgeIdx = np.arange(start, stop, dtype=np.uint64)
    counters = edgeIdx[:, None] * np.uint64(scale) + np.arange(scale, dtype=np.uint64)[None, :]
    u = _uniforms(cfg.seed, counters)

    a, b, c, _ = cfg.probs
    thresholds = np.array([a, a + b, a + b + c])
    #Quadrant 0=(0,0) 1=(0,1) 2=(1,0) 3=(1,1); the first level picks the most significant bit.
    quadrant = np.searchsorted(thresholds, u, side="right")
    rowBits = (quadrant >> 1).astype(np.int64)
    colBits = (quadrant & 1).astype(np.int64)
    weights = np.int64(1) << np.arange(scale - 1, -1, -1, dtype=np.int64)
    return rowBits @ weights, colBits @ weights

def edge_batch(cfg:RmatConfig, index:int) -> EdgeBatch:
    """
    Generates a single batch of the stream by its index.
    """
    start = index * cfg.batch_size
    stop = min(start + cfg.batch_size, cfg.total_edges)
    src, dst = rmat_edges(cfg, start, stop)
    width = cfg.key_width
    triples = TripleList(format_vertex_keys(src, width), format_vertex_keys(dst, width), np.ones(len(src), dtype=np.float64))
    return EdgeBatch(index=index, start=start, triples=triples)

def rmat_stream(cfg:RmatConfig) -> Iterator[EdgeBatch]:
    """
    Yields the R-MAT edge stream batch by batch.

    The stream is a pure function of the config: the same config gives bit-identical batches on any host.

    Parameters:
        cfg (RmatConfig): The stream parameters.
    """
    logging.debug(f"R-MAT stream: scale {cfg.scale}, {cfg.total_edges} edges in {cfg.num_batches} batches, seed {cfg.seed}")
    for index in range(cfg.num_batches):
        yield edge_batch(cfg, index)


@dataclasses.dataclass
class DegreeStats:
    """
    Degree statistics of an edge stream.

    Attributes:
        mean_degree (float): Edges per distinct vertex.
        max_degree (int): The largest out-degree (row degree).
        distinct_vertices (int): Vertices seen as a source or a destination.
        max_in_degree (int): The largest in-degree (column degree).
    """
    mean_degree: float
    max_degree: int
    distinct_vertices: int
    max_in_degree: int = 0

def degree_stats(batches:Iterable[EdgeBatch]) -> DegreeStats:
    """
    Computes degree statistics over a whole stream, accumulating out- and in-degree arrays batch by batch.
    """
    outDegree = AssocArray.empty("plus_times")
    inDegree = AssocArray.empty("plus_times")
    totalEdges = 0
    for batch in batches:
        if len(batch) == 0:
            continue
        adjacency = batch.to_assoc("plus_times")
        outDegree = outDegree + adjacency.reduce_rows("out")
        inDegree = inDegree + adjacency.reduce_cols("in")
        totalEdges += len(batch)
    if totalEdges == 0:
        return DegreeStats(0.0, 0, 0, 0)
    vertices = len(np.union1d(outDegree.row_keys.keys, inDegree.col_keys.keys))
    return DegreeStats(mean_degree=totalEdges / vertices, max_degree=int(outDegree.coords()[2].max()),
                       distinct_vertices=vertices, max_in_degree=int(inDegree.coords()[2].max()))
