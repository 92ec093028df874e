from __future__ import annotations

import contextlib
import csv
import json
import logging
import math
import os
import re
import tempfile
from typing import Iterable, List, Optional, Sequence, Union, Any, Dict, TextIO, Iterator

import numpy as np

from hierassoclib.AssocArray import AssocArray, TripleList
from hierassoclib.Rmat import EdgeBatch
from hierassoclib.Semiring import Semiring, builtin_semiring
from hierassoclib.helpers import MetricsRow, TripleFormatError, TripleParseError, metrics_header

TripleSource = Union[AssocArray, TripleList, EdgeBatch, Iterable[Union[TripleList, EdgeBatch]]]

#Decimal or exponent notation, or a signed inf. Everything format_value writes, and no more.
_value_pattern = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf", re.ASCII)


@contextlib.contextmanager
def _atomic_writer(path:str) -> Iterator[TextIO]:
    #Writes to a temp file next to path and renames it over path once everything is written.
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tempPath = tempfile.mkstemp(prefix=".tmp-", suffix=os.path.basename(path), dir=directory)
    except OSError as e:
        raise OSError(f"Could not write {path}: {e}") from e
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fp:
            yield fp
        os.replace(tempPath, path)
    except BaseException as e:
        with contextlib.suppress(OSError):
            os.remove(tempPath)
        if isinstance(e, OSError):
            raise OSError(f"Could not write {path}: {e}") from e
        raise

def format_value(value:float) -> str:
    """
    Formats a value with the shortest decimal that reads back to the same float. Integral values have no fractional part.
    """
    value = float(value)
    if math.isfinite(value) and value.is_integer() and abs(value) < 2 ** 53:
        return str(int(value))
    return repr(value)

def _check_keys(keys:np.ndarray, where:str):
    if len(keys) == 0:
        return
    keys = np.asarray(keys, dtype=str)
    bad = (np.char.find(keys, "\t") >= 0) | (np.char.find(keys, "\n") >= 0) | (np.char.find(keys, "\r") >= 0)
    if bad.any():
        raise TripleFormatError(f"{where} key {str(keys[bad][0])!r} contains a tab or newline and can't be written as TSV.")

def _iter_triple_chunks(source:TripleSource) -> Iterator[tuple]:
    if isinstance(source, AssocArray):
        _check_keys(source.row_keys.keys, "Row")
        _check_keys(source.col_keys.keys, "Column")
        yield source.triples()
        return
    if isinstance(source, EdgeBatch):
        source = source.triples
    if isinstance(source, TripleList):
        _check_keys(np.asarray(source.rows), "Row")
        _check_keys(np.asarray(source.cols), "Column")
        yield (np.asarray(source.rows).tolist(), np.asarray(source.cols).tolist(), np.asarray(source.vals, dtype=np.float64).tolist())
        return
    for item in source:
        yield from _iter_triple_chunks(item)

def write_triples(source:TripleSource, path:str) -> int:
    """
    Writes triples as a TSV file: row key, column key and value separated by tabs, one triple per line.

    The file is written to a temp file and renamed into place.

    Parameters:
        source (AssocArray|TripleList|EdgeBatch|Iterable): What to write. An iterable of batches is streamed.
        path (str): The destination.

    Returns:
        int: The number of lines written.

    Raises:
        TripleFormatError: If a key contains a tab or newline.
    """
    written = 0
    valueText: Dict[float, str] = dict()
    with _atomic_writer(path) as fp:
        for rows, cols, vals in _iter_triple_chunks(source):
            lines = []
            for row, col, val in zip(rows, cols, vals):
                text = valueText.get(val)
                if text is None:
                    text = valueText[val] = format_value(val)
                lines.append(f"{row}\t{col}\t{text}\n")
            fp.write("".join(lines))
            written += len(lines)
    logging.debug(f"Wrote {written} triples to {path}")
    return written

def read_triples(path:str, semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
    """
    Reads a TSV triple file into an array. Repeated (row, col) lines are folded with plus, as in from_triples.

    Parameters:
        path (str): The file to read.
        semiring (Semiring|str, optional): The semiring of the result. Defaults to plus_times.

    Raises:
        TripleParseError: If a line doesn't have exactly three fields, a key holds a NUL, or the value isn't plain decimal notation or inf.
        DomainError: If a value isn't valid for the semiring.
    """
    semiring = builtin_semiring(semiring)
    rows: List[str] = []
    cols: List[str] = []
    vals: List[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fp:
        for lineNumber, line in enumerate(fp, start=1):
            if not line.endswith("\n"):
                raise TripleParseError(path, lineNumber, "line is not newline-terminated")
            fields = line[:-1].split("\t")
            if len(fields) != 3:
                raise TripleParseError(path, lineNumber, f"expected 3 tab-separated fields, found {len(fields)}")
            if "\r" in fields[0] or "\r" in fields[1]:
                raise TripleParseError(path, lineNumber, "key contains a carriage return")
            if "\x00" in fields[0] or "\x00" in fields[1]:
                raise TripleParseError(path, lineNumber, "key contains a NUL character")
            if _value_pattern.fullmatch(fields[2]) is None:
                raise TripleParseError(path, lineNumber, f"value {fields[2]!r} is not a number")
            value = float(fields[2])
            rows.append(fields[0])
            cols.append(fields[1])
            vals.append(value)
    logging.debug(f"Read {len(rows)} triples from {path}")
    #Identity arrays store an infinite one, so reading them back must accept it.
    return AssocArray._from_triples(rows, cols, vals, semiring, allow_identity=True)

def _write_table(fp:TextIO, header:Sequence[str], rows:Iterable[Sequence[Any]], echo:Optional[str]):
    if echo is not None:
        fp.write(f"# {echo}\n")
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)

def write_table(path:str, header:Sequence[str], rows:Iterable[Sequence[Any]], echo:Optional[str] = None):
    """
    Writes a plot-ready CSV: an optional '#' comment line, the header and the data rows. No footer.
    """
    with _atomic_writer(path) as fp:
        _write_table(fp, header, rows, echo)

def write_metrics(rows:Iterable[MetricsRow], path:str, echo:Optional[str] = None):
    """
    Writes per-batch metrics as CSV.

    The header is batch_index,batch_nnz,cumulative_edges,batch_seconds,inst_rate,cum_rate,layer_nnz,cascades
    followed by generate_seconds. layer_nnz and cascades are semicolon-joined integer lists.
    Floats use the shortest round-trip representation, so rates can be recomputed from the raw columns.

    Parameters:
        rows (Iterable[MetricsRow]): One row per batch.
        path (str): The destination.
        echo (str, optional): The config echo, written as a '#' comment line above the header.
    """
    write_table(path, metrics_header, (row.to_csv_fields() for row in rows), echo)
    logging.debug(f"Wrote metrics to {path}")

def read_metrics(path:str) -> List[MetricsRow]:
    """
    Reads a metrics CSV written by write_metrics, skipping '#' comment lines.
    """
    with open(path, "r", encoding="utf-8", newline="") as fp:
        lines = [line for line in fp if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        return []
    if header[:len(metrics_header) - 1] != metrics_header[:-1]:
        raise TripleFormatError(f"{path} is not a metrics file (header {header}).")
    return [MetricsRow.from_csv_fields(fields) for fields in reader if fields]

def read_echo(path:str) -> Optional[Dict[str, Any]]:
    """
    Returns:
        dict|None: The config echo stored in the comment line of a CSV written by this library, if there is one.
    """
    with open(path, "r", encoding="utf-8") as fp:
        first = fp.readline()
    if not first.startswith("# "):
        return None
    return json.loads(first[2:])

def write_json(path:str, data:Any):
    with _atomic_writer(path) as fp:
        json.dump(data, fp, indent=2, sort_keys=True, default=str)
        fp.write("\n")
