from __future__ import annotations

import dataclasses
import json
import logging
import math
import numbers
import os
from typing import Optional, Union, List, Tuple, Sequence, Dict, Any, TYPE_CHECKING

import appdirs
from fuzzywuzzy import process

if TYPE_CHECKING:
    from hierassoclib.HierArray import CutSpec

#Graph500 reference quadrant probabilities (a, b, c, d).
default_rmat_probs = (0.57, 0.19, 0.19, 0.05)

#Default geometric cut schedule, used when only a layer count is given: c_i = first_cut * cut_ratio**(i-1)
default_first_cut = 2 ** 13
default_cut_ratio = 2 ** 5

cut_presets = {
    "none": (),
    "few-wide": (2 ** 17, 2 ** 23),
    "many-narrow": (2 ** 13, 2 ** 16, 2 ** 19, 2 ** 22),
}

#Desk-scale defaults for the benchmark.
default_scale = 22
default_total_edges = 10 ** 7
default_batch_size = 10 ** 5
default_warmup_batches = 2

#Runs above this size skip the flat-fold oracle check.
oracle_edge_limit = 10 ** 6

metrics_header = ["batch_index", "batch_nnz", "cumulative_edges", "batch_seconds", "inst_rate", "cum_rate",
                  "layer_nnz", "cascades", "generate_seconds"]

config_app_name = "hierassoclib"


class ConfigurationError(ValueError):
    """
    Raised for invalid configuration: unknown semiring or preset names, bad cut values, bad R-MAT parameters.
    """
    pass

class MalformedTriplesError(ValueError):
    """
    Raised when row, column and value sequences do not line up.
    """
    pass

class PreconditionError(ValueError):
    """
    Raised when an operation's input violates its precondition (for example a repeated row in an identity array).
    """
    pass

class DomainError(ValueError):
    """
    Raised when a value is not valid for the selected semiring (NaN, stray infinities, negatives under max_times/min_times).
    """
    pass

class AlgebraError(ValueError):
    """
    Raised when two operands live on different semirings.
    """
    pass

class TripleFormatError(ValueError):
    """
    Raised when a triple cannot be written in the TSV format (tab or newline in a key).
    """
    pass

class TripleParseError(TripleFormatError):
    """
    Raised when a TSV triple file contains a malformed line.

    Attributes:
        path (str): The file being read.
        line_number (int): The 1-based line number of the offending line.
    """
    def __init__(self, path:str, line_number:int, reason:str):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")

class BenchError(RuntimeError):
    """
    Raised when a benchmark instance fails. The original exception is chained.
    """
    pass


def _suggest(name:str, choices:Sequence[str]) -> Optional[str]:
    #Closest valid name, if it's close enough to be worth mentioning.
    if not choices:
        return None
    match = process.extractOne(name, list(choices))
    if match is None or match[1] < 60:
        return None
    return match[0]

def _unknown_name_error(kind:str, name:str, choices:Sequence[str]) -> ConfigurationError:
    message = f"Unknown {kind} '{name}'. Valid choices: {', '.join(choices)}."
    suggestion = _suggest(name, choices)
    if suggestion is not None:
        message += f" Did you mean '{suggestion}'?"
    return ConfigurationError(message)

def _normalize_name(name:str) -> str:
    return str(name).strip().lower()

def default_config_path() -> str:
    """
    Returns:
        str: Where the bench CLI looks for a config file when --config isn't passed.
    """
    return os.path.join(appdirs.user_config_dir(config_app_name), "bench.json")

def _parse_int_list(text:str) -> List[int]:
    items = [x.strip() for x in str(text).split(",")]
    items = [x for x in items if x != ""]
    try:
        return [int(x) for x in items]
    except ValueError:
        raise ConfigurationError(f"Expected a comma-separated list of integers, got '{text}'.")

def _as_count(name:str, value) -> int:
    #Integral floats such as 2.0 become ints. Anything else that isn't an integer is rejected.
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}.")
    if isinstance(value, numbers.Integral):
        return int(value)
    if not math.isfinite(value) or not float(value).is_integer():
        raise ConfigurationError(f"{name} must be an integer, got {value!r}.")
    return int(value)

def _parse_probs(text:Union[str, Sequence[float]]) -> Tuple[float, float, float, float]:
    if isinstance(text, str):
        try:
            values = tuple(float(x) for x in text.split(",") if x.strip() != "")
        except ValueError:
            raise ConfigurationError(f"Expected four comma-separated probabilities, got '{text}'.")
    else:
        values = tuple(float(x) for x in text)
    if len(values) != 4:
        raise ConfigurationError(f"Expected four quadrant probabilities (a,b,c,d), got {len(values)}.")
    return values


@dataclasses.dataclass(frozen=True)
class RmatConfig:
    """
    This class holds the parameters of an R-MAT edge stream.

    Parameters:
        scale (int): The vertex count is 2**scale. Must be between 1 and 62.
        total_edges (int): The number of edges across all batches.
        batch_size (int): The number of edges per batch. The last batch may be short.
        probs (tuple[float,float,float,float], optional): Quadrant probabilities (a,b,c,d). Defaults to the Graph500 values.
        seed (int, optional): 64-bit seed. Defaults to 0.
    """
    scale: int = 16
    total_edges: int = 10 ** 6
    batch_size: int = default_batch_size
    probs: Tuple[float, float, float, float] = default_rmat_probs
    seed: int = 0

    def __post_init__(self):
        for name in ("scale", "total_edges", "batch_size", "seed"):
            object.__setattr__(self, name, _as_count(name, getattr(self, name)))
        object.__setattr__(self, "probs", _parse_probs(self.probs))
        if not (1 <= self.scale <= 62):
            raise ConfigurationError("Please provide a scale between 1 and 62.")
        if self.total_edges < 0:
            raise ConfigurationError("total_edges can't be negative.")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1.")
        if any(p < 0 for p in self.probs):
            raise ConfigurationError(f"Quadrant probabilities must be nonnegative, got {self.probs}.")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ConfigurationError(f"Quadrant probabilities must sum to 1, got {self.probs} (sum {sum(self.probs)!r}).")

    @property
    def num_vertices(self) -> int:
        return 1 << self.scale

    @property
    def key_width(self) -> int:
        """
        The width of the zero-padded decimal vertex keys.
        """
        return len(str(self.num_vertices - 1))

    @property
    def num_batches(self) -> int:
        return -(-self.total_edges // self.batch_size)


@dataclasses.dataclass
class MetricsRow:
    """
    One row of benchmark output, describing a single batch.

    Note:
        inst_rate is batch_nnz / batch_seconds. cum_rate is the edges timed so far divided by the update seconds
        timed so far, where warmup batches are left out once the run has moved past them.
    """
    batch_index: int
    batch_nnz: int
    cumulative_edges: int
    batch_seconds: float
    inst_rate: float
    cum_rate: float
    layer_nnz: List[int]
    cascades: List[int]
    generate_seconds: float = 0.0

    def to_csv_fields(self) -> List[str]:
        return [str(self.batch_index), str(self.batch_nnz), str(self.cumulative_edges),
                repr(float(self.batch_seconds)), repr(float(self.inst_rate)), repr(float(self.cum_rate)),
                ";".join(str(int(x)) for x in self.layer_nnz), ";".join(str(int(x)) for x in self.cascades),
                repr(float(self.generate_seconds))]

    @staticmethod
    def from_csv_fields(fields:Sequence[str]) -> MetricsRow:
        def int_list(text):
            return [int(x) for x in text.split(";")] if text != "" else []
        return MetricsRow(batch_index=int(fields[0]), batch_nnz=int(fields[1]), cumulative_edges=int(fields[2]),
                          batch_seconds=float(fields[3]), inst_rate=float(fields[4]), cum_rate=float(fields[5]),
                          layer_nnz=int_list(fields[6]), cascades=int_list(fields[7]),
                          generate_seconds=float(fields[8]) if len(fields) > 8 else 0.0)


@dataclasses.dataclass
class BenchConfig:
    """
    This class holds the options for a benchmark run.

    Parameters:
        rmat (RmatConfig, optional): The edge stream to generate. Defaults to the desk-scale stream (scale 22, 10**7 edges, batches of 10**5).
        cuts (str|list[int]|CutSpec, optional): A preset name (none, few-wide, many-narrow), a comma-separated list of cut values, or a CutSpec. Defaults to many-narrow.
        layers (int, optional): If set, overrides cuts with the default geometric schedule for this many layers.
        semiring (str, optional): The name of the semiring. Defaults to plus_times.
        instances (int, optional): The number of share-nothing instances. Defaults to 1.
        out_dir (str, optional): Directory for the CSV and JSON outputs. Nothing is written if omitted.
        dump_triples (str, optional): If set, the stream of instance 0 is also written to this TSV file.
        warmup_batches (int, optional): Batches left out of cum_rate. Defaults to 2.
        verify (bool, optional): Check the final flush against a flat fold of the stream (runs up to 10**6 edges only). Defaults to True.
        first_cut (int, optional): First cut of the geometric schedule.
        cut_ratio (int, optional): Ratio between consecutive cuts of the geometric schedule.
    """
    rmat: RmatConfig = dataclasses.field(default_factory=lambda: RmatConfig(scale=default_scale, total_edges=default_total_edges,
                                                                            batch_size=default_batch_size))
    cuts: Union[str, Sequence[int], "CutSpec"] = "many-narrow"
    layers: Optional[int] = None
    semiring: str = "plus_times"
    instances: int = 1
    out_dir: Optional[str] = None
    dump_triples: Optional[str] = None
    warmup_batches: int = default_warmup_batches
    verify: bool = True
    first_cut: int = default_first_cut
    cut_ratio: int = default_cut_ratio

    def __post_init__(self):
        from hierassoclib.HierArray import CutSpec
        from hierassoclib.Semiring import builtin_semiring

        if isinstance(self.rmat, dict):
            self.rmat = RmatConfig(**self.rmat)
        for name in ("instances", "warmup_batches", "first_cut", "cut_ratio"):
            setattr(self, name, _as_count(name, getattr(self, name)))
        if self.layers is not None:
            self.layers = _as_count("layers", self.layers)
        if self.instances < 1:
            raise ConfigurationError("instances must be at least 1.")
        if self.warmup_batches < 0:
            raise ConfigurationError("warmup_batches can't be negative.")
        builtin_semiring(self.semiring)     #Fails early on unknown names.

        #Presets and layer counts resolve to concrete cuts before anything runs.
        if self.layers is not None:
            self.cut_spec = CutSpec.geometric(self.layers, self.first_cut, self.cut_ratio)
        else:
            self.cut_spec = CutSpec.resolve(self.cuts)

    @property
    def cut_label(self) -> str:
        """
        The preset name if cuts was given as one, otherwise the comma-separated cut values.
        """
        if self.layers is None and isinstance(self.cuts, str) and _normalize_name(self.cuts) in cut_presets:
            return _normalize_name(self.cuts)
        return self.cut_spec.to_text() or "none"

    def to_dict(self) -> Dict[str, Any]:
        """
        Returns:
            dict: A JSON-friendly echo of the configuration, with cuts resolved to integers.
        """
        return {
            "rmat": {"scale": self.rmat.scale, "total_edges": self.rmat.total_edges, "batch_size": self.rmat.batch_size,
                     "probs": list(self.rmat.probs), "seed": self.rmat.seed},
            "cuts": list(self.cut_spec.cuts),
            "cut_label": self.cut_label,
            "semiring": self.semiring,
            "instances": self.instances,
            "warmup_batches": self.warmup_batches,
            "verify": self.verify,
        }

    def echo(self) -> str:
        """
        Returns:
            str: The configuration as a single line of JSON, used as the comment header of CSV outputs.
        """
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(path:str, **overrides) -> BenchConfig:
        """
        Loads a BenchConfig from a JSON file. Keyword overrides win over the file.

        The file has the same fields as BenchConfig; the "rmat" entry is a dict of RmatConfig fields.
        """
        with open(path, "r", encoding="utf-8") as fp:
            try:
                data = json.load(fp)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"Could not parse config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must contain a JSON object.")
        logging.debug(f"Loaded config from {path}: {data}")
        return BenchConfig.from_dict(data, **overrides)

    @staticmethod
    def from_dict(data:Dict[str, Any], **overrides) -> BenchConfig:
        valid_fields = {f.name for f in dataclasses.fields(BenchConfig)}
        rmat_fields = {f.name for f in dataclasses.fields(RmatConfig)}
        data = dict(data)
        rmat_data = dict(data.pop("rmat", {}) or {})
        bad_rmat = [k for k in rmat_data if k not in rmat_fields]
        if bad_rmat:
            raise ConfigurationError(f"Unknown rmat field(s): {', '.join(sorted(bad_rmat))}.")

        merged = dict()
        #Flat rmat fields (scale, seed...) are accepted at the top level too, and overrides are applied last.
        pending = list(data.items()) + [(k, v) for k, v in overrides.items() if v is not None]
        for key, value in pending:
            if key in rmat_fields:
                rmat_data[key] = value
            elif key in valid_fields:
                merged[key] = value
            else:
                raise ConfigurationError(f"Unknown config field '{key}'.")
        #Explicit cuts replace a layer count coming from the file.
        if overrides.get("cuts") is not None and overrides.get("layers") is None:
            merged.pop("layers", None)
        rmat_defaults = {"scale": default_scale, "total_edges": default_total_edges, "batch_size": default_batch_size}
        rmat_defaults.update(rmat_data)
        merged["rmat"] = RmatConfig(**rmat_defaults)
        return BenchConfig(**merged)
