from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Union, Sequence, List, Tuple

from hierassoclib.AssocArray import AssocArray, KeySelection
from hierassoclib.Semiring import Semiring, builtin_semiring
from hierassoclib.helpers import ConfigurationError, AlgebraError, cut_presets, default_first_cut, default_cut_ratio, \
    _unknown_name_error, _normalize_name, _parse_int_list


@dataclasses.dataclass(frozen=True)
class CutSpec:
    """
    The nnz thresholds c_1 < c_2 < ... < c_{N-1} of an N-layer hierarchical array.

    An empty CutSpec is the degenerate single-layer ("0 cuts") case.
    """
    cuts: Tuple[int, ...] = ()

    def __post_init__(self):
        cuts = tuple(self.cuts)
        for cut in cuts:
            if isinstance(cut, bool) or int(cut) != cut:
                raise ConfigurationError(f"Cut values must be integers, got {cut!r}.")
        cuts = tuple(int(cut) for cut in cuts)
        if any(cut < 1 for cut in cuts):
            raise ConfigurationError(f"Cut values must be at least 1, got {list(cuts)}.")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConfigurationError(f"Cut values must be strictly increasing, got {list(cuts)}.")
        object.__setattr__(self, "cuts", cuts)

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    @property
    def num_layers(self) -> int:
        return len(self.cuts) + 1

    def to_text(self) -> str:
        """
        Returns:
            str: The cuts as a comma-separated string (empty for no cuts).
        """
        return ",".join(str(cut) for cut in self.cuts)

    @staticmethod
    def parse(text:str) -> CutSpec:
        """
        Parses a comma-separated list of integers, such as "8192,262144,8388608".
        An empty string (or "0") means no cuts.
        """
        text = str(text).strip()
        if text in ("", "0"):
            return CutSpec()
        return CutSpec(tuple(_parse_int_list(text)))

    @staticmethod
    def geometric(layers:int, first_cut:int = default_first_cut, ratio:int = default_cut_ratio) -> CutSpec:
        """
        The default schedule for a layer count: c_i = first_cut * ratio**(i-1), for i = 1 ... layers-1.

        Parameters:
            layers (int): The number of layers N (at least 1).
            first_cut (int, optional): c_1. Defaults to 2**13.
            ratio (int, optional): The ratio between consecutive cuts (at least 2). Defaults to 2**5.
        """
        if layers < 1:
            raise ConfigurationError("A hierarchical array needs at least one layer.")
        if first_cut < 1:
            raise ConfigurationError("first_cut must be at least 1.")
        if ratio < 2 and layers > 2:
            raise ConfigurationError("The cut ratio must be at least 2.")
        return CutSpec(tuple(int(first_cut) * int(ratio) ** i for i in range(layers - 1)))

    @staticmethod
    def preset(name:str) -> CutSpec:
        """
        Looks up a named preset: none, few-wide or many-narrow.
        """
        key = _normalize_name(name)
        if key not in cut_presets:
            raise _unknown_name_error("cut preset", str(name), list(cut_presets.keys()))
        return CutSpec(cut_presets[key])

    @staticmethod
    def resolve(value:Union[CutSpec, str, Sequence[int], None]) -> CutSpec:
        """
        Accepts a CutSpec, a preset name, a comma-separated string or a sequence of integers.
        """
        if value is None:
            return CutSpec()
        if isinstance(value, CutSpec):
            return value
        if isinstance(value, str):
            stripped = value.strip()
            if stripped == "" or stripped[0].isdigit():
                return CutSpec.parse(stripped)
            return CutSpec.preset(stripped)
        return CutSpec(tuple(value))


@dataclasses.dataclass
class HierStats:
    """
    Cascade counters of a hierarchical array.

    Attributes:
        cascades (list[int]): For each layer, how many times it was added into the next layer and cleared. The top layer never cascades.
        absorbed (list[int]): For each layer, the total nnz of every array added into it.
        updates (int): The number of update calls.
    """
    cascades: List[int]
    absorbed: List[int]
    updates: int = 0


class HierArray:
    """
    An N-layer hierarchical associative array.

    Updates are added into the smallest layer. Whenever layer i holds more than c_i entries, it is added into
    layer i+1 and cleared, so most of the work happens on small arrays. The top layer is unbounded.

    A HierArray belongs to a single stream: updates are sequential. Layers are replaced, never mutated,
    so arrays handed out by flush() or layers stay valid.
    """
    def __init__(self, cuts:Union[CutSpec, str, Sequence[int], None] = None, semiring:Union[Semiring, str] = "plus_times"):
        """
        Initializes an empty hierarchical array with len(cuts)+1 layers.

        Args:
            cuts (CutSpec|str|Sequence[int], optional): The cut values, a preset name, or a comma-separated string. Defaults to no cuts.
            semiring (Semiring|str, optional): The semiring of every layer. Defaults to plus_times.

        Raises:
            ConfigurationError: If the cuts aren't strictly increasing positive integers.
        """
        self._cuts = CutSpec.resolve(cuts)
        self._semiring = builtin_semiring(semiring)
        self._layers: List[AssocArray] = [AssocArray.empty(self._semiring) for _ in range(self._cuts.num_layers)]
        self._stats = HierStats(cascades=[0] * self._cuts.num_layers, absorbed=[0] * self._cuts.num_layers)

    @property
    def cuts(self) -> CutSpec:
        return self._cuts

    @property
    def semiring(self) -> Semiring:
        return self._semiring

    @property
    def layers(self) -> Tuple[AssocArray, ...]:
        """
        The layers A_1 ... A_N, smallest first.
        """
        return tuple(self._layers)

    @property
    def num_layers(self) -> int:
        return len(self._layers)

    @property
    def stats(self) -> HierStats:
        return self._stats

    def __repr__(self):
        return f"HierArray(cuts={list(self._cuts.cuts)}, semiring={self._semiring.name}, layer_nnz={[a.nnz for a in self._layers]})"

    def update(self, A:AssocArray) -> HierArray:
        """
        Adds A into the first layer, then cascades upward in a single ascending pass: whenever
        nnz(A_i) > c_i, A_{i+1} = A_{i+1} + A_i and A_i is cleared.

        Returns:
            HierArray: self, to allow chaining.

        Raises:
            AlgebraError: If A uses a different semiring.
        """
        if A.semiring != self._semiring:
            raise AlgebraError(f"Semiring mismatch: hierarchical array uses {self._semiring.name}, update uses {A.semiring.name}.")
        self._layers[0] = self._layers[0].ew_add(A)
        self._stats.absorbed[0] += A.nnz

        for i, cut in enumerate(self._cuts.cuts):
            moved = self._layers[i].nnz
            if moved > cut:
                self._layers[i + 1] = self._layers[i + 1].ew_add(self._layers[i])
                self._layers[i] = AssocArray.empty(self._semiring)
                self._stats.cascades[i] += 1
                self._stats.absorbed[i + 1] += moved
                logging.debug(f"Cascade {i + 1}->{i + 2}: moved {moved} entries (cut {cut}), layer {i + 2} now holds {self._layers[i + 1].nnz}")

        self._stats.updates += 1
        if __debug__:
            self._check_layer_bound()
        return self

    def _check_layer_bound(self):
        for i, cut in enumerate(self._cuts.cuts):
            assert self._layers[i].nnz <= cut, f"Layer {i + 1} holds {self._layers[i].nnz} entries, above its cut {cut}"

    def flush(self) -> AssocArray:
        """
        Sums all the layers, completing every pending update.

        Note:
            This is a read. The layers are left as they are; use compact() to fold them into the top layer.

        Returns:
            AssocArray: A_1 + A_2 + ... + A_N.
        """
        total = self._layers[0]
        for layer in self._layers[1:]:
            total = total.ew_add(layer)
        return total

    def compact(self) -> HierArray:
        """
        Replaces the top layer with the flush result and clears every other layer.

        Returns:
            HierArray: self.
        """
        flushed = self.flush()
        self._layers = [AssocArray.empty(self._semiring) for _ in range(self.num_layers - 1)] + [flushed]
        logging.debug(f"Compacted into the top layer: {flushed.nnz} entries")
        return self

    def layer_nnz(self) -> Tuple[int, ...]:
        """
        Returns:
            tuple[int, ...]: (nnz(A_1), ..., nnz(A_N), nnz(flush())). The flushed total can be smaller than the sum when layers overlap.
        """
        return tuple(layer.nnz for layer in self._layers) + (self.flush().nnz,)

    def extract(self, rows:KeySelection = None, cols:KeySelection = None) -> AssocArray:
        """
        Queries a subarray without flushing everything: extracts from each layer and sums the pieces.
        """
        total = AssocArray.empty(self._semiring)
        for layer in self._layers:
            total = total.ew_add(layer.extract(rows, cols))
        return total
