from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Union, Sequence, Iterator, Tuple, List, Dict, Any

import numpy as np

from hierassoclib.Semiring import Semiring, builtin_semiring
from hierassoclib.helpers import MalformedTriplesError, PreconditionError, AlgebraError

KeySelection = Optional[Union[str, Sequence[str], np.ndarray, slice]]

_empty_keys = np.array([], dtype="<U1")
_empty_index = np.array([], dtype=np.int64)
_empty_values = np.array([], dtype=np.float64)

#Keys of at most this many characters, all below U+0100, get packed uint64 codes.
_packed_width = 8
#Marks a KeySet whose packed codes haven't been computed yet.
_pending = object()


def _char_matrix(keys:np.ndarray) -> np.ndarray:
    width = keys.dtype.itemsize // 4
    return np.ascontiguousarray(keys).view(np.uint32).reshape(len(keys), width)

def _has_embedded_nul(keys:np.ndarray) -> bool:
    width = keys.dtype.itemsize // 4
    if width < 2 or len(keys) == 0:
        return False
    present = _char_matrix(keys) != 0
    return bool((present[:, 1:] & ~present[:, :-1]).any())

def _as_key_array(keys) -> np.ndarray:
    if keys is None:
        return _empty_keys
    if isinstance(keys, KeySet):
        return keys.keys
    if isinstance(keys, str):
        keys = [keys]
    if not isinstance(keys, np.ndarray) or keys.dtype.kind == "O":
        #numpy strips trailing NULs, so "a\x00" would silently become "a".
        keys = [key if isinstance(key, str) else str(key) for key in keys]
        if "\x00" in "".join(keys):
            raise MalformedTriplesError("Keys can't contain NUL characters.")
    arr = np.asarray(keys)
    if arr.size == 0:
        return _empty_keys
    if arr.dtype.kind != "U":
        arr = arr.astype(str)
    arr = arr.reshape(-1)
    if _has_embedded_nul(arr):
        raise MalformedTriplesError("Keys can't contain NUL characters.")
    return arr

def _pack_keys(keys:np.ndarray) -> Optional[np.ndarray]:
    #Big-endian packing of each key's code points, one byte each. The NUL padding sorts before any
    #character, so the codes order and compare exactly like the strings.
    if keys.dtype.kind != "U":
        return None
    width = keys.dtype.itemsize // 4
    if width > _packed_width:
        return None
    if len(keys) == 0 or width == 0:
        return np.zeros(len(keys), dtype=np.uint64)
    chars = _char_matrix(keys)
    if chars.max() > 0xFF:
        return None
    packed = np.zeros(len(keys), dtype=np.uint64)
    for j in range(width):
        packed |= chars[:, j].astype(np.uint64) << np.uint64(8 * (_packed_width - 1 - j))
    return packed

def _readonly(arr:np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class KeySet:
    """
    A sorted, duplicate-free sequence of string keys.

    Keys are ordered by code point, which is the same order as comparing their UTF-8 bytes.
    Membership and rank lookups are binary searches.

    Note:
        Keys can't contain NUL characters.
    """
    __slots__ = ("_keys", "_codes")

    def __init__(self, keys=None):
        """
        Parameters:
            keys (Iterable[str], optional): Any keys. They are sorted and deduplicated.

        Raises:
            MalformedTriplesError: If a key contains a NUL character.
        """
        self._keys = _readonly(np.unique(_as_key_array(keys)))
        self._codes = _pending

    @classmethod
    def _from_sorted(cls, keys:np.ndarray, codes=_pending) -> KeySet:
        #Trusts that keys are already sorted and unique, and that codes (if given) match them.
        keySet = cls.__new__(cls)
        if keys.flags.writeable:
            keys = _readonly(keys)
        if isinstance(codes, np.ndarray) and codes.flags.writeable:
            codes = _readonly(codes)
        keySet._keys = keys
        keySet._codes = codes
        return keySet

    @property
    def codes(self) -> Optional[np.ndarray]:
        """
        Order-preserving uint64 codes of the keys, or None if a key is longer than 8 characters
        or has a code point above U+00FF. Computed on first use.
        """
        if self._codes is _pending:
            codes = _pack_keys(self._keys)
            self._codes = None if codes is None else _readonly(codes)
        return self._codes

    def _take(self, index:np.ndarray) -> KeySet:
        #The subset at the given (sorted) positions, keeping the codes if they are known.
        codes = self._codes[index] if isinstance(self._codes, np.ndarray) else _pending
        return KeySet._from_sorted(self._keys[index], codes)

    @property
    def keys(self) -> np.ndarray:
        """
        The keys, as a read-only numpy unicode array.
        """
        return self._keys

    def __len__(self):
        return len(self._keys)

    def __iter__(self) -> Iterator[str]:
        return iter(self._keys.tolist())

    def __getitem__(self, index:int) -> str:
        return str(self._keys[index])

    def __contains__(self, key) -> bool:
        return self.ranks([key])[0] >= 0

    def __eq__(self, other):
        if not isinstance(other, KeySet):
            return NotImplemented
        return np.array_equal(self._keys, other._keys)

    __hash__ = None

    def __reduce__(self):
        #Codes are recomputed after unpickling; the pending marker isn't picklable by identity.
        return KeySet._from_sorted, (self._keys,)

    def __repr__(self):
        return f"KeySet({self._keys.tolist()!r})"

    def tolist(self) -> List[str]:
        return self._keys.tolist()

    def rank(self, key:str) -> int:
        """
        Returns:
            int: The position of key in the set.

        Raises:
            KeyError: If the key isn't in the set.
        """
        index = self.ranks([key])[0]
        if index < 0:
            raise KeyError(key)
        return int(index)

    def ranks(self, keys) -> np.ndarray:
        """
        Vectorized rank lookup.

        Returns:
            numpy.ndarray: The position of each key, or -1 where the key is absent.
        """
        keys = _as_key_array(keys)
        if len(self._keys) == 0 or len(keys) == 0:
            return np.full(len(keys), -1, dtype=np.int64)
        haystack, needles = self._keys, keys
        if self.codes is not None:
            queryCodes = _pack_keys(keys)
            if queryCodes is not None:
                haystack, needles = self.codes, queryCodes
        pos = np.searchsorted(haystack, needles)
        clipped = np.minimum(pos, len(haystack) - 1)
        found = (pos < len(haystack)) & (haystack[clipped] == needles)
        return np.where(found, clipped, -1).astype(np.int64)


@dataclasses.dataclass
class TripleList:
    """
    Parallel sequences of row keys, column keys and values.

    Duplicate (row, col) pairs are allowed; they are folded with plus when an array is built.
    """
    rows: Sequence[str]
    cols: Sequence[str]
    vals: Sequence[float]

    def __post_init__(self):
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise MalformedTriplesError(f"Row, column and value sequences must have the same length "
                                        f"(got {len(self.rows)}, {len(self.cols)}, {len(self.vals)}).")

    def __len__(self):
        return len(self.rows)


def _unique_inverse(keys:np.ndarray) -> Tuple[KeySet, np.ndarray]:
    #np.unique(return_inverse=True), sorting the packed codes when the keys have them.
    codes = _pack_keys(keys)
    if codes is None:
        unique, inverse = np.unique(keys, return_inverse=True)
        return KeySet._from_sorted(unique), inverse.reshape(-1)
    uniqueCodes, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    return KeySet._from_sorted(keys[first], uniqueCodes), inverse.reshape(-1)

def _merge_keys(a:KeySet, b:KeySet) -> Tuple[KeySet, Optional[np.ndarray], Optional[np.ndarray]]:
    #Union of two key sets. Returns the union and, for each input, the map from its positions to
    #union positions (None when that map is the identity). Inserts into the larger side, so the
    #cost is linear in the larger set rather than a full sort.
    if len(b) > len(a):
        union, bMap, aMap = _merge_keys(b, a)
        return union, aMap, bMap
    if len(b) == 0:
        return a, None, _empty_index
    if len(a) == 0:
        return b, _empty_index, None

    aCodes, bCodes = a.codes, b.codes
    packed = aCodes is not None and bCodes is not None
    aSearch, bSearch = (aCodes, bCodes) if packed else (a.keys, b.keys)
    pos = np.searchsorted(aSearch, bSearch)
    found = (pos < len(aSearch)) & (aSearch[np.minimum(pos, len(aSearch) - 1)] == bSearch)
    if found.all():
        return a, None, pos.astype(np.int64)

    missing = ~found
    newPos = pos[missing]
    dtype = np.promote_types(a.keys.dtype, b.keys.dtype)
    unionKeys = np.insert(a.keys.astype(dtype, copy=False), newPos, b.keys[missing])
    unionCodes = np.insert(aCodes, newPos, bCodes[missing]) if packed else _pending
    union = KeySet._from_sorted(unionKeys, unionCodes)

    insertedAt = newPos + np.arange(len(newPos))
    keepMask = np.ones(len(unionKeys), dtype=bool)
    keepMask[insertedAt] = False
    aMap = np.flatnonzero(keepMask)

    bMap = np.empty(len(b), dtype=np.int64)
    bMap[missing] = insertedAt
    bMap[found] = aMap[pos[found]]
    return union, aMap, bMap

def _compact_index(used:np.ndarray, size:int) -> Tuple[np.ndarray, np.ndarray]:
    #Given the indices in use out of range(size), returns (kept positions, old->new map).
    mask = np.zeros(size, dtype=bool)
    mask[used] = True
    remap = np.cumsum(mask) - 1
    return np.flatnonzero(mask), remap


class AssocArray:
    """
    A hypersparse associative array: a mapping from (row key, column key) pairs to semiring values.

    Only observed keys are materialized. Entries are kept in row-major order as parallel index arrays
    (compressed over the materialized rows only), and no stored entry equals the semiring's zero.

    Arrays are immutable: every operation returns a new array, so they can be shared between threads.

    Tip:
        The operators follow the algebra: ``A + B`` is element-wise plus, ``A * B`` is element-wise times,
        ``A @ B`` is array multiplication, ``A.T`` is the transpose and ``A[rows, cols]`` extracts a subarray.
    """
    __slots__ = ("_row_keys", "_col_keys", "_rows", "_cols", "_vals", "_semiring")

    def __init__(self, row_keys:KeySet, col_keys:KeySet, rows:np.ndarray, cols:np.ndarray, vals:np.ndarray, semiring:Semiring):
        """
        Initializes an array from already-canonical parts.
        Don't use this constructor directly. Use from_triples (or the other factories) instead.
        """
        self._row_keys = row_keys
        self._col_keys = col_keys
        self._rows = _readonly(rows)
        self._cols = _readonly(cols)
        self._vals = _readonly(vals)
        self._semiring = semiring

    #Factories
    @staticmethod
    def empty(semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Returns:
            AssocArray: An array with no keys and no entries.
        """
        semiring = builtin_semiring(semiring)
        return AssocArray(KeySet._from_sorted(_empty_keys), KeySet._from_sorted(_empty_keys),
                          _empty_index.copy(), _empty_index.copy(), _empty_values.copy(), semiring)

    @staticmethod
    def from_triples(rows, cols, vals, semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Builds an array from row keys, column keys and values.

        Duplicate (row, col) pairs are folded with the semiring's plus in input order, and
        entries equal to the semiring's zero are dropped.

        Parameters:
            rows (Sequence[str]): The row key of each triple.
            cols (Sequence[str]): The column key of each triple.
            vals (Sequence[float]|float): The value of each triple. A single number is used for every triple.
            semiring (Semiring|str, optional): The semiring. Defaults to plus_times.

        Returns:
            AssocArray: The new array.

        Raises:
            MalformedTriplesError: If the sequences have different lengths, or a key contains a NUL character.
            DomainError: If a value isn't valid for the semiring. Infinite values are only accepted when they
                equal the semiring's zero (and are dropped); use identity_from_keys for infinite ones.
        """
        return AssocArray._from_triples(rows, cols, vals, semiring)

    @staticmethod
    def _from_triples(rows, cols, vals, semiring:Union[Semiring, str], allow_identity:bool = False) -> AssocArray:
        semiring = builtin_semiring(semiring)
        rowArr = _as_key_array(rows)
        colArr = _as_key_array(cols)
        if np.ndim(vals) == 0:
            vals = np.full(len(rowArr), vals, dtype=np.float64)
        valArr = np.asarray(vals).reshape(-1)
        if not (len(rowArr) == len(colArr) == len(valArr)):
            raise MalformedTriplesError(f"Row, column and value sequences must have the same length "
                                        f"(got {len(rowArr)}, {len(colArr)}, {len(valArr)}).")
        valArr = semiring.validate(valArr, allow_identity=allow_identity)
        if len(valArr) == 0:
            return AssocArray.empty(semiring)

        rowKeys, rowIdx = _unique_inverse(rowArr)
        colKeys, colIdx = _unique_inverse(colArr)
        codes = rowIdx.astype(np.int64) * len(colKeys) + colIdx
        return AssocArray._assemble(rowKeys, colKeys, codes, valArr, semiring, presorted=False, reduce=True)

    @staticmethod
    def from_triple_list(triples:TripleList, semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Same as from_triples, taking a TripleList.
        """
        return AssocArray.from_triples(triples.rows, triples.cols, triples.vals, semiring)

    @staticmethod
    def from_dict(data:Dict[Tuple[str, str], float], semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Builds an array from a {(row, col): value} dict.
        """
        pairs = list(data.items())
        return AssocArray.from_triples([k[0] for k, _ in pairs], [k[1] for k, _ in pairs], [v for _, v in pairs], semiring)

    @staticmethod
    def identity_from_keys(k1, k2, semiring:Union[Semiring, str] = "plus_times") -> AssocArray:
        """
        Builds an array with the semiring's one at (k1[i], k2[i]) for each i.

        With k1 == k2 this is the identity on that key set.

        Raises:
            MalformedTriplesError: If k1 and k2 have different lengths, or a (row, col) pair is repeated.
            PreconditionError: If a row or column is repeated (at most one entry per row and per column).
        """
        semiring = builtin_semiring(semiring)
        rowArr = _as_key_array(k1)
        colArr = _as_key_array(k2)
        if len(rowArr) != len(colArr):
            raise MalformedTriplesError(f"Identity keys must have the same length (got {len(rowArr)} and {len(colArr)}).")
        pairs = list(zip(rowArr.tolist(), colArr.tolist()))
        if len(set(pairs)) != len(pairs):
            raise MalformedTriplesError("Identity keys contain a duplicate (row, col) pair.")
        if len(np.unique(rowArr)) != len(rowArr):
            raise PreconditionError("Identity arrays allow one entry per row, but a row key is repeated.")
        if len(np.unique(colArr)) != len(colArr):
            raise PreconditionError("Identity arrays allow one entry per column, but a column key is repeated.")
        return AssocArray._from_triples(rowArr, colArr, semiring.one, semiring, allow_identity=True)

    @staticmethod
    def _assemble(rowKeys:Union[KeySet, np.ndarray], colKeys:Union[KeySet, np.ndarray], codes:np.ndarray, vals:np.ndarray, semiring:Semiring,
                  presorted:bool = True, reduce:bool = False, compact:bool = True) -> AssocArray:
        #Builds the canonical form from row-major codes (row * ncols + col) over the given key sets.
        if not isinstance(rowKeys, KeySet):
            rowKeys = KeySet._from_sorted(rowKeys)
        if not isinstance(colKeys, KeySet):
            colKeys = KeySet._from_sorted(colKeys)
        if not presorted:
            order = np.argsort(codes, kind="stable")
            codes = codes[order]
            vals = vals[order]
        if reduce and len(codes) > 1:
            starts = np.flatnonzero(np.concatenate(([True], codes[1:] != codes[:-1])))
            if len(starts) < len(codes):
                vals = semiring.plus_reduce(vals, starts)
                codes = codes[starts]
        nonzero = vals != semiring.zero
        if not nonzero.all():
            codes = codes[nonzero]
            vals = vals[nonzero]
            compact = True
        if len(codes) == 0:
            return AssocArray.empty(semiring)

        ncols = len(colKeys)
        rows = codes // ncols
        cols = codes - rows * ncols
        if compact:
            rowStarts = np.flatnonzero(np.concatenate(([True], rows[1:] != rows[:-1])))
            if len(rowStarts) < len(rowKeys):
                keptRows, rowRemap = _compact_index(rows[rowStarts], len(rowKeys))
                rowKeys = rowKeys._take(keptRows)
                rows = rowRemap[rows]
            colUsed = np.bincount(cols, minlength=ncols) > 0
            if not colUsed.all():
                keptCols, colRemap = _compact_index(np.flatnonzero(colUsed), ncols)
                colKeys = colKeys._take(keptCols)
                cols = colRemap[cols]
        return AssocArray(rowKeys, colKeys,
                          rows.astype(np.int64, copy=False), cols.astype(np.int64, copy=False),
                          np.asarray(vals, dtype=np.float64), semiring)

    #Properties
    @property
    def row_keys(self) -> KeySet:
        return self._row_keys

    @property
    def col_keys(self) -> KeySet:
        return self._col_keys

    @property
    def semiring(self) -> Semiring:
        return self._semiring

    @property
    def nnz(self) -> int:
        """
        The number of stored (nonzero) entries.
        """
        return len(self._vals)

    @property
    def shape(self) -> Tuple[int, int]:
        """
        The number of materialized row and column keys.
        """
        return len(self._row_keys), len(self._col_keys)

    @property
    def T(self) -> AssocArray:
        return self.transpose()

    def coords(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns:
            (numpy.ndarray, numpy.ndarray, numpy.ndarray): Read-only row indices, column indices and values, in row-major order.
        """
        return self._rows, self._cols, self._vals

    def __len__(self):
        return self.nnz

    def __iter__(self) -> Iterator[Tuple[str, str, float]]:
        rows, cols, vals = self.triples()
        return iter(zip(rows, cols, vals))

    def triples(self) -> Tuple[List[str], List[str], List[float]]:
        """
        Returns:
            (list[str], list[str], list[float]): The row keys, column keys and values of every entry, in row-major order.
        """
        return (self._row_keys.keys[self._rows].tolist(), self._col_keys.keys[self._cols].tolist(), self._vals.tolist())

    def to_dict(self) -> Dict[Tuple[str, str], float]:
        rows, cols, vals = self.triples()
        return {(r, c): v for r, c, v in zip(rows, cols, vals)}

    def get(self, row:str, col:str, default:Any = None) -> Any:
        """
        Returns:
            The value stored at (row, col), or default if there is none.
        """
        rowIndex = self._row_keys.ranks([row])[0]
        colIndex = self._col_keys.ranks([col])[0]
        if rowIndex < 0 or colIndex < 0:
            return default
        #Entries are row-major, so the row is one contiguous slice with sorted columns.
        start = np.searchsorted(self._rows, rowIndex, side="left")
        stop = np.searchsorted(self._rows, rowIndex, side="right")
        pos = start + np.searchsorted(self._cols[start:stop], colIndex)
        if pos < stop and self._cols[pos] == colIndex:
            return float(self._vals[pos])
        return default

    def __eq__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return (self._semiring == other._semiring and self._row_keys == other._row_keys and self._col_keys == other._col_keys
                and np.array_equal(self._rows, other._rows) and np.array_equal(self._cols, other._cols)
                and np.array_equal(self._vals, other._vals))

    __hash__ = None

    def isclose(self, other:AssocArray, rtol:float = 1e-9, atol:float = 0.0) -> bool:
        """
        Like ==, but values only need to agree within a relative tolerance.
        """
        return (self._semiring == other._semiring and self._row_keys == other._row_keys and self._col_keys == other._col_keys
                and np.array_equal(self._rows, other._rows) and np.array_equal(self._cols, other._cols)
                and np.allclose(self._vals, other._vals, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"AssocArray({len(self._row_keys)}x{len(self._col_keys)}, nnz={self.nnz}, semiring={self._semiring.name})"

    def __str__(self):
        lines = [repr(self)]
        for row, col, val in list(zip(*self.triples()))[:20]:
            lines.append(f"  ({row!r}, {col!r})  {val:g}")
        if self.nnz > 20:
            lines.append(f"  ... {self.nnz - 20} more")
        return "\n".join(lines)

    #Algebra
    def _check_semiring(self, other:AssocArray):
        if not isinstance(other, AssocArray):
            raise TypeError(f"Expected an AssocArray, got {type(other).__name__}.")
        if self._semiring != other._semiring:
            raise AlgebraError(f"Semiring mismatch: {self._semiring.name} vs {other._semiring.name}.")

    def ew_add(self, other:AssocArray) -> AssocArray:
        """
        Element-wise addition: C(k1,k2) = A(k1,k2) plus B(k1,k2).

        Entries present in only one operand pass through unchanged; entries that add up to zero are dropped.

        Raises:
            AlgebraError: If the operands use different semirings.
        """
        self._check_semiring(other)
        if other.nnz == 0:
            return self
        if self.nnz == 0:
            return other

        semiring = self._semiring
        rowKeys, aRowMap, bRowMap = _merge_keys(self._row_keys, other._row_keys)
        colKeys, aColMap, bColMap = _merge_keys(self._col_keys, other._col_keys)
        ncols = len(colKeys)
        aCodes = self._codes_in(aRowMap, aColMap, ncols)
        bCodes = other._codes_in(bRowMap, bColMap, ncols)

        #Merge the smaller side into the larger one. Both code arrays are sorted and unique.
        selfIsBase = len(aCodes) >= len(bCodes)
        if selfIsBase:
            baseCodes, baseVals, extraCodes, extraVals = aCodes, self._vals, bCodes, other._vals
        else:
            baseCodes, baseVals, extraCodes, extraVals = bCodes, other._vals, aCodes, self._vals

        pos = np.searchsorted(baseCodes, extraCodes)
        hit = pos < len(baseCodes)
        hit[hit] = baseCodes[pos[hit]] == extraCodes[hit]

        vals = baseVals.copy()
        dropped = False
        if hit.any():
            hitPos = pos[hit]
            if selfIsBase:
                combined = semiring.plus(baseVals[hitPos], extraVals[hit])
            else:
                combined = semiring.plus(extraVals[hit], baseVals[hitPos])
            vals[hitPos] = combined
            dropped = bool((combined == semiring.zero).any())
        miss = ~hit
        if miss.any():
            codes = np.insert(baseCodes, pos[miss], extraCodes[miss])
            vals = np.insert(vals, pos[miss], extraVals[miss])
        else:
            codes = baseCodes
        return AssocArray._assemble(rowKeys, colKeys, codes, vals, semiring, compact=dropped)

    def _codes_in(self, rowMap:Optional[np.ndarray], colMap:Optional[np.ndarray], ncols:int) -> np.ndarray:
        #Row-major codes of this array's entries, with its key indices mapped into a larger key space.
        rows = self._rows if rowMap is None else rowMap[self._rows]
        cols = self._cols if colMap is None else colMap[self._cols]
        return rows * ncols + cols

    def __add__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return self.ew_add(other)

    def ew_mult(self, other:AssocArray) -> AssocArray:
        """
        Element-wise multiplication: C(k1,k2) = A(k1,k2) times B(k1,k2).

        Only (row, col) pairs stored in both operands survive.

        Raises:
            AlgebraError: If the operands use different semirings.
        """
        self._check_semiring(other)
        semiring = self._semiring
        if self.nnz == 0 or other.nnz == 0:
            return AssocArray.empty(semiring)

        rowKeys, aRowIdx, bRowIdx = np.intersect1d(self._row_keys.keys, other._row_keys.keys, assume_unique=True, return_indices=True)
        colKeys, aColIdx, bColIdx = np.intersect1d(self._col_keys.keys, other._col_keys.keys, assume_unique=True, return_indices=True)
        if len(rowKeys) == 0 or len(colKeys) == 0:
            return AssocArray.empty(semiring)

        aCodes, aVals = self._restricted_codes(aRowIdx, aColIdx, len(colKeys))
        bCodes, bVals = other._restricted_codes(bRowIdx, bColIdx, len(colKeys))
        codes, aPos, bPos = np.intersect1d(aCodes, bCodes, assume_unique=True, return_indices=True)
        vals = semiring.times(aVals[aPos], bVals[bPos])
        return AssocArray._assemble(rowKeys, colKeys, codes, np.asarray(vals, dtype=np.float64), semiring)

    def _restricted_codes(self, rowIdx:np.ndarray, colIdx:np.ndarray, ncols:int) -> Tuple[np.ndarray, np.ndarray]:
        #Codes and values of the entries whose row is in rowIdx and column in colIdx, renumbered to those subsets.
        rowMap = np.full(len(self._row_keys), -1, dtype=np.int64)
        rowMap[rowIdx] = np.arange(len(rowIdx))
        colMap = np.full(len(self._col_keys), -1, dtype=np.int64)
        colMap[colIdx] = np.arange(len(colIdx))
        rows = rowMap[self._rows]
        cols = colMap[self._cols]
        keep = (rows >= 0) & (cols >= 0)
        return rows[keep] * ncols + cols[keep], self._vals[keep]

    def __mul__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return self.ew_mult(other)

    def array_mult(self, other:AssocArray) -> AssocArray:
        """
        Array multiplication over the semiring: C(k1,k2) = plus over k of A(k1,k) times B(k,k2).

        The contraction runs over the keys shared by this array's columns and the other array's rows,
        matched by string equality.

        Raises:
            AlgebraError: If the operands use different semirings.
        """
        self._check_semiring(other)
        semiring = self._semiring
        if self.nnz == 0 or other.nnz == 0:
            return AssocArray.empty(semiring)

        shared, aColIdx, bRowIdx = np.intersect1d(self._col_keys.keys, other._row_keys.keys, assume_unique=True, return_indices=True)
        if len(shared) == 0:
            return AssocArray.empty(semiring)

        aMap = np.full(len(self._col_keys), -1, dtype=np.int64)
        aMap[aColIdx] = np.arange(len(shared))
        bMap = np.full(len(other._row_keys), -1, dtype=np.int64)
        bMap[bRowIdx] = np.arange(len(shared))

        aK = aMap[self._cols]
        aKeep = aK >= 0
        aRows, aK, aVals = self._rows[aKeep], aK[aKeep], self._vals[aKeep]

        bK = bMap[other._rows]
        bKeep = bK >= 0
        bK, bCols, bVals = bK[bKeep], other._cols[bKeep], other._vals[bKeep]

        #B is row-major, so its entries for each shared key are contiguous: compressed row pointers over the shared keys.
        bCounts = np.bincount(bK, minlength=len(shared))
        bStarts = np.cumsum(bCounts) - bCounts

        counts = bCounts[aK]
        total = int(counts.sum())
        if total == 0:
            return AssocArray.empty(semiring)
        aExpand = np.repeat(np.arange(len(aK)), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        bGather = bStarts[aK][aExpand] + offsets

        products = np.asarray(semiring.times(aVals[aExpand], bVals[bGather]), dtype=np.float64)
        ncols = len(other._col_keys)
        codes = aRows[aExpand] * ncols + bCols[bGather]
        logging.debug(f"array_mult: {len(aK)} x {len(bK)} entries over {len(shared)} shared keys, {total} partial products")
        return AssocArray._assemble(self._row_keys, other._col_keys, codes, products, semiring,
                                    presorted=False, reduce=True)

    def __matmul__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return self.array_mult(other)

    def transpose(self) -> AssocArray:
        """
        Returns:
            AssocArray: The array with row and column keys swapped.
        """
        if self.nnz == 0:
            return self
        nrows = len(self._row_keys)
        codes = self._cols * nrows + self._rows
        order = np.argsort(codes, kind="stable")
        return AssocArray(self._col_keys, self._row_keys, self._cols[order], self._rows[order], self._vals[order], self._semiring)

    def extract(self, rows:KeySelection = None, cols:KeySelection = None) -> AssocArray:
        """
        Extracts the subarray for the selected keys.

        Parameters:
            rows (str|Sequence[str], optional): The row keys to keep. None (or ':') keeps them all.
            cols (str|Sequence[str], optional): The column keys to keep. None (or ':') keeps them all.

        Note:
            Keys that aren't in the array are ignored.
        """
        rowMask = self._selection_mask(self._row_keys, rows)
        colMask = self._selection_mask(self._col_keys, cols)
        if rowMask is None and colMask is None:
            return self
        keep = np.ones(self.nnz, dtype=bool)
        if rowMask is not None:
            keep &= rowMask[self._rows]
        if colMask is not None:
            keep &= colMask[self._cols]
        if keep.all():
            return self
        ncols = len(self._col_keys)
        codes = self._rows[keep] * ncols + self._cols[keep]
        return AssocArray._assemble(self._row_keys, self._col_keys, codes, self._vals[keep], self._semiring)

    @staticmethod
    def _selection_mask(keySet:KeySet, selection:KeySelection) -> Optional[np.ndarray]:
        if selection is None or (isinstance(selection, slice) and selection == slice(None)):
            return None
        if isinstance(selection, str) and selection == ":":
            return None
        ranks = keySet.ranks(selection)
        mask = np.zeros(len(keySet), dtype=bool)
        mask[ranks[ranks >= 0]] = True
        return mask

    def __getitem__(self, item) -> AssocArray:
        if not isinstance(item, tuple) or len(item) != 2:
            raise TypeError("Index with A[rows, cols].")
        return self.extract(item[0], item[1])

    #Reductions and helpers
    def reduce_rows(self, label:str = "") -> AssocArray:
        """
        Folds each row with plus, giving a one-column array keyed by label.

        Under plus_times on an adjacency array this is the out-degree of every vertex.
        """
        if self.nnz == 0:
            return AssocArray.empty(self._semiring)
        starts = np.flatnonzero(np.concatenate(([True], self._rows[1:] != self._rows[:-1])))
        vals = self._semiring.plus_reduce(self._vals, starts)
        codes = self._rows[starts]
        return AssocArray._assemble(self._row_keys, np.array([label]), codes, vals, self._semiring)

    def reduce_cols(self, label:str = "") -> AssocArray:
        """
        Folds each column with plus, giving a one-row array keyed by label.

        Under plus_times on an adjacency array this is the in-degree of every vertex.
        """
        return self.transpose().reduce_rows(label).transpose()

    def ones_on_support(self) -> AssocArray:
        """
        Returns:
            AssocArray: An array holding the semiring's one at exactly this array's stored coordinates.
        """
        if self.nnz == 0:
            return self
        return AssocArray(self._row_keys, self._col_keys, self._rows, self._cols,
                          np.full(self.nnz, self._semiring.one, dtype=np.float64), self._semiring)
