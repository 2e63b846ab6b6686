"""Word-packed boolean vectors and matrices.

Bits are stored little-endian inside 64-bit words: bit ``i`` lives in word
``i // 64`` at position ``i % 64``.  Padding bits past the logical length are
always zero, so whole-word comparisons are exact.

All objects are treated as immutable; every operation returns a new value.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
_WORD = np.uint64


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


def n_words(nbits: int) -> int:
    return (nbits + WORD_BITS - 1) // WORD_BITS


def pack_bools(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean array along its last axis into uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    nbits = bits.shape[-1]
    nw = n_words(nbits)
    padded = np.zeros(bits.shape[:-1] + (nw * WORD_BITS,), dtype=bool)
    padded[..., :nbits] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(_WORD, copy=False)


def unpack_words(words: np.ndarray, nbits: int) -> np.ndarray:
    """Inverse of :func:`pack_bools`."""
    words = np.ascontiguousarray(words, dtype="<u8")
    raw = words.view(np.uint8)
    bits = np.unpackbits(raw, axis=-1, bitorder="little")
    return bits[..., :nbits].astype(bool)


def _popcount(words: np.ndarray) -> int:
    return int(np.unpackbits(np.ascontiguousarray(words, dtype="<u8").view(np.uint8)).sum())


def _tail_mask(nbits: int) -> np.ndarray:
    """Per-word mask of the bits that belong to a length-``nbits`` vector."""
    nw = n_words(nbits)
    mask = np.full(nw, np.iinfo(np.uint64).max, dtype=_WORD)
    rem = nbits % WORD_BITS
    if nw and rem:
        mask[-1] = _WORD((1 << rem) - 1)
    return mask


class BitVec:
    """A fixed-length boolean vector packed into 64-bit words."""

    __slots__ = ("_n", "_words")

    def __init__(self, n: int, words: np.ndarray | None = None):
        if n < 0:
            raise ValueError("length must be non-negative")
        nw = n_words(n)
        if words is None:
            words = np.zeros(nw, dtype=_WORD)
        else:
            words = np.asarray(words, dtype=_WORD)
            if words.shape != (nw,):
                raise DimensionError(f"expected {nw} words for {n} bits, got shape {words.shape}")
            words = words & _tail_mask(n)
        words.setflags(write=False)
        self._n = n
        self._words = words

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n: int) -> "BitVec":
        return cls(n)

    @classmethod
    def ones(cls, n: int) -> "BitVec":
        return cls(n, _tail_mask(n).copy())

    @classmethod
    def from_bools(cls, bits: Iterable[bool]) -> "BitVec":
        arr = np.fromiter((bool(b) for b in bits), dtype=bool)
        return cls(arr.size, pack_bools(arr))

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "BitVec":
        arr = np.zeros(n, dtype=bool)
        for i in indices:
            if not 0 <= i < n:
                raise IndexError(f"bit index {i} out of range for length {n}")
            arr[i] = True
        return cls(n, pack_bools(arr))

    @classmethod
    def from_str(cls, s: str) -> "BitVec":
        """Parse ``"0110"``; the leftmost character is bit 0."""
        s = s.replace(" ", "").replace("_", "")
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls.from_bools(c == "1" for c in s)

    # accessors ----------------------------------------------------------
    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> bool:
        if not 0 <= i < self._n:
            raise IndexError(i)
        return bool((int(self._words[i // WORD_BITS]) >> (i % WORD_BITS)) & 1)

    def to_bools(self) -> np.ndarray:
        return unpack_words(self._words, self._n)

    def indices(self) -> list[int]:
        return np.flatnonzero(self.to_bools()).tolist()

    def count(self) -> int:
        return _popcount(self._words)

    def padding_clear(self) -> bool:
        return not np.any(self._words & ~_tail_mask(self._n))

    def any(self) -> bool:
        return bool(np.any(self._words))

    # operators ----------------------------------------------------------
    def __or__(self, other: "BitVec") -> "BitVec":
        return bor(self, other)

    def __and__(self, other: "BitVec") -> "BitVec":
        return band(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVec):
            return NotImplemented
        return self._n == other._n and beq(self, other)

    def __hash__(self) -> int:
        return hash((self._n, self._words.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.to_bools())

    def __repr__(self) -> str:
        return f"BitVec({str(self)!r})"


def _check_same_len(a: BitVec, b: BitVec) -> None:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")


def bor(a: BitVec, b: BitVec) -> BitVec:
    """Boolean addition (bitwise OR)."""
    _check_same_len(a, b)
    return BitVec(len(a), a.words | b.words)


def band(a: BitVec, b: BitVec) -> BitVec:
    """Bitwise AND."""
    _check_same_len(a, b)
    return BitVec(len(a), a.words & b.words)


def beq(a: BitVec, b: BitVec) -> bool:
    _check_same_len(a, b)
    return bool(np.array_equal(a.words, b.words))


class BitMatrix:
    """Row-major boolean matrix; each row is a packed word array."""

    __slots__ = ("_rows", "_cols", "_data")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        nw = n_words(cols)
        if data is None:
            data = np.zeros((rows, nw), dtype=_WORD)
        else:
            data = np.asarray(data, dtype=_WORD).reshape(rows, nw) & _tail_mask(cols)
        data.setflags(write=False)
        self._rows = rows
        self._cols = cols
        self._data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_bools(np.eye(n, dtype=bool))

    @classmethod
    def from_bools(cls, bits) -> "BitMatrix":
        arr = np.asarray(bits, dtype=bool)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        rows, cols = arr.shape
        return cls(rows, cols, pack_bools(arr) if rows else None)

    @classmethod
    def from_rows(cls, rows: Sequence[BitVec], cols: int | None = None) -> "BitMatrix":
        if not rows:
            if cols is None:
                raise ValueError("cols required for an empty row list")
            return cls(0, cols)
        cols = len(rows[0]) if cols is None else cols
        for r in rows:
            if len(r) != cols:
                raise DimensionError("rows have unequal length")
        return cls(len(rows), cols, np.stack([r.words for r in rows]))

    @classmethod
    def from_strs(cls, rows: Sequence[str]) -> "BitMatrix":
        return cls.from_rows([BitVec.from_str(r) for r in rows])

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def data(self) -> np.ndarray:
        return self._data

    def row(self, i: int) -> BitVec:
        return BitVec(self._cols, self._data[i].copy())

    def to_bools(self) -> np.ndarray:
        if self._rows == 0:
            return np.zeros((0, self._cols), dtype=bool)
        return unpack_words(self._data, self._cols)

    def __getitem__(self, ij: tuple[int, int]) -> bool:
        i, j = ij
        return self.row(i)[j]

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_bools(self.to_bools().T)

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def padding_clear(self) -> bool:
        return not np.any(self._data & ~_tail_mask(self._cols))

    def __or__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(self._rows, self._cols, self._data | other._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    def __hash__(self) -> int:
        return hash((self.shape, self._data.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(str(self.row(i)) for i in range(self._rows))
        return f"BitMatrix({self._rows}x{self._cols}: [{body}])"


def vecmat_mul(f: BitVec, m: BitMatrix) -> BitVec:
    """Boolean product ``f · M``: the OR of the rows of ``M`` selected by ``f``."""
    if len(f) != m.rows:
        raise DimensionError(f"vector length {len(f)} != matrix rows {m.rows}")
    sel = f.to_bools()
    if not sel.any():
        return BitVec.zeros(m.cols)
    return BitVec(m.cols, np.bitwise_or.reduce(m.data[sel], axis=0))


def subset_rows(m: BitMatrix, v: BitVec) -> BitVec:
    """Bit ``i`` is set iff row ``i`` of ``M`` is a subset of ``v``.

    Tested word-parallel as ``(row AND v) == row``; an all-zero row is a
    subset of anything.
    """
    if len(v) != m.cols:
        raise DimensionError(f"vector length {len(v)} != matrix cols {m.cols}")
    if m.rows == 0:
        return BitVec.zeros(0)
    hit = np.all((m.data & v.words) == m.data, axis=1)
    return BitVec(m.rows, pack_bools(hit))


def _mul_words(a_bits: np.ndarray, b_data: np.ndarray) -> np.ndarray:
    out = np.zeros((a_bits.shape[0], b_data.shape[1]), dtype=_WORD)
    for j in np.flatnonzero(a_bits.any(axis=0)):
        out[a_bits[:, j]] |= b_data[j]
    return out


def bmat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Boolean matrix product over the (OR, AND) semiring."""
    if a.cols != b.rows:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    if a.rows == 0 or b.rows == 0:
        return BitMatrix.zeros(a.rows, b.cols)
    return BitMatrix(a.rows, b.cols, _mul_words(a.to_bools(), b.data))


def transitive_closure(r: BitMatrix) -> BitMatrix:
    """Return R+, the relation of paths with at least one step.

    Computes the reflexive closure by repeated squaring of ``R OR I`` and then
    composes once with ``R``.  Callers that want R* should OR in the identity.
    """
    if r.rows != r.cols:
        raise DimensionError(f"closure needs a square matrix, got {r.shape}")
    n = r.rows
    if n == 0:
        return r
    s = r | BitMatrix.identity(n)
    while True:
        s2 = bmat_mul(s, s)
        if s2 == s:
            break
        s = s2
    return bmat_mul(r, s)


__all__ = [
    "BitMatrix",
    "BitVec",
    "DimensionError",
    "band",
    "beq",
    "bmat_mul",
    "bor",
    "pack_bools",
    "subset_rows",
    "transitive_closure",
    "unpack_words",
    "vecmat_mul",
]
