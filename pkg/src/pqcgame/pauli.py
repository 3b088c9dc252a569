"""Real-weighted sums of Pauli strings.

Word convention: character ``k`` of a word acts on qubit ``k``. State
vectors are little-endian (qubit 0 is the least significant bit), so the
word ``"ZI"`` is Z on qubit 0.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

PAULI_CHARS = "IXYZ"
_WORD_RE = re.compile(r"^[IXYZ]+$")


class PauliParseError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _masks(word: str) -> tuple[int, int, int]:
    """Bit masks (x, z, n_y) for a Pauli word."""
    x = z = ny = 0
    for q, c in enumerate(word):
        if c in "XY":
            x |= 1 << q
        if c in "ZY":
            z |= 1 << q
        if c == "Y":
            ny += 1
    return x, z, ny


def _popcount_parity(arr: np.ndarray) -> np.ndarray:
    # parity of set bits, vectorised
    arr = arr.copy()
    out = np.zeros_like(arr)
    while np.any(arr):
        out ^= arr & 1
        arr >>= 1
    return out


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator ``sum_k c_k P_k``; duplicate words merge on construction."""

    n_qubits: int
    terms: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("PauliSum needs at least one qubit")
        merged: dict[str, float] = {}
        for coef, word in self.terms:
            word = str(word).upper()
            if len(word) != self.n_qubits:
                raise ValueError(f"word {word!r} has length {len(word)}, expected {self.n_qubits}")
            if not _WORD_RE.match(word):
                raise ValueError(f"word {word!r} contains characters outside IXYZ")
            merged[word] = merged.get(word, 0.0) + float(coef)
        # terms that cancel exactly are dropped
        object.__setattr__(self, "terms", tuple((c, w) for w, c in merged.items() if c != 0.0))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, str]], n_qubits: int | None = None) -> "PauliSum":
        terms = list(terms)
        if n_qubits is None:
            if not terms:
                raise ValueError("cannot infer n_qubits from an empty term list")
            n_qubits = len(terms[0][1])
        return cls(n_qubits, tuple(terms))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tol: float = 1e-12) -> "PauliSum":
        """Pauli decomposition of a Hermitian matrix (brute force, small n only)."""
        matrix = np.asarray(matrix, dtype=complex)
        n = int(round(math.log2(matrix.shape[0])))
        if matrix.shape != (2**n, 2**n):
            raise ValueError(f"expected a 2^n x 2^n matrix, got shape {matrix.shape}")
        if np.abs(matrix - matrix.conj().T).max() > 1e-10:
            raise ValueError("matrix is not Hermitian")
        terms = []
        for idx in np.ndindex(*(4,) * n):
            word = "".join(PAULI_CHARS[i] for i in idx)
            coef = np.trace(pauli_matrix(word) @ matrix).real / 2**n
            if abs(coef) > tol:
                terms.append((coef, word))
        return cls(n, tuple(terms))

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, ())

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def __mul__(self, k: float) -> "PauliSum":
        return PauliSum(self.n_qubits, tuple((k * c, w) for c, w in self.terms))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Return ``H @ state`` without forming the dense matrix."""
        out = np.zeros_like(state, dtype=complex)
        for coef, x, phases in self._compiled():
            out[_INDEX_CACHE(self.n_qubits) ^ x] += coef * phases * state
        return out

    def expectation(self, state: np.ndarray) -> float:
        total = 0.0
        for coef, x, phases in self._compiled():
            idx = _INDEX_CACHE(self.n_qubits)
            total += coef * np.vdot(state[idx ^ x], phases * state).real
        return float(total)

    def matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        idx = _INDEX_CACHE(self.n_qubits)
        for coef, x, phases in self._compiled():
            mat[idx ^ x, idx] += coef * phases
        return mat

    def _compiled(self):
        cached = self.__dict__.get("_cache")
        if cached is None:
            idx = _INDEX_CACHE(self.n_qubits)
            cached = []
            for coef, word in self.terms:
                x, z, ny = _masks(word)
                phases = (1j**ny) * (1 - 2 * _popcount_parity(idx & z))
                cached.append((coef, x, phases))
            object.__setattr__(self, "_cache", cached)
        return cached

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_qubits, self.terms))


_index_arrays: dict[int, np.ndarray] = {}


def _INDEX_CACHE(n: int) -> np.ndarray:
    arr = _index_arrays.get(n)
    if arr is None:
        arr = np.arange(2**n, dtype=np.int64)
        arr.setflags(write=False)
        _index_arrays[n] = arr
    return arr


_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word in the little-endian basis (Kronecker reference)."""
    mat = np.eye(1, dtype=complex)
    # qubit 0 is least significant, so it is the rightmost Kronecker factor
    for c in word:
        mat = np.kron(_SINGLE[c], mat)
    return mat


def parse_pauli_text(text: str) -> PauliSum:
    """Parse ``<coefficient> <word>`` lines; ``#`` starts a comment."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PauliParseError(f"expected '<coefficient> <word>', got {raw.strip()!r}", lineno)
        try:
            coef = float(parts[0])
        except ValueError:
            raise PauliParseError(f"malformed coefficient {parts[0]!r}", lineno) from None
        if not math.isfinite(coef):
            raise PauliParseError(f"non-finite coefficient {parts[0]!r}", lineno)
        word = parts[1]
        bad = sorted(set(word) - set(PAULI_CHARS))
        if bad:
            raise PauliParseError(f"bad character(s) {''.join(bad)!r} in word {word!r}", lineno)
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise PauliParseError(f"word {word!r} has length {len(word)}, expected {n}", lineno)
        terms.append((coef, word))
    if n is None:
        raise PauliParseError("no terms found")
    return PauliSum(n, tuple(terms))


def format_pauli_text(h: PauliSum) -> str:
    return "".join(f"{coef!r} {word}\n" for coef, word in h.terms)
