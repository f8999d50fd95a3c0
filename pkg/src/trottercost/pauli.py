"""Sparse Pauli-string operators with exact commutators and coefficient 1-norms.

Two representations live here:

* ``PauliString`` / ``QubitOperator``: hashable, canonical, dictionary based.
  This is the user-facing algebra.
* ``PauliTable``: a packed, vectorized table of strings (x and z bit planes in
  ``uint64`` words) used by the heavy nested-commutator kernels.

Both encode a string by its symplectic bits: on qubit ``j`` the pair
``(x_j, z_j)`` is ``(1, 0)`` for X, ``(1, 1)`` for Y and ``(0, 1)`` for Z.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

AXES = ("X", "Y", "Z")
_AXIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_AXIS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_I_POWERS_ARRAY = np.array(_I_POWERS, dtype=np.complex128)

DEFAULT_DROP_TOL = 0.0


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Pauli operators.

    The identity is ``PauliString()``. Instances are canonical by
    construction: each qubit carries at most one axis.
    """

    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.x < 0 or self.z < 0:
            raise ValueError("bit planes must be non-negative")

    @classmethod
    def from_factors(
        cls, factors: Mapping[int, str] | Iterable[tuple[int, str]]
    ) -> PauliString:
        items = factors.items() if isinstance(factors, Mapping) else factors
        x = z = 0
        seen = set()
        for qubit, axis in items:
            qubit = int(qubit)
            if qubit < 0:
                raise ValueError(f"negative qubit index {qubit}")
            if qubit in seen:
                raise ValueError(f"qubit {qubit} appears twice")
            seen.add(qubit)
            xb, zb = _AXIS_BITS[axis.upper()]
            x |= xb << qubit
            z |= zb << qubit
        return cls(x, z)

    @classmethod
    def parse(cls, text: str) -> PauliString:
        """Parse ``"X0 Y3 Z7"``; ``"I"`` or ``""`` is the identity."""
        tokens = text.split()
        if tokens in ([], ["I"]):
            return cls()
        return cls.from_factors((int(tok[1:]), tok[0]) for tok in tokens)

    @property
    def factors(self) -> tuple[tuple[int, str], ...]:
        support = self.x | self.z
        out = []
        while support:
            low = support & -support
            qubit = low.bit_length() - 1
            out.append((qubit, _BITS_AXIS[(self.x >> qubit & 1, self.z >> qubit & 1)]))
            support ^= low
        return tuple(out)

    @property
    def support(self) -> int:
        """Bitmask of qubits acted on non-trivially."""
        return self.x | self.z

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_identity(self) -> bool:
        return not (self.x or self.z)

    @property
    def max_qubit(self) -> int:
        """Highest qubit index touched, or -1 for the identity."""
        return self.support.bit_length() - 1

    def sort_key(self) -> tuple[tuple[int, str], ...]:
        return self.factors

    def __str__(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{axis}{qubit}" for qubit, axis in self.factors)

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _string_product(a: PauliString, b: PauliString) -> tuple[int, PauliString]:
    """Return ``(k, s)`` with ``a * b = i**k * s``."""
    ya, yb = a.x & a.z, b.x & b.z
    xa, xb = a.x & ~a.z, b.x & ~b.z
    za, zb = a.z & ~a.x, b.z & ~b.x
    plus = ((ya & zb) | (xa & yb) | (za & xb)).bit_count()
    minus = ((ya & xb) | (xa & zb) | (za & yb)).bit_count()
    return (plus - minus) % 4, PauliString(a.x ^ b.x, a.z ^ b.z)


def commutes_trivially(a: PauliString, b: PauliString) -> bool:
    """True when the two strings commute.

    That holds for disjoint supports and, more generally, whenever the number
    of sites carrying different non-identity axes is even.
    """
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() % 2 == 0


def _as_string(key) -> PauliString:
    if isinstance(key, PauliString):
        return key
    if isinstance(key, str):
        return PauliString.parse(key)
    return PauliString.from_factors(key)


class QubitOperator:
    """Immutable sparse sum of Pauli strings with complex coefficients.

    Terms iterate in canonical order: lexicographic by (qubit index, axis),
    identity first. Terms whose coefficient cancels to exactly zero are
    removed; a positive ``drop_tol`` additionally discards tiny terms.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None, *, drop_tol: float = DEFAULT_DROP_TOL):
        acc: dict[PauliString, complex] = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for key, coeff in items:
                s = _as_string(key)
                acc[s] = acc.get(s, 0.0) + complex(coeff)
        self._terms = _canonical(acc, drop_tol)

    @classmethod
    def _from_canonical(cls, terms: dict[PauliString, complex]) -> QubitOperator:
        op = cls.__new__(cls)
        op._terms = terms
        return op

    @classmethod
    def term(cls, key, coeff: complex = 1.0) -> QubitOperator:
        return cls({_as_string(key): coeff})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> QubitOperator:
        return cls({PauliString(): coeff})

    @classmethod
    def sum(cls, operators: Iterable[QubitOperator], *, drop_tol=DEFAULT_DROP_TOL):
        acc: dict[PauliString, complex] = {}
        for op in operators:
            for s, c in op._terms.items():
                acc[s] = acc.get(s, 0.0) + c
        return cls._from_canonical(_canonical(acc, drop_tol))

    @property
    def terms(self) -> Mapping[PauliString, complex]:
        return MappingProxyType(self._terms)

    @property
    def n_qubits(self) -> int:
        """One more than the highest qubit index touched (0 if none)."""
        return max((s.max_qubit for s in self._terms), default=-1) + 1

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, key) -> complex:
        return self._terms.get(_as_string(key), 0.0)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = QubitOperator.identity(other)
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return QubitOperator.sum((self, other))

    __radd__ = __add__

    def __neg__(self):
        return QubitOperator._from_canonical({s: -c for s, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            return multiply(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            factor = complex(other)
            if factor == 0:
                return QubitOperator()
            return QubitOperator._from_canonical(
                {s: c * factor for s, c in self._terms.items()}
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def isclose(self, other: QubitOperator, atol: float = 1e-12) -> bool:
        """Coefficient-wise comparison with absolute tolerance."""
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol for k in keys
        )

    def without_identity(self) -> QubitOperator:
        return QubitOperator._from_canonical(
            {s: c for s, c in self._terms.items() if not s.is_identity}
        )

    def max_imag(self) -> float:
        return max((abs(c.imag) for c in self._terms.values()), default=0.0)

    def to_text(self) -> str:
        """Serialize as one ``coeff_re coeff_im X3 Y7 Z9`` line per term."""
        lines = [f"{c.real!r} {c.imag!r} {s}" for s, c in self._terms.items()]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> QubitOperator:
        terms = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(maxsplit=2)
            if len(parts) < 3:
                raise ValueError(f"line {lineno}: expected 're im string', got {line!r}")
            terms.append((PauliString.parse(parts[2]), complex(float(parts[0]), float(parts[1]))))
        return cls(terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "QubitOperator()"
        body = " + ".join(f"({c:.6g}) [{s}]" for s, c in self._terms.items())
        return f"QubitOperator({body})"


def _canonical(acc: dict[PauliString, complex], drop_tol: float) -> dict[PauliString, complex]:
    keep = {
        s: c for s, c in acc.items() if c != 0 and not (drop_tol > 0 and abs(c) < drop_tol)
    }
    return dict(sorted(keep.items(), key=lambda item: item[0].sort_key()))


def multiply(a: QubitOperator, b: QubitOperator, *, drop_tol=DEFAULT_DROP_TOL) -> QubitOperator:
    """Operator product ``a b``."""
    acc: dict[PauliString, complex] = {}
    for sa, ca in a:
        for sb, cb in b:
            k, s = _string_product(sa, sb)
            acc[s] = acc.get(s, 0.0) + ca * cb * _I_POWERS[k]
    return QubitOperator._from_canonical(_canonical(acc, drop_tol))


def commutator(a: QubitOperator, b: QubitOperator, *, drop_tol=DEFAULT_DROP_TOL) -> QubitOperator:
    """``ab - ba``; commuting string pairs are skipped, contributing exactly zero."""
    acc: dict[PauliString, complex] = {}
    for sa, ca in a:
        for sb, cb in b:
            if commutes_trivially(sa, sb):
                continue
            k, s = _string_product(sa, sb)
            acc[s] = acc.get(s, 0.0) + 2.0 * ca * cb * _I_POWERS[k]
    return QubitOperator._from_canonical(_canonical(acc, drop_tol))


def one_norm(a: QubitOperator, *, traceless: bool = False) -> float:
    """Sum of coefficient magnitudes, optionally skipping the identity term."""
    return math.fsum(abs(c) for s, c in a if not (traceless and s.is_identity))


def to_dense(op: QubitOperator, n_qubits: int | None = None) -> np.ndarray:
    """Dense matrix; qubit ``j`` is bit ``j`` of the basis-state index."""
    n = op.n_qubits if n_qubits is None else n_qubits
    if op.n_qubits > n:
        raise ValueError(f"operator touches {op.n_qubits} qubits, matrix has {n}")
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for s, c in op:
        # P|i> = i^{|x&z|} (-1)^{|i&z|} |i ^ x>
        signs = 1 - 2 * (np.bitwise_count(idx & s.z).astype(np.int64) & 1)
        mat[idx ^ s.x, idx] += c * _I_POWERS[(s.x & s.z).bit_count() % 4] * signs
    return mat


# --------------------------------------------------------------------------
# Packed tables


@dataclass(frozen=True)
class PauliTable:
    """Packed Pauli strings: ``x``/``z`` are ``(n_terms, n_words)`` uint64."""

    x: np.ndarray
    z: np.ndarray
    coeffs: np.ndarray

    @property
    def n_words(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def empty(cls, n_words: int) -> PauliTable:
        shape = (0, n_words)
        return cls(
            np.zeros(shape, np.uint64), np.zeros(shape, np.uint64), np.zeros(0, np.complex128)
        )

    @classmethod
    def from_operator(cls, op: QubitOperator, n_words: int | None = None) -> PauliTable:
        if n_words is None:
            n_words = words_for(op.n_qubits)
        n = len(op)
        x = np.zeros((n, n_words), np.uint64)
        z = np.zeros((n, n_words), np.uint64)
        coeffs = np.zeros(n, np.complex128)
        mask = (1 << 64) - 1
        for row, (s, c) in enumerate(op):
            if s.max_qubit >= 64 * n_words:
                raise ValueError("string does not fit the word count")
            for w in range(n_words):
                x[row, w] = (s.x >> (64 * w)) & mask
                z[row, w] = (s.z >> (64 * w)) & mask
            coeffs[row] = c
        return cls(x, z, coeffs)

    def to_operator(self) -> QubitOperator:
        terms = []
        for row in range(len(self)):
            xv = sum(int(v) << (64 * w) for w, v in enumerate(self.x[row]))
            zv = sum(int(v) << (64 * w) for w, v in enumerate(self.z[row]))
            terms.append((PauliString(xv, zv), complex(self.coeffs[row])))
        return QubitOperator(terms)

    @staticmethod
    def concat(tables: Iterable[PauliTable], n_words: int) -> PauliTable:
        tables = [t for t in tables if len(t)]
        if not tables:
            return PauliTable.empty(n_words)
        return PauliTable(
            np.concatenate([t.x for t in tables]),
            np.concatenate([t.z for t in tables]),
            np.concatenate([t.coeffs for t in tables]),
        )

    def simplify(self) -> PauliTable:
        """Merge duplicate strings and drop exact zeros; output is key-sorted."""
        n = len(self)
        if n == 0:
            return self
        w = self.n_words
        cols = [self.z[:, k] for k in range(w)] + [self.x[:, k] for k in range(w)]
        order = np.lexsort(cols)
        xs, zs, cs = self.x[order], self.z[order], self.coeffs[order]
        new = np.ones(n, dtype=bool)
        new[1:] = np.any(xs[1:] != xs[:-1], axis=1) | np.any(zs[1:] != zs[:-1], axis=1)
        starts = np.flatnonzero(new)
        sums = np.add.reduceat(cs, starts)
        keep = sums != 0
        return PauliTable(xs[starts][keep], zs[starts][keep], sums[keep])

    def one_norm(self) -> float:
        return math.fsum(np.abs(self.coeffs).tolist())

    def lowest_qubit(self) -> np.ndarray:
        """Smallest qubit index of each string (0 for the identity)."""
        support = self.x | self.z
        out = np.zeros(len(self), dtype=np.int64)
        done = np.zeros(len(self), dtype=bool)
        for w in range(self.n_words):
            word = support[:, w]
            hit = (word != 0) & ~done
            low = word[hit] & (~word[hit] + np.uint64(1))
            out[hit] = 64 * w + np.bitwise_count(low - np.uint64(1)).astype(np.int64)
            done |= hit
        return out


def words_for(n_qubits: int) -> int:
    return max(1, -(-n_qubits // 64))


def table_commutator(
    a: PauliTable, b: PauliTable, *, prune: bool = True, max_pairs: int = 1 << 21
) -> tuple[PauliTable, int]:
    """Commutator ``[a, b]`` of packed operators.

    Returns the simplified table and the number of term pairs skipped because
    their strings commute. With ``prune=False`` every pair is expanded and
    commuting pairs cancel arithmetically instead.
    """
    n_words = a.n_words
    if len(a) == 0 or len(b) == 0:
        return PauliTable.empty(n_words), 0
    chunk = max(1, max_pairs // len(b))
    parts = []
    skipped = 0
    for start in range(0, len(a), chunk):
        stop = min(len(a), start + chunk)
        ax, az = a.x[start:stop, None, :], a.z[start:stop, None, :]
        bx, bz = b.x[None, :, :], b.z[None, :, :]
        if prune:
            sym = np.bitwise_count((ax & bz) ^ (az & bx)).sum(axis=2, dtype=np.int64)
            ia, ib = np.nonzero(sym & 1)
            skipped += sym.size - ia.size
            if ia.size == 0:
                continue
            ia += start
        else:
            ia, ib = np.divmod(np.arange((stop - start) * len(b)), len(b))
            ia += start
        parts.append(_pair_commutators(a, b, ia, ib))
    if not parts:
        return PauliTable.empty(n_words), skipped
    return PauliTable.concat(parts, n_words).simplify(), skipped


def _pair_commutators(a: PauliTable, b: PauliTable, ia: np.ndarray, ib: np.ndarray) -> PauliTable:
    xa, za, xb, zb = a.x[ia], a.z[ia], b.x[ib], b.z[ib]
    ya, yb = xa & za, xb & zb
    xo_a, xo_b = xa & ~za, xb & ~zb
    zo_a, zo_b = za & ~xa, zb & ~xb
    plus = np.bitwise_count((ya & zo_b) | (xo_a & yb) | (zo_a & xo_b)).sum(axis=1, dtype=np.int64)
    minus = np.bitwise_count((ya & xo_b) | (xo_a & zo_b) | (zo_a & yb)).sum(axis=1, dtype=np.int64)
    k = (plus - minus) % 4
    # ab - ba = (i^k - i^-k) ab-string; zero for even k.
    factor = _I_POWERS_ARRAY[k] - _I_POWERS_ARRAY[(-k) % 4]
    return PauliTable(xa ^ xb, za ^ zb, a.coeffs[ia] * b.coeffs[ib] * factor)
