"""Trotter error norm of the symmetric product formula, with dense oracles.

The norm is

    W = 1/12 sum_{b<L} ( |sum_{c>b} sum_{a>b} [[H_b, H_c], H_a]|_1
                        + 1/2 |sum_{c>b} [[H_b, H_c], H_b]|_1 )

where |.|_1 is the Pauli-coefficient 1-norm of the fully expanded sum.
With S_b = sum_{c>b} H_c the inner sums are [[H_b, S_b], S_b] and
[[H_b, S_b], H_b], so each outer index costs two commutator expansions.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from trottercost.orderings import TrotterOrdering
from trottercost.pauli import PauliTable, table_commutator, to_dense, words_for

MAX_DENSE_QUBITS = 12


@dataclass(frozen=True)
class TrotterNormResult:
    W: float
    per_qubit: tuple[tuple[int, float], ...]
    n_fragments: int
    pruned: int

    def is_valid(self, t: float) -> bool:
        """The t^3 truncation is justified only while W t^3 <= 1."""
        return self.W * t**3 <= 1.0

    def to_dict(self) -> dict:
        return {
            "W": self.W,
            "L": self.n_fragments,
            "pruned": self.pruned,
            "per_qubit": [[q, v] for q, v in self.per_qubit],
        }


# Worker state is installed once per process to avoid re-sending tables.
_STATE: dict = {}


def _install(tables, n_qubits, prune, max_pairs):
    _STATE.update(tables=tables, n_qubits=n_qubits, prune=prune, max_pairs=max_pairs)


def _outer_term(b: int) -> tuple[int, list[float], int]:
    tables = _STATE["tables"]
    n_words = tables[0].n_words
    prune, max_pairs = _STATE["prune"], _STATE["max_pairs"]
    h_b = tables[b]
    suffix = PauliTable.concat(tables[b + 1:], n_words).simplify()
    inner, skipped0 = table_commutator(h_b, suffix, prune=prune, max_pairs=max_pairs)
    outer_a, skipped1 = table_commutator(inner, suffix, prune=prune, max_pairs=max_pairs)
    outer_b, skipped2 = table_commutator(inner, h_b, prune=prune, max_pairs=max_pairs)
    n_qubits = _STATE["n_qubits"]
    buckets = np.zeros(max(n_qubits, 1))
    for table, weight in ((outer_a, 1.0), (outer_b, 0.5)):
        if len(table):
            buckets += weight * np.bincount(
                table.lowest_qubit(), weights=np.abs(table.coeffs), minlength=len(buckets)
            )
    return b, (buckets / 12.0).tolist(), skipped0 + skipped1 + skipped2


def _load_checkpoint(path: Path) -> dict[int, tuple[list[float], int]]:
    done = {}
    if path.exists():
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rec = json.loads(line)
                    done[rec["b"]] = (rec["buckets"], rec["pruned"])
    return done


def trotter_error_norm(
    ordering: TrotterOrdering,
    *,
    workers: int | None = None,
    prune: bool = True,
    checkpoint: str | os.PathLike | None = None,
    max_pairs: int = 1 << 21,
) -> TrotterNormResult:
    """Evaluate W exactly in the Pauli basis.

    Args:
        ordering: forward fragment list.
        workers: process count (default from ``TROTTERCOST_WORKERS`` or 1).
            The result does not depend on it.
        prune: skip commuting string pairs before expansion.
        checkpoint: JSON-lines file of finished outer indices; reused on rerun.
        max_pairs: string pairs expanded per vectorized chunk.
    """
    if len(ordering) == 0:
        raise ValueError("ordering has no fragments")
    if workers is None:
        workers = int(os.environ.get("TROTTERCOST_WORKERS", "1"))
    n_qubits = ordering.n_qubits
    n_words = words_for(n_qubits)
    tables = [PauliTable.from_operator(f, n_words) for f in ordering.fragments]
    todo = list(range(len(tables) - 1))

    results: dict[int, tuple[list[float], int]] = {}
    ckpt = Path(checkpoint) if checkpoint is not None else None
    if ckpt is not None:
        results.update((b, r) for b, r in _load_checkpoint(ckpt).items() if b in todo)
    pending = [b for b in todo if b not in results]

    sink = ckpt.open("a") if ckpt is not None else None
    try:
        for b, buckets, skipped in _run(pending, tables, n_qubits, prune, max_pairs, workers):
            results[b] = (buckets, skipped)
            if sink is not None:
                sink.write(json.dumps({"b": b, "buckets": buckets, "pruned": skipped}) + "\n")
                sink.flush()
    finally:
        if sink is not None:
            sink.close()

    width = max(n_qubits, 1)
    per_qubit = []
    for q in range(width):
        value = math.fsum(results[b][0][q] for b in todo)
        if value != 0:
            per_qubit.append((q, value))
    total = math.fsum(v for _, v in per_qubit)
    pruned = sum(results[b][1] for b in todo)
    return TrotterNormResult(total, tuple(per_qubit), len(tables), pruned)


def _run(pending, tables, n_qubits, prune, max_pairs, workers):
    if workers <= 1 or len(pending) <= 1:
        _install(tables, n_qubits, prune, max_pairs)
        for b in pending:
            yield _outer_term(b)
        return
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        max_workers=workers,
        mp_context=ctx,
        initializer=_install,
        initargs=(tables, n_qubits, prune, max_pairs),
    ) as pool:
        yield from pool.map(_outer_term, pending, chunksize=1)


def eigenphase_shift_bound(delta: float, t: float = 1.0) -> float:
    """Bound on the eigenphase shift caused by a unitary perturbation of norm delta.

    Returns arctan(delta sqrt(4 - delta^2) / (2 - delta^2)) / t, the matching
    energy-shift bound. Requires delta^2 <= 2.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta**2 > 2:
        raise ValueError("bound holds only for delta^2 <= 2")
    if t <= 0:
        raise ValueError("t must be positive")
    denom = 2.0 - delta**2
    if denom == 0:
        return (math.pi / 2) / t
    return math.atan2(delta * math.sqrt(4.0 - delta**2), denom) / t


def eigenphase_shift_series(delta: float) -> float:
    """Leading terms delta + delta^3/24 of the phase-shift bound."""
    return delta + delta**3 / 24.0


def _dense_parts(ordering: TrotterOrdering):
    n = ordering.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    return n, [to_dense(f, n) for f in ordering.fragments]


def _expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def _trotter_unitary(parts, t):
    halves = [_expm_hermitian(h, t / 2) for h in parts]
    u = np.eye(parts[0].shape[0], dtype=np.complex128)
    for step in halves + halves[::-1]:
        u = u @ step
    return u


def dense_unitary_gap(ordering: TrotterOrdering, t: float) -> float:
    """Spectral norm of exp(-iHt) minus the symmetric product formula."""
    _, parts = _dense_parts(ordering)
    exact = _expm_hermitian(sum(parts), t)
    return float(np.linalg.norm(exact - _trotter_unitary(parts, t), 2))


def dense_eigenphase_shift(ordering: TrotterOrdering, t: float) -> float:
    """Largest energy shift between H and the effective Trotter Hamiltonian."""
    if t <= 0:
        raise ValueError("t must be positive")
    _, parts = _dense_parts(ordering)
    h = sum(parts)
    energies = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    if np.max(np.abs(energies)) * t >= math.pi:
        raise ValueError("eigenphases wrap: |E t| >= pi for some eigenvalue")
    phases = np.linalg.eigvals(_trotter_unitary(parts, t))
    effective = np.sort(-np.angle(phases) / t)
    return float(np.max(np.abs(np.sort(energies) - effective)))
