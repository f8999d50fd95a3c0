"""Slow reference implementations used to cross-check the production kernels.

Nothing here shares code with the modules it checks: Pauli matrices come from
Kronecker products, fermion operators from occupation-number sign counting,
plane-wave coefficients from explicit frequency loops, and W from dense
matrix commutators decomposed by tensor contraction.
"""

from __future__ import annotations

import itertools
import math
import string
from collections.abc import Sequence

import numpy as np

_SINGLE = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_LABELS = "IXYZ"
_STACK = np.stack([_SINGLE[a] for a in _LABELS])  # [label, row, col]


def kron_pauli(factors: dict[int, str], n_qubits: int) -> np.ndarray:
    """Pauli string matrix with qubit j as bit j of the basis index."""
    mat = np.ones((1, 1), dtype=np.complex128)
    for qubit in reversed(range(n_qubits)):
        mat = np.kron(mat, _SINGLE[factors.get(qubit, "I")])
    return mat


def kron_operator(op, n_qubits: int) -> np.ndarray:
    """Dense matrix of a QubitOperator built term by term from kron_pauli."""
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for s, c in op:
        mat += c * kron_pauli(dict(s.factors), n_qubits)
    return mat


def pauli_decompose(mat: np.ndarray) -> np.ndarray:
    """Coefficients c[P] with mat = sum_P c[P] P, as an array of shape (4,)*n.

    Axis k of the result is qubit n-1-k; entries 0..3 label I, X, Y, Z.
    """
    dim = mat.shape[0]
    n = dim.bit_length() - 1
    if mat.shape != (dim, dim) or 1 << n != dim:
        raise ValueError("need a square matrix of power-of-two size")
    if n == 0:
        return np.array(mat[0, 0])
    letters = iter(string.ascii_letters)
    rows = [next(letters) for _ in range(n)]
    cols = [next(letters) for _ in range(n)]
    outs = [next(letters) for _ in range(n)]
    # Tr(P M) = sum_{r,c} P[c, r] M[r, c], factor by factor.
    operands = ["".join(rows + cols)] + [f"{o}{c}{r}" for o, c, r in zip(outs, cols, rows)]
    spec = ",".join(operands) + "->" + "".join(outs)
    tensor = mat.reshape([2] * (2 * n))
    return np.einsum(spec, tensor, *([_STACK] * n), optimize="greedy") / dim


def decomposition_terms(mat: np.ndarray, tol: float = 1e-12) -> dict[tuple, complex]:
    """Non-negligible Pauli coefficients keyed by ((qubit, axis), ...)."""
    coeffs = pauli_decompose(mat)
    n = coeffs.ndim
    out = {}
    for index in zip(*np.nonzero(np.abs(coeffs) > tol)):
        key = tuple(
            (n - 1 - k, _LABELS[a]) for k, a in reversed(list(enumerate(index))) if a
        )
        out[key] = complex(coeffs[index])
    return out


# --------------------------------------------------------------------------
# Nested commutator norm


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def dense_trotter_norm(fragments: Sequence[np.ndarray]) -> float:
    """W from dense fragment matrices, summing each commutator explicitly."""
    total = 0.0
    count = len(fragments)
    for b in range(count - 1):
        h_b = fragments[b]
        inner = [_comm(h_b, fragments[c]) for c in range(b + 1, count)]
        first = np.zeros_like(h_b)
        second = np.zeros_like(h_b)
        for k in inner:
            second += _comm(k, h_b)
            for a in range(b + 1, count):
                first += _comm(k, fragments[a])
        total += np.abs(pauli_decompose(first)).sum() + 0.5 * np.abs(pauli_decompose(second)).sum()
    return float(total / 12.0)


def ordering_trotter_norm(ordering) -> float:
    n = ordering.n_qubits
    return dense_trotter_norm([kron_operator(f, n) for f in ordering.fragments])


# --------------------------------------------------------------------------
# Fock space


def annihilators(n_modes: int) -> list[np.ndarray]:
    """a_p on the occupation basis; bit p of the index is mode p.

    a_p |n> = (-1)^(n_0 + ... + n_{p-1}) |n - e_p> when n_p = 1.
    """
    dim = 1 << n_modes
    ops = []
    for p in range(n_modes):
        mat = np.zeros((dim, dim))
        for state in range(dim):
            if state >> p & 1:
                below = sum(state >> q & 1 for q in range(p))
                mat[state ^ (1 << p), state] = -1.0 if below % 2 else 1.0
        ops.append(mat)
    return ops


def fock_hamiltonian(kinetic, external, interaction) -> np.ndarray:
    """sum T_pq a+_p a_q + sum U_p n_p + sum_{p != q} V_pq n_p n_q."""
    n = len(external)
    a = annihilators(n)
    dim = 1 << n
    h = np.zeros((dim, dim))
    number = [a[p].T @ a[p] for p in range(n)]
    for p in range(n):
        for q in range(n):
            if kinetic[p][q]:
                h += kinetic[p][q] * a[p].T @ a[q]
            if p != q and interaction[p][q]:
                h += interaction[p][q] * number[p] @ number[q]
        h += external[p] * number[p]
    return h


# --------------------------------------------------------------------------
# Plane-wave dual basis coefficients


def _frequencies(lengths: Sequence[int]):
    axes = [range(-(n // 2), n - n // 2) for n in lengths]
    return list(itertools.product(*axes))


def plane_wave_coefficients(
    lengths: Sequence[int], volume: float, nuclei: Sequence[tuple[Sequence[float], float]] = ()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spatial-orbital T, V and U by direct summation over frequencies.

    Positions are r_p = coords * side / n per axis, momenta k = 2 pi nu / side.
    """
    d = len(lengths)
    side = volume ** (1.0 / d)
    sites = list(itertools.product(*(range(n) for n in lengths)))
    m = len(sites)
    pos = [[c * side / n for c, n in zip(s, lengths)] for s in sites]
    ks = [[2 * math.pi * v / side for v in nu] for nu in _frequencies(lengths)]
    t = np.zeros((m, m))
    v = np.zeros((m, m))
    u = np.zeros(m)
    for p in range(m):
        for q in range(m):
            ts, vs = [], []
            for k in ks:
                k2 = sum(x * x for x in k)
                phase = sum(ki * (b - a) for ki, a, b in zip(k, pos[p], pos[q]))
                ts.append(k2 * math.cos(phase))
                if k2:
                    vs.append(math.cos(phase) / k2)
            t[p, q] = math.fsum(ts) / (2 * m)
            v[p, q] = 2 * math.pi / volume * math.fsum(vs)
        terms = []
        for position, charge in nuclei:
            r = [x % side for x in position]
            for k in ks:
                k2 = sum(x * x for x in k)
                if k2:
                    phase = sum(ki * (a - b) for ki, a, b in zip(k, r, pos[p]))
                    terms.append(-4 * math.pi * charge / volume * math.cos(phase) / k2)
        u[p] = math.fsum(terms)
    return t, v, u


# --------------------------------------------------------------------------
# Hamming weight phasing


def hwp_phase_residual(n: int, theta: float) -> float:
    """Largest phase mismatch, up to a global phase, between n equal Z rotations
    and rotations by 2^k theta on the binary digits of the Hamming weight."""
    rz = np.array([-theta / 2, theta / 2])
    direct = np.zeros(1)
    for _ in range(n):
        direct = np.add.outer(rz, direct).ravel()
    width = n.bit_length()
    phased = np.empty(1 << n)
    for state in range(1 << n):
        weight = sum(state >> j & 1 for j in range(n))
        phased[state] = sum(
            (1 if weight >> k & 1 else -1) * (1 << k) * theta / 2 for k in range(width)
        )
    diff = (direct - direct[0]) - (phased - phased[0])
    wrapped = np.angle(np.exp(1j * diff))
    return float(np.max(np.abs(wrapped)))


# --------------------------------------------------------------------------
# Error budget


def grid_minimize(delta_e: float, W: float, n_r: int, n_d: float, points: int = 200) -> float:
    """Smallest T count on a points x points log grid of budget splits."""
    best = math.inf
    ht_fracs = np.logspace(-7, math.log10(0.5), points)
    ts_shares = np.logspace(-3, math.log10(0.999), points)
    for f in ht_fracs:
        ht = f * delta_e
        rest = delta_e - ht
        for s in ts_shares:
            ts, pe = rest * s, rest * (1 - s)
            t = math.sqrt(ts / W)
            n_pe = 0.76 * math.pi / (pe * t)
            n_ht = 1.15 * math.log2(n_r / (ht * t)) + 9.2
            best = min(best, (n_r * n_ht + n_d) * n_pe)
    return best
