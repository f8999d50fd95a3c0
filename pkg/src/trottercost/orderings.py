"""Fragment orderings H_1..H_L implemented by each Trotter-step circuit.

Fragments are always expressed in the initial Jordan-Wigner frame. The
fermionic swaps of the swap network only relabel which qubit holds which
orbital; the operator simulated by a gate is the same fermionic term in any
frame, and the nested commutators need a single common frame.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator
from dataclasses import dataclass, field

from trottercost.hamiltonians import (
    FermionHamiltonian,
    GridSpec,
    jw_density_terms,
    jw_hopping_terms,
    jw_number_terms,
    jw_pieces,
)
from trottercost.pauli import QubitOperator


class OrderingLabel(str, enum.Enum):
    FSWAP = "FSWAP"
    SPLIT_TV = "SPLIT_TV"
    SPLIT_VT = "SPLIT_VT"


@dataclass(frozen=True)
class TrotterOrdering:
    """Forward fragment list; the reversed half of the symmetric step is implicit."""

    fragments: tuple[QubitOperator, ...]
    label: OrderingLabel
    grid: GridSpec | None = None
    n_qubits: int = 0
    descriptions: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        split = self.label in (OrderingLabel.SPLIT_TV, OrderingLabel.SPLIT_VT)
        if split and len(self.fragments) != 2:
            raise ValueError("split-operator orderings have exactly two fragments")
        width = max((f.n_qubits for f in self.fragments), default=0)
        if self.n_qubits < width:
            object.__setattr__(self, "n_qubits", width)

    def __len__(self) -> int:
        return len(self.fragments)

    def total(self) -> QubitOperator:
        return QubitOperator.sum(self.fragments)

    def summary(self) -> dict:
        return {
            "label": self.label.value,
            "n_fragments": len(self.fragments),
            "n_qubits": self.n_qubits,
            "fragments": [
                {"index": i, "terms": len(f), "description": d}
                for i, (f, d) in enumerate(
                    zip(self.fragments, self.descriptions or [""] * len(self.fragments))
                )
            ],
        }


@dataclass(frozen=True)
class SwapGate:
    """One fermionic simulation gate: positions (i, i+1) hold orbitals p, q."""

    layer: int
    position: int
    p: int
    q: int


def swap_network(n: int) -> Iterator[list[SwapGate]]:
    """Odd-even transposition sort over n modes, yielding one layer at a time.

    Layer parity alternates starting with pairs (0,1), (2,3), ...; after n
    layers the initial mode order is reversed.
    """
    order = list(range(n))
    for layer in range(n):
        gates = []
        for i in range(layer % 2, n - 1, 2):
            gates.append(SwapGate(layer, i, order[i], order[i + 1]))
            order[i], order[i + 1] = order[i + 1], order[i]
        yield gates
    if order != list(range(n))[::-1]:
        raise AssertionError("swap network failed to reverse the mode order")


def pair_fragment(h: FermionHamiltonian, p: int, q: int, interaction: bool = True):
    """Terms simulated by the gate on orbitals p and q (identity dropped)."""
    acc: dict = {}
    t = h.kinetic[p, q]
    v = h.interaction[p, q]
    if t != 0:
        acc.update(jw_hopping_terms(p, q, t))
    if interaction and v != 0:
        for s, c in jw_density_terms(p, q, 2.0 * v).items():
            acc[s] = acc.get(s, 0.0) + c
    return QubitOperator(acc)


def _onsite_fragment(h: FermionHamiltonian) -> QubitOperator:
    acc: dict = {}
    n = h.n_orbitals
    for p in range(n):
        for q in range(p + 1, n):
            if h.interaction[p, q] != 0:
                for s, c in jw_density_terms(p, q, 2.0 * h.interaction[p, q]).items():
                    acc[s] = acc.get(s, 0.0) + c
    return QubitOperator(acc)


def _diagonal_fragment(h: FermionHamiltonian) -> QubitOperator:
    acc: dict = {}
    for p in range(h.n_orbitals):
        coeff = h.kinetic[p, p] + h.external[p]
        if coeff != 0:
            for s, c in jw_number_terms(p, coeff).items():
                acc[s] = acc.get(s, 0.0) + c
    return QubitOperator(acc)


def fswap_ordering(h: FermionHamiltonian, granularity: str = "gate") -> TrotterOrdering:
    """Fragments in the order the fermionic swap network simulates them.

    Args:
        h: the Hamiltonian.
        granularity: "gate" emits one fragment per non-zero simulation gate;
            "layer" merges all gates of a swap layer into one fragment.

    Hubbard models get one leading fragment holding every on-site term. The
    one-body diagonal (T_pp + U_p) forms a trailing fragment, which sits in
    the middle of the symmetric step.
    """
    if granularity not in ("gate", "layer"):
        raise ValueError("granularity must be 'gate' or 'layer'")
    hubbard = h.kind == "hubbard"
    fragments, descriptions = [], []
    if hubbard:
        onsite = _onsite_fragment(h)
        if onsite:
            fragments.append(onsite)
            descriptions.append("onsite")
    for gates in swap_network(h.n_orbitals):
        layer_terms = []
        for gate in gates:
            frag = pair_fragment(h, gate.p, gate.q, interaction=not hubbard)
            if not frag:
                continue
            if granularity == "gate":
                fragments.append(frag)
                descriptions.append(f"layer {gate.layer} gate ({gate.p},{gate.q})")
            else:
                layer_terms.append(frag)
        if layer_terms:
            fragments.append(QubitOperator.sum(layer_terms))
            descriptions.append(f"layer {gates[0].layer}")
    diagonal = _diagonal_fragment(h)
    if diagonal:
        fragments.append(diagonal)
        descriptions.append("one-body diagonal")
    return TrotterOrdering(
        tuple(fragments), OrderingLabel.FSWAP, h.grid, h.n_orbitals, tuple(descriptions)
    )


def split_operator_ordering(h: FermionHamiltonian, order: str = "TV") -> TrotterOrdering:
    """Two fragments: kinetic T and potential U + V, in the requested order."""
    kinetic = jw_pieces(h, potential=False, include_identity=False)
    potential = jw_pieces(h, hopping=False, diagonal=False, include_identity=False)
    if order == "TV":
        return TrotterOrdering(
            (kinetic, potential), OrderingLabel.SPLIT_TV, h.grid, h.n_orbitals, ("T", "V")
        )
    if order == "VT":
        return TrotterOrdering(
            (potential, kinetic), OrderingLabel.SPLIT_VT, h.grid, h.n_orbitals, ("V", "T")
        )
    raise ValueError(f"order must be 'TV' or 'VT', got {order!r}")


def recommend_split_order(h: FermionHamiltonian, workers: int = 1) -> tuple[str, dict]:
    """Pick the split-operator order with the smaller Trotter error norm.

    Returns the order ("TV" on ties) and both norms.
    """
    from trottercost.trotter_error import trotter_error_norm

    norms = {
        order: trotter_error_norm(split_operator_ordering(h, order), workers=workers).W
        for order in ("TV", "VT")
    }
    best = "TV" if norms["TV"] <= norms["VT"] else "VT"
    return best, norms
