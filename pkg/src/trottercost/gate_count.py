"""Per-step counts of synthesized rotations and direct T/Toffoli gates.

Equiangular rotations are combined with Hamming weight phasing (HWP): the n
rotations are replaced by rotations on the binary digits of the Hamming
weight of the targets, which an adder tree computes into ancillae. Adders
are counted as Toffoli gates; the T-equivalent of one adder is 4 T.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import asdict, dataclass

import numpy as np

from trottercost.hamiltonians import FermionHamiltonian
from trottercost.orderings import swap_network

TOFFOLI_T_COST = 2
ADDER_T_COST = 4
FFFT_SIDES = (4, 8, 16)
ANGLE_DIGITS = 12

# Per 1D application: T gates and catalyzed sqrt(T)-class rotation pairs.
_FFFT_PER_APPLICATION = {4: (8, 0), 8: (26, 0), 16: (70, 2)}


class HwpScheme(str, enum.Enum):
    FULL = "FULL"
    LIMITED = "LIMITED"
    SQRT_GROUPING = "SQRT_GROUPING"


class BasisChange(str, enum.Enum):
    FFFT = "FFFT"
    GIVENS = "GIVENS"


@dataclass(frozen=True)
class HwpBudget:
    ancillae: int = 0
    scheme: HwpScheme = HwpScheme.LIMITED

    def __post_init__(self):
        if self.ancillae < 0:
            raise ValueError("ancilla budget must be non-negative")
        object.__setattr__(self, "scheme", HwpScheme(self.scheme))


@dataclass(frozen=True)
class HwpCost:
    """Cost of phasing one group of equiangular rotations."""

    rotations: int
    adders: int
    ancillae: int

    @property
    def toffoli(self) -> int:
        return self.adders

    @property
    def t_gates(self) -> int:
        return ADDER_T_COST * self.adders


@dataclass(frozen=True)
class GateCounts:
    """Per-Trotter-step gate tallies.

    ``rotations`` need synthesis; ``direct_t`` and ``direct_toffoli`` do not.
    Catalysis seed states are global (synthesized once per run).
    """

    rotations: int = 0
    direct_t: int = 0
    direct_toffoli: int = 0
    hwp_ancillae: int = 0
    catalysis_seeds: int = 0
    logical_system_qubits: int = 0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value}")

    @property
    def n_d(self) -> int:
        """Direct T-equivalent count with Toffoli at 2 T each."""
        return self.direct_t + TOFFOLI_T_COST * self.direct_toffoli

    def __add__(self, other: GateCounts) -> GateCounts:
        return GateCounts(
            self.rotations + other.rotations,
            self.direct_t + other.direct_t,
            self.direct_toffoli + other.direct_toffoli,
            max(self.hwp_ancillae, other.hwp_ancillae),
            max(self.catalysis_seeds, other.catalysis_seeds),
            max(self.logical_system_qubits, other.logical_system_qubits),
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_d"] = self.n_d
        return out


# --------------------------------------------------------------------------
# Hamming weight phasing


def _bits(n: int) -> int:
    """floor(log2 n) + 1, the number of binary digits of n."""
    return n.bit_length()


def hwp_full(n: int) -> HwpCost:
    """Phase n equiangular rotations through the full Hamming weight."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return HwpCost(0, 0, 0)
    return HwpCost(_bits(n), n - 1, n - 1)


def hwp_limited(n: int, r: int) -> HwpCost:
    """Phase n rotations with r ancillae, r+1 rotations at a time.

    The groups are balanced: ceil(n/(r+1)) groups of at most r_eff + 1
    rotations each, where r_eff + 1 = ceil(n / groups).
    """
    if n < 0 or r < 0:
        raise ValueError("n and r must be non-negative")
    if n == 0:
        return HwpCost(0, 0, 0)
    if r + 1 >= n:
        return hwp_full(n)
    groups = -(-n // (r + 1))
    size = -(-n // groups)
    return HwpCost(groups * _bits(size), groups * (size - 1), size - 1)


def hwp_sqrt_grouping(n: int) -> HwpCost:
    """Sum Hamming weights of floor(sqrt n)-sized groups into one register."""
    if n < 2:
        raise ValueError("sqrt grouping needs n >= 2")
    k = math.isqrt(n)
    blocks = -(-n // k)
    log_n = _bits(n) - 1
    t_gates = 8 * blocks * (k - 1) - 4 * (k - 1) + 8 * log_n * blocks
    loose = 8 * n + 8 * math.sqrt(n) * math.log2(n) + 12 * math.log2(n) - 8
    assert t_gates <= loose + 1e-9, (n, t_gates, loose)
    return HwpCost(_bits(n), t_gates // ADDER_T_COST, k + log_n)


def hwp_cost(n: int, budget: HwpBudget) -> HwpCost:
    """Cheapest phasing of n equiangular rotations allowed by the budget."""
    if budget.scheme is HwpScheme.FULL:
        return hwp_full(n)
    if budget.scheme is HwpScheme.SQRT_GROUPING and n >= 2 and n - 1 > budget.ancillae:
        grouped = hwp_sqrt_grouping(n)
        if grouped.ancillae <= budget.ancillae:
            return grouped
    return hwp_limited(n, budget.ancillae)


def hwp_phase_table(n: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Phases on every n-bit string from direct and from Hamming-weight rotations.

    A rotation by angle a adds +a/2 on |1> and -a/2 on |0>. The weight
    register has floor(log2 n)+1 bits whose unused values would shift the
    phasing by a constant; that global phase is added back to the second
    table so both tables agree exactly.
    """
    if not 1 <= n <= 16:
        raise ValueError("phase tables are limited to 1 <= n <= 16")
    strings = np.arange(1 << n, dtype=np.int64)
    direct = np.zeros(strings.size)
    for j in range(n):
        bit = (strings >> j) & 1
        direct += np.where(bit == 1, theta / 2, -theta / 2)
    weight = np.bitwise_count(strings).astype(np.int64)
    width = _bits(n)
    phased = np.zeros(strings.size)
    for k in range(width):
        bit = (weight >> k) & 1
        phased += np.where(bit == 1, (1 << k) * theta / 2, -(1 << k) * theta / 2)
    phased += ((1 << width) - 1 - n) * theta / 2
    return direct, phased


# --------------------------------------------------------------------------
# Closed-form costs of fixed sub-circuits


def catalysis_costs(n_pairs: int) -> dict:
    """Two sqrt(T)-class rotations per pair for 1 Toffoli + 1 T."""
    if n_pairs < 0:
        raise ValueError("pair count must be non-negative")
    return {"t_gates": n_pairs, "toffoli": n_pairs, "seeds": 2 if n_pairs else 0}


def ffft_applications(side: int, d: int, spinful: bool) -> int:
    return d * side ** (d - 1) * (2 if spinful else 1)


def ffft_costs(side: int, d: int, spinful: bool) -> dict:
    """One position-to-momentum basis change built from 1D FFFTs."""
    if side not in _FFFT_PER_APPLICATION:
        raise ValueError(f"FFFT side length must be one of {FFFT_SIDES}, got {side}")
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    t_per, pairs_per = _FFFT_PER_APPLICATION[side]
    apps = ffft_applications(side, d, spinful)
    cat = catalysis_costs(pairs_per * apps)
    return {
        "t_gates": t_per * apps + cat["t_gates"],
        "toffoli": cat["toffoli"],
        "seeds": cat["seeds"],
        "applications": apps,
    }


def givens_costs(side: int, d: int, spinful: bool) -> dict:
    """Closed-form Givens-network costs with full HWP on each Givens layer."""
    if side < 2:
        raise ValueError("Givens basis change needs side >= 2")
    pairs = d * math.comb(side, 2)
    log_term = math.floor((d - 1) * math.log2(side) + 1e-12)
    lines = side ** (d - 1)
    if spinful:
        return {
            "synthesized_rotations": pairs * (log_term + 3),
            "toffoli": pairs * (4 * lines + 2 * log_term + 2),
        }
    return {
        "synthesized_rotations": pairs * (log_term + 2),
        "toffoli": pairs * (2 * lines + 2 * log_term),
    }


def givens_budget_costs(side: int, d: int, spinful: bool, budget: HwpBudget) -> HwpCost:
    """Givens-network cost when each Givens angle is phased under the budget.

    Every Givens rotation of the 1D network acts on all side^(d-1) parallel
    lines (and both spin sectors) with two rotations of the same angle.
    """
    per = hwp_cost(2 * side ** (d - 1) * (2 if spinful else 1), budget)
    count = d * math.comb(side, 2)
    return HwpCost(count * per.rotations, count * per.adders, per.ancillae)


def potential_layering_costs(n: int) -> dict:
    """Layered HWP for a translation-invariant pair potential on n qubits."""
    if n < 2:
        raise ValueError("need at least two qubits")
    if n % 2 == 0:
        return {
            "t_gates": 4 * (n - 1) * (n - 2),
            "synthesized_rotations": (2 * n - 2) * (_bits(n) - 1),
            "layers": 2 * n - 2,
        }
    return {
        "t_gates": 4 * (n - 1) ** 2,
        "synthesized_rotations": (n - 1) * (2 * (_bits(n - 1) - 1) + 1),
        "layers": 3 * (n - 1),
    }


# --------------------------------------------------------------------------
# Grouping helpers


def angle_key(value: float) -> float:
    """Coefficient rounded to 12 significant digits for equiangularity tests."""
    return float(f"{value:.{ANGLE_DIGITS - 1}e}")


@dataclass
class _Tally:
    rotations: int = 0
    adders: int = 0
    ancillae: int = 0

    def add(self, cost: HwpCost, times: int = 1):
        self.rotations += times * cost.rotations
        self.adders += times * cost.adders
        self.ancillae = max(self.ancillae, cost.ancillae)


def _phase_groups(angles: Iterable[float], budget: HwpBudget) -> HwpCost:
    """Phase a single layer of rotations, combining equal non-zero angles."""
    tally = _Tally()
    groups = Counter(angle_key(a) for a in angles if a != 0)
    for key in sorted(groups):
        tally.add(hwp_cost(groups[key], budget))
    return HwpCost(tally.rotations, tally.adders, tally.ancillae)


def _counts(tally: _Tally, n_qubits: int, budget: HwpBudget, **direct) -> GateCounts:
    return GateCounts(
        rotations=tally.rotations,
        direct_t=direct.get("t", 0),
        direct_toffoli=tally.adders + direct.get("toffoli", 0),
        hwp_ancillae=tally.ancillae,
        catalysis_seeds=direct.get("seeds", 0),
        logical_system_qubits=n_qubits + budget.ancillae + direct.get("extra_qubits", 0),
    )


# --------------------------------------------------------------------------
# Fermionic swap network step


def _is_uniform(values: np.ndarray) -> bool:
    return bool(np.all(np.abs(values - values[0]) <= 1e-12 * max(1.0, np.abs(values).max())))


def fswap_step_costs(
    h: FermionHamiltonian,
    budget: HwpBudget,
    *,
    drop_zero: bool = True,
    controlled: bool = False,
) -> GateCounts:
    """Rotations and adders for one symmetric swap-network Trotter step.

    Args:
        h: the Hamiltonian.
        budget: HWP ancilla budget.
        drop_zero: skip rotations whose angle is exactly zero.
        controlled: phase-estimation control; directional gates need no
            extra rotations, so the counts do not depend on it.
    """
    del controlled
    if h.kind == "hubbard":
        counts = _fswap_hubbard(h, budget, drop_zero)
        bound = 9 * h.n_orbitals
    else:
        counts = _fswap_plane_wave(h, budget, drop_zero)
        n = h.n_orbitals
        bound = (n - 1) * (3 * n - 4) if h.grid.spinful else 4 * (n - 1) ** 2
        bound += n
    assert counts.rotations <= bound, (counts.rotations, bound)
    return counts


def _gate_angles(h: FermionHamiltonian, p: int, q: int, drop_zero: bool) -> list[tuple]:
    out = []
    t, v = h.kinetic[p, q], h.interaction[p, q]
    if t != 0 or not drop_zero:
        out += [("hop", angle_key(t))] * 2
    if v != 0 or not drop_zero:
        out += [("int", angle_key(v))] * 2
    return out


def _fswap_plane_wave(h: FermionHamiltonian, budget: HwpBudget, drop_zero: bool) -> GateCounts:
    n = h.n_orbitals
    layers = list(swap_network(n))
    tally = _Tally()
    for index, gates in enumerate(layers):
        groups = Counter()
        for gate in gates:
            groups.update(_gate_angles(h, gate.p, gate.q, drop_zero))
        # The middle layer and the step boundary layer are merged with their mirrors.
        times = 1 if index in (0, len(layers) - 1) else 2
        for key in sorted(groups):
            tally.add(hwp_cost(groups[key], budget), times)
    onebody = np.diag(h.kinetic) + h.external
    if not _is_uniform(onebody):
        # Uniform one-body terms are a global phase at fixed electron number.
        tally.add(_phase_groups(onebody, budget))
    return _counts(tally, n, budget)


def _fswap_hubbard(h: FermionHamiltonian, budget: HwpBudget, drop_zero: bool) -> GateCounts:
    n = h.n_orbitals
    tally = _Tally()
    onsite = int(np.count_nonzero(np.triu(h.interaction)))
    # Each on-site term is a ZZ and a Z rotation of one shared angle.
    tally.add(hwp_cost(2 * onsite, budget))

    batches: list[Counter] = []
    pending: Counter = Counter()
    touched: set[int] = set()
    for gates in swap_network(n):
        for gate in gates:
            t = h.kinetic[gate.p, gate.q]
            if t == 0 and drop_zero:
                continue
            positions = {gate.position, gate.position + 1}
            if touched & positions:
                batches.append(pending)
                pending, touched = Counter(), set()
            pending[angle_key(t)] += 2
            touched |= positions
    if pending:
        batches.append(pending)
    for index, batch in enumerate(batches):
        times = 1 if index == len(batches) - 1 else 2
        for key in sorted(batch):
            tally.add(hwp_cost(batch[key], budget), times)
    return _counts(tally, n, budget)


# --------------------------------------------------------------------------
# Split-operator step


def _kinetic_spectrum(h: FermionHamiltonian) -> np.ndarray:
    g = h.grid
    if g.spinful:
        spin_up = [g.orbital(s, 0) for s in range(g.n_spatial)]
        spin_dn = [g.orbital(s, 1) for s in range(g.n_spatial)]
        blocks = [h.kinetic[np.ix_(idx, idx)] for idx in (spin_up, spin_dn)]
        cross = h.kinetic[np.ix_(spin_up, spin_dn)]
        if np.any(cross != 0):
            return np.linalg.eigvalsh(h.kinetic)
        return np.concatenate([np.linalg.eigvalsh(b) for b in blocks])
    return np.linalg.eigvalsh(h.kinetic)


def _significant(values: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    return np.where(np.abs(values) <= 1e-12 * scale, 0.0, values)


def _matchings(edges: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Greedy first-fit split of an edge list into vertex-disjoint layers."""
    layers: list[list[tuple[int, int]]] = []
    used: list[set[int]] = []
    for p, q in edges:
        for layer, busy in zip(layers, used):
            if p not in busy and q not in busy:
                layer.append((p, q))
                busy.update((p, q))
                break
        else:
            layers.append([(p, q)])
            used.append({p, q})
    return layers


def potential_layers(h: FermionHamiltonian) -> list[tuple[float, int]]:
    """(angle, size) of every parallel equiangular ZZ layer of the potential."""
    v = h.interaction
    classes: dict[float, list[tuple[int, int]]] = defaultdict(list)
    n = h.n_orbitals
    for p in range(n):
        for q in range(p + 1, n):
            if v[p, q] != 0:
                classes[angle_key(v[p, q])].append((p, q))
    out = []
    for key in sorted(classes):
        for layer in _matchings(classes[key]):
            out.append((key, len(layer)))
    return out


def _potential_tally(h: FermionHamiltonian, budget: HwpBudget) -> _Tally:
    tally = _Tally()
    if h.kind == "hubbard" or h.is_translation_invariant():
        for _, size in potential_layers(h):
            tally.add(hwp_cost(size, budget))
    else:
        tally.rotations += int(np.count_nonzero(np.triu(h.interaction, 1)))
    z_coeff = -h.external / 2 - h.interaction.sum(axis=1) / 2
    tally.add(_phase_groups(_significant(z_coeff), budget))
    return tally


def split_step_costs(
    h: FermionHamiltonian,
    budget: HwpBudget,
    basis_change: BasisChange | str = BasisChange.FFFT,
    *,
    controlled: bool = False,
) -> GateCounts:
    """Rotations and gates for one symmetric split-operator Trotter step.

    The momentum-basis kinetic layer is applied twice per step, the potential
    once (its halves merge across consecutive steps), and the basis change
    twice.
    """
    del controlled
    basis_change = BasisChange(basis_change)
    g = h.grid
    n = h.n_orbitals
    if basis_change is BasisChange.FFFT:
        if len(set(g.lengths)) != 1 or g.lengths[0] not in FFFT_SIDES:
            raise ValueError(f"FFFT needs equal sides in {FFFT_SIDES}, got {g.lengths}")
        if not h.periodic:
            raise ValueError("FFFT basis change needs periodic boundaries")
    elif len(set(g.lengths)) != 1:
        raise ValueError(f"basis change needs equal side lengths, got {g.lengths}")

    tally = _Tally()
    # The kinetic layer runs in both halves of the symmetric step.
    tally.add(_phase_groups(_significant(_kinetic_spectrum(h)), budget), 2)
    potential = _potential_tally(h, budget)
    tally.rotations += potential.rotations
    tally.adders += potential.adders
    tally.ancillae = max(tally.ancillae, potential.ancillae)

    side, d = g.lengths[0], g.d
    direct = {}
    if basis_change is BasisChange.FFFT:
        cost = ffft_costs(side, d, g.spinful)
        direct = {"t": 2 * cost["t_gates"], "toffoli": 2 * cost["toffoli"], "seeds": cost["seeds"]}
        if cost["seeds"]:
            # Two seed states plus one scratch qubit for the catalysis circuit.
            direct["extra_qubits"] = 3
    else:
        tally.add(givens_budget_costs(side, d, g.spinful, budget), 2)

    bound = math.comb(n, 2) + n
    assert potential.rotations <= bound, (potential.rotations, bound)
    return _counts(tally, n, budget, **direct)


# --------------------------------------------------------------------------
# Step selection


def default_step(h: FermionHamiltonian) -> tuple[str, BasisChange]:
    """Step type used for a system when none is requested.

    Hubbard lattices whose side is not an FFFT size use the swap network;
    everything else uses the split-operator step, with the FFFT when the
    sides allow it and Givens rotations otherwise.
    """
    g = h.grid
    ffft_ok = len(set(g.lengths)) == 1 and g.lengths[0] in FFFT_SIDES and h.periodic
    if h.kind == "hubbard" and not ffft_ok:
        return "fswap", BasisChange.GIVENS
    return "split", BasisChange.FFFT if ffft_ok else BasisChange.GIVENS


def step_costs(
    h: FermionHamiltonian,
    budget: HwpBudget,
    step: str,
    basis_change: BasisChange | str = BasisChange.FFFT,
) -> GateCounts:
    if step == "fswap":
        return fswap_step_costs(h, budget)
    if step == "split":
        return split_step_costs(h, budget, basis_change)
    raise ValueError(f"step must be 'fswap' or 'split', got {step!r}")
