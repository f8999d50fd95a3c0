"""Fermionic coefficient tensors for jellium, materials and the Hubbard model.

Every Hamiltonian has the form::

    H = sum_pq T_pq a+_p a_q + sum_p U_p n_p + sum_{p != q} V_pq n_p n_q

with ``T`` and ``V`` real symmetric and the interaction sum running over
ordered pairs. ``jordan_wigner`` maps it to a ``QubitOperator``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from trottercost.pauli import PauliString, QubitOperator

SPIN_ORDERS = ("interleaved", "blocked")


@dataclass(frozen=True)
class GridSpec:
    """A periodic grid of spatial orbitals, optionally with spin.

    Attributes:
        lengths: points per dimension (1 to 3 dimensions).
        spinful: whether each spatial orbital carries two spin-orbitals.
        wigner_seitz_radius: r_s in Bohr; sets the cell volume with ``eta``.
        eta: electron count; defaults to half filling, floor(N/2).
        volume: explicit cell volume overriding the r_s conversion.
        spin_order: "interleaved" puts site s at qubits 2s, 2s+1;
            "blocked" puts all spin-up orbitals first.
    """

    lengths: tuple[int, ...]
    spinful: bool = False
    wigner_seitz_radius: float | None = None
    eta: int | None = None
    volume: float | None = None
    spin_order: str = "interleaved"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        if not 1 <= len(self.lengths) <= 3:
            raise ValueError(f"grid must have 1 to 3 dimensions, got {len(self.lengths)}")
        if any(n < 1 for n in self.lengths):
            raise ValueError(f"side lengths must be positive, got {self.lengths}")
        if self.spin_order not in SPIN_ORDERS:
            raise ValueError(f"spin_order must be one of {SPIN_ORDERS}")
        if self.eta is not None and not 0 <= self.eta <= self.n_orbitals:
            raise ValueError(f"eta={self.eta} outside [0, N={self.n_orbitals}]")
        if self.wigner_seitz_radius is not None and self.wigner_seitz_radius <= 0:
            raise ValueError("wigner_seitz_radius must be positive")
        if self.volume is not None and self.volume <= 0:
            raise ValueError("volume must be positive")

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def n_spatial(self) -> int:
        return math.prod(self.lengths)

    @property
    def n_spins(self) -> int:
        return 2 if self.spinful else 1

    @property
    def n_orbitals(self) -> int:
        return self.n_spatial * self.n_spins

    @property
    def electrons(self) -> int:
        return self.n_orbitals // 2 if self.eta is None else self.eta

    @property
    def omega(self) -> float:
        """Cell volume in Bohr^d."""
        if self.volume is not None:
            return float(self.volume)
        if self.wigner_seitz_radius is None:
            raise ValueError("grid needs either wigner_seitz_radius or volume")
        rs, eta = self.wigner_seitz_radius, self.electrons
        if eta < 1:
            raise ValueError("wigner_seitz_radius conversion needs at least one electron")
        per_electron = {1: 2.0 * rs, 2: math.pi * rs**2, 3: 4.0 * math.pi / 3.0 * rs**3}
        return eta * per_electron[self.d]

    def orbital(self, site: int, spin: int = 0) -> int:
        if not self.spinful:
            return site
        if self.spin_order == "interleaved":
            return 2 * site + spin
        return spin * self.n_spatial + site

    def site_spin(self, orbital: int) -> tuple[int, int]:
        if not self.spinful:
            return orbital, 0
        if self.spin_order == "interleaved":
            return orbital // 2, orbital % 2
        return orbital % self.n_spatial, orbital // self.n_spatial

    def site_coords(self, site: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(site, self.lengths))

    def site_index(self, coords: Sequence[int]) -> int:
        wrapped = tuple(c % n for c, n in zip(coords, self.lengths))
        return int(np.ravel_multi_index(wrapped, self.lengths))

    def shift(self, orbital: int, coord_shift: Sequence[int], spin_shift: int = 0) -> int:
        """Translate an orbital by a periodic grid vector (and spin flip)."""
        site, spin = self.site_spin(orbital)
        coords = [c + s for c, s in zip(self.site_coords(site), coord_shift)]
        return self.orbital(self.site_index(coords), (spin + spin_shift) % self.n_spins)

    def with_(self, **changes) -> GridSpec:
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return GridSpec(**values)


@dataclass(frozen=True)
class Nucleus:
    position: tuple[float, ...]
    charge: float


@dataclass(frozen=True, eq=False)
class FermionHamiltonian:
    """Coefficient tensors of a number-conserving fermionic Hamiltonian."""

    kinetic: np.ndarray
    external: np.ndarray
    interaction: np.ndarray
    grid: GridSpec
    kind: str = "generic"
    periodic: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.kinetic.shape[0]
        if self.kinetic.shape != (n, n) or self.interaction.shape != (n, n):
            raise ValueError("T and V must be square and the same size")
        if self.external.shape != (n,):
            raise ValueError("U must have one entry per orbital")
        if not np.allclose(self.kinetic, self.kinetic.T, atol=1e-12, rtol=0):
            raise ValueError("T must be symmetric")
        if not np.allclose(self.interaction, self.interaction.T, atol=1e-12, rtol=0):
            raise ValueError("V must be symmetric")
        if np.any(np.diag(self.interaction) != 0):
            raise ValueError("V must have a zero diagonal")
        for arr in (self.kinetic, self.external, self.interaction):
            arr.setflags(write=False)

    @property
    def n_orbitals(self) -> int:
        return self.kinetic.shape[0]

    def scaled(self, factor: float) -> FermionHamiltonian:
        return FermionHamiltonian(
            self.kinetic * factor,
            self.external * factor,
            self.interaction * factor,
            self.grid,
            self.kind,
            self.periodic,
            dict(self.metadata),
        )

    def is_translation_invariant(self, atol: float = 1e-12) -> bool:
        """Check V_{p,q} = V_{p+s,q+s} over the periodic grid (spin included)."""
        return _check_translation(self.interaction, self.grid, atol)

    def interaction_by_shift(self) -> dict[tuple, float]:
        """V(0, s) for every non-zero shift s = (grid vector, spin flip)."""
        g = self.grid
        out = {}
        for coords in itertools.product(*(range(n) for n in g.lengths)):
            for spin in range(g.n_spins):
                if not any(coords) and spin == 0:
                    continue
                q = g.shift(g.orbital(0, 0), coords, spin)
                out[coords + (spin,)] = float(self.interaction[g.orbital(0, 0), q])
        return out


def _check_translation(v: np.ndarray, grid: GridSpec, atol: float) -> bool:
    n = grid.n_orbitals
    perm_base = np.arange(n)
    for coords in itertools.product(*(range(m) for m in grid.lengths)):
        for spin in range(grid.n_spins):
            perm = np.array([grid.shift(int(p), coords, spin) for p in perm_base])
            if not np.allclose(v[np.ix_(perm, perm)], v, atol=atol, rtol=0):
                return False
    return True


def momentum_grid(grid: GridSpec) -> np.ndarray:
    """Integer frequency vectors nu, centred on zero: nu_i in [-(n//2), n - n//2)."""
    axes = [np.arange(-(n // 2), n - n // 2) for n in grid.lengths]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1).astype(float)


def _spatial_positions(grid: GridSpec) -> np.ndarray:
    side = grid.omega ** (1.0 / grid.d)
    coords = np.array([grid.site_coords(s) for s in range(grid.n_spatial)], dtype=float)
    return coords * (side / np.array(grid.lengths, dtype=float))


def _momenta(grid: GridSpec) -> np.ndarray:
    side = grid.omega ** (1.0 / grid.d)
    return 2.0 * math.pi * momentum_grid(grid) / side


def _spread_over_spin(grid: GridSpec, spatial: np.ndarray, same_spin_only: bool) -> np.ndarray:
    n = grid.n_orbitals
    full = np.zeros((n, n))
    for s1 in range(grid.n_spins):
        for s2 in range(grid.n_spins):
            if same_spin_only and s1 != s2:
                continue
            rows = [grid.orbital(p, s1) for p in range(grid.n_spatial)]
            cols = [grid.orbital(q, s2) for q in range(grid.n_spatial)]
            full[np.ix_(rows, cols)] = spatial
    return full


def _plane_wave_tensors(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    omega = grid.omega
    if omega <= 0:
        raise ValueError("cell volume must be positive")
    k = _momenta(grid)
    k2 = np.einsum("ij,ij->i", k, k)
    phase = k @ _spatial_positions(grid).T
    c, s = np.cos(phase), np.sin(phase)
    m = grid.n_spatial
    # cos(k.(r_q - r_p)) = cos(k.r_p)cos(k.r_q) + sin(k.r_p)sin(k.r_q)
    t_spatial = ((c.T * k2) @ c + (s.T * k2) @ s) / (2.0 * m)
    nonzero = k2 > 0
    w = np.zeros_like(k2)
    w[nonzero] = 2.0 * math.pi / (omega * k2[nonzero])
    v_spatial = (c.T * w) @ c + (s.T * w) @ s
    kinetic = _spread_over_spin(grid, _symmetrize(t_spatial), same_spin_only=True)
    interaction = _spread_over_spin(grid, _symmetrize(v_spatial), same_spin_only=False)
    np.fill_diagonal(interaction, 0.0)
    return kinetic, interaction


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def jellium(grid: GridSpec) -> FermionHamiltonian:
    """Uniform electron gas in the plane-wave dual basis."""
    kinetic, interaction = _plane_wave_tensors(grid)
    return FermionHamiltonian(
        kinetic, np.zeros(grid.n_orbitals), interaction, grid, kind="jellium"
    )


def material(grid: GridSpec, nuclei: Sequence[Nucleus]) -> FermionHamiltonian:
    """Plane-wave dual basis Hamiltonian with a nuclear external potential."""
    if not nuclei:
        raise ValueError("material needs at least one nucleus")
    kinetic, interaction = _plane_wave_tensors(grid)
    side = grid.omega ** (1.0 / grid.d)
    k = _momenta(grid)
    k2 = np.einsum("ij,ij->i", k, k)
    nonzero = k2 > 0
    positions = _spatial_positions(grid)
    u_spatial = np.zeros(grid.n_spatial)
    for nucleus in nuclei:
        r = np.asarray(nucleus.position, dtype=float)
        if r.shape != (grid.d,):
            raise ValueError(f"nucleus position must have {grid.d} components")
        r = np.mod(r, side)
        phase = (k[nonzero] @ r)[:, None] - k[nonzero] @ positions.T
        u_spatial -= (
            4.0 * math.pi * nucleus.charge
            * (np.cos(phase) / (grid.omega * k2[nonzero])[:, None]).sum(axis=0)
        )
    external = np.zeros(grid.n_orbitals)
    for spin in range(grid.n_spins):
        for p in range(grid.n_spatial):
            external[grid.orbital(p, spin)] = u_spatial[p]
    return FermionHamiltonian(
        kinetic, external, interaction, grid, kind="material",
        metadata={"nuclei": [(tuple(n.position), n.charge) for n in nuclei]},
    )


def hubbard_bonds(lx: int, ly: int, periodic: bool) -> list[tuple[int, int]]:
    """Nearest-neighbour site pairs, with multiplicity for doubled wraparound edges."""
    grid = GridSpec((lx, ly))
    bonds = []
    for site in range(grid.n_spatial):
        x, y = grid.site_coords(site)
        for dx, dy in ((1, 0), (0, 1)):
            nx, ny = x + dx, y + dy
            if not periodic and (nx >= lx or ny >= ly):
                continue
            other = grid.site_index((nx, ny))
            if other != site:
                bonds.append((site, other))
    return bonds


def hubbard(
    lx: int,
    ly: int,
    tau: float,
    u: float,
    periodic: bool = True,
    spin_order: str = "interleaved",
) -> FermionHamiltonian:
    """Spinful Fermi-Hubbard model on an lx-by-ly lattice (no chemical potential)."""
    if lx < 1 or ly < 1:
        raise ValueError(f"lattice dimensions must be positive, got {lx}x{ly}")
    grid = GridSpec((lx, ly), spinful=True, spin_order=spin_order)
    n = grid.n_orbitals
    kinetic = np.zeros((n, n))
    for a, b in hubbard_bonds(lx, ly, periodic):
        for spin in (0, 1):
            p, q = grid.orbital(a, spin), grid.orbital(b, spin)
            kinetic[p, q] -= tau
            kinetic[q, p] -= tau
    interaction = np.zeros((n, n))
    for site in range(grid.n_spatial):
        up, down = grid.orbital(site, 0), grid.orbital(site, 1)
        # Ordered-pair sum counts the pair twice; U/2 each gives U n_up n_down.
        interaction[up, down] = interaction[down, up] = u / 2.0
    return FermionHamiltonian(
        kinetic, np.zeros(n), interaction, grid, kind="hubbard", periodic=periodic,
        metadata={"tau": tau, "u": u, "lx": lx, "ly": ly},
    )


# --------------------------------------------------------------------------
# Jordan-Wigner


def _z_string(p: int, q: int) -> int:
    lo, hi = min(p, q), max(p, q)
    return ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)


def jw_hopping_terms(p: int, q: int, coeff: float) -> dict[PauliString, complex]:
    """Pauli terms of coeff * (a+_p a_q + a+_q a_p)."""
    if p == q:
        raise ValueError("hopping needs distinct orbitals")
    ends = (1 << p) | (1 << q)
    zs = _z_string(p, q)
    return {PauliString(ends, zs): coeff / 2.0, PauliString(ends, zs | ends): coeff / 2.0}


def jw_density_terms(
    p: int, q: int, coeff: float, include_identity: bool = False
) -> dict[PauliString, complex]:
    """Pauli terms of coeff * n_p n_q for p != q."""
    terms = {
        PauliString(0, (1 << p) | (1 << q)): coeff / 4.0,
        PauliString(0, 1 << p): -coeff / 4.0,
        PauliString(0, 1 << q): -coeff / 4.0,
    }
    if include_identity:
        terms[PauliString()] = coeff / 4.0
    return terms


def jw_number_terms(p: int, coeff: float, include_identity: bool = False):
    """Pauli terms of coeff * n_p."""
    terms = {PauliString(0, 1 << p): -coeff / 2.0}
    if include_identity:
        terms[PauliString()] = coeff / 2.0
    return terms


def _accumulate(acc: dict, terms: dict):
    for s, c in terms.items():
        acc[s] = acc.get(s, 0.0) + c


def jw_pieces(
    h: FermionHamiltonian,
    *,
    hopping: bool = True,
    diagonal: bool = True,
    potential: bool = True,
    include_identity: bool = True,
) -> QubitOperator:
    """Jordan-Wigner image of selected parts of ``h``.

    ``hopping`` covers off-diagonal T, ``diagonal`` covers T_pp, and
    ``potential`` covers U and V.
    """
    acc: dict[PauliString, complex] = {}
    n = h.n_orbitals
    t, u, v = h.kinetic, h.external, h.interaction
    for p in range(n):
        for q in range(p + 1, n):
            if hopping and t[p, q] != 0:
                _accumulate(acc, jw_hopping_terms(p, q, t[p, q]))
            if potential and v[p, q] != 0:
                _accumulate(acc, jw_density_terms(p, q, 2.0 * v[p, q], include_identity))
    for p in range(n):
        onebody = (t[p, p] if diagonal else 0.0) + (u[p] if potential else 0.0)
        if onebody != 0:
            _accumulate(acc, jw_number_terms(p, onebody, include_identity))
    return QubitOperator(acc)


def jordan_wigner(h: FermionHamiltonian) -> QubitOperator:
    """Qubit Hamiltonian under the Jordan-Wigner map (identity term included).

    Hopping strings carry T_pq/2, each unordered interaction pair carries
    V_pq/2 on Z_p Z_q (the ordered-pair sum counts it twice), and the single-Z
    coefficient is -(T_pp + U_p)/2 - sum_{q != p} V_pq/2.
    """
    return jw_pieces(h)
