"""Physical-qubit and wall-time estimates on a surface code with one factory.

The model is parametric. Each factory scheme has a footprint in logical
tiles at its level-1 and level-2 code distances, a latency in surface-code
cycles per output state, and an output error composed from the distillation
protocol and the topological error of the factory volume. Data qubits sit in
a block of logical tiles with a routing multiplier.

Logical error per tile per cycle is A * (p / p_th) ** ceil(d / 2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field


class Scheme(str, enum.Enum):
    ONE_ROUND_15TO1 = "ONE_ROUND_15TO1"
    CCZ_CATALYZED = "CCZ_CATALYZED"
    TWO_ROUND_15TO1 = "TWO_ROUND_15TO1"


SCHEME_MARK = {
    Scheme.ONE_ROUND_15TO1: "a",
    Scheme.CCZ_CATALYZED: "b",
    Scheme.TWO_ROUND_15TO1: "c",
}


@dataclass(frozen=True)
class FactoryModel:
    """Tunable factory constants, calibrated once against reference estimates."""

    unit_tiles: int = 20  # one 15-to-1 block
    unit_depth: float = 5.75  # cycles per d for one 15-to-1 round
    ccz_tiles: int = 36
    ccz_depth: float = 5.5
    feeder_units: int = 4  # level-1 blocks feeding a level-2 stage
    injection_error_factor: float = 1.0


@dataclass(frozen=True)
class PhysicalAssumptions:
    p: float = 1e-3
    cycle_time_us: float = 1.0
    decoder_latency_us: float = 10.0
    decoder_stalls: bool = True
    distill_distances: tuple[int, ...] = tuple(range(15, 52, 2))
    data_distances: tuple[int, ...] = tuple(range(5, 52, 2))
    failure_budget: float = 0.3
    prefactor: float = 0.1
    threshold: float = 1e-2
    routing_overhead: float = 1.5
    factory: FactoryModel = field(default_factory=FactoryModel)

    def __post_init__(self):
        if not 0 < self.p < self.threshold:
            raise ValueError(f"need 0 < p < p_th={self.threshold}, got {self.p}")
        for d in self.distill_distances + self.data_distances:
            if d < 3 or d % 2 == 0:
                raise ValueError(f"code distances must be odd and >= 3, got {d}")


@dataclass(frozen=True)
class ResourceEstimate:
    scheme: Scheme
    level1_distance: int
    level2_distance: int
    data_distance: int
    physical_qubits: int
    hours: float
    failure_probability: float
    factory_qubits: int
    data_qubits: int

    @property
    def mark(self) -> str:
        return SCHEME_MARK[self.scheme]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scheme"] = self.scheme.value
        out["mark"] = self.mark
        return out


def logical_error_rate(p: float, d: int, prefactor: float = 0.1, threshold: float = 1e-2) -> float:
    """Per-tile, per-cycle logical error at physical rate p and distance d."""
    if not p < threshold:
        raise ValueError("physical error rate must be below threshold")
    return prefactor * (p / threshold) ** math.ceil(d / 2)


def tile_qubits(d: int) -> int:
    """Physical qubits of one logical tile, data and measurement qubits."""
    return 2 * (d + 1) ** 2


@dataclass(frozen=True)
class _Factory:
    scheme: Scheme
    d1: int
    d2: int
    qubits: int
    cycles: float  # per output state
    error: float  # per output state


def _factories(a: PhysicalAssumptions):
    f = a.factory
    pl = lambda d: logical_error_rate(a.p, d, a.prefactor, a.threshold)
    injected = f.injection_error_factor * a.p
    for d1 in a.distill_distances:
        unit_cycles = f.unit_depth * d1
        eps1 = 35 * injected**3 + pl(d1) * f.unit_tiles * unit_cycles
        yield _Factory(
            Scheme.ONE_ROUND_15TO1, d1, d1, f.unit_tiles * tile_qubits(d1), unit_cycles, eps1
        )
        feeders = f.feeder_units * f.unit_tiles * tile_qubits(d1)
        for d2 in a.distill_distances:
            if d2 < d1:
                continue
            # Eight T states per CCZ, made by the feeder blocks in parallel.
            ccz_cycles = max(f.ccz_depth * d2, 8 / f.feeder_units * unit_cycles)
            ccz_error = 28 * eps1**2 + pl(d2) * f.ccz_tiles * ccz_cycles
            yield _Factory(
                Scheme.CCZ_CATALYZED, d1, d2,
                feeders + f.ccz_tiles * tile_qubits(d2), ccz_cycles, ccz_error,
            )
            t2_cycles = max(f.unit_depth * d2, 15 / f.feeder_units * unit_cycles)
            t2_error = 35 * eps1**3 + pl(d2) * f.unit_tiles * t2_cycles
            yield _Factory(
                Scheme.TWO_ROUND_15TO1, d1, d2,
                feeders + f.unit_tiles * tile_qubits(d2), t2_cycles, t2_error,
            )


def _states(scheme: Scheme, t_gates: int, toffoli: int) -> int:
    if scheme is Scheme.CCZ_CATALYZED:
        # One CCZ per Toffoli; a catalyzed CCZ yields two T states.
        return toffoli + -(-t_gates // 2)
    return t_gates + 2 * toffoli


def estimate(
    logical_qubits: int,
    t_gates: int,
    toffoli_gates: int,
    assumptions: PhysicalAssumptions | None = None,
) -> ResourceEstimate:
    """Cheapest (fewest physical qubits, then least time) feasible configuration.

    Two-round 15-to-1 distillation is a fallback, used only when neither the
    one-round nor the CCZ-catalyzed factory meets the failure budget.
    """
    a = assumptions or PhysicalAssumptions()
    if logical_qubits <= 0 or t_gates < 0 or toffoli_gates < 0 or t_gates + toffoli_gates == 0:
        raise ValueError("need positive logical qubits and a non-empty gate count")
    tiles = math.ceil(logical_qubits * a.routing_overhead)
    best = {True: None, False: None}
    for fac in _factories(a):
        fallback = fac.scheme is Scheme.TWO_ROUND_15TO1
        states = _states(fac.scheme, t_gates, toffoli_gates)
        state_us = fac.cycles * a.cycle_time_us
        if a.decoder_stalls:
            state_us = max(state_us, a.decoder_latency_us)
        total_cycles = states * state_us / a.cycle_time_us
        distill_fail = states * fac.error
        if distill_fail > a.failure_budget:
            continue
        for d in a.data_distances:
            data_fail = logical_error_rate(a.p, d, a.prefactor, a.threshold) * tiles * total_cycles
            failure = distill_fail + data_fail
            if failure > a.failure_budget:
                continue
            data_qubits = tiles * tile_qubits(d)
            candidate = ResourceEstimate(
                fac.scheme, fac.d1, fac.d2, d,
                data_qubits + fac.qubits, states * state_us / 3.6e9, failure,
                fac.qubits, data_qubits,
            )
            key = (candidate.physical_qubits, candidate.hours, fac.scheme.value)
            if best[fallback] is None or key < best[fallback][0]:
                best[fallback] = (key, candidate)
            break  # larger data distances only cost more
    chosen = best[False] or best[True]
    if chosen is None:
        raise ValueError("no configuration meets the failure budget within the distance range")
    return chosen[1]
