"""Error-budget allocation minimizing the phase-estimation T count.

The total T count is

    (N_r * N_HT + N_d) * N_PE
    N_PE = c_PE * sqrt(W) / (dE_PE * sqrt(dE_TS))
    N_HT = 1.15 * log2(N_r * sqrt(W) / (dE_HT * sqrt(dE_TS))) + 9.2

with the Trotter step t = sqrt(dE_TS / W), under dE_TS + dE_PE + dE_HT <= dE.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

PE_CONSTANT = 0.76 * math.pi
SYNTH_SLOPE = 1.15
SYNTH_OFFSET = 9.2
TOFFOLI_T_COST = 2

# Optional divisors for alternative phase-estimation schemes.
PE_DIVISORS = {"single_control": 1.0, "multi_control": 1.52, "median": 1.45}

JELLIUM_A = (math.log(2.0) - 1.0) / (2.0 * math.pi**2)
JELLIUM_B = 20.4562557
HUBBARD_ENERGY_PER_SITE = {4: 1.02, 8: 0.74}
CHEMICAL_ACCURACY = 0.0016

_GRID_POINTS = 41
_REFINE_TOL = 1e-6
_MAX_SWEEPS = 60


class PrecisionMode(str, enum.Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class ErrorBudget:
    trotter: float
    phase_estimation: float
    synthesis: float

    def __post_init__(self):
        for name in ("trotter", "phase_estimation", "synthesis"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} error must be positive, got {value}")

    @property
    def total(self) -> float:
        return self.trotter + self.phase_estimation + self.synthesis

    def to_dict(self) -> dict:
        return {"dE_TS": self.trotter, "dE_PE": self.phase_estimation, "dE_HT": self.synthesis}


@dataclass(frozen=True)
class PrecisionTarget:
    """Total precision dE, either a fraction of |E0| or an absolute value."""

    mode: PrecisionMode = PrecisionMode.RELATIVE
    fraction: float = 0.005
    absolute: float | None = None
    energy_proxy: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", PrecisionMode(self.mode))

    def delta_e(self) -> float:
        if self.mode is PrecisionMode.RELATIVE:
            if self.energy_proxy is None:
                raise ValueError("relative precision needs an energy proxy")
            value = self.fraction * abs(self.energy_proxy)
        else:
            value = CHEMICAL_ACCURACY if self.absolute is None else self.absolute
        if not value > 0:
            raise ValueError(f"precision must be positive, got {value}")
        return value


@dataclass(frozen=True)
class CostBreakdown:
    n_pe: float
    n_ht: float
    t: float
    total_t: float
    valid: bool

    @property
    def n_pe_reported(self) -> int:
        return max(1, math.ceil(self.n_pe))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_pe_reported"] = self.n_pe_reported
        return out


def jellium_energy_proxy(rs: float, eta: int) -> float:
    """Uniform electron gas energy estimate (Hartree) for eta electrons."""
    if rs <= 0 or eta < 1:
        raise ValueError("need rs > 0 and eta >= 1")
    c = 9.0 * math.pi / 4.0
    per_electron = (
        0.6 * c ** (2 / 3) / rs**2
        - 1.5 * c ** (1 / 3) / rs
        + JELLIUM_A * math.log(1.0 + JELLIUM_B / rs + JELLIUM_B / rs**2)
    )
    return eta * per_electron


def jellium_energy_proxy_hartree(rs: float, eta: int) -> float:
    """Uniform electron gas energy estimate with every term in Hartree.

    Kinetic (3/10) c^(2/3) / rs^2 and exchange -(3/(4 pi)) c^(1/3) / rs with
    c = 9 pi / 4; the correlation term is shared with ``jellium_energy_proxy``.
    The literal form mixes Rydberg-scaled kinetic and exchange terms with a
    Hartree correlation term and drops the 1/pi of the exchange energy.
    """
    if rs <= 0 or eta < 1:
        raise ValueError("need rs > 0 and eta >= 1")
    c = 9.0 * math.pi / 4.0
    per_electron = (
        0.3 * c ** (2 / 3) / rs**2
        - 0.75 / math.pi * c ** (1 / 3) / rs
        + JELLIUM_A * math.log(1.0 + JELLIUM_B / rs + JELLIUM_B / rs**2)
    )
    return eta * per_electron


def hubbard_energy_proxy(u_over_tau: float, sites: int, per_site: float | None = None) -> float:
    """Upper bound on the Hubbard ground-state energy magnitude, in units of tau."""
    if per_site is None:
        key = int(u_over_tau) if float(u_over_tau).is_integer() else None
        if key not in HUBBARD_ENERGY_PER_SITE:
            raise ValueError(
                f"no tabulated energy per site for U/tau={u_over_tau}; pass per_site explicitly"
            )
        per_site = HUBBARD_ENERGY_PER_SITE[key]
    return sites * per_site


def t_count(
    budget: ErrorBudget, W: float, n_r: int, n_d: float, pe_divisor: float = 1.0
) -> CostBreakdown:
    """Phase-estimation T count for one error budget (real-valued N_PE, N_HT)."""
    if not W > 0:
        raise ValueError("W must be positive")
    ts, pe, ht = budget.trotter, budget.phase_estimation, budget.synthesis
    t = math.sqrt(ts / W)
    n_pe = PE_CONSTANT / (pe * t) / pe_divisor
    n_ht = SYNTH_SLOPE * math.log2(n_r / (ht * t)) + SYNTH_OFFSET if n_r > 0 else 0.0
    total = (n_r * n_ht + n_d) * n_pe
    return CostBreakdown(n_pe, n_ht, t, total, ts**3 <= W)


def _cost(log_ht: float, logit_ts: float, delta_e, W, n_r, n_d, pe_divisor) -> float:
    ht = delta_e * math.exp(log_ht)
    share = 1.0 / (1.0 + math.exp(-logit_ts))
    rest = delta_e - ht
    return t_count(ErrorBudget(rest * share, rest * (1 - share), ht), W, n_r, n_d, pe_divisor).total_t


def _budget(log_ht: float, logit_ts: float, delta_e: float) -> ErrorBudget:
    ht = delta_e * math.exp(log_ht)
    share = 1.0 / (1.0 + math.exp(-logit_ts))
    rest = delta_e - ht
    return ErrorBudget(rest * share, rest * (1 - share), ht)


def minimize(
    delta_e: float, W: float, n_r: int, n_d: float, pe_divisor: float = 1.0
) -> tuple[ErrorBudget, CostBreakdown]:
    """Split delta_e over the three error sources to minimize the T count.

    The constraint is active at the optimum because the cost falls strictly
    as any component grows. The search runs over the synthesis fraction
    f = dE_HT/dE and the Trotter share s = dE_TS/(dE_TS + dE_PE): a coarse
    log grid, then alternating bounded 1D refinements in (log f, logit s)
    until the relative cost change drops below 1e-6.
    """
    if not delta_e > 0:
        raise ValueError("total precision must be positive")
    if not W > 0:
        raise ValueError("W must be positive")
    if n_r < 0 or n_d < 0:
        raise ValueError("gate counts must be non-negative")
    args = (delta_e, W, n_r, n_d, pe_divisor)
    lo_f, hi_f = math.log(1e-9), math.log(0.5)
    lo_s, hi_s = -12.0, 12.0
    fs = np.linspace(lo_f, hi_f, _GRID_POINTS)
    ss = np.linspace(-8.0, 8.0, _GRID_POINTS)
    best = min((_cost(f, s, *args), f, s) for f in fs for s in ss)
    cost, f, s = best
    for _ in range(_MAX_SWEEPS):
        previous = cost
        res = minimize_scalar(
            lambda x, s=s: _cost(x, s, *args), bounds=(lo_f, hi_f), method="bounded",
            options={"xatol": 1e-10},
        )
        if res.fun < cost:
            cost, f = res.fun, res.x
        res = minimize_scalar(
            lambda y, f=f: _cost(f, y, *args), bounds=(lo_s, hi_s), method="bounded",
            options={"xatol": 1e-10},
        )
        if res.fun < cost:
            cost, s = res.fun, res.x
        if previous - cost <= _REFINE_TOL * previous:
            break
    budget = _budget(f, s, delta_e)
    return budget, t_count(budget, W, n_r, n_d, pe_divisor)
