"""Run configuration, the end-to-end cost pipeline, and the oracle checks.

The pipeline runs hamiltonian -> ordering -> W -> gate counts -> error budget
-> surface-code estimate and returns one JSON-serializable report. Reports
hold no timestamps or timings so that equal configs give equal bytes.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from trottercost import __version__
from trottercost.gate_count import (
    FFFT_SIDES,
    BasisChange,
    GateCounts,
    HwpBudget,
    HwpScheme,
    default_step,
    fswap_step_costs,
    split_step_costs,
)
from trottercost.hamiltonians import (
    FermionHamiltonian,
    GridSpec,
    Nucleus,
    hubbard,
    jellium,
    material,
)
from trottercost.optimizer import (
    CHEMICAL_ACCURACY,
    PE_DIVISORS,
    TOFFOLI_T_COST,
    CostBreakdown,
    hubbard_energy_proxy,
    jellium_energy_proxy,
    jellium_energy_proxy_hartree,
    minimize,
)
from trottercost.orderings import (
    TrotterOrdering,
    fswap_ordering,
    split_operator_ordering,
)
from trottercost.surface_code import FactoryModel, PhysicalAssumptions, estimate
from trottercost.trotter_error import trotter_error_norm

WORKERS_ENV = "TROTTERCOST_WORKERS"
CHECKPOINT_ENV = "TROTTERCOST_CHECKPOINT_DIR"

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_LENGTHS = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "maxItems": 3}

SCHEMA = {
    "type": "object",
    "required": ["system"],
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["hubbard", "jellium", "material"]},
                "lengths": _LENGTHS,
                "tau": _POSITIVE,
                "u": {"type": "number", "minimum": 0},
                "periodic": {"type": "boolean"},
                "spinful": {"type": "boolean"},
                "rs": _POSITIVE,
                "eta": {"type": "integer", "minimum": 1},
                "volume": _POSITIVE,
                "nuclei": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["position", "charge"],
                        "additionalProperties": False,
                        "properties": {
                            "position": {"type": "array", "items": {"type": "number"}},
                            "charge": _POSITIVE,
                        },
                    },
                },
                "spin_order": {"enum": ["interleaved", "blocked"]},
            },
        },
        "step": {"enum": ["auto", "fswap", "split"]},
        "split_order": {"enum": ["auto", "TV", "VT"]},
        "basis": {"enum": ["auto", "FFFT", "GIVENS"]},
        "hwp": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ancillae": {"type": "integer", "minimum": 0},
                "scheme": {"enum": [s.value for s in HwpScheme]},
            },
        },
        "precision": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["relative", "absolute"]},
                "fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "absolute": _POSITIVE,
                "energy_proxy": {"type": "number"},
                "energy_per_site": _POSITIVE,
                "jellium_proxy": {"enum": ["hartree", "literal"]},
                "pe_variant": {"enum": sorted(PE_DIVISORS)},
            },
        },
        "physical": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p": {
                    "oneOf": [
                        _POSITIVE,
                        {"type": "array", "items": _POSITIVE, "minItems": 1},
                    ]
                },
                "decoder_stalls": {"type": "boolean"},
                "routing_overhead": {"type": "number", "minimum": 1},
                "failure_budget": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "workers": {"type": "integer", "minimum": 1},
        "label": {"type": "string"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"report": {"type": "string"}, "csv": {"type": "string"}},
        },
    },
}

DEFAULTS = {
    "step": "auto",
    "split_order": "auto",
    "basis": "auto",
    "hwp": {"ancillae": 0, "scheme": "LIMITED"},
    "precision": {"mode": "relative", "fraction": 0.005, "jellium_proxy": "hartree",
                  "pe_variant": "single_control"},
    "physical": {"p": 1e-3},
}


class PipelineError(Exception):
    """An error raised inside one pipeline stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass(frozen=True)
class RunConfig:
    """A validated pipeline configuration (defaults filled in)."""

    data: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> RunConfig:
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise PipelineError("config", f"{where}: {exc.message}") from None
        cfg = cls(_merge(DEFAULTS, raw))
        cfg._check()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> RunConfig:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PipelineError("config", f"cannot read {path}: {exc}") from None
        return cls.from_dict(raw)

    def __getitem__(self, key):
        return self.data[key]

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def _check(self):
        system = self.data["system"]
        kind = system["kind"]
        lengths = system.get("lengths")
        if lengths is None:
            raise PipelineError("config", "system.lengths is required")
        if kind == "hubbard":
            if len(lengths) != 2:
                raise PipelineError("config", "hubbard lattices are two-dimensional")
            if "tau" not in system or "u" not in system:
                raise PipelineError("config", "hubbard needs tau and u")
        else:
            if "rs" not in system and "volume" not in system:
                raise PipelineError("config", f"{kind} needs rs or volume")
            n = math.prod(lengths) * (2 if system.get("spinful", True) else 1)
            eta = system.get("eta")
            if eta is not None and eta > n:
                raise PipelineError("config", f"eta={eta} exceeds the {n} spin-orbitals")
        if kind == "material":
            if "nuclei" not in system:
                raise PipelineError("config", "material needs nuclei")
            for nucleus in system["nuclei"]:
                if len(nucleus["position"]) != len(lengths):
                    raise PipelineError("config", "nucleus position dimension mismatch")
        elif "nuclei" in system:
            raise PipelineError("config", f"{kind} takes no nuclei")

        basis = self.data["basis"]
        periodic = system.get("periodic", True)
        if basis == "FFFT":
            if len(set(lengths)) != 1 or lengths[0] not in FFFT_SIDES:
                raise PipelineError(
                    "config", f"FFFT needs equal sides in {FFFT_SIDES}, got {lengths}"
                )
            if not periodic:
                raise PipelineError("config", "FFFT needs periodic boundaries")
        if self.data["step"] == "split" and len(set(lengths)) != 1:
            raise PipelineError("config", "split-operator step needs equal side lengths")

        precision = self.data["precision"]
        if precision["mode"] == "relative" and "energy_proxy" not in precision:
            if kind == "material":
                raise PipelineError("config", "material relative precision needs energy_proxy")
            if kind == "hubbard" and "energy_per_site" not in precision:
                ratio = system["u"] / system["tau"]
                if ratio not in (4, 8):
                    raise PipelineError(
                        "config", f"no tabulated energy per site at U/tau={ratio}; set energy_per_site"
                    )
        p = self.data["physical"]["p"]
        for value in p if isinstance(p, list) else [p]:
            if not value < 1e-2:
                raise PipelineError("config", f"physical error rate {value} is above threshold")


# --------------------------------------------------------------------------
# Stages


def build_hamiltonian(system: dict) -> FermionHamiltonian:
    kind = system["kind"]
    lengths = system["lengths"]
    spin_order = system.get("spin_order", "interleaved")
    if kind == "hubbard":
        return hubbard(
            lengths[0], lengths[1], system["tau"], system["u"],
            periodic=system.get("periodic", True), spin_order=spin_order,
        )
    grid = GridSpec(
        tuple(lengths),
        spinful=system.get("spinful", True),
        wigner_seitz_radius=system.get("rs"),
        eta=system.get("eta"),
        volume=system.get("volume"),
        spin_order=spin_order,
    )
    if kind == "jellium":
        return jellium(grid)
    nuclei = [Nucleus(tuple(n["position"]), n["charge"]) for n in system["nuclei"]]
    return material(grid, nuclei)


def system_label(system: dict) -> str:
    name = {"hubbard": "FH", "jellium": "UEG", "material": "Material"}[system["kind"]]
    return f"{name} {'x'.join(str(n) for n in system['lengths'])}"


def choose_step(h: FermionHamiltonian, cfg: RunConfig) -> tuple[str, BasisChange]:
    auto_step, auto_basis = default_step(h)
    step = auto_step if cfg["step"] == "auto" else cfg["step"]
    if cfg["basis"] != "auto":
        basis = BasisChange(cfg["basis"])
    elif step == auto_step:
        basis = auto_basis
    else:
        g = h.grid
        ffft_ok = len(set(g.lengths)) == 1 and g.lengths[0] in FFFT_SIDES and h.periodic
        basis = BasisChange.FFFT if ffft_ok else BasisChange.GIVENS
    return step, basis


def _workers(cfg: RunConfig) -> int:
    if "workers" in cfg.data:
        return cfg["workers"]
    return int(os.environ.get(WORKERS_ENV, "1"))


def _checkpoint(cfg: RunConfig, label: str) -> Path | None:
    folder = os.environ.get(CHECKPOINT_ENV)
    if not folder:
        return None
    Path(folder).mkdir(parents=True, exist_ok=True)
    return Path(folder) / f"{cfg.digest()[:16]}-{label}.jsonl"


def build_orderings(h: FermionHamiltonian, cfg: RunConfig, step: str) -> list[TrotterOrdering]:
    """Candidate orderings; the split step with order "auto" yields both."""
    if step == "fswap":
        return [fswap_ordering(h)]
    orders = ("TV", "VT") if cfg["split_order"] == "auto" else (cfg["split_order"],)
    return [split_operator_ordering(h, o) for o in orders]


def trotter_norm(cfg: RunConfig, orderings: list[TrotterOrdering]):
    """W for each candidate; returns (best ordering, its result, all norms)."""
    results = []
    for ordering in orderings:
        ckpt = _checkpoint(cfg, ordering.label.value)
        results.append(
            trotter_error_norm(ordering, workers=_workers(cfg), checkpoint=ckpt)
        )
    norms = {o.label.value: r.W for o, r in zip(orderings, results)}
    # Ties keep the first candidate (TV before VT).
    best = min(range(len(results)), key=lambda i: (results[i].W, i))
    return orderings[best], results[best], norms


def gate_counts(h: FermionHamiltonian, cfg: RunConfig, step: str, basis: BasisChange) -> GateCounts:
    budget = HwpBudget(cfg["hwp"]["ancillae"], cfg["hwp"]["scheme"])
    if step == "fswap":
        return fswap_step_costs(h, budget)
    return split_step_costs(h, budget, basis)


def precision_target(h: FermionHamiltonian, cfg: RunConfig) -> dict:
    """Total precision dE and the energy proxy it was derived from."""
    precision = cfg["precision"]
    system = cfg["system"]
    if precision["mode"] == "absolute":
        default = system["tau"] / 100 if system["kind"] == "hubbard" else CHEMICAL_ACCURACY
        value = precision.get("absolute", default)
        return {"mode": "absolute", "delta_e": value, "energy_proxy": None}
    proxy = precision.get("energy_proxy")
    if proxy is None:
        if system["kind"] == "hubbard":
            sites = math.prod(system["lengths"])
            proxy = system["tau"] * hubbard_energy_proxy(
                system["u"] / system["tau"], sites, precision.get("energy_per_site")
            )
        else:
            form = jellium_energy_proxy_hartree
            if precision["jellium_proxy"] == "literal":
                form = jellium_energy_proxy
            proxy = form(system.get("rs") or _rs_from_volume(h.grid), h.grid.electrons)
    delta_e = precision["fraction"] * abs(proxy)
    if not delta_e > 0:
        raise PipelineError("optimize", "relative precision needs a non-zero energy proxy")
    return {"mode": "relative", "delta_e": delta_e, "energy_proxy": proxy}


def _rs_from_volume(grid: GridSpec) -> float:
    per_electron = grid.omega / grid.electrons
    return {1: per_electron / 2, 2: math.sqrt(per_electron / math.pi),
            3: (3 * per_electron / (4 * math.pi)) ** (1 / 3)}[grid.d]


def totals(gates: GateCounts, cost: CostBreakdown) -> dict:
    """Whole-run gate totals with N_PE and N_HT ceiled."""
    n_pe = cost.n_pe_reported
    n_ht = math.ceil(cost.n_ht)
    t_gates = (gates.rotations * n_ht + gates.direct_t) * n_pe
    toffoli = gates.direct_toffoli * n_pe
    return {
        "n_pe": n_pe,
        "n_ht": n_ht,
        "toffoli": toffoli,
        "t": t_gates,
        "t_equivalent": t_gates + TOFFOLI_T_COST * toffoli,
    }


def physical_assumptions(cfg: RunConfig) -> list[PhysicalAssumptions]:
    physical = cfg["physical"]
    rates = physical["p"] if isinstance(physical["p"], list) else [physical["p"]]
    extra = {k: physical[k] for k in ("decoder_stalls", "routing_overhead", "failure_budget")
             if k in physical}
    return [PhysicalAssumptions(p=p, factory=FactoryModel(), **extra) for p in rates]


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except PipelineError:
        raise
    except (ValueError, AssertionError) as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(cfg: RunConfig) -> dict:
    """Full chain from a config to a cost report."""
    h = _stage("hamiltonian", build_hamiltonian, cfg["system"])
    step, basis = _stage("ordering", choose_step, h, cfg)
    orderings = _stage("ordering", build_orderings, h, cfg, step)
    ordering, norm, norms = _stage("trotter", trotter_norm, cfg, orderings)
    gates = _stage("gates", gate_counts, h, cfg, step, basis)
    target = _stage("optimize", precision_target, h, cfg)
    divisor = PE_DIVISORS[cfg["precision"]["pe_variant"]]
    budget, cost = _stage(
        "optimize", minimize, target["delta_e"], norm.W, gates.rotations, gates.n_d, divisor
    )
    total = totals(gates, cost)
    estimates = [
        _stage("estimate", estimate, gates.logical_system_qubits, total["t"], total["toffoli"], a)
        for a in physical_assumptions(cfg)
    ]
    label = cfg.data.get("label", system_label(cfg["system"]))
    report = {
        "version": __version__,
        "config_hash": cfg.digest(),
        "config": cfg.data,
        "system": {
            "label": label,
            "kind": h.kind,
            "n_orbitals": h.n_orbitals,
            "electrons": h.grid.electrons,
            "lengths": list(h.grid.lengths),
        },
        "ordering": {
            "step": step,
            "basis": basis.value if step == "split" else None,
            "label": ordering.label.value,
            "n_fragments": len(ordering),
            "candidates": norms,
        },
        "trotter": norm.to_dict(),
        "gates": {**gates.to_dict(), "N_r": gates.rotations, "N_d": gates.n_d},
        "precision": target,
        "budget": budget.to_dict(),
        "budget_order": {
            "ts_gt_pe": budget.trotter > budget.phase_estimation,
            "pe_gg_ht": budget.phase_estimation > 10 * budget.synthesis,
        },
        "cost": cost.to_dict(),
        "totals": total,
        "physical": [
            {"p": a.p, **e.to_dict()} for a, e in zip(physical_assumptions(cfg), estimates)
        ],
    }
    report["row"] = table_row(report)
    return report


def table_row(report: dict) -> list:
    """System, Anc, Log, Toffoli, T, then physical qubits and hours per error rate."""
    row = [
        report["system"]["label"],
        report["config"]["hwp"]["ancillae"],
        report["gates"]["logical_system_qubits"],
        f"{report['totals']['toffoli']:.1e}",
        f"{report['totals']['t']:.1e}",
    ]
    for est in report["physical"]:
        row += [f"{est['physical_qubits']:.1e}{est['mark']}", f"{est['hours']:.1e}"]
    return row


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# Oracle checks


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}  {self.name}  residual={self.residual:.3e}{extra}"


def _random_operator(rng: np.random.Generator, n: int, terms: int):
    from trottercost.pauli import PauliString, QubitOperator

    acc = {}
    for _ in range(terms):
        x, z = int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n))
        acc[PauliString(x, z)] = complex(rng.normal(), rng.normal())
    return QubitOperator(acc)


def _verify_pauli() -> list[Check]:
    from trottercost import oracles
    from trottercost.pauli import commutator, multiply, to_dense

    rng = np.random.default_rng(7)
    dense = prod = comm = 0.0
    for _ in range(40):
        n = int(rng.integers(1, 6))
        a, b = _random_operator(rng, n, 6), _random_operator(rng, n, 6)
        da, db = oracles.kron_operator(a, n), oracles.kron_operator(b, n)
        dense = max(dense, float(np.abs(to_dense(a, n) - da).max()))
        prod = max(prod, float(np.abs(oracles.kron_operator(multiply(a, b), n) - da @ db).max()))
        comm = max(
            comm,
            float(np.abs(oracles.kron_operator(commutator(a, b), n) - (da @ db - db @ da)).max()),
        )
    tol = 1e-10
    return [
        Check("pauli: dense matrix matches Kronecker products", dense < tol, dense),
        Check("pauli: product matches dense product", prod < tol, prod),
        Check("pauli: commutator matches dense commutator", comm < tol, comm),
    ]


def _verify_trotter() -> list[Check]:
    from trottercost import oracles
    from trottercost.trotter_error import dense_unitary_gap

    h = hubbard(2, 1, 1.0, 4.0)
    ordering = split_operator_ordering(h, "TV")
    W = trotter_error_norm(ordering).W
    dense_W = oracles.ordering_trotter_norm(ordering)
    checks = [Check("trotter: W matches dense nested commutators (2x1 Hubbard)",
                    abs(W - dense_W) <= 1e-9 * dense_W, abs(W - dense_W) / dense_W)]
    for t in (0.01, 0.05, 0.2):
        gap = dense_unitary_gap(ordering, t)
        bound = W * t**3
        checks.append(Check(
            f"trotter: dense gap <= W t^3 at t={t} (2x1 Hubbard)", gap <= bound,
            gap, f"bound={bound:.3e} margin={bound - gap:.3e}",
        ))
    return checks


def _verify_hwp() -> list[Check]:
    from trottercost import oracles
    from trottercost.gate_count import hwp_phase_table

    rng = np.random.default_rng(11)
    oracle = table = 0.0
    for n in range(1, 11):
        for theta in rng.uniform(-math.pi, math.pi, 4):
            oracle = max(oracle, oracles.hwp_phase_residual(n, float(theta)))
            direct, phased = hwp_phase_table(n, float(theta))
            table = max(table, float(np.abs(direct - phased).max()))
    return [
        Check("hwp: weight-register phases equal direct rotations (oracle)", oracle < 1e-12, oracle),
        Check("hwp: phase table agrees exactly", table < 1e-12, table),
    ]


VERIFY_SCOPES = {"pauli": _verify_pauli, "trotter": _verify_trotter, "hwp": _verify_hwp}


def verify(scope: str = "all") -> list[Check]:
    if scope == "all":
        return [c for name in VERIFY_SCOPES for c in VERIFY_SCOPES[name]()]
    if scope not in VERIFY_SCOPES:
        raise ValueError(f"scope must be one of {sorted(VERIFY_SCOPES)} or 'all'")
    return VERIFY_SCOPES[scope]()
