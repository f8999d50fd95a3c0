"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 invariant or stage failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from trottercost import __version__
from trottercost.gate_count import GateCounts
from trottercost.hamiltonians import jordan_wigner
from trottercost.optimizer import PE_DIVISORS, minimize
from trottercost.pauli import one_norm
from trottercost.pipeline import (
    PipelineError,
    RunConfig,
    build_hamiltonian,
    build_orderings,
    choose_step,
    dumps,
    gate_counts,
    precision_target,
    run_pipeline,
    system_label,
    table_row,
    totals,
    trotter_norm,
    verify,
)
from trottercost.surface_code import PhysicalAssumptions, estimate

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 2, 3

ROW_HEADER = ["system", "anc", "log", "toffoli", "t"]


def _system_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("system (ignored with --config)")
    g.add_argument("--config", help="RunConfig JSON file")
    g.add_argument("--system", choices=["hubbard", "jellium"], help="model kind")
    g.add_argument("--lengths", type=int, nargs="+", help="grid side lengths")
    g.add_argument("--tau", type=float, default=1.0)
    g.add_argument("--u", type=float, default=4.0)
    g.add_argument("--open", action="store_true", help="open boundaries (Hubbard)")
    g.add_argument("--rs", type=float, default=10.0, help="Wigner-Seitz radius (Bohr)")
    g.add_argument("--eta", type=int, help="electron count")
    g.add_argument("--spinless", action="store_true")
    g.add_argument("--step", choices=["auto", "fswap", "split"])
    g.add_argument("--order", choices=["auto", "TV", "VT"])
    g.add_argument("--basis", choices=["auto", "FFFT", "GIVENS"])
    g.add_argument("--ancillae", type=int, help="HWP ancilla budget")
    g.add_argument("--workers", type=int, help="processes for the W computation")


def _config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config)
        raw = dict(cfg.data)
    else:
        if not args.system or not args.lengths:
            raise PipelineError("config", "give --config or --system with --lengths")
        system = {"kind": args.system, "lengths": args.lengths}
        if args.system == "hubbard":
            system.update(tau=args.tau, u=args.u, periodic=not args.open)
        else:
            system.update(rs=args.rs, spinful=not args.spinless)
            if args.eta is not None:
                system["eta"] = args.eta
        raw = {"system": system}
    for flag, key in (("step", "step"), ("order", "split_order"), ("basis", "basis"),
                      ("workers", "workers")):
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if getattr(args, "ancillae", None) is not None:
        raw["hwp"] = {**raw.get("hwp", {}), "ancillae": args.ancillae}
    precision = dict(raw.get("precision", {}))
    for flag, key in (("target", "mode"), ("fraction", "fraction"), ("abs_value", "absolute"),
                      ("energy_proxy", "energy_proxy")):
        value = getattr(args, flag, None)
        if value is not None:
            precision[key] = value
    if precision:
        raw["precision"] = precision
    if getattr(args, "p", None):
        raw["physical"] = {**raw.get("physical", {}), "p": args.p}
    return RunConfig.from_dict(raw)


def _emit(payload, args):
    text = payload if isinstance(payload, str) else dumps(payload)
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: list, rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _row_header(rates: list[float]) -> list[str]:
    header = list(ROW_HEADER)
    for p in rates:
        header += [f"phys_qubits_p{p:g}", f"hours_p{p:g}"]
    return header


# --------------------------------------------------------------------------
# Subcommands


def cmd_hamiltonian(args) -> int:
    cfg = _config(args)
    op = jordan_wigner(build_hamiltonian(cfg["system"]))
    if args.format == "text":
        _emit(op.to_text() + "\n", args)
    else:
        _emit({
            "n_qubits": op.n_qubits,
            "n_terms": len(op),
            "one_norm": one_norm(op, traceless=True),
            "terms": [[str(s), c.real, c.imag] for s, c in sorted(op, key=lambda t: t[0].sort_key())],
        }, args)
    return EXIT_OK


def cmd_ordering(args) -> int:
    cfg = _config(args)
    h = build_hamiltonian(cfg["system"])
    step, _ = choose_step(h, cfg)
    _emit({"orderings": [o.summary() for o in build_orderings(h, cfg, step)]}, args)
    return EXIT_OK


def cmd_trotter_norm(args) -> int:
    cfg = _config(args)
    h = build_hamiltonian(cfg["system"])
    step, _ = choose_step(h, cfg)
    ordering, result, norms = trotter_norm(cfg, build_orderings(h, cfg, step))
    _emit({"label": ordering.label.value, "candidates": norms, **result.to_dict()}, args)
    return EXIT_OK


def cmd_gates(args) -> int:
    cfg = _config(args)
    h = build_hamiltonian(cfg["system"])
    step, basis = choose_step(h, cfg)
    counts = gate_counts(h, cfg, step, basis)
    _emit({"step": step, "basis": basis.value if step == "split" else None, **counts.to_dict()}, args)
    return EXIT_OK


def cmd_optimize(args) -> int:
    overrides = (args.w, args.nr, args.nd)
    divisor = PE_DIVISORS[args.pe_variant]
    if all(v is not None for v in overrides):
        if args.delta_e is None:
            raise PipelineError("config", "explicit --w/--nr/--nd need --delta-e")
        W, n_r, n_d, delta_e = args.w, args.nr, args.nd, args.delta_e
        gates = GateCounts(rotations=n_r, direct_t=n_d)
        label, anc = "custom", 0
        logical = args.logical
    elif any(v is not None for v in overrides):
        raise PipelineError("config", "--w, --nr and --nd go together")
    else:
        cfg = _config(args)
        h = build_hamiltonian(cfg["system"])
        step, basis = choose_step(h, cfg)
        _, result, _ = trotter_norm(cfg, build_orderings(h, cfg, step))
        gates = gate_counts(h, cfg, step, basis)
        W, n_r, n_d = result.W, gates.rotations, gates.n_d
        delta_e = args.delta_e or precision_target(h, cfg)["delta_e"]
        label = cfg.data.get("label") or system_label(cfg["system"])
        anc, logical = cfg["hwp"]["ancillae"], gates.logical_system_qubits
    if delta_e <= 0 or W <= 0:
        raise PipelineError("config", "need positive --delta-e and W")
    budget, cost = minimize(delta_e, W, n_r, n_d, divisor)
    total = totals(gates, cost)
    payload = {
        "W": W, "N_r": n_r, "N_d": n_d, "delta_e": delta_e,
        "budget": budget.to_dict(), "cost": cost.to_dict(), "totals": total,
        "logical_qubits": logical,
    }
    if args.csv:
        row = [label, anc, logical, f"{total['toffoli']:.1e}", f"{total['t']:.1e}"]
        _emit(_csv_text(ROW_HEADER, [row]), args)
    else:
        _emit(payload, args)
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.input:
        data = json.loads(Path(args.input).read_text())
        if "totals" not in data:
            raise PipelineError("config", "input JSON has no totals block")
        t_gates, toffoli = data["totals"]["t"], data["totals"]["toffoli"]
        logical = data.get("logical_qubits") or data.get("gates", {}).get("logical_system_qubits")
    else:
        t_gates, toffoli, logical = args.t, args.toffoli, args.logical
    if logical is None or t_gates is None or toffoli is None:
        raise PipelineError("config", "need --input or all of --logical, --t, --toffoli")
    rates = args.p or [1e-3]
    results = []
    for p in rates:
        try:
            assumptions = PhysicalAssumptions(p=p)
        except ValueError as exc:
            raise PipelineError("config", str(exc)) from None
        results.append({"p": p, **estimate(int(logical), int(t_gates), int(toffoli), assumptions).to_dict()})
    if args.csv:
        row = [args.label, args.anc, logical, f"{toffoli:.1e}", f"{t_gates:.1e}"]
        for r in results:
            row += [f"{r['physical_qubits']:.1e}{r['mark']}", f"{r['hours']:.1e}"]
        _emit(_csv_text(_row_header(rates), [row]), args)
    else:
        _emit({"estimates": results}, args)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    start = time.perf_counter()
    report = run_pipeline(cfg)
    elapsed = time.perf_counter() - start
    out = args.output or cfg.data.get("output", {}).get("report")
    csv_path = args.csv or cfg.data.get("output", {}).get("csv")
    text = dumps(report)
    if out:
        Path(out).write_text(text)
        Path(f"{out}.timing.json").write_text(json.dumps({"wall_seconds": elapsed}) + "\n")
    else:
        sys.stdout.write(text)
    if csv_path:
        rates = [e["p"] for e in report["physical"]]
        Path(csv_path).write_text(_csv_text(_row_header(rates), [table_row(report)]))
    print(f"wall time {elapsed:.2f} s", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify(args.scope)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAILURE if failed else EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trottercost", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hamiltonian", help="Jordan-Wigner qubit Hamiltonian")
    _system_args(p)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_hamiltonian)

    p = sub.add_parser("ordering", help="Trotter fragment orderings")
    _system_args(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_ordering)

    p = sub.add_parser("trotter-norm", help="Trotter error norm W")
    _system_args(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_trotter_norm)

    p = sub.add_parser("gates", help="per-step rotation and gate counts")
    _system_args(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("optimize", help="error-budget minimization")
    _system_args(p)
    p.add_argument("--w", type=float, help="override W")
    p.add_argument("--nr", type=int, help="override N_r")
    p.add_argument("--nd", type=int, help="override N_d")
    p.add_argument("--delta-e", type=float, help="total precision")
    p.add_argument("--logical", type=int, help="logical qubits carried to the output")
    p.add_argument("--target", choices=["relative", "absolute"])
    p.add_argument("--fraction", type=float)
    p.add_argument("--abs-value", type=float)
    p.add_argument("--energy-proxy", type=float)
    p.add_argument("--pe-variant", choices=sorted(PE_DIVISORS), default="single_control")
    p.add_argument("--csv", action="store_true", help="emit a table row instead of JSON")
    p.add_argument("--output")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("estimate", help="surface-code physical estimate")
    p.add_argument("--input", help="optimize or run JSON output")
    p.add_argument("--logical", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--toffoli", type=int)
    p.add_argument("--p", type=float, action="append", help="physical error rate (repeatable)")
    p.add_argument("--label", default="custom")
    p.add_argument("--anc", type=int, default=0)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("run", help="full pipeline from a config")
    _system_args(p)
    p.add_argument("--p", type=float, action="append", help="physical error rate (repeatable)")
    p.add_argument("--output", help="report path; wall time goes to <path>.timing.json")
    p.add_argument("--csv", help="table row path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="oracle checks at desk scale")
    p.add_argument("--scope", choices=["pauli", "trotter", "hwp", "all"], default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if exc.stage == "config" else EXIT_FAILURE
    except (ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
