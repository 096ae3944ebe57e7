"""Command-line driver.

Exit codes: 0 claims verified, 1 claim violated (or no valid circuit),
2 usage or I/O error. Every report embeds the tool version and the fully
resolved configuration; feeding a report back through ``--config``
reruns the same computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (BEST_KNOWN, CS_LOGICAL_MODE, DEFAULT_THEOREM1_CONFIGS, ConstructionNotFound,
                     as_rational, bound_from_expectation, build_entangled_cs_state, cs_target_state,
                     expected_photon_number, ns_target_state, run_cs_three_mode_protocol,
                     run_ns_two_photon_protocol, verify_theorem1)
from .fock import StateVector, fidelity_up_to_phase
from .gates import PostselectedCircuit, check_postselected_gate, gate_spec
from .optics import ModeUnitary, apply_mode_unitary
from .postselect import PostselectionPattern, joint_count_distribution, postselect
from .search import BoundViolationError, SearchConfig, optimize_gate

log = logging.getLogger("lopbounds")

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None


def _complex_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


# -- commands -------------------------------------------------------------------
# Each returns (exit_code, results, csv_rows).

def cmd_verify_theorem1(args):
    configs = [tuple(int(v) for v in c.split(":")) for c in args.configs.split(",")]
    for c in configs:
        if len(c) != 2:
            raise UsageError(f"--configs entries must look like n:k, got {c}")
    tol = 1e-9 if args.tol is None else args.tol
    report = verify_theorem1(configs, args.trials, args.seed, tol=tol, workers=args.workers)
    rows = [{"n_modes": n, "k_photons": k, "max_expectation": v}
            for (n, k), v in report.per_config_max.items()]
    return (EXIT_OK if report.passed else EXIT_VIOLATED), report.to_json_dict(), rows


def _bounds_table(tol: float):
    ns = run_ns_two_photon_protocol()
    cs = run_cs_three_mode_protocol()
    ns_e = expected_photon_number(ns.final_state, 0)
    cs_e = expected_photon_number(cs.final_state, CS_LOGICAL_MODE)
    rows = []
    ok = True
    for gate, trace, target, e in (("NS", ns, ns_target_state(), ns_e), ("CS", cs, cs_target_state(), cs_e)):
        fid = fidelity_up_to_phase(trace.final_state, target)
        bound = bound_from_expectation(as_rational(e, tol))
        ok &= fid >= 1 - tol
        rows.append({
            "gate": gate,
            "target_state": "|20>" if gate == "NS" else "(|110>+|101>+|011>)/sqrt(3)",
            "expectation": e,
            "bound": float(bound),
            "bound_exact": str(bound),
            "best_known": float(BEST_KNOWN[gate]),
            "best_known_exact": str(BEST_KNOWN[gate]),
            "fidelity": fid,
        })
    ok &= rows[0]["bound_exact"] == "1/2" and rows[1]["bound_exact"] == "3/4"
    return ok, rows


def cmd_reproduce_bounds(args):
    tol = 1e-10 if args.tol is None else args.tol
    ok, rows = _bounds_table(tol)
    return (EXIT_OK if ok else EXIT_VIOLATED), {"table": rows}, rows


def _search_config(args) -> SearchConfig:
    warm = None
    if args.warm_start:
        try:
            warm = PostselectedCircuit.from_json_dict(_read_json(args.warm_start, "warm-start circuit"))
        except ValueError as exc:
            raise UsageError(f"warm-start circuit: {exc}") from None
    try:
        return SearchConfig(n_ancilla_modes=args.ancilla_modes, n_ancilla_photons=args.ancilla_photons,
                            restarts=args.restarts, max_iterations=args.max_iterations,
                            validity_tolerance=1e-8 if args.tol is None else args.tol,
                            penalty_weight=args.penalty_weight, seed=args.seed,
                            workers=args.workers, warm_start=warm)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args):
    spec = gate_spec(args.gate)
    config = _search_config(args)
    try:
        result = optimize_gate(spec, config)
    except BoundViolationError as exc:
        return EXIT_VIOLATED, {"error": str(exc)}, [{"error": str(exc)}]
    if args.circuit_out:
        try:
            Path(args.circuit_out).write_text(result.best_circuit.to_json())
        except OSError as exc:
            raise UsageError(f"cannot write circuit file {args.circuit_out}: {exc.strerror}") from None
    rows = [{"gate": spec.name, "success_probability": result.best_success_probability,
             "deviation": result.best_deviation, "is_valid": result.is_valid,
             "best_restart": result.best_restart}]
    return (EXIT_OK if result.is_valid else EXIT_VIOLATED), result.to_json_dict(), rows


def cmd_check_circuit(args):
    data = _read_json(args.circuit, "circuit")
    try:
        circuit = PostselectedCircuit.from_json_dict(data)
    except ValueError as exc:
        raise UsageError(f"malformed circuit file {args.circuit}: {exc}") from None
    spec = gate_spec(args.gate)
    try:
        check = check_postselected_gate(circuit, spec, 1e-8 if args.tol is None else args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = {
        "gate": spec.name,
        "is_valid": check.is_valid,
        "success_probability": check.success_probability,
        "deviation": check.deviation,
        "scale": [check.scale.real, check.scale.imag],
        "output_basis": [list(o) for o in spec.output_basis],
        "computational_basis": [list(b) for b in spec.computational_basis],
        "conditional_matrix": _complex_pairs(check.conditional_matrix),
    }
    rows = [{k: results[k] for k in ("gate", "is_valid", "success_probability", "deviation")}]
    return (EXIT_OK if check.is_valid else EXIT_VIOLATED), results, rows


def cmd_evolve(args):
    try:
        state = StateVector.from_json_dict(_read_json(args.state, "state"))
        unitary = ModeUnitary.from_json_dict(_read_json(args.unitary, "unitary"))
        pattern = (PostselectionPattern.from_json_dict(_read_json(args.pattern, "pattern"))
                   if args.pattern else None)
        out = apply_mode_unitary(state, unitary)
        if pattern is None:
            results = {"state": out.to_json_dict()}
            probability = 1.0
        else:
            outcome = postselect(out, pattern)
            probability = outcome.probability
            results = {"probability": probability,
                       "state": None if outcome.conditional_state is None
                       else outcome.conditional_state.to_json_dict()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    final = results["state"]
    rows = []
    if final is not None:
        s = StateVector.from_json_dict(final)
        rows = [{"occupation": " ".join(map(str, o)), "re": float(a.real), "im": float(a.imag),
                 "probability": probability} for o, a in zip(s.basis.occupations, s.amplitudes)]
    return EXIT_OK, results, rows


def cmd_entangled_cs(args):
    tol = 1e-8 if args.tol is None else args.tol
    try:
        trace = build_entangled_cs_state(allow_postselection=not args.no_postselection, tol=tol)
    except ConstructionNotFound as exc:
        return EXIT_VIOLATED, {"error": str(exc)}, [{"error": str(exc)}]
    marginal = joint_count_distribution(trace.final_state, [0, 1])
    results = trace.to_json_dict()
    results["two_mode_marginal"] = [{"counts": list(k), "probability": v} for k, v in sorted(marginal.items())]
    rows = [{"n_mode0": k[0], "n_mode1": k[1], "probability": v} for k, v in sorted(marginal.items())]
    return EXIT_OK, results, rows


# -- plumbing -------------------------------------------------------------------

def _add_global(p: argparse.ArgumentParser) -> None:
    # a seed preset through set_defaults takes priority over the generic 0
    p.add_argument("--seed", type=int, default=p.get_default("seed") or 0, help="base random seed")
    p.add_argument("--tol", type=float, default=None, help="tolerance (command-specific default)")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--config", default=None, help="JSON file of option values (a previous report works)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lopbounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lopbounds {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-theorem1", help="randomized check of the one-photon-per-mode bound")
    p.add_argument("--configs", default=",".join(f"{n}:{k}" for n, k in DEFAULT_THEOREM1_CONFIGS))
    p.add_argument("--trials", type=int, default=200, help="trials per configuration")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify_theorem1, seed=20030113)

    p = sub.add_parser("reproduce-bounds", help="run both protocols and tabulate the bounds")
    p.set_defaults(func=cmd_reproduce_bounds)

    p = sub.add_parser("optimize", help="search for a heralded NS/CS circuit")
    p.add_argument("--gate", default="NS", choices=("NS", "CS", "ns", "cs"))
    p.add_argument("--ancilla-modes", type=int, default=2)
    p.add_argument("--ancilla-photons", type=int, default=1)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iterations", type=int, default=4000)
    p.add_argument("--penalty-weight", type=float, default=1e3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--warm-start", default=None, help="circuit JSON to start restart 0 from")
    p.add_argument("--circuit-out", default=None, help="where to write the best circuit")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check-circuit", help="re-verify a serialized circuit")
    p.add_argument("circuit")
    p.add_argument("--gate", default="NS", choices=("NS", "CS", "ns", "cs"))
    p.set_defaults(func=cmd_check_circuit)

    p = sub.add_parser("evolve", help="apply a unitary (and optional postselection) to a state")
    p.add_argument("state")
    p.add_argument("unitary")
    p.add_argument("--pattern", default=None)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("entangled-cs", help="build (|1100>+|0011>)/sqrt(2) with one CS")
    p.add_argument("--no-postselection", action="store_true")
    p.set_defaults(func=cmd_entangled_cs)

    for sp in sub.choices.values():
        _add_global(sp)
    return parser


_NOT_CONFIG = {"func", "config", "out", "format", "verbose"}


def _resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def _apply_config_file(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    data = _read_json(args.config, "config")
    if isinstance(data, dict) and "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    sub = parser._subparsers._group_actions[0].choices[args.command]
    valid = {a.dest for a in sub._actions}
    unknown = set(data) - valid - {"command"}
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    sub.set_defaults(**{k: v for k, v in data.items() if k != "command"})
    return parser.parse_args(argv)


def _render(report: dict, rows: list, fmt: str, provenance: dict) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("".join(f"# {k}: {json.dumps(v)}\n" for k, v in provenance.items()))
    if rows:
        fields = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
    except UsageError as exc:
        print(f"lopbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code, results, rows = args.func(args)
    except UsageError as exc:
        print(f"lopbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    provenance = {"tool": "lopbounds", "version": __version__, "command": args.command,
                  "config": _resolved_config(args)}
    report = dict(provenance, exit_code=code, results=results)
    text = _render(report, rows, args.format, provenance)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"lopbounds: error: cannot write report {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
