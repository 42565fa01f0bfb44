"""Command-line entry point: ``secretdist {reproduce,measure,intrinsic,quantum,tables}``.

Every command writes one JSON report (stdout unless ``--out``) and a short
human summary on stderr. The exit status is 0 exactly when no check in the
report failed; bad input exits with status 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .dist_core import STAGES, format_rational, marginal, paper_distribution
from .errors import InternalCheckFailed, SecretDistError
from .fileio import channel_to_json, distribution_to_json, dump_channel, dump_distribution, load_channel, load_distribution
from .info import conditional_mutual_information, entropy, mutual_information
from .intrinsic import OptimizerConfig, apply_channel, certify_zero_cmi, cmi_under_channel, intrinsic_information_upper_bound
from .protocol import ASSUMPTION_CARDINALITY, WITNESS_MID, Check, run_paper_protocol, untrusted_courier_demo
from .quantum import (
    LABELS,
    PAPER_STATES,
    apply_cnot,
    build_paper_state,
    computational_distribution,
    diagonal_is_rational,
    fidelity_with_phi_plus,
    measure_computational,
    partial_transpose_min_eigenvalue,
)

QUANTUM_CHECKS = ("all", "ppt", "cnot-chain", "distill", "diag")
QUANTUM_NOTES = [
    "QUBIT_ORDER: qubits ordered (A, B, C), A is the most significant bit of the basis index",
    "PPT_EVIDENCE: positive partial transpose is necessary, not sufficient, for separability on the "
    "2x4 cut C-AB; separability of the intermediate state across that cut is an external result",
    "EVE_COLUMN: only the (A, B, C) marginal of the classical tables is derived from the quantum state; "
    "Eve's symbols are taken as given",
]
STAGE_FILES = {"initial": "initial.json", "after_alice_cnot": "mid.json", "final": "final.json"}


class Report:
    """Accumulates results, checks and warnings for one command."""

    def __init__(self, command: str, argv: Sequence[str]):
        self.command = command
        self.argv = list(argv)
        self.inputs = hashlib.sha256()
        self.results: dict[str, Any] = {}
        self.checks: list[Check] = []
        self.warnings: list[str] = []
        self.timings: dict[str, float] = {}

    def digest_file(self, path: str | Path):
        self.inputs.update(Path(path).read_bytes())

    def check(self, name: str, passed: bool, value: Any = None) -> bool:
        self.checks.append(Check(name, bool(passed), value))
        return bool(passed)

    def timed(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        self.timings[name] = round(time.perf_counter() - t0, 6)
        return out

    @property
    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict[str, Any]:
        self.inputs.update(json.dumps(self.argv).encode())
        return {
            "tool": "secretdist",
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "inputs_digest": self.inputs.hexdigest(),
            "results": _jsonable(self.results),
            "checks": [_jsonable(c.to_json()) for c in self.checks],
            "warnings": list(self.warnings),
            "timings": self.timings,
        }


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _names(text: str | None) -> list[str]:
    return [n.strip() for n in (text or "").split(",") if n.strip()]


def _bits(value: float) -> str:
    return f"{value:.12f}"


# -- reproduce --------------------------------------------------------------


def _trace_json(trace) -> dict[str, Any]:
    steps = []
    for entry in trace.entries:
        steps.append({
            "step": entry.step.describe(),
            "event_probability": format_rational(entry.probability),
            "distribution": distribution_to_json(entry.distribution),
            "checks": [c.to_json() for c in entry.checks],
        })
    return {
        "initial": distribution_to_json(trace.initial),
        "initial_checks": [c.to_json() for c in trace.initial_checks],
        "steps": steps,
        "witness_channel": channel_to_json(trace.witness) if trace.witness else None,
        "success_probability": format_rational(trace.success_probability),
        "key_bits_per_run": format_rational(trace.success_probability),
        "warnings": list(trace.warnings),
    }


def cmd_reproduce(report: Report, restarts: int = 64, seed: int = 0):
    config = OptimizerConfig(restarts=restarts, seed=seed)
    trace = report.timed("protocol", run_paper_protocol, config)
    kept_checks = trace.entries[-1].checks
    sbit = next(c for c in kept_checks if c.name == "kept_is_perfect_sbit")
    report.results["protocol"] = _trace_json(trace)
    report.results["success_probability"] = format_rational(trace.success_probability)
    report.results["sbit"] = sbit.passed
    report.warnings += trace.warnings
    report.checks += trace.checks

    final = paper_distribution("final")
    bound = report.timed("key_rate_bound", intrinsic_information_upper_bound, final, {"A"}, {"B", "C"}, "E", config)
    rate = float(trace.success_probability)
    report.results["key_rate"] = {
        "protocol_lower_bound_bits": format_rational(trace.success_probability),
        "intrinsic_upper_bound_bits": bound.value,
        "identity_channel_cmi": conditional_mutual_information(final, {"A"}, {"B", "C"}, {"E"}),
    }
    report.check("key_rate_sandwich", rate <= bound.value + 1e-6 and abs(bound.value - 1 / 3) <= 1e-6, bound.value)

    report.results["quantum"] = report.timed("quantum", _quantum_checks, report, "all")
    report.warnings += QUANTUM_NOTES

    demo = report.timed("courier", untrusted_courier_demo)
    report.results["courier"] = {
        "key_uniform": demo.key_uniform,
        "eve_cmi": demo.eve_cmi,
        "charlie_cmi": demo.charlie_cmi,
        "collusion_mi": demo.collusion_mi,
        "distribution": distribution_to_json(demo.distribution),
    }
    report.check("courier_key_uniform", demo.key_uniform)
    report.check("courier_eve_independent", demo.eve_independent_exact and demo.eve_cmi == 0.0, demo.eve_cmi)
    report.check("courier_charlie_independent", demo.charlie_independent_exact and demo.charlie_cmi == 0.0, demo.charlie_cmi)
    report.check("courier_collusion_one_bit", abs(demo.collusion_mi - 1.0) < 1e-12, demo.collusion_mi)


# -- measure ----------------------------------------------------------------


def cmd_measure(report: Report, dist_path: str, measure: str, x: str, y: str | None, given: str | None):
    report.digest_file(dist_path)
    dist = load_distribution(dist_path)
    xs, ys, gs = _names(x), _names(y), _names(given)
    if measure == "entropy":
        value = entropy(dist, xs)
    elif measure == "mi":
        value = mutual_information(dist, xs, ys)
    else:
        value = conditional_mutual_information(dist, xs, ys, gs)
    report.results.update({"measure": measure, "x": xs, "y": ys, "given": gs, "value": value, "value_text": _bits(value)})


# -- intrinsic --------------------------------------------------------------


def cmd_intrinsic(report: Report, dist_path: str, x: str, y: str, eve: str, witness_path: str | None = None,
                  restarts: int = 64, seed: int = 0):
    report.digest_file(dist_path)
    dist = load_distribution(dist_path)
    xs, ys = set(_names(x)), set(_names(y))
    eves = _names(eve)
    if len(eves) != 1:
        raise SecretDistError(f"--eve must name exactly one variable, got {eves}")
    e = eves[0]
    raw = conditional_mutual_information(dist, xs, ys, {e})
    report.results.update({"x": sorted(xs), "y": sorted(ys), "eve": e, "identity_cmi": raw})
    if witness_path:
        report.digest_file(witness_path)
        ch = load_channel(witness_path)
        value = cmi_under_channel(dist, xs, ys, e, ch)
        certified = certify_zero_cmi(apply_channel(dist, e, ch), xs, ys, {e})
        report.results.update({
            "mode": "witness",
            "value": 0.0 if certified else value,
            "value_text": _bits(0.0 if certified else value),
            "channel": channel_to_json(ch),
            "certified_zero": certified,
        })
        return
    config = OptimizerConfig(restarts=restarts, seed=seed)
    res = report.timed("optimizer", intrinsic_information_upper_bound, dist, xs, ys, e, config)
    report.results.update({
        "mode": "optimizer",
        "value": res.value,
        "value_text": _bits(res.value),
        "channel": channel_to_json(res.channel),
        "certified_zero": res.certified_zero,
        "restarts_used": res.restarts_used,
        "deterministic_maps": res.deterministic_maps,
        "converged": res.converged,
        "seed": seed,
    })
    report.warnings.append(ASSUMPTION_CARDINALITY)


# -- quantum ----------------------------------------------------------------


def _quantum_checks(report: Report, which: str) -> dict[str, Any]:
    rho, sigma, tau = (build_paper_state(s) for s in PAPER_STATES)
    states = dict(zip(PAPER_STATES, (rho, sigma, tau)))
    out: dict[str, Any] = {"qubit_order": list(LABELS)}
    run = (lambda name: which in ("all", name))

    if run("diag"):
        diag = {}
        for name, st in states.items():
            eig = st.eigenvalues()
            diag[name] = {
                "trace": float(np.trace(st.matrix).real),
                "min_eigenvalue": float(eig[0]),
                "purity": st.purity(),
                "diagonal": st.diagonal().tolist(),
            }
            report.check(f"{name}_valid_state", abs(diag[name]["trace"] - 1) <= 1e-12 and eig[0] >= -1e-10)
        classical = marginal(paper_distribution("initial"), {"A", "B", "C"})
        quantum = computational_distribution(rho)
        diag["rho_initial_rational_diagonal"] = diagonal_is_rational(rho)
        diag["rho_matches_initial_table"] = quantum.same_table(classical)
        report.check("rho_diagonal_equals_initial_table", diagonal_is_rational(rho) and quantum.same_table(classical))
        out["diag"] = diag

    if run("ppt"):
        cuts = {}
        for name, st in states.items():
            cuts[name] = {q: partial_transpose_min_eigenvalue(st, [q]) for q in LABELS}
        for q in LABELS:
            report.check(f"rho_initial_ppt_{q}", cuts["rho_initial"][q] >= -1e-12, cuts["rho_initial"][q])
        report.check("sigma_mid_ppt_C", cuts["sigma_mid"]["C"] >= -1e-12, cuts["sigma_mid"]["C"])
        out["ppt_min_eigenvalues"] = cuts

    if run("cnot-chain"):
        r1 = float(np.max(np.abs(apply_cnot(rho, "A", "C").matrix - sigma.matrix)))
        r2 = float(np.max(np.abs(apply_cnot(sigma, "B", "C").matrix - tau.matrix)))
        out["cnot_chain"] = {"rho_to_sigma_residual": r1, "sigma_to_tau_residual": r2}
        report.check("cnot_rho_to_sigma", r1 <= 1e-12, r1)
        report.check("cnot_sigma_to_tau", r2 <= 1e-12, r2)

    if run("distill"):
        table = []
        for outcome, p, post in measure_computational(tau, "C"):
            fid = fidelity_with_phi_plus(post)
            table.append({"outcome": outcome, "probability": p, "fidelity_phi_plus": fid,
                          "post_state_purity": post.purity()})
        out["distill"] = table
        zero = next((row for row in table if row["outcome"] == 0), None)
        ok = zero is not None and abs(zero["probability"] - 1 / 3) <= 1e-12
        report.check("distill_probability_one_third", ok, zero and zero["probability"])
        report.check("distill_fidelity_one", zero is not None and abs(zero["fidelity_phi_plus"] - 1) <= 1e-12,
                     zero and zero["fidelity_phi_plus"])
    return out


def cmd_quantum(report: Report, check: str = "all"):
    report.results.update(report.timed("quantum", _quantum_checks, report, check))
    report.warnings += QUANTUM_NOTES


# -- tables -----------------------------------------------------------------


def cmd_tables(report: Report, out_dir: str):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for stage in STAGES:
        path = out / STAGE_FILES[stage]
        dump_distribution(paper_distribution(stage), path)
        written.append(str(path))
    wpath = out / "witness_mid.json"
    dump_channel(WITNESS_MID, wpath)
    written.append(str(wpath))
    report.results["written"] = written


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secretdist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_out(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        return p

    p = with_out(sub.add_parser("reproduce", help="run the protocol, quantum and courier checks"))
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = with_out(sub.add_parser("measure", help="entropy / mutual information / conditional mutual information"))
    p.add_argument("--dist", required=True)
    p.add_argument("--measure", choices=("entropy", "mi", "cmi"), required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y")
    p.add_argument("--given")

    p = with_out(sub.add_parser("intrinsic", help="intrinsic information upper bound or witness certification"))
    p.add_argument("--dist", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--eve", required=True)
    p.add_argument("--witness")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = with_out(sub.add_parser("quantum", help="density-matrix checks"))
    p.add_argument("--check", choices=QUANTUM_CHECKS, default="all")

    p = with_out(sub.add_parser("tables", help="write the example distribution and witness files"))
    p.add_argument("--out-dir", required=True)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[dict[str, Any], int]:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    report = Report(args.command, argv)
    if args.command == "reproduce":
        cmd_reproduce(report, args.restarts, args.seed)
    elif args.command == "measure":
        cmd_measure(report, args.dist, args.measure, args.x, args.y, args.given)
    elif args.command == "intrinsic":
        cmd_intrinsic(report, args.dist, args.x, args.y, args.eve, args.witness, args.restarts, args.seed)
    elif args.command == "quantum":
        cmd_quantum(report, args.check)
    else:
        cmd_tables(report, args.out_dir)
    doc = report.to_json()
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return doc, (1 if report.failed else 0)


def _summary(doc: dict[str, Any]) -> str:
    lines = [f"secretdist {doc['command']}"]
    res = doc["results"]
    if "value_text" in res:
        lines.append(f"  value = {res['value_text']} bits" + ("  (certified zero)" if res.get("certified_zero") else ""))
    if "success_probability" in res:
        lines.append(f"  success probability = {res['success_probability']}, sbit = {res['sbit']}")
    failed = [c["name"] for c in doc["checks"] if not c["passed"]]
    lines.append(f"  checks: {len(doc['checks']) - len(failed)} passed, {len(failed)} failed")
    if failed:
        lines.append(f"  first failed check: {failed[0]}")
    for w in doc["warnings"]:
        lines.append(f"  WARN {w.split(':', 1)[0]}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        doc, status = run(argv)
    except InternalCheckFailed as exc:
        print(f"secretdist: {exc}", file=sys.stderr)
        return 1
    except (SecretDistError, OSError) as exc:
        print(f"secretdist: error: {exc}", file=sys.stderr)
        return 2
    print(_summary(doc), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
