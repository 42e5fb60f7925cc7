"""``carlock`` command-line interface.

Every subcommand emits either readable text or a JSON report of the form
``{"command": ..., "config": {...}, "result": {...}, "pass": bool}``.
Exit status is 0 on success, 1 when a built-in check fails and 2 for usage,
parse or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np

from carlock import fock, locality, parity, verification
from carlock.expr import (
    OperatorExpr,
    anticommutator,
    commutator,
    even_odd_split,
    format_expr,
    normal_order,
    parity_of,
    support,
)
from carlock.fock import MAX_MODES
from carlock.parsing import ExprSyntaxError, parse_expr

log = logging.getLogger("carlock")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    n_modes: int | None = None
    tol: float = 1e-10
    cluster_tol: float = 1e-8
    seed: int = 42
    output: str = "text"

    def __post_init__(self):
        if self.n_modes is not None and not 1 <= self.n_modes <= MAX_MODES:
            raise ValueError(f"--modes must be in [1, {MAX_MODES}]")
        if self.tol <= 0 or self.cluster_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.output not in ("text", "json"):
            raise ValueError("--output must be 'text' or 'json'")


class UsageError(Exception):
    pass


def report_schema() -> dict:
    return json.loads(resources.files("carlock").joinpath("report.schema.json").read_text())


def to_jsonable(obj):
    """Convert reports to JSON-ready data; complex values become ``{"re", "im"}``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, OperatorExpr):
        return format_expr(obj)
    return obj


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}" if z.imag == 0 else f"{z.real:.12g}{z.imag:+.12g}i"


def _fmt_matrix(m: np.ndarray) -> str:
    return "\n".join("  ".join(f"{_fmt_complex(z):>18}" for z in row) for row in m)


# ------------------------------------------------------------------ helpers

def _expr(text: str) -> OperatorExpr:
    return parse_expr(text)


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this command")
    return value


def _modes_for(cfg: RunConfig, *exprs: OperatorExpr) -> int:
    if cfg.n_modes is not None:
        return cfg.n_modes
    return max((max(support(e), default=1) for e in exprs), default=1)


def _load_state(args, cfg: RunConfig) -> fock.StateVector:
    state = fock.load_state(_require(args.state, "--state"))
    if cfg.n_modes is not None and cfg.n_modes != state.n_modes:
        raise UsageError(f"--modes {cfg.n_modes} does not match the state's {state.n_modes} modes")
    return state


def _partition(args, n_modes: int) -> locality.ModePartition:
    return locality.ModePartition.parse(_require(args.partition, "--partition"), n_modes)


# ----------------------------------------------------------------- commands

def cmd_parse(args, cfg):
    e = _expr(args.expr)
    terms = [
        {"coeff": t.coeff, "factors": [str(op) for op in t.factors]} for t in e.terms
    ]
    return {"expression": format_expr(e), "terms": terms}, True, format_expr(e)


def cmd_normal_order(args, cfg):
    e = normal_order(_expr(args.expr))
    return {"input": args.expr, "normal_ordered": format_expr(e)}, True, format_expr(e)


def cmd_parity(args, cfg):
    e = normal_order(_expr(args.expr))
    even, odd = even_odd_split(e)
    result = {
        "expression": format_expr(e),
        "parity": parity_of(e).value,
        "even_part": format_expr(even),
        "odd_part": format_expr(odd),
        "ssr_allowed": parity.operator_ssr_allowed(e),
    }
    text = f"{result['parity']}\neven part: {result['even_part']}\nodd part:  {result['odd_part']}"
    return result, True, text


def _bracket(args, cfg, kind: str):
    e1, e2 = normal_order(_expr(args.expr1)), normal_order(_expr(args.expr2))
    value = commutator(e1, e2) if kind == "commutator" else anticommutator(e1, e2)
    result = {"left": format_expr(e1), "right": format_expr(e2), kind: format_expr(value)}
    text = format_expr(value)
    if not (support(e1) & support(e2)):
        check = locality.disjoint_commutation_check(e1, e2, _modes_for(cfg, e1, e2), cfg.tol)
        result["disjoint_check"] = check.to_dict()
        text += f"\ndisjoint supports: {check.relation} (graded rule holds: {check.theorem_holds})"
        return result, check.theorem_holds and check.symbolic_agrees, text
    return result, True, text


def cmd_commutator(args, cfg):
    return _bracket(args, cfg, "commutator")


def cmd_anticommutator(args, cfg):
    return _bracket(args, cfg, "anticommutator")


def cmd_matrix(args, cfg):
    e = _expr(args.expr)
    n = _modes_for(cfg, e)
    m = fock.jw_matrix(e, n)
    return {"expression": format_expr(e), "n_modes": n, "matrix": m}, True, _fmt_matrix(m)


def cmd_expectation(args, cfg):
    state = _load_state(args, cfg)
    e = _expr(args.expr)
    value = fock.expectation(state, e)
    return {"expression": format_expr(e), "value": value}, True, _fmt_complex(value)


def cmd_reduce(args, cfg):
    state = _load_state(args, cfg)
    text = _require(args.partition, "--partition")
    modes = {int(tok) for tok in text.split("|")[0].split(",") if tok.strip()}
    full = locality.reduced_state(state, modes)
    restricted = locality.reduced_state(state, modes, parity_restricted=True)
    result = {"unrestricted": full.to_dict(), "parity_restricted": restricted.to_dict()}
    lines = [
        f"reduced state on modes {sorted(modes)} (unrestricted, psd={full.psd}):",
        _fmt_matrix(full.matrix),
        f"reduced state on modes {sorted(modes)} (even operators only, psd={restricted.psd}):",
        _fmt_matrix(restricted.matrix),
    ]
    return result, True, "\n".join(lines)


def cmd_ssr_check(args, cfg):
    report = parity.state_ssr_check(_load_state(args, cfg), cfg.tol)
    text = f"compliant: {report.compliant}\ncoherence norm: {report.coherence_norm:.12g}"
    return report.to_dict(), report.compliant, text


def cmd_signal(args, cfg):
    state = _load_state(args, cfg)
    op_b = _expr(args.expr)
    report = locality.signalling_deviation(state, op_b, _partition(args, state.n_modes), cfg.tol)
    text = (
        f"signalling detected: {report.signalling_detected}\n"
        f"max deviation: {report.max_deviation:.12g}\n"
        f"reduced-state trace distance: {report.reduced_state_trace_distance:.12g}"
    )
    return report.to_dict(), True, text


def cmd_witness(args, cfg):
    o_a = _expr(_require(args.oa, "--oa"))
    o_b = _expr(_require(args.ob, "--ob"))
    n = _modes_for(cfg, o_a, o_b)
    report = locality.build_witness(o_a, o_b, n, cfg.cluster_tol)
    ok = report.dist_before.probability(report.eigenspace_value, cfg.cluster_tol) >= 1 - 1e-10
    ok = ok and (report.tv_distance > 0) == report.witness_found
    result = report.to_dict()
    result["n_modes"] = n
    text = (
        f"witness found: {report.witness_found}\n"
        f"commutator norm: {report.commutator_norm:.12g}\n"
        f"eigenspace value: {report.eigenspace_value:.12g}\n"
        f"before: {report.dist_before.nonzero()}\n"
        f"after:  {report.dist_after.nonzero()}\n"
        f"tv_distance: {report.tv_distance:.12g}"
    )
    return result, ok, text


def cmd_derive_ssr(args, cfg):
    partition = locality.ModePartition.parse(_require(args.partition, "--partition"), cfg.n_modes)
    report = locality.ssr_derivation_report(partition)
    text = (
        f"odd-odd pairs failing to commute: {len(report.flagged_pairs)}\n"
        f"pairs involving an even generator that commute: {report.commuting_pairs}\n"
        f"{report.conclusion}"
    )
    return report.to_dict(), report.holds, text


def cmd_paper_example(args, cfg):
    try:
        report = locality.paper_example()
    except AssertionError as exc:
        return {"error": str(exc)}, False, str(exc)
    result = {
        "before": report.probe_before.real,
        "after": report.probe_after.real,
        "deviation": report.max_deviation,
        "report": report.to_dict(),
    }
    text = (
        f"<{report.probe}> before: {_fmt_complex(report.probe_before)}\n"
        f"<{report.probe}> after:  {_fmt_complex(report.probe_after)}\n"
        f"max deviation: {report.max_deviation:.12g}\n"
        f"reduced-state trace distance: {report.reduced_state_trace_distance:.12g}"
    )
    return result, True, text


def cmd_verify(args, cfg):
    results = verification.run_all(cfg.n_modes or 6, cfg.seed)
    checks = [r.to_dict() for r in results]
    ok = all(c["pass"] for c in checks)
    text = "\n".join(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['criterion']}. {c['name']}" for c in checks)
    return {"checks": checks}, ok, text


COMMANDS = {
    "parse": (cmd_parse, ["expr"], "parse an expression without reordering"),
    "normal-order": (cmd_normal_order, ["expr"], "print the canonical normal-ordered form"),
    "parity": (cmd_parity, ["expr"], "classify an expression as even, odd or mixed"),
    "commutator": (cmd_commutator, ["expr1", "expr2"], "symbolic commutator"),
    "anticommutator": (cmd_anticommutator, ["expr1", "expr2"], "symbolic anticommutator"),
    "matrix": (cmd_matrix, ["expr"], "Jordan-Wigner matrix of an expression"),
    "expectation": (cmd_expectation, ["expr"], "expectation value in a state file"),
    "reduce": (cmd_reduce, [], "reduced state on the A side of --partition"),
    "ssr-check": (cmd_ssr_check, [], "check a state for even/odd coherence"),
    "signal": (cmd_signal, ["expr"], "apply a B-side unitary and report A-side changes"),
    "witness": (cmd_witness, [], "construct a signalling witness for --oa/--ob"),
    "derive-ssr": (cmd_derive_ssr, [], "enumerate the commutation pattern across --partition"),
    "paper-example": (cmd_paper_example, [], "reproduce the two-mode signalling example"),
    "verify": (cmd_verify, [], "run the full self-check suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modes", type=int, default=None, help="number of modes")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--cluster-tol", type=float, default=1e-8)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--state", default=None, help="state JSON file")
    common.add_argument("--partition", default=None, help='mode partition, e.g. "1,2|3,4"')
    common.add_argument("-v", "--verbose", action="store_true", help="diagnostics on stderr")

    parser = argparse.ArgumentParser(prog="carlock", description="Fermionic mode algebra and no-signalling checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, positionals, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        for pos in positionals:
            p.add_argument(pos)
        if name == "witness":
            p.add_argument("--oa", default=None, help="observable of A")
            p.add_argument("--ob", default=None, help="observable of B")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = RunConfig(args.modes, args.tol, args.cluster_tol, args.seed, args.output)
        handler = COMMANDS[args.command][0]
        result, ok, text = handler(args, cfg)
    except (ExprSyntaxError, UsageError, ValueError, OSError) as exc:
        print(f"carlock {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.output == "json":
        report = {"command": args.command, "config": asdict(cfg), "result": result, "pass": ok}
        print(json.dumps(to_jsonable(report), indent=2, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())
