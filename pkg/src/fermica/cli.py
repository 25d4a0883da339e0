"""Command-line front end.

Exit codes: 0 success, 1 refusal (invalid rule, index obstruction, no family),
2 bad input (unreadable files, malformed expressions or flags).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .circuits import FDFC, CircuitError, NotEquivalent, conjugate, equivalence_witness, synthesize
from .classify import ClassificationError, classify
from .fca import Automaton, Custom, validate_local_rule
from .graded_algebra import CellWindow, WindowError, X, Y
from .support import DegenerateDecompositionError, IndexInconsistencyError, IndexValue, compute_index

REPORT_SCHEMA = "fermica.report/1"


class Refusal(Exception):
    """Domain refusal; carries the result payload to report."""

    def __init__(self, message, result=None, index=None):
        super().__init__(message)
        self.result = result or {}
        self.index = index


def _source(args, path=None, builtin=None):
    """``(automaton, rule, digest input)`` from a rule file or a builtin ``name[:params]``."""
    if path is not None:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise io.InputError(f"cannot read {path}: {exc.strerror}") from None
        try:
            rule = io.load_rule(raw.decode())
        except UnicodeDecodeError:
            raise io.InputError(f"{path} is not text") from None
        return Custom(rule), rule, raw
    name, _, params = builtin.partition(":")
    text = params or (getattr(args, "params", None) or "")
    aut = io.builtin(name, io.parse_params(text))
    return aut, aut.rule, f"builtin:{name}:{text}".encode()


def _sources(args, want: int) -> list:
    paths = list(getattr(args, "paths", None) or [])
    builtins = list(args.builtin or [])
    out = [_source(args, path=p) for p in paths] + [_source(args, builtin=b) for b in builtins]
    args.inputs = [raw for _, _, raw in out]
    if len(out) != want:
        raise io.InputError(f"expected {want} rule(s) from paths or --builtin, got {len(out)}")
    return out


def _require_valid(rule, tol):
    report = validate_local_rule(rule, tol)
    if not report.valid:
        raise Refusal(
            "rule is not a valid automaton: " + ", ".join(report.conditions()),
            {"valid": False, "violations": [{"condition": v.condition, "detail": v.detail} for v in report.violations]},
        )


def _index_dict(index: IndexValue | None):
    if index is None:
        return None
    num, den = index.reduced()
    return {"log2_num": num, "log2_den": den}


def _index_text(index: IndexValue) -> str:
    return f"ind = {index} = {index.value:.12g}"


# commands ---------------------------------------------------------------------
def cmd_validate(args):
    (aut, rule, raw), = _sources(args, 1)
    _require_valid(rule, args.tolerance)
    return {"valid": True, "violations": []}, None, [raw], "rule is valid"


def cmd_index(args):
    (aut, rule, raw), = _sources(args, 1)
    _require_valid(rule, args.tolerance)
    index = compute_index(aut)
    num, den = index.reduced()
    result = {"index": str(index), "value": index.value, "log2": f"{num}/{den}" if den != 1 else str(num)}
    return result, index, [raw], _index_text(index)


def cmd_classify(args):
    (aut, rule, raw), = _sources(args, 1)
    _require_valid(rule, args.tolerance)
    cls = classify(aut, tol=max(args.tolerance, 1e-12), check=False)
    normal = cls.to_automaton().rule
    result = cls.to_dict()
    result["normal_form"] = io.rule_to_dict(normal)
    text = f"{cls.family}\n{cls.summary()}\n{_index_text(cls.index)}\nnormal form:\n{io.dump_rule(normal)}"
    return result, cls.index, [raw], text


def _verify(circuit: FDFC, aut: Automaton, tol: float):
    for c in (0, 1):
        for g in (X(c), Y(c)):
            if not conjugate(circuit, g).allclose(aut.apply(g), tol):
                raise CircuitError("synthesized circuit does not reproduce the automaton")


def _emit_circuit(args, circuit: FDFC, rule):
    data = io.circuit_to_dict(circuit, rule)
    if args.output:
        Path(args.output).write_text(json.dumps(data, indent=2))
    return data


def cmd_synthesize(args):
    (aut, rule, raw), = _sources(args, 1)
    _require_valid(rule, args.tolerance)
    index = compute_index(aut)
    if index != IndexValue(0):
        raise Refusal(
            f"index {index}: a QCA is implementable by a circuit if and only if its index is equal to one",
            {"refused": "index"},
            index,
        )
    cls = classify(aut, tol=max(args.tolerance, 1e-12), check=False)
    circuit = synthesize(cls)
    _verify(circuit, aut, max(args.tolerance, 1e-10))
    data = _emit_circuit(args, circuit, rule)
    result = {"family": cls.family, "depth": circuit.depth, "circuit": data}
    text = json.dumps(data, indent=2) if not args.output else f"{cls.summary()}: depth-{circuit.depth} circuit written to {args.output}"
    return result, index, [raw], text


def cmd_evolve(args):
    (aut, rule, raw), = _sources(args, 1)
    _require_valid(rule, args.tolerance)
    op = io.parse_operator(args.op)
    if args.steps < 0:
        raise io.InputError("steps must be non-negative")
    nb = aut.neighbourhood
    if args.window:
        window = io.parse_window(args.window)
    else:
        cells = op.support or {0}
        window = CellWindow(min(cells) + args.steps * min(nb), max(cells) + args.steps * max(nb))
    for _ in range(args.steps):
        op = aut.apply(op, window).chop()
    text = repr(op)
    result = {"operator": text, "terms": io._terms_to_list(op), "window": [window.lo, window.hi]}
    return result, None, [raw, args.op, args.steps], text


def cmd_equivalence(args):
    (t, rt, raw_t), (s, rs, raw_s) = _sources(args, 2)
    _require_valid(rt, args.tolerance)
    _require_valid(rs, args.tolerance)
    found = equivalence_witness(t, s, max(args.tolerance, 1e-10))
    if isinstance(found, NotEquivalent):
        raise Refusal(
            f"not equivalent: ind(A)/ind(B) = {found.ratio}",
            {"equivalent": False, "ratio": _index_dict(found.ratio), "index_a": str(found.index_t), "index_b": str(found.index_s)},
            found.ratio,
        )
    data = _emit_circuit(args, found, None)
    text = json.dumps(data, indent=2) if not args.output else f"depth-{found.depth} witness written to {args.output}"
    return {"equivalent": True, "depth": found.depth, "circuit": data}, IndexValue(0), [raw_t, raw_s], text


COMMANDS = {
    "validate": cmd_validate,
    "index": cmd_index,
    "classify": cmd_classify,
    "synthesize": cmd_synthesize,
    "evolve": cmd_evolve,
    "equivalence": cmd_equivalence,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--builtin", action="append", metavar="NAME[:PARAMS]", help=f"built-in rule: {', '.join(io.BUILTINS)}")
    common.add_argument("--params", help="parameters for --builtin, e.g. theta=0.3,n=1")
    common.add_argument("--json", action="store_true", help="print a machine-readable report")
    common.add_argument("--tolerance", type=float, default=1e-10)
    common.add_argument("--window", help="cell window lo..hi")

    p = argparse.ArgumentParser(prog="fermica", description="Fermionic cellular automata on a one-mode chain.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, nargs in (("validate", "?"), ("index", "?"), ("classify", "?"), ("synthesize", "?"), ("evolve", "?"), ("equivalence", "*")):
        sp = sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))
        sp.add_argument("paths", nargs=nargs, metavar="RULE.json")
        if name in ("synthesize", "equivalence"):
            sp.add_argument("-o", "--output", help="write the circuit file here")
        if name == "evolve":
            sp.add_argument("--op", required=True, help="operator expression, e.g. 'X(0) Y(1) + 0.5i Z(2)'")
            sp.add_argument("--steps", type=int, default=1)
    return p


def _envelope(command, inputs, result, index, diagnostics):
    return {
        "schema": REPORT_SCHEMA,
        "command": command,
        "inputs_digest": io.digest(*inputs),
        "result": result,
        "index": _index_dict(index),
        "diagnostics": diagnostics,
    }


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command != "equivalence" and args.paths is not None and not isinstance(args.paths, list):
        args.paths = [args.paths]
    args.inputs = []
    try:
        result, index, inputs, text = COMMANDS[args.command](args)
    except (io.InputError, WindowError) as exc:
        return _fail(args, 2, str(exc), {}, None, args.inputs)
    except Refusal as exc:
        return _fail(args, 1, str(exc), exc.result, exc.index, args.inputs)
    except (ClassificationError, CircuitError, IndexInconsistencyError, DegenerateDecompositionError) as exc:
        return _fail(args, 1, str(exc), {}, None, args.inputs)
    if args.json:
        print(json.dumps(_envelope(args.command, inputs, result, index, []), indent=2))
    else:
        print(text)
    return 0


def _fail(args, code, message, result, index, inputs):
    if args.json:
        print(json.dumps(_envelope(args.command, inputs, result, index, [message]), indent=2))
    else:
        if result.get("violations"):
            for v in result["violations"]:
                print(f"{v['condition']}: {v['detail']}")
        print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
