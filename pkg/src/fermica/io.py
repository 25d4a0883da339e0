"""Text formats: rule files, circuit files and operator expressions."""
from __future__ import annotations

import hashlib
import json
import math
import re

import numpy as np

from .circuits import FDFC, CircuitError, Gate, Layer, conjugate
from .fca import (
    Automaton,
    Conjugation,
    ControlledPhase,
    Custom,
    Forking,
    LocalRule,
    MajoranaShift,
    Shift,
)
from .graded_algebra import CellWindow, GradedOperator, X, Y, Z, from_jw_matrix, identity, jw_matrix, relabel_cells

__all__ = [
    "SCHEMA_VERSION",
    "InputError",
    "rule_to_dict",
    "rule_from_dict",
    "dump_rule",
    "load_rule",
    "circuit_to_dict",
    "circuit_from_dict",
    "BUILTINS",
    "builtin",
    "parse_params",
    "parse_operator",
    "parse_window",
    "digest",
]

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed user input (files, expressions, flags)."""


# rules -----------------------------------------------------------------------------
def _terms_to_list(op: GradedOperator) -> list:
    return [
        {"coeff_re": float(c.real), "coeff_im": float(c.imag), "modes": list(modes)}
        for modes, c in sorted(op.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]


def _terms_from_list(items) -> GradedOperator:
    if not isinstance(items, list):
        raise InputError("operator images must be lists of terms")
    terms = {}
    for t in items:
        try:
            c = complex(float(t["coeff_re"]), float(t["coeff_im"]))
            modes = tuple(int(m) for m in t["modes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad term {t!r}: {exc}") from None
        if len(set(modes)) != len(modes):
            raise InputError(f"repeated mode in term {t!r}")
        op = GradedOperator({modes: c})
        for k, v in op.items():
            terms[k] = terms.get(k, 0j) + v
    return GradedOperator({k: v for k, v in terms.items() if v != 0})


def rule_to_dict(rule: LocalRule) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "neighbourhood": list(rule.neighbourhood),
        "image_x": _terms_to_list(rule.image_x),
        "image_y": _terms_to_list(rule.image_y),
    }


def rule_from_dict(data) -> LocalRule:
    if not isinstance(data, dict):
        raise InputError("rule file must hold a JSON object")
    for key in ("neighbourhood", "image_x", "image_y"):
        if key not in data:
            raise InputError(f"rule file lacks {key!r}")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {data.get('schema_version')!r}")
    try:
        nb = tuple(int(c) for c in data["neighbourhood"])
    except (TypeError, ValueError):
        raise InputError("neighbourhood must be a list of integers") from None
    if not nb:
        raise InputError("neighbourhood must be non-empty")
    return LocalRule(_terms_from_list(data["image_x"]), _terms_from_list(data["image_y"]), nb)


def dump_rule(rule: LocalRule) -> str:
    return json.dumps(rule_to_dict(rule), indent=2)


def load_rule(text: str) -> LocalRule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from None
    return rule_from_dict(data)


# circuits ----------------------------------------------------------------------------
def _matrix_to_list(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _gate_to_dict(g: Gate) -> dict:
    cells = list(g.cells)
    local = relabel_cells(g.unitary, {c: i for i, c in enumerate(cells)})
    return {"cells": cells, "matrix": _matrix_to_list(jw_matrix(local, CellWindow(0, len(cells) - 1)))}


def _gate_from_dict(d) -> Gate:
    try:
        cells = [int(c) for c in d["cells"]]
        m = np.array([[complex(re_, im) for re_, im in row] for row in d["matrix"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad gate entry: {exc}") from None
    w = CellWindow(0, len(cells) - 1)
    if m.shape != (2 ** len(cells),) * 2:
        raise InputError(f"gate on {len(cells)} cells needs a {2 ** len(cells)}-dimensional matrix")
    local = from_jw_matrix(m, w, tol=1e-14)
    try:
        return Gate(relabel_cells(local, dict(enumerate(cells))), tuple(cells))
    except CircuitError as exc:
        raise InputError(f"bad gate: {exc}") from None


def circuit_to_dict(c: FDFC, rule: LocalRule | None = None) -> dict:
    layers = []
    for layer in c.layers:
        if layer.periodic:
            layers.append({"template": _gate_to_dict(layer.template), "offset": layer.offset, "period": layer.period})
        else:
            layers.append({"gates": [_gate_to_dict(g) for g in layer.gates]})
    out = {"schema_version": SCHEMA_VERSION, "kind": "fdfc", "depth": c.depth, "layers": layers}
    if rule is not None:
        out["implements"] = rule_to_dict(rule)
    return out


def circuit_from_dict(data, verify: bool = True, tol: float = 1e-10) -> FDFC:
    """Rebuild a circuit; with ``verify`` it must reproduce the embedded rule."""
    if not isinstance(data, dict) or data.get("kind") != "fdfc":
        raise InputError("not a circuit file")
    layers = []
    for entry in data.get("layers", []):
        if "template" in entry:
            layers.append(Layer(template=_gate_from_dict(entry["template"]), offset=int(entry["offset"]), period=int(entry["period"])))
        else:
            layers.append(Layer(tuple(_gate_from_dict(g) for g in entry.get("gates", []))))
    c = FDFC(tuple(layers))
    if verify and "implements" in data:
        rule = rule_from_dict(data["implements"])
        aut = Custom(rule)
        for cell in (0, 1):
            for g in (X(cell), Y(cell)):
                if not conjugate(c, g).allclose(aut.apply(g), tol):
                    raise CircuitError("circuit does not reproduce the rule it claims to implement")
    return c


# built-ins and small grammars ------------------------------------------------------------
BUILTINS = {
    "identity": (lambda: Shift(0), ()),
    "shift-plus": (lambda: Shift(1), ()),
    "shift-minus": (lambda: Shift(-1), ()),
    "majorana-shift-plus": (lambda: MajoranaShift(1), ()),
    "majorana-shift-minus": (lambda: MajoranaShift(-1), ()),
    "conjugation": (lambda theta=0.0, n=0: Conjugation(theta, n), ("theta", "n")),
    "controlled-phase": (lambda phi=1.0, theta=0.0, n=0: ControlledPhase(phi, theta, n), ("phi", "theta", "n")),
    "forking": (lambda theta=0.0, n=0: Forking(theta, n), ("theta", "n")),
}


def parse_params(text: str | None) -> dict:
    """``"theta=0.3,n=1"`` -> ``{"theta": 0.3, "n": 1}``; ``pi`` is understood."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise InputError(f"parameter {part!r} is not of the form name=value")
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            val = float(eval(v, {"__builtins__": {}}, {"pi": math.pi}))  # noqa: S307 - arithmetic on pi only
        except Exception:
            raise InputError(f"cannot read value {v!r}") from None
        out[k] = int(val) if k == "n" else val
    return out


def builtin(name: str, params: dict | None = None) -> Automaton:
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    factory, names = BUILTINS[name]
    params = params or {}
    extra = set(params) - set(names)
    if extra:
        raise InputError(f"builtin {name!r} takes no parameter(s) {sorted(extra)}")
    if "n" in params and params["n"] not in (0, 1):
        raise InputError("n must be 0 or 1")
    return factory(**params)


def parse_window(text: str) -> CellWindow:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text or "")
    if not m:
        raise InputError(f"window {text!r} is not of the form lo..hi")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise InputError("window needs lo <= hi")
    return CellWindow(lo, hi)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)|(?P<gen>[XYZ])\s*\(\s*(?P<cell>-?\d+)\s*\)"
    r"|(?P<id>I\b)|(?P<imag>[ij]\b)|(?P<op>[+\-*()]))"
)


def _tokens(text: str) -> list:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot parse operator near {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("num"):
            s = m.group("num")
            out.append(("val", complex(s.replace("i", "j")) if s[-1] in "ij" else float(s)))
        elif m.group("gen"):
            out.append(("val", {"X": X, "Y": Y, "Z": Z}[m.group("gen")](int(m.group("cell")))))
        elif m.group("id"):
            out.append(("val", identity()))
        elif m.group("imag"):
            out.append(("val", 1j))
        else:
            out.append(("op", m.group("op")))
    return out


def parse_operator(text: str) -> GradedOperator:
    """Read ``X(c)``, ``Y(c)``, ``Z(c)``, ``I``, complex scalars, products, sums and brackets."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def expr():
        nonlocal pos
        sign = 1
        if peek() == ("op", "-"):
            pos += 1
            sign = -1
        elif peek() == ("op", "+"):
            pos += 1
        acc = sign * term()
        while peek() in (("op", "+"), ("op", "-")):
            s = 1 if toks[pos][1] == "+" else -1
            pos += 1
            acc = acc + s * term()
        return acc

    def term():
        nonlocal pos
        acc = factor()
        while True:
            kind, val = peek()
            if (kind, val) == ("op", "*"):
                pos += 1
                acc = acc * factor()
            elif kind == "val" or (kind, val) == ("op", "("):
                acc = acc * factor()
            else:
                return acc

    def factor():
        nonlocal pos
        kind, val = peek()
        if kind == "val":
            pos += 1
            return val
        if (kind, val) == ("op", "("):
            pos += 1
            inner = expr()
            if peek() != ("op", ")"):
                raise InputError("unbalanced brackets in operator expression")
            pos += 1
            return inner
        raise InputError(f"unexpected token {val!r} in operator expression")

    if not toks:
        raise InputError("empty operator expression")
    result = expr()
    if pos != len(toks):
        raise InputError(f"trailing input in operator expression: {toks[pos][1]!r}")
    if not isinstance(result, GradedOperator):
        result = complex(result) * identity()
    return result


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p if isinstance(p, bytes) else str(p).encode())
        h.update(b"\0")
    return h.hexdigest()
