"""Text format for circuits (a cQASM-flavoured assembly).

Grammar, one instruction per line::

    version 1.0
    qubits 3
    h q[0]                      # one gate per line is a singleton bundle
    cnot q[0], q[1]
    rz q[2], -pi/4              # angles: decimal radians or k*pi/d
    { x q[0] | rx q[1], 0.25 }  # explicit parallel bundle

Opcodes are case-insensitive. ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .ir import Bundle, Circuit, Gate, Opcode

_OPCODES = {op.value: op for op in Opcode}
_OPCODES.update({"measure_z": Opcode.MEASURE_Z, "prep": Opcode.PREP_Z, "cx": Opcode.CNOT})

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_QUBIT = re.compile(r"q\s*\[(.*)\]\Z", re.S)
_UINT = re.compile(r"\d+\Z")
_FLOAT = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")
_PI = re.compile(
    r"(?P<sign>[+-])?\s*(?:(?P<coef>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*\*\s*)?"
    r"pi(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?\Z",
    re.I,
)
_PI_DENOMINATORS = (1, 2, 3, 4, 6, 8, 12, 16, 32, 64)


class SourceError(ValueError):
    """Parse failure located at a 1-based ``line`` and ``column``."""

    KINDS = (
        "UNKNOWN_OPCODE",
        "BAD_ARITY",
        "INDEX_OUT_OF_RANGE",
        "DUPLICATE_QUBIT_IN_BUNDLE",
        "MALFORMED_NUMBER",
        "MISSING_HEADER",
        "SYNTAX",
    )

    def __init__(self, kind: str, line: int, column: int, message: str):
        assert kind in self.KINDS
        super().__init__(f"{line}:{column}: {kind}: {message}")
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message

    def to_dict(self) -> dict:
        return {"kind": self.kind, "line": self.line, "column": self.column, "message": self.message}


@dataclass
class _Span:
    text: str
    col: int  # 1-based column of text[0]

    def strip(self) -> _Span:
        lead = len(self.text) - len(self.text.lstrip())
        return _Span(self.text.strip(), self.col + lead)

    def split(self, sep: str) -> list[_Span]:
        parts, col = [], self.col
        for piece in self.text.split(sep):
            parts.append(_Span(piece, col))
            col += len(piece) + len(sep)
        return parts


def parse_angle(text: str) -> float:
    """Parse ``0.5``, ``-pi/2``, ``3*pi/4`` style angles. Raises ValueError."""
    text = text.strip()
    if _FLOAT.match(text):
        value = float(text)
    else:
        m = _PI.match(text)
        if not m:
            raise ValueError(f"malformed angle {text!r}")
        value = float(m["coef"]) * math.pi if m["coef"] else math.pi
        if m["den"]:
            den = float(m["den"])
            if den == 0:
                raise ValueError("zero denominator")
            value = value / den
        if m["sign"] == "-":
            value = -value
    if not math.isfinite(value):
        raise ValueError(f"non-finite angle {text!r}")
    return value


def format_angle(angle: float) -> str:
    """Inverse of :func:`parse_angle`; uses ``k*pi/d`` only when it is bit-exact."""
    if angle != 0.0 and abs(angle) <= 64 * math.pi:
        for den in _PI_DENOMINATORS:
            k = round(angle * den / math.pi)
            if k != 0 and abs(k) <= 64 * den and (k * math.pi) / den == angle:
                body = "pi" if abs(k) == 1 else f"{abs(k)}*pi"
                if den != 1:
                    body += f"/{den}"
                return ("-" if k < 0 else "") + body
    return repr(float(angle))


def _parse_gate(span: _Span, lineno: int, num_qubits: int) -> Gate:
    span = span.strip()
    if not span.text:
        raise SourceError("SYNTAX", lineno, span.col, "empty instruction")
    m = _IDENT.match(span.text)
    if not m:
        raise SourceError("SYNTAX", lineno, span.col, f"expected an opcode, found {span.text[:12]!r}")
    name = m.group(0)
    op = _OPCODES.get(name.lower())
    if op is None:
        raise SourceError("UNKNOWN_OPCODE", lineno, span.col, f"unknown opcode {name!r}")
    rest = _Span(span.text[m.end():], span.col + m.end())
    if rest.text and not rest.text[0].isspace():
        raise SourceError("SYNTAX", lineno, rest.col, f"unexpected {rest.text[0]!r} after opcode")

    qubits: list[int] = []
    angle = None
    angle_col = None
    operands = rest.split(",") if rest.text.strip() else []
    for operand in operands:
        operand = operand.strip()
        if not operand.text:
            raise SourceError("SYNTAX", lineno, operand.col, "empty operand")
        qm = _QUBIT.match(operand.text)
        if qm:
            if angle is not None:
                raise SourceError("SYNTAX", lineno, operand.col, "qubit operand after the angle")
            inner = qm.group(1).strip()
            if not _UINT.match(inner):
                raise SourceError("MALFORMED_NUMBER", lineno, operand.col, f"bad qubit index {inner!r}")
            q = int(inner)
            if q >= num_qubits:
                raise SourceError(
                    "INDEX_OUT_OF_RANGE", lineno, operand.col, f"qubit {q} out of range (qubits {num_qubits})"
                )
            if q in qubits:
                raise SourceError("DUPLICATE_QUBIT_IN_BUNDLE", lineno, operand.col, f"qubit {q} repeated in gate")
            qubits.append(q)
        else:
            if angle is not None:
                raise SourceError("BAD_ARITY", lineno, operand.col, "more than one angle")
            try:
                angle = parse_angle(operand.text)
            except ValueError:
                if operand.text.lower().startswith("q"):
                    raise SourceError("SYNTAX", lineno, operand.col, f"malformed qubit operand {operand.text!r}")
                raise SourceError("MALFORMED_NUMBER", lineno, operand.col, f"malformed angle {operand.text!r}")
            angle_col = operand.col

    arity = op.arity
    if (arity is None and not qubits) or (arity is not None and len(qubits) != arity):
        want = "at least 1" if arity is None else str(arity)
        raise SourceError("BAD_ARITY", lineno, span.col, f"{op.value} takes {want} qubit(s), got {len(qubits)}")
    if op.has_angle and angle is None:
        raise SourceError("BAD_ARITY", lineno, span.col, f"{op.value} requires an angle")
    if not op.has_angle and angle is not None:
        raise SourceError("BAD_ARITY", lineno, angle_col, f"{op.value} takes no angle")
    return Gate(op, tuple(qubits), angle)


def _parse_instruction(span: _Span, lineno: int, num_qubits: int) -> Bundle:
    text = span.text
    if text.startswith("{"):
        if not text.endswith("}"):
            raise SourceError("SYNTAX", lineno, span.col + len(text) - 1, "unterminated bundle, expected '}'")
        inner = _Span(text[1:-1], span.col + 1)
        gates: list[Gate] = []
        used: set[int] = set()
        for part in inner.split("|"):
            if "{" in part.text or "}" in part.text:
                col = part.col + min(i for i in (part.text.find("{"), part.text.find("}")) if i >= 0)
                raise SourceError("SYNTAX", lineno, col, "nested braces")
            gate = _parse_gate(part, lineno, num_qubits)
            clash = used.intersection(gate.qubits)
            if clash:
                q = min(clash)
                col = part.col + part.text.find(f"q[{q}]") if f"q[{q}]" in part.text else part.strip().col
                raise SourceError("DUPLICATE_QUBIT_IN_BUNDLE", lineno, col, f"qubit {q} used twice in bundle")
            used.update(gate.qubits)
            gates.append(gate)
        return Bundle(tuple(gates))
    if "}" in text or "|" in text:
        col = span.col + min(i for i in (text.find("}"), text.find("|")) if i >= 0)
        raise SourceError("SYNTAX", lineno, col, "'|' or '}' outside a bundle")
    return Bundle((_parse_gate(span, lineno, num_qubits),))


def parse(source: str) -> Circuit:
    """Parse assembly text into a validated :class:`Circuit`.

    Raises :class:`SourceError` for the first problem found; never raises
    anything else for any input string.
    """
    version = None
    num_qubits = None
    bundles: list[Bundle] = []
    lines = source.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.rstrip("\r")
        span = _Span(raw.split("#", 1)[0], 1).strip()
        if not span.text:
            continue
        if version is None:
            m = re.match(r"version\s+(\S+)\Z", span.text, re.I)
            if not m:
                raise SourceError("MISSING_HEADER", lineno, span.col, "expected 'version <x>' as the first line")
            version = m.group(1)
            continue
        if num_qubits is None:
            m = re.match(r"qubits(\s+)(.*)\Z", span.text, re.I)
            if not m:
                raise SourceError("MISSING_HEADER", lineno, span.col, "expected 'qubits <n>' after the version line")
            value = m.group(2).strip()
            col = span.col + m.start(2)
            if not _UINT.match(value) or int(value) < 1:
                raise SourceError("MALFORMED_NUMBER", lineno, col, f"qubit count must be a positive integer, got {value!r}")
            num_qubits = int(value)
            continue
        bundles.append(_parse_instruction(span, lineno, num_qubits))
    if num_qubits is None:
        last = max(len(lines), 1)
        raise SourceError("MISSING_HEADER", last, 1, "missing 'version' / 'qubits' header")
    return Circuit(num_qubits, tuple(bundles), version)


def format_gate(gate: Gate) -> str:
    text = gate.opcode.value + " " + ", ".join(f"q[{q}]" for q in gate.qubits)
    if gate.angle is not None:
        text += ", " + format_angle(gate.angle)
    return text


def print_circuit(circuit: Circuit, cycles=None) -> str:
    """Render ``circuit`` as assembly text (LF line endings).

    ``cycles`` optionally gives a start cycle per bundle, emitted as a
    trailing ``# cycle N`` comment.
    """
    out = [f"version {circuit.version}", f"qubits {circuit.num_qubits}"]
    for i, bundle in enumerate(circuit.bundles):
        if len(bundle.gates) == 1:
            line = format_gate(bundle.gates[0])
        else:
            line = "{ " + " | ".join(format_gate(g) for g in bundle.gates) + " }"
        if cycles is not None:
            line += f"  # cycle {cycles[i]}"
        out.append(line)
    return "\n".join(out) + "\n"
