"""
Circuit Serialization
Text format and JSONL batch container for circuits

Text format:
    n=<qubits>
    NAME(q0[,q1,...]);NAME(...)      one line per layer, execution order
An empty line is a layer of idle qubits. Output always ends with a newline.
"""

import re
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Union

from birb.circuits.circuit import Circuit, GateInstance, GateLayer
from birb.core.errors import BirbError, CircuitParseError
from birb.pauli.gates import get_gate
from birb.utils.helpers import iter_jsonl, open_artifact, write_jsonl

_HEADER = re.compile(r"^n=(\d+)$")
_GATE = re.compile(r"^(CLIFF\[[0-9a-f]+\]|[A-Za-z][A-Za-z0-9_]*)\((\d+(?:,\d+)*)\)$")

BATCH_FIELDS = ("id", "depth", "circuit_text", "target_pauli", "metadata")


def serialize_layer(layer: GateLayer) -> str:
    return ";".join(
        f"{gate.name}({','.join(str(q) for q in qubits)})" for gate, qubits in layer.gates
    )


def serialize(c: Circuit) -> str:
    lines = [f"n={c.n}"]
    lines.extend(serialize_layer(layer) for layer in c.layers)
    return "\n".join(lines) + "\n"


def _parse_layer(text: str, n: int, line_no: int) -> GateLayer:
    if not text:
        return GateLayer(n)
    gates: List[GateInstance] = []
    column = 1
    used = set()
    for token in text.split(";"):
        match = _GATE.match(token)
        if not match:
            raise CircuitParseError(f"malformed gate token {token!r}", line_no, column)
        name, qubit_text = match.groups()
        qubits = tuple(int(q) for q in qubit_text.split(","))
        try:
            gate = get_gate(name, len(qubits))
        except BirbError as e:
            raise CircuitParseError(f"unknown gate in token {token!r}: {e}", line_no, column)
        if gate.arity != len(qubits):
            raise CircuitParseError(
                f"gate {name} takes {gate.arity} qubit(s), token {token!r} gives {len(qubits)}",
                line_no,
                column,
            )
        bad = [q for q in qubits if q >= n]
        if bad or len(set(qubits)) != len(qubits) or used.intersection(qubits):
            raise CircuitParseError(f"invalid or overlapping qubits in token {token!r}", line_no, column)
        used.update(qubits)
        gates.append(GateInstance(gate, qubits))
        column += len(token) + 1
    return GateLayer(n, tuple(gates))


def parse(text: str) -> Circuit:
    """Inverse of `serialize`; errors report 1-based line and column"""
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n")
    header = _HEADER.match(lines[0])
    if not header:
        raise CircuitParseError(f"expected header 'n=<int>', got {lines[0]!r}", 1, 1)
    n = int(header.group(1))
    layers = [_parse_layer(line, n, i + 2) for i, line in enumerate(lines[1:])]
    return Circuit(n, tuple(layers))


def write_circuit_batch(target: Union[str, Path, IO], records: Iterable[dict]) -> int:
    """
    Write circuit records as JSONL (gzip when the path ends in .gz)

    Each record carries id, depth, circuit_text, target_pauli and metadata.
    """
    records = (_check_record(r) for r in records)
    if isinstance(target, (str, Path)):
        with open_artifact(target, "wt") as stream:
            return write_jsonl(stream, records)
    return write_jsonl(target, records)


def iter_circuit_batch(source: Union[str, Path, IO]) -> Iterator[dict]:
    if isinstance(source, (str, Path)):
        with open_artifact(source, "rt") as stream:
            yield from (_check_record(r) for r in iter_jsonl(stream))
    else:
        yield from (_check_record(r) for r in iter_jsonl(source))


def _check_record(record: dict) -> dict:
    missing = [k for k in BATCH_FIELDS if k not in record]
    if missing:
        raise CircuitParseError(f"circuit record is missing {missing}", 1, 1)
    return record
