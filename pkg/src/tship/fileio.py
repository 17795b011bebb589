"""Plain-text instance and flow files.

Instance files::

    c any comment
    p tship <n> <m>
    e <u> <v> <cost>        (m lines, 1-based vertex ids)
    d <v> <value>           (optional; missing demands are 0)

Flow files hold ``f <u> <v> <value>`` lines, meaning ``value`` units sent
from ``u`` to ``v`` over edge ``{u, v}``, followed by ``s cost <value>``.
Numbers are written with 17 significant digits so doubles round-trip.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import Flow, Graph, Instance


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _number(tok: str, lineno: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"bad {what} {tok!r}", lineno) from None


def _vertex(tok: str, n: int, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"bad vertex id {tok!r}", lineno) from None
    if not 1 <= v <= n:
        raise ParseError(f"vertex {v} outside 1..{n}", lineno)
    return v - 1


def parse_instance(text: str) -> Instance:
    n = m = None
    tail, head, cost = [], [], []
    b = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        kind = tok[0]
        if kind == "p":
            if n is not None:
                raise ParseError("duplicate header", lineno)
            if len(tok) != 4 or tok[1] != "tship":
                raise ParseError("header must read 'p tship <n> <m>'", lineno)
            try:
                n, m = int(tok[2]), int(tok[3])
            except ValueError:
                raise ParseError("header counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise ParseError("header counts must be nonnegative", lineno)
            b = np.zeros(n)
            continue
        if n is None:
            raise ParseError(f"'{kind}' line before header", lineno)
        if kind == "e":
            if len(tok) != 4:
                raise ParseError("edge line must read 'e <u> <v> <cost>'", lineno)
            tail.append(_vertex(tok[1], n, lineno))
            head.append(_vertex(tok[2], n, lineno))
            cost.append(_number(tok[3], lineno, "cost"))
        elif kind == "d":
            if len(tok) != 3:
                raise ParseError("demand line must read 'd <v> <value>'", lineno)
            b[_vertex(tok[1], n, lineno)] += _number(tok[2], lineno, "demand")
        else:
            raise ParseError(f"unknown line type {kind!r}", lineno)
    if n is None:
        raise ParseError("missing 'p tship' header")
    if len(tail) != m:
        raise ParseError(f"header announces {m} edges, found {len(tail)}")
    return Instance(n, np.array(tail, np.int64), np.array(head, np.int64), np.array(cost), b)


def render_instance(inst: Instance, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"c {line}" for line in comment.splitlines())
    out.append(f"p tship {inst.n} {inst.m}")
    for u, v, c in zip(inst.tail.tolist(), inst.head.tolist(), inst.cost.tolist()):
        out.append(f"e {u + 1} {v + 1} {fmt(c)}")
    for v in np.flatnonzero(inst.demands).tolist():
        out.append(f"d {v + 1} {fmt(inst.demands[v])}")
    return "\n".join(out) + "\n"


def render_flow(flow: Flow, cost: float) -> str:
    out = []
    for u, v, x in zip(flow.tail.tolist(), flow.head.tolist(), flow.value.tolist()):
        if x > 0:
            out.append(f"f {u + 1} {v + 1} {fmt(x)}")
        elif x < 0:
            out.append(f"f {v + 1} {u + 1} {fmt(-x)}")
    out.append(f"s cost {fmt(cost)}")
    return "\n".join(out) + "\n"


def parse_flow(text: str, graph: Graph) -> tuple[Flow, float | None]:
    """Flow over the edges of ``graph`` plus the cost from the trailer."""
    index = {}
    for e, (u, v) in enumerate(zip(graph.tail.tolist(), graph.head.tolist())):
        index[(u, v)] = (e, 1.0)
        index[(v, u)] = (e, -1.0)
    value = np.zeros(graph.m)
    cost = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "f":
            if len(tok) != 4:
                raise ParseError("flow line must read 'f <u> <v> <value>'", lineno)
            u, v = _vertex(tok[1], graph.n, lineno), _vertex(tok[2], graph.n, lineno)
            if (u, v) not in index:
                raise ParseError(f"({u + 1}, {v + 1}) is not an edge", lineno)
            e, sign = index[(u, v)]
            value[e] += sign * _number(tok[3], lineno, "flow value")
        elif tok[0] == "s":
            if len(tok) != 3 or tok[1] != "cost":
                raise ParseError("trailer must read 's cost <value>'", lineno)
            cost = _number(tok[2], lineno, "cost")
        else:
            raise ParseError(f"unknown line type {tok[0]!r}", lineno)
    return Flow.on(graph, value), cost


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(path, inst: Instance, comment: str | None = None) -> None:
    Path(path).write_text(render_instance(inst, comment))


def render_report(summary: dict, style: str = "text") -> str:
    if style == "json":
        return json.dumps(summary, indent=2, sort_keys=True) + "\n"
    lines = []
    for k, v in summary.items():
        lines.append(f"{k} {fmt(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"
