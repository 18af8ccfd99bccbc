"""DOT and JSON renderings of a retained tableau."""

from __future__ import annotations

import json
from typing import Iterator, Optional

from .engine import Rule, TableauNode
from .syntax import Atomic, Diamond, render


def walk(root: TableauNode) -> Iterator[tuple[TableauNode, Optional[TableauNode], tuple]]:
    """Pre-order (node, parent, core-nodes by hcr level) over a kept tree."""
    stack = [(root, None, ())]
    while stack:
        node, parent, cores = stack.pop()
        if len(node.hcr) > len(cores):
            cores = cores + (node,)
        yield node, parent, cores
        for child in reversed(node.children or ()):
            stack.append((child, node, cores))


def nodes_in_order(root: TableauNode) -> list[TableauNode]:
    return [n for n, _, _ in walk(root)]


def _fmt(f) -> Optional[str]:
    return None if f is None else render(f)


def _edge_labels(node: TableauNode) -> list[str]:
    kids = node.children or []
    if node.rule is Rule.STATE:
        blocked = {d for d, _ in node.blocked}
        diamonds = [g for g in node.gamma if _is_atomic_diamond(g) and g not in blocked]
        return [render(d) for d in diamonds[:len(kids)]]
    if node.rule.branching:
        return ["β₁", "β₂"][:len(kids)]
    return ["α"] * len(kids)


def _is_atomic_diamond(g) -> bool:
    return isinstance(g, Diamond) and isinstance(g.prog, Atomic)


def node_record(node: TableauNode, cores: tuple) -> dict:
    return {
        "id": node.serial,
        "rule": node.rule.value if node.rule else None,
        "principal": _fmt(node.principal),
        "gamma": [render(g) for g in node.gamma],
        "hcr_len": len(node.hcr),
        "hcr": [[render(e.core), sorted(render(g) for g in e.label)] for e in node.hcr],
        "nx": _fmt(node.nx),
        "bd": sorted(render(g) for g in node.bd),
        "bb": sorted(render(g) for g in node.bb),
        "stat": node.stat.value if node.stat else None,
        "uev": sorted([render(a), render(b), v] for (a, b), v in node.uev.items()),
        "closed_by": node.closed_by,
        "blocked": [
            {"diamond": render(d), "level": j, "target": cores[j - 1].serial}
            for d, j in node.blocked
        ],
        "children": [c.serial for c in node.children or ()],
    }


def to_json(root: TableauNode, formula=None, verdict: Optional[str] = None) -> str:
    doc = {
        "formula": _fmt(formula),
        "verdict": verdict,
        "nodes": [node_record(n, cores) for n, _, cores in walk(root)],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _dot_label(rec: dict) -> str:
    lines = [f"#{rec['id']} {rec['rule']}  {rec['stat']}"]
    lines += rec["gamma"] or ["(empty)"]
    meta = [f"hcr={rec['hcr_len']}"]
    if rec["nx"]:
        meta.append(f"nx={rec['nx']}")
    if rec["bd"]:
        meta.append("bd={" + ", ".join(rec["bd"]) + "}")
    if rec["bb"]:
        meta.append("bb={" + ", ".join(rec["bb"]) + "}")
    lines.append(" ".join(meta))
    for a, b, v in rec["uev"]:
        lines.append(f"uev({a}, {b}) = {v}")
    if rec["closed_by"]:
        lines.append(f"closed by {rec['closed_by']}")
    return "\\l".join(_dot_escape(x) for x in lines) + "\\l"


def to_dot(root: TableauNode, formula=None) -> str:
    out = ["digraph tableau {", '  node [shape=box, fontname="monospace"];']
    if formula is not None:
        out.append(f'  label="{_dot_escape(render(formula))}";')
    edges = []
    for node, _, cores in walk(root):
        rec = node_record(node, cores)
        style = ', style="bold"' if node.rule is Rule.STATE else ""
        out.append(f'  n{node.serial} [label="{_dot_label(rec)}"{style}];')
        for child, label in zip(node.children or (), _edge_labels(node)):
            edges.append(f'  n{node.serial} -> n{child.serial} [label="{_dot_escape(label)}"];')
        for b in rec["blocked"]:
            edges.append(
                f'  n{node.serial} -> n{b["target"]} '
                f'[style=dashed, label="blocked by ({_dot_escape(b["diamond"])}, j={b["level"]})"];'
            )
    out += edges
    out.append("}")
    return "\n".join(out) + "\n"
