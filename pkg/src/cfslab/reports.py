"""Deterministic report formatting: CSV, DOT, and JSON writers.

All floating-point output uses 17 significant digits, rows follow the
system's point order, and every report embeds the tolerance block it was
produced with, so identical inputs yield byte-identical reports.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .core import Tolerances
from .causal import CausalGraph
from .pairs import PairAnalysis

__all__ = [
    "classification_csv",
    "connection_json",
    "convergence_csv",
    "distance_csv",
    "dot_graph",
    "fmt",
    "lattice_json",
    "order_csv",
]


def fmt(value: float) -> str:
    """17-significant-digit decimal; infinities as 'inf'."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


def _tolerance_header(tol: Tolerances) -> list[str]:
    return [
        f"# eig_rel={fmt(tol.eig_rel)}",
        f"# imag_rel={fmt(tol.imag_rel)}",
        f"# zero_abs={fmt(tol.zero_abs)}",
    ]


_SIGN = {1: "+", 0: "0", -1: "-"}


def classification_csv(analysis: PairAnalysis, include_diagonal: bool = False) -> str:
    """Causal class matrix: entries like 'T+' (class plus direction sign).

    The diagonal reports the self relation only when requested, '-'
    otherwise.
    """
    lines = _tolerance_header(analysis.tolerances)
    ids = analysis.ids
    lines.append("id," + ",".join(ids))
    for i, pid in enumerate(ids):
        row = [pid]
        for j in range(len(ids)):
            if i == j and not include_diagonal:
                row.append("-")
            else:
                row.append(analysis.symbol(i, j) + _SIGN[int(analysis.orientation[i, j])])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def distance_csv(ids, dmat: np.ndarray, tol: Tolerances, scales=None) -> str:
    lines = _tolerance_header(tol)
    if scales is not None:
        lines.append(f"# l_min={fmt(scales.l_min)}")
        lines.append(f"# l_max={fmt(scales.l_max)}")
    lines.append("id," + ",".join(ids))
    for i, pid in enumerate(ids):
        lines.append(pid + "," + ",".join(fmt(dmat[i, j]) for j in range(len(ids))))
    return "\n".join(lines) + "\n"


def order_csv(ids, dmat: np.ndarray, tol: Tolerances) -> str:
    """Partial-order matrix: 1 where the row point precedes the column point."""
    lines = _tolerance_header(tol)
    lines.append("id," + ",".join(ids))
    for i, pid in enumerate(ids):
        row = [pid]
        for j in range(len(ids)):
            row.append("1" if i == j or dmat[i, j] > 0 else "0")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def dot_graph(graph: CausalGraph, tol: Tolerances | None = None) -> str:
    lines = []
    if tol is not None:
        lines.extend("//" + h[1:] for h in _tolerance_header(tol))
    lines.append("digraph causal {")
    for pid in graph.ids:
        lines.append(f'  "{pid}";')
    for u, v, w in graph.edges():
        lines.append(f'  "{u}" -> "{v}" [label="{fmt(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def lattice_json(sets, tol: Tolerances) -> str:
    doc = {
        "tolerances": tol.as_dict(),
        "closed_sets": [list(s) for s in sets],
    }
    return json.dumps(doc, indent=1) + "\n"


def _matrix_entries(matrix: np.ndarray) -> list:
    return [
        [[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)
    ]


def connection_json(records, tol: Tolerances, composite=None, extras=None) -> str:
    doc: dict = {"tolerances": tol.as_dict(), "segments": records}
    if composite is not None:
        doc["composite"] = _matrix_entries(composite)
    if extras:
        doc.update(extras)
    return json.dumps(doc, indent=1) + "\n"


def convergence_csv(rows, tol: Tolerances) -> str:
    """Table of transport deviations over (eps, refinement) pairs."""
    lines = _tolerance_header(tol)
    lines.append("eps,n_steps,spin_deviation,frame_deviation,max_segment_residual")
    for r in rows:
        lines.append(
            ",".join(
                [
                    fmt(r["eps"]),
                    str(r["n_steps"]),
                    fmt(r["spin_deviation"]),
                    fmt(r["frame_deviation"]),
                    fmt(r["max_segment_residual"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"
