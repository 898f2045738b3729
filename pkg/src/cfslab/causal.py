"""Lorentzian length space, causal-set order, and orthogonality lattice.

A finite system induces a weighted digraph: an edge points from one point to
a second one when the pair is timelike, the second lies in the future of the
first, and the pair's length functional falls inside a chosen window.  The
Lorentzian distance is the supremum of chain lengths, realized as a longest
path after condensing strongly connected components (any reachable cycle
forces an infinite supremum because all edge weights are positive).  From the
distance derive a reflexive transitive order, an orthogonality relation, and
the lattice of biorthogonally closed sets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import (
    CausalFermionSystem,
    OperatorPoint,
    Tolerances,
    classify,
    CausalClass,
    product_spectrum,
    time_direction,
)
from .errors import ValidationError
from .pairs import PairEngine

__all__ = [
    "CausalGraph",
    "LengthScales",
    "build_causal_graph",
    "distance_matrix",
    "ell",
    "enumerate_lattice",
    "lorentzian_distance",
    "ortho_complement",
    "partial_order",
    "tangent_cone_histogram",
]


@dataclass(frozen=True)
class LengthScales:
    """Window (l_min, l_max) for the length functional, strict at both ends."""

    l_min: float
    l_max: float

    def __post_init__(self):
        if not (0 < self.l_min < self.l_max):
            raise ValidationError("need 0 < l_min < l_max")

    def windowed(self, value: float) -> float:
        return value if self.l_min < value < self.l_max else 0.0


def _product_magnitude(x: OperatorPoint, y: OperatorPoint, norm: str) -> float:
    if norm == "spectral":
        n = max(x.pos_eigs, x.neg_eigs, y.pos_eigs, y.neg_eigs, 1)
        return float(np.abs(product_spectrum(x, y, n)).max())
    if norm == "operator":
        # ||xy||_2 through the rank structure: right-multiplying by the
        # orthonormal basis of image(y) preserves singular values.
        m = (x.matrix @ y.image_basis()) * y.nonzero_eigenvalues()[None, :]
        sv = np.linalg.svd(m, compute_uv=False)
        return float(sv.max(initial=0.0))
    raise ValidationError(f"unknown norm {norm!r}")


def ell(
    x: OperatorPoint,
    y: OperatorPoint,
    scales: LengthScales,
    norm: str = "spectral",
) -> float:
    """Length functional: |xy|^(-1/6) windowed to (l_min, l_max), else 0.

    ``|xy|`` is the spectral radius of the product by default; the operator
    norm is available behind ``norm="operator"`` for comparison studies.  A
    vanishing product (infinite nominal length) returns 0.
    """
    mag = _product_magnitude(x, y, norm)
    if mag <= 0.0:
        return 0.0
    return scales.windowed(mag ** (-1.0 / 6.0))


class CausalGraph:
    """Weighted digraph of future-directed timelike relations.

    Vertices are point ids in system order; an edge ``u -> v`` carries the
    window value of the length functional.  The strongly-connected-component
    condensation is computed once and cached.
    """

    def __init__(self, ids, edges):
        self.ids = tuple(ids)
        self._index = {pid: k for k, pid in enumerate(self.ids)}
        n = len(self.ids)
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self.weights: dict[tuple[int, int], float] = {}
        for (u, v), w in edges.items():
            self.adj[u].append((v, w))
            self.weights[(u, v)] = w
        for lst in self.adj:
            lst.sort()
        self._scc = None
        self._reach = None

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def index(self, pid: str) -> int:
        return self._index[pid]

    def edges(self):
        """Edges as (u_id, v_id, weight), deterministic order."""
        for u in range(len(self.ids)):
            for v, w in self.adj[u]:
                yield self.ids[u], self.ids[v], w

    def scc_labels(self) -> np.ndarray:
        """Strongly-connected-component label per vertex (cached)."""
        if self._scc is None:
            n = len(self.ids)
            if self.weights:
                rows, cols = zip(*self.weights.keys())
                mat = csr_matrix(
                    (np.ones(len(rows)), (rows, cols)), shape=(n, n)
                )
            else:
                mat = csr_matrix((n, n))
            _, labels = connected_components(
                mat, directed=True, connection="strong"
            )
            self._scc = labels
        return self._scc

    def cyclic_vertices(self) -> np.ndarray:
        """Boolean mask of vertices lying in a nontrivial component."""
        labels = self.scc_labels()
        counts = np.bincount(labels, minlength=labels.max(initial=0) + 1)
        return counts[labels] > 1

    def reachable(self) -> np.ndarray:
        """Boolean matrix R with R[u, v] true iff a walk with >= 1 edge exists."""
        if self._reach is None:
            n = len(self.ids)
            r = np.zeros((n, n), dtype=bool)
            for s in range(n):
                stack = [v for v, _ in self.adj[s]]
                seen = r[s]
                while stack:
                    v = stack.pop()
                    if not seen[v]:
                        seen[v] = True
                        stack.extend(w for w, _ in self.adj[v])
            self._reach = r
        return self._reach


def build_causal_graph(
    system: CausalFermionSystem,
    scales: LengthScales,
    tol: Tolerances | None = None,
    workers=None,
    require_spin_connectable: bool = False,
) -> CausalGraph:
    """Causal graph of a system: edge u -> v iff the pair is timelike, v lies
    in the future of u, and the length functional is inside the window.

    ``require_spin_connectable`` strengthens the chain condition to pairs
    that also admit a spin connection (off by default).  Regular systems go
    through the batched pair engine; singular systems fall back to per-pair
    evaluation.
    """
    tol = tol or system.tolerances
    md = system.metadata
    eps, mass = md.get("eps"), md.get("mass")
    if eps is not None and scales.l_min <= eps:
        warnings.warn("l_min does not exceed the regularization length", stacklevel=2)
    if mass and scales.l_max >= 1.0 / mass:
        warnings.warn("l_max reaches the Compton scale 1/m", stacklevel=2)

    n = len(system)
    edges = {}
    if system.is_regular():
        res = PairEngine(system, workers=workers).analyze()
        timelike = res.codes == 1
        future = res.orientation == 1
        with np.errstate(divide="ignore"):
            nominal = np.where(res.specrad > 0, res.specrad ** (-1.0 / 6.0), 0.0)
        inside = (scales.l_min < nominal) & (nominal < scales.l_max)
        for u, v in zip(*np.nonzero(timelike & future & inside)):
            edges[(int(u), int(v))] = float(nominal[u, v])
    else:
        for u in range(n):
            for v in range(n):
                if u == v:
                    continue
                x, y = system.points[u].op, system.points[v].op
                if classify(x, y, tol, n=system.n) is not CausalClass.TIMELIKE:
                    continue
                c = time_direction(x, y)
                if c <= tol.imag_rel * x.spectral_radius * y.spectral_radius:
                    continue
                w = ell(x, y, scales)
                if w > 0:
                    edges[(u, v)] = w
    if require_spin_connectable and edges:
        from .spin import spin_connectable

        edges = {
            (u, v): w
            for (u, v), w in edges.items()
            if spin_connectable(system, system.ids[u], system.ids[v], tol)
        }
    return CausalGraph(system.ids, edges)


def lorentzian_distance(x_id: str, y_id: str, graph: CausalGraph) -> float:
    """Supremum of chain lengths from x to y.

    Zero when no chain exists (in particular for x == y without a cycle
    through x); infinite iff some walk from x to y meets a nontrivial
    strongly connected component, since every cycle has positive weight.
    Otherwise the supremum is attained on a simple path and computed by
    topological dynamic programming.
    """
    u, v = graph.index(x_id), graph.index(y_id)
    reach = graph.reachable()
    if not reach[u, v]:
        return 0.0
    on_walk = np.zeros(len(graph), dtype=bool)
    for w in range(len(graph)):
        from_u = w == u or reach[u, w]
        to_v = w == v or reach[w, v]
        on_walk[w] = from_u and to_v
    if np.any(on_walk & graph.cyclic_vertices()):
        return math.inf
    return _dag_longest_path(graph, u, v, on_walk)


def _dag_longest_path(graph: CausalGraph, u: int, v: int, mask) -> float:
    """Longest u -> v path inside an acyclic vertex subset."""
    indeg = {w: 0 for w in np.nonzero(mask)[0]}
    for w in indeg:
        for t, _ in graph.adj[w]:
            if t in indeg:
                indeg[t] += 1
    order = [w for w, d in indeg.items() if d == 0]
    topo = []
    head = 0
    while head < len(order):
        w = order[head]
        head += 1
        topo.append(w)
        for t, _ in graph.adj[w]:
            if t in indeg:
                indeg[t] -= 1
                if indeg[t] == 0:
                    order.append(t)
    best = {w: -math.inf for w in topo}
    best[u] = 0.0
    for w in topo:
        if best[w] == -math.inf:
            continue
        for t, weight in graph.adj[w]:
            if t in best and best[w] + weight > best[t]:
                best[t] = best[w] + weight
    return best.get(v, -math.inf) if best.get(v, -math.inf) > 0 else 0.0


def distance_matrix(graph: CausalGraph) -> np.ndarray:
    """All-pairs Lorentzian distances; inf encodes unbounded chains."""
    n = len(graph)
    reach = graph.reachable()
    cyc = graph.cyclic_vertices()
    out = np.zeros((n, n))
    for u in range(n):
        # vertices on some u -> v walk, per target v, share the reachability
        # structure; handle the infinite part first
        for v in range(n):
            if not reach[u, v]:
                continue
            on_walk = (
                (np.arange(n) == u) | reach[u]
            ) & ((np.arange(n) == v) | reach[:, v])
            if np.any(on_walk & cyc):
                out[u, v] = math.inf
            else:
                out[u, v] = _dag_longest_path(graph, u, v, on_walk)
    return out


def partial_order(x_id: str, y_id: str, graph: CausalGraph) -> bool:
    """Reflexive transitive order: x <= y iff x == y or d(x, y) > 0.

    Positivity of the distance is equivalent to reachability because every
    edge weight is positive; antisymmetry can fail on cyclic graphs.
    """
    if x_id == y_id:
        return True
    return bool(graph.reachable()[graph.index(x_id), graph.index(y_id)])


def _incomparability_masks(graph: CausalGraph) -> list[int]:
    """Bitmask of points orthogonal to each point (neither precedes the other)."""
    n = len(graph)
    reach = graph.reachable()
    comparable = reach | reach.T | np.eye(n, dtype=bool)
    masks = []
    for u in range(n):
        m = 0
        for v in range(n):
            if not comparable[u, v]:
                m |= 1 << v
        masks.append(m)
    return masks


def ortho_complement(a_ids, graph: CausalGraph) -> set:
    """Set of points orthogonal to every member of ``a_ids``."""
    masks = _incomparability_masks(graph)
    full = (1 << len(graph)) - 1
    acc = full
    for pid in a_ids:
        acc &= masks[graph.index(pid)]
    return {graph.ids[v] for v in range(len(graph)) if acc >> v & 1}


def enumerate_lattice(graph: CausalGraph, max_points: int = 20) -> list:
    """All biorthogonally closed subsets, as sorted id tuples.

    Closed sets are exactly the complements of arbitrary subsets, i.e. the
    intersections of single-point complements together with the full set, so
    the enumeration is closure-driven rather than a scan of the power set.
    Ordered by (size, membership) for deterministic reports.
    """
    n = len(graph)
    if n > max_points:
        raise ValidationError(f"system has {n} > max_points = {max_points} points")
    masks = _incomparability_masks(graph)
    full = (1 << n) - 1
    closed = {full}
    for m in masks:
        closed |= {c & m for c in closed}
    # the empty set is always closed (its double complement is empty because
    # no point is orthogonal to itself)
    closed.add(0)

    def unpack(bits):
        return tuple(graph.ids[v] for v in range(n) if bits >> v & 1)

    sets = [unpack(c) for c in closed]
    sets.sort(key=lambda s: (len(s), s))
    return sets


def tangent_cone_histogram(
    system: CausalFermionSystem,
    x_id: str,
    delta: float,
    bins,
) -> np.ndarray:
    """Weighted conical histogram of the local operator geometry at a point.

    Every point y of the system within operator-norm distance ``delta`` of x
    is mapped to the spin-space operator ``pi_x (y - x) x`` (a symmetric
    operator for the spin scalar product); its measure weight is assigned to
    every bin whose predicate accepts the image.  Masses are normalized by
    the measure of the ball.  Bin predicates must be scale-invariant (accept
    ``t A`` for all t > 0 whenever they accept ``A``) to qualify as conical.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    x = system.point(x_id)
    bx = x.image_basis()
    lam = x.nonzero_eigenvalues()
    masses = np.zeros(len(bins))
    total = 0.0
    for entry in system.points:
        diff = entry.op.matrix - x.matrix
        if np.linalg.norm(diff, ord=2) >= delta:
            continue
        total += entry.weight
        image = (bx.conj().T @ diff @ bx) * lam[None, :]
        for b, predicate in enumerate(bins):
            if predicate(image):
                masses[b] += entry.weight
    if total <= 0:
        raise ValidationError(f"the ball of radius {delta} around {x_id!r} has measure zero")
    return masses / total
