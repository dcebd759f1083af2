"""First-passage times, geodesics and replacement values on a region.

The distance computations run scipy's label-setting Dijkstra on the
region's CSR adjacency.  On top of the two label-setting runs rooted at
``u`` and at ``v`` this module derives

* the witness path (lexicographically smallest tight predecessor),
* ``B_e`` for every edge from the two distance labels,
* ``A_e`` (distance with ``e`` deleted) for every witness edge with one
  sweep over the non-tree edges of the shortest-path tree from ``u``
  (Malik-Mittal-Gupta style).  ``A_e = T`` off the witness path.
* the geodesic intersection ``pi = {e : A_e > T}``.

Per-edge deletion (two extra runs per edge) is kept as
:func:`replacement_values` and :func:`replacement_table_naive`; the tests use
it as the oracle for the sweep.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .field import Edge, Region, WeightConfig

__all__ = [
    "GeodesicResult",
    "ReplacementValues",
    "GeodesicAnalysis",
    "RegionTooLarge",
    "REL_TIE_TOL",
    "distances",
    "shortest_path",
    "geodesic",
    "analyze",
    "replacement_values",
    "replacement_table_naive",
    "geodesic_intersection",
    "enumerate_all_geodesics",
    "passage_time",
]

REL_TIE_TOL = 1e-12
MAX_ENUM_EDGES = 40


class RegionTooLarge(ValueError):
    """Exhaustive enumeration refused on a region with too many edges."""


@dataclass(frozen=True)
class GeodesicResult:
    """First-passage time, one optimal path and the geodesic intersection.

    ``witness_path`` and ``pi`` hold edge ids of ``region``; the witness is
    ordered from ``u`` to ``v``.
    """

    T: float
    witness_path: np.ndarray
    pi: np.ndarray
    touched_boundary: bool
    region: Region
    path_vertices: np.ndarray

    def witness_edges(self) -> list[Edge]:
        return self.region.edges(self.witness_path)

    def pi_edges(self) -> set[Edge]:
        return set(self.region.edges(self.pi))


@dataclass(frozen=True)
class ReplacementValues:
    """``T o sigma_e^x = min(A, B + x)`` for every ``x >= 0``."""

    A: float
    B: float

    @property
    def censored(self) -> bool:
        return not np.isfinite(self.A)

    def passage_time(self, x: float) -> float:
        return min(self.A, self.B + x)


@dataclass(frozen=True)
class GeodesicAnalysis:
    """Everything derived from the two label-setting runs of one config.

    ``A`` and ``B`` are per-edge arrays.  ``B`` is the through-edge distance
    from the undeleted labels; it equals the deleted-graph value whenever
    that value is below ``T`` and is otherwise itself ``>= T``, so
    ``min(A, B + x)`` is exact for every edge and every ``x``.
    """

    result: GeodesicResult
    A: np.ndarray
    B: np.ndarray
    dist_u: np.ndarray
    dist_v: np.ndarray

    @property
    def T(self) -> float:
        return self.result.T


# ---------------------------------------------------------------------------
# label setting


def _tolerance(config: WeightConfig, scale: float) -> float:
    return 0.0 if config.integral else REL_TIE_TOL * max(abs(scale), 1.0)


def _graph(config: WeightConfig, deleted: int | None = None) -> csr_matrix:
    region = config.region
    indptr, indices, ents = region.csr_structure
    data = config.weights[ents]
    if deleted is not None:
        data = data.copy()
        data[ents == deleted] = np.inf
    n = region.n_vertices
    return csr_matrix((data, indices, indptr), shape=(n, n))


def distances(config: WeightConfig, sources: Sequence[int], deleted: int | None = None,
              predecessors: bool = False):
    """Label-setting distances from vertex indices ``sources``."""
    return dijkstra(_graph(config, deleted), directed=True, indices=list(sources),
                    return_predecessors=predecessors)


def _vertex(region: Region, p) -> int:
    if p is None:
        raise ValueError("endpoint required")
    if isinstance(p, (int, np.integer)):
        return int(p)
    return region.vertex_index(tuple(p))


def _endpoints(config: WeightConfig, u, v) -> tuple[int, int]:
    region = config.region
    u = region.origin if u is None else u
    v = region.target if v is None else v
    return _vertex(region, u), _vertex(region, v)


def _tree(config: WeightConfig, dist: np.ndarray, scipy_pred: np.ndarray | None,
          tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Predecessor vertex and edge for every vertex of a shortest-path tree.

    With positive weights each vertex takes its tight neighbour of smallest
    index; zero-weight edges make that relation cyclic, and the tree then
    comes from the label-setting run itself.
    """
    region = config.region
    nbr, nbe = region.neighbour_table
    w = config.weights
    if scipy_pred is not None:
        pred = np.where(scipy_pred < 0, -1, scipy_pred).astype(np.int64)
        pedge = np.full(region.n_vertices, -1, dtype=np.int64)
        has = pred >= 0
        hit = nbr[has] == pred[has, None]
        pedge[has] = nbe[has][hit]
        return pred, pedge
    valid = nbr >= 0
    safe_nbr = np.where(valid, nbr, 0)
    dn = np.where(valid, dist[safe_nbr], np.inf)
    we = np.where(valid, w[np.where(valid, nbe, 0)], np.inf)
    tight = valid & (np.abs(dn + we - dist[:, None]) <= tol) & (dn < dist[:, None])
    big = np.iinfo(np.int64).max
    cand = np.where(tight, nbr, big)
    slot = np.argmin(cand, axis=1)
    rows = np.arange(region.n_vertices)
    pred = np.where(tight[rows, slot], nbr[rows, slot], -1)
    pedge = np.where(tight[rows, slot], nbe[rows, slot], -1)
    return pred, pedge


def _walk(pred: np.ndarray, pedge: np.ndarray, src: int, dst: int) -> tuple[np.ndarray, np.ndarray]:
    verts, edges = [dst], []
    x = dst
    while x != src:
        p = int(pred[x])
        if p < 0:
            raise RuntimeError("predecessor chain broken; target unreachable")
        edges.append(int(pedge[x]))
        verts.append(p)
        x = p
        if len(verts) > len(pred) + 1:
            raise RuntimeError("predecessor relation has a cycle")
    return np.array(verts[::-1], dtype=np.int64), np.array(edges[::-1], dtype=np.int64)


def _has_zero_weight(config: WeightConfig, tol: float) -> bool:
    """Weights within the tie tolerance make the tight relation cyclic."""
    return bool(np.any(config.weights <= tol))


def shortest_path(config: WeightConfig, u=None, v=None) -> tuple[float, np.ndarray, bool]:
    """``(T, witness_path, touched_boundary)`` from one label-setting run.

    ``u`` and ``v`` are coordinate tuples or vertex indices and default to
    the region's origin and target.
    """
    s, t = _endpoints(config, u, v)
    du, sp = distances(config, [s], predecessors=True)
    du, sp = du[0], sp[0]
    T = float(du[t])
    if not np.isfinite(T):
        raise RuntimeError("target unreachable inside the region")
    tol = _tolerance(config, T)
    pred, pedge = _tree(config, du, sp if _has_zero_weight(config, tol) else None, tol)
    verts, path = _walk(pred, pedge, s, t)
    touched = bool(np.any(config.region.boundary[verts]))
    return T, path, touched


def passage_time(config: WeightConfig, u=None, v=None, deleted: int | None = None) -> float:
    s, t = _endpoints(config, u, v)
    return float(distances(config, [s], deleted=deleted)[0][t])


# ---------------------------------------------------------------------------
# bulk analysis


def analyze(config: WeightConfig, u=None, v=None) -> GeodesicAnalysis:
    """Witness path, ``pi`` and replacement values for every edge."""
    region = config.region
    s, t = _endpoints(config, u, v)
    dd, sp = distances(config, [s, t], predecessors=True)
    du, dv = dd[0], dd[1]
    T = float(du[t])
    if not np.isfinite(T):
        raise RuntimeError("target unreachable inside the region")
    tol = _tolerance(config, T)
    pred, pedge = _tree(config, du, sp[0] if _has_zero_weight(config, tol) else None, tol)
    verts, path = _walk(pred, pedge, s, t)

    tail, head, w = region.edge_tail, region.edge_head, config.weights
    B = np.minimum(du[tail] + dv[head], du[head] + dv[tail])
    A = np.full(region.n_edges, T)
    if len(path):
        A[path] = _replacement_along_path(config, du, dv, pred, verts, path, s, t)
    pi = np.sort(path[A[path] > T + tol])
    touched = bool(np.any(region.boundary[verts]))
    result = GeodesicResult(T, path, pi, touched, region, verts)
    return GeodesicAnalysis(result, A, B, du, dv)


def _replacement_along_path(config, du, dv, pred, verts, path, s, t) -> np.ndarray:
    """Deleted-graph distance ``A`` for each edge of the witness path."""
    region = config.region
    k = len(path)
    n = region.n_vertices
    # label every vertex with the index of the last path vertex on its tree path
    lab = np.full(n, -1, dtype=np.int64)
    lab[verts] = np.arange(k + 1)
    anc = pred.copy()
    pending = (lab < 0) & (pred >= 0)
    while np.any(pending):
        idx = np.nonzero(pending)[0]
        a = anc[idx]
        la = lab[a]
        got = la >= 0
        lab[idx[got]] = la[got]
        anc[idx[~got]] = anc[a[~got]]
        pending[idx[got]] = False

    on_path = np.zeros(region.n_edges, dtype=bool)
    on_path[path] = True
    tail, head, w = region.edge_tail, region.edge_head, config.weights
    los, his, vals = [], [], []
    for x, y in ((tail, head), (head, tail)):
        lo, hi = lab[x], lab[y]
        keep = (lo >= 0) & (lo < hi) & ~on_path
        los.append(lo[keep])
        his.append(hi[keep])
        vals.append(du[x[keep]] + w[keep] + dv[y[keep]])
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    val = np.concatenate(vals)

    A = np.full(k, np.inf)
    order = np.argsort(val, kind="stable")
    nxt = np.arange(k + 1)  # union-find "next unpainted position"

    def find(i: int) -> int:
        root = i
        while nxt[root] != root:
            root = nxt[root]
        while nxt[i] != root:
            nxt[i], i = root, nxt[i]
        return root

    remaining = k
    for j in order:
        i = find(int(lo[j]))
        end = int(hi[j])
        while i < end:
            A[i] = val[j]
            remaining -= 1
            nxt[i] = i + 1
            i = find(i + 1)
        if remaining == 0:
            break

    # the sweep needs the deleted edge to carry weight above the tie tolerance
    tol = _tolerance(config, float(du[t]))
    for i in np.nonzero(w[path] <= tol)[0]:
        A[i] = float(distances(config, [s], deleted=int(path[i]))[0][t])
    return A


def geodesic(config: WeightConfig, u=None, v=None) -> GeodesicResult:
    return analyze(config, u, v).result


def geodesic_intersection(config: WeightConfig, u=None, v=None) -> np.ndarray:
    """Edge ids lying on every geodesic, i.e. ``{e : A_e > T}``."""
    return analyze(config, u, v).result.pi


# ---------------------------------------------------------------------------
# per-edge oracles


def replacement_values(config: WeightConfig, e: Edge | int, u=None, v=None) -> ReplacementValues:
    """``(A, B)`` for one edge by two label-setting runs with ``e`` deleted."""
    region = config.region
    eid = e if isinstance(e, (int, np.integer)) else region.edge_id(e)
    if not 0 <= eid < region.n_edges:
        raise ValueError(f"edge id {eid} outside region")
    s, t = _endpoints(config, u, v)
    dd = distances(config, [s, t], deleted=int(eid))
    a, b = region.edge_tail[eid], region.edge_head[eid]
    A = float(dd[0][t])
    B = float(min(dd[0][a] + dd[1][b], dd[0][b] + dd[1][a]))
    return ReplacementValues(A, B)


def replacement_table_naive(config: WeightConfig, u=None, v=None) -> tuple[np.ndarray, np.ndarray]:
    """``(A, B)`` arrays over all edges via per-edge deletion."""
    E = config.region.n_edges
    A, B = np.empty(E), np.empty(E)
    for eid in range(E):
        rv = replacement_values(config, eid, u, v)
        A[eid], B[eid] = rv.A, rv.B
    return A, B


def enumerate_all_geodesics(config: WeightConfig, u=None, v=None,
                            max_edges: int = MAX_ENUM_EDGES) -> list[list[int]]:
    """Every simple path attaining ``T``, by depth-first search.

    Only edges that are tight for the two distance labels are followed;
    the guard on region size keeps the enumeration finite in practice.
    """
    region = config.region
    if region.n_edges > max_edges:
        raise RegionTooLarge(f"region has {region.n_edges} edges (limit {max_edges})")
    s, t = _endpoints(config, u, v)
    dd = distances(config, [s, t])
    du, dv = dd[0], dd[1]
    T = float(du[t])
    tol = _tolerance(config, T)
    nbr, nbe = region.neighbour_table
    w = config.weights
    out: list[list[int]] = []
    on_stack = np.zeros(region.n_vertices, dtype=bool)

    def dfs(x: int, edges: list[int]) -> None:
        if x == t:
            out.append(list(edges))
            return
        on_stack[x] = True
        for y, eid in zip(nbr[x], nbe[x]):
            if y < 0 or on_stack[y]:
                continue
            if abs(du[x] + w[eid] + dv[y] - T) <= tol:
                edges.append(int(eid))
                dfs(int(y), edges)
                edges.pop()
        on_stack[x] = False

    dfs(s, [])
    return out
