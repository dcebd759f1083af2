"""Finite boxes of Z^d and seeded dynamical weight fields on them.

A :class:`DynamicalField` holds, for every edge of a :class:`Region`, the
triple ``(omega(e), omega'(e), U(e))`` plus ``k`` replica pairs
``(omega^(i)(e), U^(i)(e))``.  All of them are counter-based draws keyed by
the edge's coordinates, so two regions that share an edge see the same
values on it (enlarging the padding never changes interior weights).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import rng
from .distributions import WeightDistribution, sample

__all__ = [
    "Vertex",
    "Edge",
    "Region",
    "DynamicalField",
    "WeightConfig",
    "default_padding",
    "OMEGA",
    "OMEGA_PRIME",
    "CLOCK",
    "REPLICA_OMEGA",
    "REPLICA_CLOCK",
]

Vertex = tuple[int, ...]

OMEGA = "omega"
OMEGA_PRIME = "omega-prime"
CLOCK = "clock"
REPLICA_OMEGA = "replica-omega"
REPLICA_CLOCK = "replica-clock"


class Edge(NamedTuple):
    """Nearest-neighbour edge ``{base, base + e_axis}`` in canonical form."""

    base: Vertex
    axis: int

    @classmethod
    def between(cls, a: Sequence[int], b: Sequence[int]) -> "Edge":
        a, b = tuple(int(c) for c in a), tuple(int(c) for c in b)
        diff = [j for j in range(len(a)) if a[j] != b[j]]
        if len(a) != len(b) or len(diff) != 1 or abs(a[diff[0]] - b[diff[0]]) != 1:
            raise ValueError(f"{a} and {b} are not nearest neighbours")
        axis = diff[0]
        return cls(min(a, b, key=lambda p: p[axis]), axis)

    @property
    def head(self) -> Vertex:
        return tuple(c + (j == self.axis) for j, c in enumerate(self.base))


def default_padding(v: Sequence[int]) -> int:
    return max(math.ceil(0.75 * sum(abs(c) for c in v)), 16)


class Region:
    """Inclusive box ``[lo, hi]`` of Z^d with two marked endpoints.

    Vertices are numbered in row-major (C) order, which coincides with
    lexicographic order of their coordinates.  Edges are numbered axis by
    axis, each block in row-major order of the base vertex.
    """

    padding: int | None = None

    def __init__(self, lo: Sequence[int], hi: Sequence[int],
                 origin: Sequence[int] | None = None, target: Sequence[int] | None = None):
        self.lo = tuple(int(c) for c in lo)
        self.hi = tuple(int(c) for c in hi)
        self.d = len(self.lo)
        if self.d < 1 or len(self.hi) != self.d or any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"bad box bounds {self.lo}..{self.hi}")
        self.origin = tuple(origin) if origin is not None else (0,) * self.d
        self.target = tuple(target) if target is not None else self.hi
        for p in (self.origin, self.target):
            if not self.contains(p):
                raise ValueError(f"endpoint {p} outside box {self.lo}..{self.hi}")
        self.shape = tuple(h - l + 1 for l, h in zip(self.lo, self.hi))
        self.n_vertices = int(np.prod(self.shape))

    # -- constructors -------------------------------------------------------
    @classmethod
    def around(cls, v: Sequence[int], padding: int | None = None, d: int | None = None) -> "Region":
        """Bounding box of ``{0, v}`` inflated by ``padding`` on every side."""
        v = tuple(int(c) for c in v)
        if d is not None and len(v) != d:
            raise ValueError(f"target {v} has dimension {len(v)}, expected {d}")
        if len(v) < 2:
            raise ValueError("lattice dimension must be at least 2")
        pad = default_padding(v) if padding is None else int(padding)
        if pad < 0:
            raise ValueError("padding must be nonnegative")
        lo = tuple(min(0, c) - pad for c in v)
        hi = tuple(max(0, c) + pad for c in v)
        region = cls(lo, hi, (0,) * len(v), v)
        region.padding = pad
        return region

    @classmethod
    def box(cls, shape: Sequence[int], target: Sequence[int] | None = None) -> "Region":
        """Box of ``shape`` vertices with corner at the origin."""
        hi = tuple(int(s) - 1 for s in shape)
        return cls((0,) * len(hi), hi, (0,) * len(hi), target if target is not None else hi)

    def with_padding(self, padding: int) -> "Region":
        return Region.around(self.target, padding)

    def __repr__(self) -> str:
        return f"Region(lo={self.lo}, hi={self.hi}, origin={self.origin}, target={self.target})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Region) and (self.lo, self.hi, self.origin, self.target)
                == (other.lo, other.hi, other.origin, other.target))

    def __hash__(self) -> int:
        return hash((self.lo, self.hi, self.origin, self.target))

    # -- vertices -------------------------------------------------------------
    def contains(self, p: Sequence[int]) -> bool:
        return len(p) == self.d and all(l <= c <= h for c, l, h in zip(p, self.lo, self.hi))

    def vertex_index(self, p: Sequence[int]) -> int:
        if not self.contains(p):
            raise ValueError(f"vertex {tuple(p)} outside region {self.lo}..{self.hi}")
        return int(np.ravel_multi_index(tuple(c - l for c, l in zip(p, self.lo)), self.shape))

    def vertex_coords(self, idx) -> np.ndarray:
        return np.stack(np.unravel_index(idx, self.shape), axis=-1) + np.array(self.lo)

    @cached_property
    def boundary(self) -> np.ndarray:
        """Boolean mask of vertices on the box boundary."""
        coords = self.vertex_coords(np.arange(self.n_vertices))
        return np.any((coords == np.array(self.lo)) | (coords == np.array(self.hi)), axis=1)

    # -- edges ----------------------------------------------------------------
    @cached_property
    def _edge_tables(self):
        idx = np.arange(self.n_vertices).reshape(self.shape)
        strides = [int(np.prod(self.shape[a + 1:])) for a in range(self.d)]
        tails, axes, offsets = [], [], [0]
        for a in range(self.d):
            sl = [slice(None)] * self.d
            sl[a] = slice(0, self.shape[a] - 1)
            t = idx[tuple(sl)].ravel()
            tails.append(t)
            axes.append(np.full(t.size, a, dtype=np.int64))
            offsets.append(offsets[-1] + t.size)
        tail = np.concatenate(tails).astype(np.int64)
        axis = np.concatenate(axes)
        head = tail + np.array(strides, dtype=np.int64)[axis]
        return tail, head, axis, np.array(offsets), np.array(strides)

    @property
    def n_edges(self) -> int:
        return int(self._edge_tables[3][-1])

    @property
    def edge_tail(self) -> np.ndarray:
        return self._edge_tables[0]

    @property
    def edge_head(self) -> np.ndarray:
        return self._edge_tables[1]

    @property
    def edge_axis(self) -> np.ndarray:
        return self._edge_tables[2]

    @cached_property
    def edge_coords(self) -> np.ndarray:
        """``(E, d)`` base coordinates of every edge."""
        return self.vertex_coords(self.edge_tail)

    @cached_property
    def edge_counters(self) -> np.ndarray:
        """``(E, d + 1)`` integer keys (base coordinates, axis) for the RNG."""
        return np.column_stack([self.edge_coords, self.edge_axis]).astype(np.int64)

    def contains_edge(self, e: Edge) -> bool:
        return (0 <= e.axis < self.d and self.contains(e.base)
                and self.contains(e.head))

    def edge_id(self, e: Edge) -> int:
        if not self.contains_edge(e):
            raise ValueError(f"edge {e} outside region {self.lo}..{self.hi}")
        tail, _, _, offsets, _ = self._edge_tables
        sub = list(self.shape)
        sub[e.axis] -= 1
        local = np.ravel_multi_index(tuple(c - l for c, l in zip(e.base, self.lo)), sub)
        return int(offsets[e.axis] + local)

    def edge(self, eid: int) -> Edge:
        base = tuple(int(c) for c in self.edge_coords[eid])
        return Edge(base, int(self.edge_axis[eid]))

    def edges(self, eids) -> list[Edge]:
        return [self.edge(int(i)) for i in eids]

    def edge_between(self, a: int, b: int) -> int:
        """Edge id joining vertex indices ``a`` and ``b``."""
        ca, cb = self.vertex_coords(a), self.vertex_coords(b)
        return self.edge_id(Edge.between(ca, cb))

    # -- adjacency ------------------------------------------------------------
    @cached_property
    def csr_structure(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR layout ``(indptr, indices, edge_of_entry)``."""
        tail, head = self.edge_tail, self.edge_head
        eids = np.arange(self.n_edges, dtype=np.int64)
        rows = np.concatenate([tail, head])
        cols = np.concatenate([head, tail])
        ents = np.concatenate([eids, eids])
        order = np.lexsort((cols, rows))
        indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=self.n_vertices))])
        return indptr.astype(np.int32), cols[order].astype(np.int32), ents[order]

    @cached_property
    def neighbour_table(self) -> tuple[np.ndarray, np.ndarray]:
        """``(n, 2d)`` neighbour vertex ids and edge ids, ``-1`` padded."""
        nbr = np.full((self.n_vertices, 2 * self.d), -1, dtype=np.int64)
        nbe = np.full((self.n_vertices, 2 * self.d), -1, dtype=np.int64)
        tail, head, axis = self.edge_tail, self.edge_head, self.edge_axis
        eids = np.arange(self.n_edges)
        nbr[head, 2 * axis] = tail
        nbe[head, 2 * axis] = eids
        nbr[tail, 2 * axis + 1] = head
        nbe[tail, 2 * axis + 1] = eids
        return nbr, nbe


@dataclass(frozen=True, eq=False)
class WeightConfig:
    """Read-only assignment of a weight to every edge of a region."""

    region: Region
    weights: np.ndarray
    integral: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (self.region.n_edges,):
            raise ValueError(f"expected {self.region.n_edges} weights, got shape {w.shape}")
        if np.any(w < 0) or np.any(np.isnan(w)):
            raise ValueError("edge weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def constant(cls, region: Region, value: float) -> "WeightConfig":
        return cls(region, np.full(region.n_edges, float(value)), float(value).is_integer())

    def weight(self, e: Edge | int) -> float:
        eid = e if isinstance(e, (int, np.integer)) else self.region.edge_id(e)
        return float(self.weights[eid])

    def replaced(self, e: Edge | int, x: float) -> "WeightConfig":
        """The configuration with edge ``e`` set to ``x`` (``sigma_e^x``)."""
        eid = e if isinstance(e, (int, np.integer)) else self.region.edge_id(e)
        w = self.weights.copy()
        w[eid] = x
        return WeightConfig(self.region, w, self.integral and float(x).is_integer())

    def path_weight(self, eids) -> float:
        eids = np.asarray(eids, dtype=np.int64)
        if self.integral:
            return float(sum(int(w) for w in self.weights[eids]))
        return float(math.fsum(self.weights[eids]))


class DynamicalField:
    """Seeded realisation of ``(omega, omega', U)`` and replica streams.

    ``omega_t(e) = omega(e)`` if ``U(e) > t`` else ``omega'(e)``; replica
    ``i`` (1-based) uses its own ``(omega^(i), U^(i))`` in place of
    ``(omega', U)`` and shares ``omega``.
    """

    def __init__(self, seed: int, dist: WeightDistribution, region: Region, replica_count: int = 0):
        if replica_count < 0:
            raise ValueError("replica_count must be >= 0")
        self.seed = int(seed)
        self.dist = dist
        self.region = region
        self.replica_count = int(replica_count)
        self._cache: dict[tuple, np.ndarray] = {}

    def __repr__(self) -> str:
        return (f"DynamicalField(seed={self.seed}, dist={self.dist.spec!r}, "
                f"region={self.region!r}, replica_count={self.replica_count})")

    # -- raw streams ------------------------------------------------------------
    def stream(self, label: str, replica: int | None = None) -> np.ndarray:
        """Per-edge draws of one stream over the whole region (cached)."""
        key = (label, replica)
        if key not in self._cache:
            arr = self._draw(label, replica, self.region.edge_counters)
            arr.setflags(write=False)
            self._cache[key] = arr
        return self._cache[key]

    def _draw(self, label: str, replica: int | None, counters: np.ndarray) -> np.ndarray:
        if replica is not None:
            counters = np.column_stack([np.full(len(counters), replica, dtype=np.int64), counters])
        u = rng.uniforms(self.seed, label, counters)
        if label in (CLOCK, REPLICA_CLOCK):
            return u
        return np.asarray(sample(self.dist, u), dtype=np.float64)

    def _edge_draw(self, label: str, replica: int | None, e: Edge) -> float:
        if not self.region.contains_edge(e):
            raise ValueError(f"edge {e} outside region {self.region.lo}..{self.region.hi}")
        counters = np.array([[*e.base, e.axis]], dtype=np.int64)
        return float(self._draw(label, replica, counters)[0])

    def _check_replica(self, i: int) -> None:
        if not 1 <= i <= self.replica_count:
            raise IndexError(f"replica index {i} outside 1..{self.replica_count}")

    # -- single-edge queries ----------------------------------------------------
    def omega(self, e: Edge) -> float:
        return self._edge_draw(OMEGA, None, e)

    def omega_prime(self, e: Edge) -> float:
        return self._edge_draw(OMEGA_PRIME, None, e)

    def clock(self, e: Edge) -> float:
        return self._edge_draw(CLOCK, None, e)

    def replica_clock(self, i: int, e: Edge) -> float:
        self._check_replica(i)
        return self._edge_draw(REPLICA_CLOCK, i, e)

    def weight_at(self, e: Edge, t: float) -> float:
        """``omega_t(e)``: resampled iff ``U(e) <= t``."""
        if self.clock(e) > t:
            return self.omega(e)
        return self.omega_prime(e)

    def replica_weight_at(self, i: int, e: Edge, t: float) -> float:
        self._check_replica(i)
        if self._edge_draw(REPLICA_CLOCK, i, e) > t:
            return self.omega(e)
        return self._edge_draw(REPLICA_OMEGA, i, e)

    # -- whole-region slices -------------------------------------------------------
    def config_slice(self, t: float, replica: int | None = None) -> WeightConfig:
        """``omega_t`` (or ``omega_t^(replica)``) over the whole region."""
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {t}")
        base = self.stream(OMEGA)
        if replica is None:
            clock, fresh = self.stream(CLOCK), self.stream(OMEGA_PRIME)
        else:
            self._check_replica(replica)
            clock, fresh = self.stream(REPLICA_CLOCK, replica), self.stream(REPLICA_OMEGA, replica)
        weights = np.where(clock > t, base, fresh)
        return WeightConfig(self.region, weights, self.dist.is_integer_atomic)

    def with_region(self, region: Region) -> "DynamicalField":
        return DynamicalField(self.seed, self.dist, region, self.replica_count)
