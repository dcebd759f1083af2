"""Exact finite-coordinate oracle for atomic weight laws.

For ``f`` of ``m`` i.i.d. coordinates and a resampling probability ``s``,

    Q_s(f) = E[f(w_0) f(w_s)] = sum_k M_k s^k (1-s)^(m-k),
    M_k    = sum_{|S|=k} E[(E[f | coordinates outside S])^2],

so ``Q`` is a polynomial of degree ``m`` whose Bernstein coefficients are the
``M_k``.  Each ``M_k`` comes from one pass over the table of ``f`` that
either averages a coordinate out or keeps it with weight ``sqrt(p)``.

The module also holds the three-stage coupling behind the monotonicity of
``Q``, the replica identity ``s = 2t - t^2``, and first-passage functions on
tiny boxes built by path enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import WeightDistribution, atomic
from .field import Region
from .rng import uniforms

__all__ = [
    "MAX_COORDS",
    "MAX_TABLE",
    "GuardError",
    "FiniteFunction",
    "PolynomialInS",
    "CouplingParams",
    "q_polynomial",
    "q_value_bruteforce",
    "influence_polynomial",
    "influence_exact",
    "total_influence_polynomial",
    "verify_cov_formula",
    "coupling_draw",
    "effective_time",
    "box_paths",
    "passage_time_function",
    "geodesic_indicator_function",
    "corpus",
    "CorpusItem",
    "ATOM_SETS",
    "IntegerBound",
    "integer_influence_bounds",
]

MAX_COORDS = 12
MAX_TABLE = 10**6


class GuardError(ValueError):
    """Exhaustive enumeration refused: too many coordinates or outcomes."""


# ---------------------------------------------------------------------------
# functions and polynomials


@dataclass(frozen=True)
class FiniteFunction:
    """A real function of ``m`` coordinates.

    ``fn`` maps an ``(N, m)`` array of coordinate values to ``N`` reals.
    """

    m: int
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "f"

    def evaluate(self, omega) -> float:
        w = np.asarray(omega, dtype=float).reshape(1, self.m)
        return float(np.asarray(self.fn(w))[0])

    def table(self, dist: WeightDistribution) -> np.ndarray:
        """Values on the atom grid, shape ``(K,) * m``."""
        values = _guard(self.m, dist)
        K = len(values)
        grid = np.array(list(itertools.product(values, repeat=self.m)), dtype=float)
        if self.m == 0:
            grid = grid.reshape(1, 0)
        out = np.asarray(self.fn(grid), dtype=float).reshape((K,) * self.m)
        return out

    @classmethod
    def constant(cls, m: int, c: float) -> "FiniteFunction":
        return cls(m, lambda w: np.full(len(w), float(c)), f"const({c})")


def _guard(m: int, dist: WeightDistribution) -> np.ndarray:
    if not dist.is_atomic:
        raise GuardError("the oracle needs an atomic weight law")
    values = dist.support_values
    if m > MAX_COORDS:
        raise GuardError(f"m={m} exceeds {MAX_COORDS} coordinates")
    if len(values) ** m > MAX_TABLE:
        raise GuardError(f"{len(values)}^{m} outcomes exceed {MAX_TABLE}")
    return values


@dataclass(frozen=True)
class PolynomialInS:
    """``sum_k coefficients[k] s^k`` together with its Bernstein form."""

    coefficients: np.ndarray
    bernstein: np.ndarray = field(default=None, compare=False)

    @classmethod
    def from_bernstein(cls, b: Sequence[float]) -> "PolynomialInS":
        b = np.asarray(b, dtype=float)
        m = len(b) - 1
        c = np.zeros(m + 1)
        # s^k (1-s)^(m-k) = sum_j C(m-k, j) (-1)^j s^(k+j)
        for k in range(m + 1):
            for j in range(m - k + 1):
                c[k + j] += b[k] * math.comb(m - k, j) * (-1) ** j
        return cls(c, b)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.bernstein is not None:
            m = len(self.bernstein) - 1
            k = np.arange(m + 1)
            basis = s[..., None] ** k * (1.0 - s[..., None]) ** (m - k)
            out = basis @ self.bernstein
        else:
            out = np.polynomial.polynomial.polyval(s, self.coefficients)
        return out[()] if np.ndim(out) == 0 else out

    def __add__(self, other: "PolynomialInS") -> "PolynomialInS":
        n = max(len(self.coefficients), len(other.coefficients))
        c = np.zeros(n)
        c[:len(self.coefficients)] += self.coefficients
        c[:len(other.coefficients)] += other.coefficients
        b = None
        if (self.bernstein is not None and other.bernstein is not None
                and len(self.bernstein) == len(other.bernstein)):
            b = self.bernstein + other.bernstein
        return PolynomialInS(c, b)

    def scaled(self, a: float) -> "PolynomialInS":
        return PolynomialInS(a * self.coefficients,
                             None if self.bernstein is None else a * self.bernstein)

    def integral(self, lo: float, hi: float) -> float:
        """Exact ``int_lo^hi`` from the monomial coefficients."""
        k = np.arange(len(self.coefficients))
        anti = self.coefficients / (k + 1)
        return float(np.sum(anti * (hi ** (k + 1) - lo ** (k + 1))))


def _subset_moments(table: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``M_k = sum_{|S|=k} E[(E[f | coords outside S])^2]`` for ``k = 0..m``."""
    m = table.ndim
    M = np.zeros(m + 1)
    sqrt_p = np.sqrt(p)

    # unprocessed axes lead; kept axes are rotated to the back
    def rec_axes(tensor: np.ndarray, k: int, axis: int = 0) -> None:
        if axis == m:
            M[k] += float(np.sum(tensor * tensor))
            return
        # resampled: average the leading unprocessed axis out
        rec_axes(np.tensordot(p, tensor, axes=(0, 0)), k + 1, axis + 1)
        # kept: weight it and rotate it behind the unprocessed axes
        kept = np.moveaxis(tensor * sqrt_p.reshape((-1,) + (1,) * (tensor.ndim - 1)), 0, -1)
        rec_axes(kept, k, axis + 1)

    rec_axes(np.asarray(table, dtype=float), 0)
    return M


def q_polynomial(f: FiniteFunction, dist: WeightDistribution) -> PolynomialInS:
    """``s -> Q_s(f)`` as an exact polynomial of degree ``m``."""
    table = f.table(dist)
    return PolynomialInS.from_bernstein(_subset_moments(table, dist.atom_probs))


def q_value_bruteforce(f: FiniteFunction, dist: WeightDistribution, s: float) -> float:
    """``Q_s(f)`` by summing over every ``(w, w', S)``; tiny ``m`` only."""
    values, probs = _guard(2 * f.m, dist), dist.atom_probs
    m, K = f.m, len(values)
    total = 0.0
    for S in itertools.product((0, 1), repeat=m):
        weight = math.prod(s if b else 1.0 - s for b in S)
        if weight == 0.0:
            continue
        for a in itertools.product(range(K), repeat=m):
            pa = math.prod(probs[i] for i in a)
            fa = f.evaluate([values[i] for i in a])
            for b in itertools.product(range(K), repeat=m):
                if any(b[i] != a[i] and not S[i] for i in range(m)):
                    continue
                pb = math.prod(probs[b[i]] for i in range(m) if S[i])
                total += weight * pa * pb * fa * f.evaluate([values[i] for i in b])
    return total


def _difference_tables(table: np.ndarray, p: np.ndarray, i: int) -> list[np.ndarray]:
    """``D_i^x f`` for each atom ``x``, with axis ``i`` removed."""
    moved = np.moveaxis(table, i, 0)
    mean = np.tensordot(p, moved, axes=(0, 0))
    return [moved[x] - mean for x in range(len(p))]


def influence_polynomial(f: FiniteFunction, i: int, dist: WeightDistribution) -> PolynomialInS:
    """``s -> Inf_i(f(w_0), f(w_s)) = sum_x p_x Q_s(D_i^x f)``.

    The difference tables do not depend on coordinate ``i``, so their ``Q``
    is computed over the remaining ``m - 1`` coordinates.
    """
    if not 0 <= i < f.m:
        raise IndexError(f"coordinate {i} outside 0..{f.m - 1}")
    table = f.table(dist)
    p = dist.atom_probs
    bern = np.zeros(f.m)
    for px, Dx in zip(p, _difference_tables(table, p, i)):
        bern += px * _subset_moments(Dx, p)
    return PolynomialInS.from_bernstein(bern)


def influence_exact(f: FiniteFunction, i: int, dist: WeightDistribution, s: float) -> float:
    return float(influence_polynomial(f, i, dist)(s))


def total_influence_polynomial(f: FiniteFunction, dist: WeightDistribution) -> PolynomialInS:
    total = influence_polynomial(f, 0, dist)
    for i in range(1, f.m):
        total = total + influence_polynomial(f, i, dist)
    return total


def verify_cov_formula(f: FiniteFunction, dist: WeightDistribution, t: float) -> float:
    """``(Q_t - Q_1) - int_t^1 sum_i Inf_i(s) ds``; zero up to rounding."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    Q = q_polynomial(f, dist)
    lhs = float(Q(t)) - float(Q(1.0))
    rhs = total_influence_polynomial(f, dist).integral(t, 1.0)
    return lhs - rhs


# ---------------------------------------------------------------------------
# couplings


def effective_time(t: float) -> float:
    """Resampling probability between two independent replicas at time ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    return 2.0 * t - t * t


@dataclass(frozen=True)
class CouplingParams:
    s: float
    t: float

    def __post_init__(self):
        if not 0.0 <= self.s <= self.t <= 1.0:
            raise ValueError(f"need 0 <= s <= t <= 1, got s={self.s}, t={self.t}")

    @property
    def p(self) -> float:
        return 1.0 - math.sqrt(1.0 - self.s)

    @property
    def q(self) -> float:
        return 1.0 - math.sqrt(1.0 - self.t)

    @property
    def rho(self) -> float:
        p = self.p
        return 0.0 if p == 1.0 else (self.q - p) / (1.0 - p)


def coupling_draw(params: CouplingParams, dist: WeightDistribution, m: int, seed: int,
                  n: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``n`` draws of ``(X, Y, Z)``, each of shape ``(n, m)``.

    ``V'`` takes each coordinate of ``W`` with probability ``rho``; ``X`` and
    ``Y`` take coordinates of ``W'`` and ``W''`` from ``V'`` with probability
    ``p``; ``Z`` takes coordinates of ``W'''`` from ``V`` with probability ``q``.
    """
    idx = np.indices((n, m)).reshape(2, -1).T

    def u(label: str) -> np.ndarray:
        return uniforms(seed, label, idx).reshape(n, m)

    V, W, W1, W2, W3 = (dist.sample(u(lbl)) for lbl in ("V", "W", "W1", "W2", "W3"))
    Vp = np.where(u("cV'") < params.rho, W, V)
    X = np.where(u("cX") < params.p, W1, Vp)
    Y = np.where(u("cY") < params.p, W2, Vp)
    Z = np.where(u("cZ") < params.q, W3, V)
    return X, Y, Z


# ---------------------------------------------------------------------------
# first-passage functions on tiny boxes


def box_paths(region: Region) -> np.ndarray:
    """Incidence matrix (paths x edges) of every simple origin-target path."""
    nbr, nbe = region.neighbour_table
    s = region.vertex_index(region.origin)
    t = region.vertex_index(region.target)
    rows: list[list[int]] = []
    seen = np.zeros(region.n_vertices, dtype=bool)

    def walk(x: int, edges: list[int]) -> None:
        if x == t:
            rows.append(list(edges))
            return
        seen[x] = True
        for y, e in zip(nbr[x], nbe[x]):
            if y >= 0 and not seen[y]:
                edges.append(int(e))
                walk(int(y), edges)
                edges.pop()
        seen[x] = False

    walk(s, [])
    P = np.zeros((len(rows), region.n_edges))
    for k, row in enumerate(rows):
        P[k, row] = 1.0
    return P


def passage_time_function(region: Region) -> FiniteFunction:
    """``T(origin, target)`` as a function of the region's edge weights."""
    P = box_paths(region)
    return FiniteFunction(region.n_edges, lambda w: np.min(P @ np.asarray(w).T, axis=0),
                          f"T{tuple(region.shape)}")


def geodesic_indicator_function(region: Region, e: int, rel_tol: float = 1e-12) -> FiniteFunction:
    """``1{e lies on every optimal path}``."""
    P = box_paths(region)

    def fn(w):
        lengths = P @ np.asarray(w).T
        T = lengths.min(axis=0)
        tight = lengths <= T + rel_tol * np.maximum(1.0, np.abs(T))
        uses = P[:, e][:, None] > 0
        return np.all(~tight | uses, axis=0).astype(float)

    return FiniteFunction(region.n_edges, fn, f"1[{e} in pi]")


# ---------------------------------------------------------------------------
# corpus


ATOM_SETS = {
    "halves12": atomic({1: 0.5, 2: 0.5}),
    "zero-one": atomic({0: 0.3, 1: 0.7}),
    "three": atomic({1: 0.2, 2: 0.5, 4: 0.3}),
}


@dataclass(frozen=True)
class CorpusItem:
    function: FiniteFunction
    kind: str


def _random_table(m: int, seed: int) -> FiniteFunction:
    """A pseudo-random total function: hashed coordinate values."""

    def fn(w):
        keys = np.round(np.asarray(w, dtype=float) * 1024).astype(np.int64)
        return 4.0 * uniforms(seed, "corpus-table", keys) - 2.0

    return FiniteFunction(m, fn, f"table(m={m},seed={seed})")


def _monotone(m: int, seed: int, variant: int) -> FiniteFunction:
    rs = np.random.default_rng(seed)
    a = rs.uniform(0.2, 1.5, m)
    if variant == 0:
        return FiniteFunction(m, lambda w: np.asarray(w) @ a, f"linear(m={m})")
    if variant == 1:
        return FiniteFunction(m, lambda w: np.max(np.asarray(w) * a, axis=1), f"max(m={m})")
    if variant == 2:
        return FiniteFunction(m, lambda w: np.min(np.asarray(w) * a, axis=1), f"min(m={m})")
    if variant == 3:
        thr = float(np.sum(a)) * 1.2
        return FiniteFunction(m, lambda w: (np.asarray(w) @ a > thr).astype(float),
                              f"threshold(m={m})")
    return FiniteFunction(m, lambda w: np.sqrt(1.0 + np.asarray(w) @ a) + np.prod(1.0 + np.asarray(w), axis=1) * 0.1,
                          f"sqrt-prod(m={m})")


def corpus(seed: int = 2024) -> list[CorpusItem]:
    """Fifty test functions: random tables, monotone maps and box passage times."""
    items: list[CorpusItem] = []
    items.append(CorpusItem(FiniteFunction(1, lambda w: np.asarray(w)[:, 0], "identity"), "table"))
    items.append(CorpusItem(FiniteFunction.constant(3, 1.7), "table"))
    for j in range(22):
        m = 1 + j % 6
        items.append(CorpusItem(_random_table(m, seed + j), "table"))
    for j in range(20):
        m = 2 + j % 5
        items.append(CorpusItem(_monotone(m, seed + 100 + j, j % 5), "monotone"))
    sq = Region.box((2, 2))
    rect = Region.box((2, 3))
    rect_side = Region.box((3, 2))
    items.append(CorpusItem(passage_time_function(sq), "passage"))
    items.append(CorpusItem(passage_time_function(rect), "passage"))
    items.append(CorpusItem(passage_time_function(rect_side), "passage"))
    items.append(CorpusItem(passage_time_function(Region.box((2, 2), target=(1, 0))), "passage"))
    items.append(CorpusItem(passage_time_function(Region.box((2, 3), target=(1, 0))), "passage"))
    items.append(CorpusItem(geodesic_indicator_function(sq, 0), "passage"))
    assert len(items) == 50
    return items


# ---------------------------------------------------------------------------
# integer-weight two-sided bound


@dataclass(frozen=True)
class IntegerBound:
    edge: int
    t: float
    lower: float
    influence: float
    upper: float
    p_joint: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.influence <= self.upper


def integer_influence_bounds(region: Region, dist: WeightDistribution,
                             t_values: Sequence[float] = (0.0, 0.5)) -> list[IntegerBound]:
    """Exact ``Inf_e(T_0, T_t)`` against ``c P(e in pi_0 and pi_t)`` for every edge.

    Lower constant ``F(r)(1-F(r))^2``; upper constant ``F(r)^-2 E[(mu+w)^2]``.
    """
    if not dist.is_integer_atomic:
        raise GuardError("the integer bound needs an integer-valued atomic law")
    T = passage_time_function(region)
    Fr = float(dist.atom_probs[0])
    c_low = Fr * (1.0 - Fr) ** 2
    c_up = (3 * dist.mu ** 2 + dist.m2) / Fr ** 2
    out = []
    for e in range(region.n_edges):
        inf_poly = influence_polynomial(T, e, dist)
        q_ind = q_polynomial(geodesic_indicator_function(region, e), dist)
        for t in t_values:
            pj = float(q_ind(t))
            out.append(IntegerBound(e, float(t), c_low * pj, float(inf_poly(t)), c_up * pj, pj))
    return out
