"""Edge profiles, co-influences and Monte Carlo estimators.

For an edge ``e`` with replacement values ``(A, B)`` the centred response
``x -> T o sigma_e^x - int T o sigma_e^y dF(y)`` is the piecewise-linear
profile ``D(x) = H - (Z - x)_+`` with

    Z = max(r, A - B),   H = E[(Z - w)_+],   Y = max(r, Z - H).

Everything here is built on that closed form and on the partial moments
of the weight law.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import geodesy
from .distributions import WeightDistribution, expect_positive_part, partial_moment, cdf, sample
from .field import DynamicalField, Edge, Region, WeightConfig, default_padding
from .parallel import ordered_map
from .rng import derive_seed

__all__ = [
    "EdgeProfile",
    "CoInfluenceTerm",
    "LemmaCheck",
    "Estimate",
    "EstimatorReport",
    "CensoredEdge",
    "CensoringBudgetExceeded",
    "edge_profile",
    "profile_from_values",
    "profile_arrays",
    "co_influence_term",
    "co_influence_values",
    "negative_overlap_values",
    "check_lemma_suite",
    "lemma_slacks",
    "default_eps",
    "default_gamma",
    "recomputed_D",
    "estimate",
    "replicate",
    "QUANTITIES",
    "LEMMA_TOL",
    "EdgeBoundEstimates",
    "edge_bound_estimates",
    "paired_difference_se",
]

LEMMA_TOL = 1e-12
CENSOR_BUDGET = 0.01
MAX_RETRIES = 2

QUANTITIES = frozenset({"var_T", "mean_T", "cov", "corr", "overlap", "coinfluence_sum",
                        "path_length", "low_weight"})
DEFAULT_QUANTITIES = frozenset({"var_T", "mean_T", "cov", "corr", "overlap"})


class CensoredEdge(ValueError):
    """Deleting the edge disconnects the endpoints inside the region."""


class CensoringBudgetExceeded(RuntimeError):
    """More than the allowed fraction of replicates touched the boundary."""


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class EdgeProfile:
    A: float
    B: float
    Z: float
    H: float
    Y: float
    r: float

    @property
    def is_zero(self) -> bool:
        return self.H == 0.0

    def D(self, x):
        """``H - (Z - x)_+``, vectorised over ``x``."""
        x = np.asarray(x, dtype=float)
        out = self.H - np.maximum(self.Z - x, 0.0)
        return out[()] if out.ndim == 0 else out


def profile_from_values(A: float, B: float, dist: WeightDistribution) -> EdgeProfile:
    if not np.isfinite(A):
        raise CensoredEdge("replacement distance is infinite inside the region")
    Z = max(dist.r, A - B)
    H = float(expect_positive_part(dist, Z))
    Y = max(dist.r, Z - H)
    return EdgeProfile(float(A), float(B), float(Z), H, float(Y), dist.r)


def edge_profile(config: WeightConfig, e: Edge | int, dist: WeightDistribution,
                 u=None, v=None) -> EdgeProfile:
    rv = geodesy.replacement_values(config, e, u, v)
    return profile_from_values(rv.A, rv.B, dist)


def profile_arrays(A: np.ndarray, B: np.ndarray, dist: WeightDistribution):
    """Vectorised ``(Z, H, Y)`` for arrays of replacement values."""
    Z = np.maximum(dist.r, np.asarray(A) - np.asarray(B))
    H = np.asarray(expect_positive_part(dist, Z), dtype=float)
    Y = np.maximum(dist.r, Z - H)
    return Z, H, Y


def recomputed_D(config: WeightConfig, e: Edge | int, dist: WeightDistribution, x,
                 u=None, v=None) -> np.ndarray:
    """``T o sigma_e^x - int T o sigma_e^y dF(y)`` by fresh shortest paths.

    The first term reruns the shortest-path search on the modified
    configuration; the average uses ``E[min(A, B + w)]`` through partial
    moments, with ``(A, B)`` from per-edge deletion.
    """
    region = config.region
    eid = e if isinstance(e, (int, np.integer)) else region.edge_id(e)
    rv = geodesy.replacement_values(config, eid, u, v)
    c = rv.A - rv.B
    # E[min(A, B + w)] = B + mu - E[(w - c)_+]
    excess = dist.mu - c + float(expect_positive_part(dist, c))
    mean_T = rv.B + dist.mu - excess
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for k, xv in enumerate(xs):
        T_x, _, _ = geodesy.shortest_path(config.replaced(eid, float(xv)), u, v)
        out[k] = T_x - mean_T
    return out


# ---------------------------------------------------------------------------
# co-influence integrand


@dataclass(frozen=True)
class CoInfluenceTerm:
    value: float


def co_influence_values(dist: WeightDistribution, Z0, H0, Zt, Ht) -> np.ndarray:
    """``int (H0 - (Z0-x)_+)(Ht - (Zt-x)_+) dF(x)``, vectorised.

    Below ``min(Z0, Zt)`` both factors are affine in ``x``; between the two
    thresholds one is flat; above both the product is ``H0*Ht``.
    """
    Z0, H0, Zt, Ht = (np.asarray(a, dtype=float) for a in (Z0, H0, Zt, Ht))
    c0, ct = H0 - Z0, Ht - Zt
    first = Z0 <= Zt
    a = np.where(first, Z0, Zt)
    b = np.where(first, Zt, Z0)
    h_small = np.where(first, H0, Ht)
    c_big = np.where(first, ct, c0)
    Fa, M1a, M2a = (np.asarray(partial_moment(dist, k, a), dtype=float) for k in (0, 1, 2))
    Fb, M1b = (np.asarray(partial_moment(dist, k, b), dtype=float) for k in (0, 1))
    low = c0 * ct * Fa + (c0 + ct) * M1a + M2a
    mid = h_small * (c_big * (Fb - Fa) + (M1b - M1a))
    high = H0 * Ht * (1.0 - Fb)
    out = low + mid + high
    return out[()] if out.ndim == 0 else out


def co_influence_term(p0: EdgeProfile, pt: EdgeProfile, dist: WeightDistribution) -> CoInfluenceTerm:
    return CoInfluenceTerm(float(co_influence_values(dist, p0.Z, p0.H, pt.Z, pt.H)))


def negative_overlap_values(dist: WeightDistribution, Z0, H0, Zt, Ht) -> np.ndarray:
    """``int (D0)_- (Dt)_- dF``; ``(D)_-`` is ``(Z - H - x)_+``."""
    y0 = np.asarray(Z0, dtype=float) - np.asarray(H0, dtype=float)
    yt = np.asarray(Zt, dtype=float) - np.asarray(Ht, dtype=float)
    c = np.minimum(y0, yt)
    F, M1, M2 = (np.asarray(partial_moment(dist, k, c), dtype=float) for k in (0, 1, 2))
    out = y0 * yt * F - (y0 + yt) * M1 + M2
    out = np.where(c > dist.r, out, 0.0)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# deterministic lemma checks


@dataclass(frozen=True)
class LemmaCheck:
    lemma: str
    status: str  # "pass", "fail" or "skip"
    slack: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def default_eps(dist: WeightDistribution, probes: int = 64) -> float:
    """Largest probe ``eps`` with ``F(r + eps) <= 1/2``."""
    span = float(sample(dist, 0.75)) - dist.r
    if span <= 0:
        span = dist.quantile_upper() - dist.r
    grid = dist.r + span * np.arange(1, probes + 1) / probes
    ok = np.nonzero(np.asarray(cdf(dist, grid)) <= 0.5)[0]
    if len(ok) == 0:
        return float("nan")
    return float(grid[ok[-1]] - dist.r)


def default_gamma(dist: WeightDistribution, eps: float | None = None) -> float:
    eps = default_eps(dist) if eps is None else eps
    if not np.isfinite(eps):
        return float("nan")
    return dist.r + min(0.49, eps)


def _eps_skip(dist: WeightDistribution, eps: float) -> str:
    if not (np.isfinite(eps) and eps > 0):
        return "eps must be positive"
    if float(cdf(dist, dist.r + eps)) > 0.5:
        return "F(r+eps) > 1/2"
    return ""


def _gamma_skip(dist: WeightDistribution, gamma: float) -> str:
    if not (np.isfinite(gamma) and dist.r < gamma < dist.r + 0.5):
        return "gamma outside (r, r+1/2)"
    if float(cdf(dist, gamma)) > 0.5:
        return "F(gamma) > 1/2"
    return ""


def lemma_slacks(dist: WeightDistribution, Z0, H0, Zt, Ht, eps: float, gamma: float,
                 coinfluence=None) -> dict[str, np.ndarray]:
    """Signed slacks of the three per-configuration inequalities, vectorised.

    A negative slack is a violation; premises that do not hold give slack 0.
    Entries are ``None`` when the parameter check fails.
    ``coinfluence`` overrides the left side of the positive-part check.
    """
    Z0, H0, Zt, Ht = (np.asarray(a, dtype=float) for a in (Z0, H0, Zt, Ht))
    r = dist.r
    lhs = co_influence_values(dist, Z0, H0, Zt, Ht) if coinfluence is None else coinfluence
    out: dict[str, np.ndarray | None] = {
        "positive_part": np.asarray(lhs - negative_overlap_values(dist, Z0, H0, Zt, Ht)),
        "delta_bd": None,
        "H": None,
    }
    Y0, Yt = np.maximum(r, Z0 - H0), np.maximum(r, Zt - Ht)
    if not _eps_skip(dist, eps):
        s0 = np.where(Z0 >= r + eps, Y0 - (r + eps / 2), 0.0)
        st = np.where(Zt >= r + eps, Yt - (r + eps / 2), 0.0)
        out["delta_bd"] = np.minimum(s0, st)
    if not _gamma_skip(dist, gamma):
        s0 = np.where(Z0 <= gamma, np.asarray(cdf(dist, Y0)) - H0, 0.0)
        st = np.where(Zt <= gamma, np.asarray(cdf(dist, Yt)) - Ht, 0.0)
        out["H"] = np.minimum(s0, st)
    return out


def _tol(*scales) -> float:
    return LEMMA_TOL * max(1.0, *(abs(float(s)) for s in scales))


def check_lemma_suite(p0: EdgeProfile, pt: EdgeProfile, dist: WeightDistribution,
                      eps: float | None = None, gamma: float | None = None,
                      coinfluence: float | None = None) -> list[LemmaCheck]:
    """Evaluate the positive-part, delta and H inequalities on one profile pair."""
    eps = default_eps(dist) if eps is None else eps
    gamma = default_gamma(dist, eps) if gamma is None else gamma
    sl = lemma_slacks(dist, p0.Z, p0.H, pt.Z, pt.H, eps, gamma, coinfluence)
    tol = _tol(p0.Z, pt.Z, p0.H, pt.H)
    checks = []
    for name, skip in (("positive_part", ""), ("delta_bd", _eps_skip(dist, eps)),
                       ("H", _gamma_skip(dist, gamma))):
        if skip:
            checks.append(LemmaCheck(name, "skip", float("nan"), skip))
            continue
        s = float(sl[name])
        checks.append(LemmaCheck(name, "pass" if s >= -tol else "fail", s))
    return checks


# ---------------------------------------------------------------------------
# estimates and reports


@dataclass
class Estimate:
    t: float
    estimate: float
    stderr: float
    n: int
    censored: int = 0
    unclipped: float | None = None
    # per-replicate linearisation, so that SE = sd(influence) / sqrt(n)
    influence: np.ndarray | None = field(default=None, repr=False, compare=False)
    replicates: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {"t": self.t, "estimate": self.estimate, "stderr": self.stderr, "n": self.n,
             "censored": self.censored}
        if self.unclipped is not None:
            d["unclipped"] = self.unclipped
        return d


def paired_difference_se(a: Estimate, b: Estimate) -> float:
    """Standard error of ``a - b`` using the common-random-number pairing."""
    if (a.influence is not None and b.influence is not None and a.replicates is not None
            and b.replicates is not None and np.array_equal(a.replicates, b.replicates)
            and a.n >= 2):
        return float(np.std(a.influence - b.influence, ddof=1) / math.sqrt(a.n))
    return math.hypot(a.stderr, b.stderr)


@dataclass
class EstimatorReport:
    n_samples: int
    t_grid: tuple[float, ...]
    entries: dict[str, list[Estimate]]
    censored_count: dict[float, int]
    meta: dict = field(default_factory=dict)
    samples: "ReplicateBatch | None" = field(default=None, repr=False, compare=False)

    def get(self, quantity: str, t: float = 0.0) -> Estimate:
        for est in self.entries[quantity]:
            if est.t == t:
                return est
        raise KeyError(f"no {quantity} estimate at t={t}")

    def series(self, quantity: str) -> list[Estimate]:
        return self.entries[quantity]

    def to_json_dict(self) -> dict:
        return {q: [e.to_dict() for e in ests] for q, ests in sorted(self.entries.items())}

    def to_json(self) -> str:
        payload = {"meta": self.meta, "n_samples": self.n_samples,
                   "censored_count": {repr(t): c for t, c in sorted(self.censored_count.items())},
                   "quantities": self.to_json_dict()}
        return json.dumps(payload, sort_keys=True, indent=2)

    CSV_COLUMNS = ("quantity", "t", "estimate", "stderr", "n_samples", "censored")

    def csv_rows(self) -> list[tuple]:
        rows = []
        for q, ests in sorted(self.entries.items()):
            for e in ests:
                rows.append((q, e.t, e.estimate, e.stderr, e.n, e.censored))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.CSV_COLUMNS)
        for row in self.csv_rows():
            w.writerow([_fmt_cell(c) for c in row])
        return buf.getvalue()


def _fmt_cell(c) -> str:
    if hasattr(c, "item"):
        c = c.item()
    if isinstance(c, float):
        return repr(c)
    return str(c)


def _mean_estimate(t: float, x: np.ndarray, idx: np.ndarray, censored: int) -> Estimate:
    n = len(x)
    if n == 0:
        return Estimate(t, float("nan"), float("nan"), 0, censored)
    m = float(np.mean(x))
    inf = x - m
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return Estimate(t, m, se, n, censored, influence=inf, replicates=idx)


def _var_estimate(t: float, x: np.ndarray, idx: np.ndarray, censored: int) -> Estimate:
    n = len(x)
    if n < 2:
        return Estimate(t, float("nan"), float("nan"), n, censored)
    sq = (x - x.mean()) ** 2
    var = float(sq.sum() / (n - 1))
    inf = sq - sq.mean()
    return Estimate(t, var, float(np.std(sq, ddof=1) / math.sqrt(n)), n, censored,
                    influence=inf, replicates=idx)


def _cov_estimate(t: float, x: np.ndarray, y: np.ndarray, idx: np.ndarray, censored: int) -> Estimate:
    n = len(x)
    if n < 2:
        return Estimate(t, float("nan"), float("nan"), n, censored)
    prod = (x - x.mean()) * (y - y.mean())
    cov = float(prod.sum() / (n - 1))
    inf = prod - prod.mean()
    return Estimate(t, cov, float(np.std(prod, ddof=1) / math.sqrt(n)), n, censored,
                    influence=inf, replicates=idx)


def _corr_estimate(t: float, x: np.ndarray, y: np.ndarray, idx: np.ndarray, censored: int) -> Estimate:
    n = len(x)
    if n < 2:
        return Estimate(t, float("nan"), float("nan"), n, censored)
    xc, yc = x - x.mean(), y - y.mean()
    a, b, c = float(np.mean(xc * xc)), float(np.mean(yc * yc)), float(np.mean(xc * yc))
    if a == 0.0 or b == 0.0:
        # degenerate (deterministic T): identical slices are perfectly correlated
        rho = 1.0 if np.array_equal(x, y) else float("nan")
        return Estimate(t, rho, 0.0, n, censored, unclipped=rho,
                        influence=np.zeros(n), replicates=idx)
    rho = c / math.sqrt(a * b)
    inf = (xc * yc - c) / math.sqrt(a * b) - 0.5 * rho * ((xc * xc - a) / a + (yc * yc - b) / b)
    se = float(np.std(inf, ddof=1) / math.sqrt(n))
    return Estimate(t, float(min(1.0, max(-1.0, rho))), se, n, censored, unclipped=rho,
                    influence=inf, replicates=idx)


# ---------------------------------------------------------------------------
# one replicate


@dataclass
class ReplicateResult:
    T0: float
    Tt: np.ndarray
    overlap: np.ndarray
    coinfluence: np.ndarray
    touched0: bool
    touched_t: np.ndarray
    path_length: int
    low_weight: int
    padding: int


@dataclass
class ReplicateBatch:
    index: np.ndarray
    T0: np.ndarray
    Tt: np.ndarray          # (n, len(t_grid))
    overlap: np.ndarray
    coinfluence: np.ndarray
    censored0: np.ndarray
    censored_t: np.ndarray
    path_length: np.ndarray
    low_weight: np.ndarray
    padding: np.ndarray


def _run_once(field: DynamicalField, t_grid: Sequence[float], quantities: frozenset,
              low_eps: float) -> ReplicateResult:
    dist = field.dist
    need_pi = bool({"overlap", "coinfluence_sum", "path_length", "low_weight"} & quantities)
    need_t = bool({"cov", "corr", "overlap", "coinfluence_sum"} & quantities)
    need_ab = "coinfluence_sum" in quantities
    c0 = field.config_slice(0.0)
    nt = len(t_grid)
    Tt = np.full(nt, np.nan)
    overlap = np.zeros(nt)
    coinf = np.zeros(nt)
    touched_t = np.zeros(nt, dtype=bool)
    path_len = low = 0
    if need_pi or need_ab:
        an0 = geodesy.analyze(c0)
        T0, touched0 = an0.T, an0.result.touched_boundary
        pi0 = an0.result.pi
        path_len = len(pi0)
        low = int(np.count_nonzero(c0.weights[pi0] <= dist.r + low_eps)) if low_eps >= 0 else 0
        if need_ab:
            Z0, H0, _ = profile_arrays(an0.A, an0.B, dist)
    else:
        T0, _, touched0 = geodesy.shortest_path(c0)
    if need_t:
        for k, t in enumerate(t_grid):
            if t == 0.0:
                Tt[k], touched_t[k] = T0, touched0
                if need_pi:
                    overlap[k] = len(pi0)
                if need_ab:
                    coinf[k] = _coinf_sum(dist, Z0, H0, Z0, H0, an0.A, an0.A)
                continue
            ct = field.config_slice(t)
            if need_pi or need_ab:
                an = geodesy.analyze(ct)
                Tt[k], touched_t[k] = an.T, an.result.touched_boundary
                if need_pi:
                    overlap[k] = len(np.intersect1d(pi0, an.result.pi, assume_unique=True))
                if need_ab:
                    Zt, Ht, _ = profile_arrays(an.A, an.B, dist)
                    coinf[k] = _coinf_sum(dist, Z0, H0, Zt, Ht, an0.A, an.A)
            else:
                Tt[k], _, touched_t[k] = geodesy.shortest_path(ct)
    return ReplicateResult(T0, Tt, overlap, coinf, touched0, touched_t, path_len, low,
                           field.region.padding or 0)


def _coinf_sum(dist, Z0, H0, Zt, Ht, A0, At) -> float:
    live = ((Z0 > dist.r) | (Zt > dist.r)) & np.isfinite(A0) & np.isfinite(At)
    if not np.any(live):
        return 0.0
    return float(np.sum(co_influence_values(dist, Z0[live], H0[live], Zt[live], Ht[live])))


def replicate(seed: int, dist: WeightDistribution, v: Sequence[int], t_grid: Sequence[float],
              quantities: frozenset = DEFAULT_QUANTITIES, padding: int | None = None,
              region: Region | None = None, max_retries: int = MAX_RETRIES,
              low_eps: float = -1.0) -> ReplicateResult:
    """One seeded replicate, rerun with doubled padding while it touches the boundary.

    ``region`` (if given) is the whole graph: no reruns and no censoring.
    """
    if region is not None:
        res = _run_once(DynamicalField(seed, dist, region), t_grid, quantities, low_eps)
        res.touched0 = False
        res.touched_t[:] = False
        return res
    pad = default_padding(v) if padding is None else int(padding)
    for attempt in range(max_retries + 1):
        reg = Region.around(v, padding=pad)
        res = _run_once(DynamicalField(seed, dist, reg), t_grid, quantities, low_eps)
        if not (res.touched0 or res.touched_t.any()):
            return res
        pad *= 2
    return res


def run_replicates(seeds: Sequence[int], workers: int = 1, chunk: int = 8, **kwargs) -> list[ReplicateResult]:
    """Evaluate replicates in seed order; output does not depend on ``workers``."""
    return ordered_map(partial(replicate, **kwargs), seeds, workers=workers, chunk=chunk)


def _batch(results: list[ReplicateResult]) -> ReplicateBatch:
    return ReplicateBatch(
        index=np.arange(len(results)),
        T0=np.array([r.T0 for r in results]),
        Tt=np.array([r.Tt for r in results]).reshape(len(results), -1),
        overlap=np.array([r.overlap for r in results]).reshape(len(results), -1),
        coinfluence=np.array([r.coinfluence for r in results]).reshape(len(results), -1),
        censored0=np.array([r.touched0 for r in results], dtype=bool),
        censored_t=np.array([r.touched_t for r in results], dtype=bool).reshape(len(results), -1),
        path_length=np.array([r.path_length for r in results]),
        low_weight=np.array([r.low_weight for r in results]),
        padding=np.array([r.padding for r in results]),
    )


def estimate(dist: WeightDistribution, v: Sequence[int], t_grid: Iterable[float], n_samples: int,
             seed: int = 0, quantities: Iterable[str] = DEFAULT_QUANTITIES, *,
             padding: int | None = None, region: Region | None = None, workers: int = 1,
             censor_budget: float = CENSOR_BUDGET, low_eps: float | None = None,
             seed_tag: int | str | None = None) -> EstimatorReport:
    """Monte Carlo estimates over ``n_samples`` seeded replicates.

    Every replicate uses one field realisation for all of ``t_grid``
    (common random numbers).  Replicate ``j`` is seeded with
    ``derive_seed(seed, tag, j)`` where ``tag`` defaults to ``|v|_1``.
    """
    t_grid = tuple(float(t) for t in t_grid)
    if not t_grid:
        raise ValueError("empty t_grid")
    if any(not 0.0 <= t <= 1.0 for t in t_grid):
        raise ValueError("t_grid must lie in [0, 1]")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    quantities = frozenset(quantities)
    unknown = quantities - QUANTITIES
    if unknown:
        raise ValueError(f"unknown quantities {sorted(unknown)}")
    if "low_weight" in quantities and low_eps is None:
        low_eps = default_eps(dist)
    tag = int(sum(abs(int(c)) for c in v)) if seed_tag is None else seed_tag
    seeds = [derive_seed(seed, tag, j) for j in range(n_samples)]
    results = run_replicates(seeds, workers=workers, dist=dist, v=tuple(int(c) for c in v),
                             t_grid=t_grid, quantities=quantities, padding=padding,
                             region=region, low_eps=-1.0 if low_eps is None else float(low_eps))
    b = _batch(results)

    cens_t = b.censored_t | b.censored0[:, None]
    censored_count = {0.0: int(b.censored0.sum())}
    for k, t in enumerate(t_grid):
        censored_count[t] = int(cens_t[:, k].sum())
    worst = max(censored_count.values())
    if worst > censor_budget * n_samples:
        raise CensoringBudgetExceeded(
            f"{worst} of {n_samples} replicates touched the boundary after reruns")
    if worst == n_samples:
        raise CensoringBudgetExceeded("all samples censored")

    ok0 = ~b.censored0
    idx0 = b.index[ok0]
    entries: dict[str, list[Estimate]] = {}
    if "var_T" in quantities:
        entries["var_T"] = [_var_estimate(0.0, b.T0[ok0], idx0, censored_count[0.0])]
    if "mean_T" in quantities:
        entries["mean_T"] = [_mean_estimate(0.0, b.T0[ok0], idx0, censored_count[0.0])]
    if "path_length" in quantities:
        entries["path_length"] = [_mean_estimate(0.0, b.path_length[ok0].astype(float), idx0,
                                                 censored_count[0.0])]
    if "low_weight" in quantities:
        entries["low_weight"] = [_mean_estimate(0.0, b.low_weight[ok0].astype(float), idx0,
                                                censored_count[0.0])]
    for k, t in enumerate(t_grid):
        ok = ~cens_t[:, k]
        idx = b.index[ok]
        nc = censored_count[t]
        x, y = b.T0[ok], b.Tt[ok, k]
        if "cov" in quantities:
            entries.setdefault("cov", []).append(_cov_estimate(t, x, y, idx, nc))
        if "corr" in quantities:
            entries.setdefault("corr", []).append(_corr_estimate(t, x, y, idx, nc))
        if "overlap" in quantities:
            entries.setdefault("overlap", []).append(_mean_estimate(t, b.overlap[ok, k], idx, nc))
        if "coinfluence_sum" in quantities:
            entries.setdefault("coinfluence_sum", []).append(
                _mean_estimate(t, b.coinfluence[ok, k], idx, nc))
    meta = {"seed": int(seed), "d": len(v), "v": [int(c) for c in v],
            "padding": int(padding) if padding is not None else (
                int(region.padding or 0) if region is not None else default_padding(v)),
            "dist": dist.spec}
    return EstimatorReport(n_samples, t_grid, entries, censored_count, meta, samples=b)


# ---------------------------------------------------------------------------
# per-edge co-influence bounds for continuous laws


@dataclass
class EdgeBoundEstimates:
    """Per-edge Monte Carlo means (and standard errors) on a fixed region."""

    t: float
    n: int
    inf: np.ndarray
    inf_se: np.ndarray
    p_joint: np.ndarray
    p_joint_se: np.ndarray
    p_Z: np.ndarray
    p_Z_se: np.ndarray
    lower_coef: float
    upper_coef: float
    eps: float
    gamma: float

    def lower_slack(self) -> tuple[np.ndarray, np.ndarray]:
        """``Inf - coef * P(Z0, Zt > r+eps)`` and its standard error."""
        return (self.inf - self.lower_coef * self.p_Z,
                np.hypot(self.inf_se, self.lower_coef * self.p_Z_se))

    def upper_slack(self) -> tuple[np.ndarray, np.ndarray]:
        """``coef * P(e in pi_0 and pi_t) - Inf`` and its standard error."""
        return (self.upper_coef * self.p_joint - self.inf,
                np.hypot(self.inf_se, self.upper_coef * self.p_joint_se))


def _edge_sample(seed: int, dist: WeightDistribution, region: Region, t: float, eps: float):
    field = DynamicalField(seed, dist, region)
    a0 = geodesy.analyze(field.config_slice(0.0))
    at = geodesy.analyze(field.config_slice(t))
    Z0, H0, _ = profile_arrays(a0.A, a0.B, dist)
    Zt, Ht, _ = profile_arrays(at.A, at.B, dist)
    inf = co_influence_values(dist, Z0, H0, Zt, Ht)
    joint = np.zeros(region.n_edges)
    joint[np.intersect1d(a0.result.pi, at.result.pi)] = 1.0
    zz = ((Z0 > dist.r + eps) & (Zt > dist.r + eps)).astype(float)
    return inf, joint, zz


def edge_bound_estimates(dist: WeightDistribution, region: Region, t: float, n_samples: int,
                         seed: int = 0, eps: float | None = None, gamma: float | None = None,
                         workers: int = 1) -> EdgeBoundEstimates:
    """Per-edge ``Inf_e(T_0, T_t)``, ``P(e in pi_0 and pi_t)`` and ``P(Z_0, Z_t > r+eps)``.

    ``lower_coef = (eps/4)^2 F(r + eps/4)`` and
    ``upper_coef = E[(mu+w)^2] / F(gamma)^2 + (mu^2 + 2 mu) / (1 - t)``.
    """
    eps = default_eps(dist) if eps is None else eps
    gamma = default_gamma(dist, eps) if gamma is None else gamma
    seeds = [derive_seed(seed, "bounds", j) for j in range(n_samples)]
    rows = ordered_map(partial(_edge_sample, dist=dist, region=region, t=t, eps=eps), seeds,
                       workers=workers, chunk=64)
    inf, joint, zz = (np.array([r[k] for r in rows]) for k in range(3))
    root_n = math.sqrt(n_samples)
    mu = dist.mu
    lower = (eps / 4) ** 2 * float(cdf(dist, dist.r + eps / 4))
    upper = (3 * mu * mu + dist.m2) / float(cdf(dist, gamma)) ** 2 + (mu * mu + 2 * mu) / (1 - t)
    return EdgeBoundEstimates(
        t, n_samples, inf.mean(0), inf.std(0, ddof=1) / root_n, joint.mean(0),
        joint.std(0, ddof=1) / root_n, zz.mean(0), zz.std(0, ddof=1) / root_n,
        lower, upper, eps, gamma)
