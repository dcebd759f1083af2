"""Experiment runners: scans, transition sweeps, valleys, variance scaling and checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .. import geodesy, oracle
from ..distributions import WeightDistribution, cdf
from ..field import DynamicalField, Region, default_padding
from ..influence import (
    LEMMA_TOL,
    CensoringBudgetExceeded,
    co_influence_values,
    default_eps,
    default_gamma,
    estimate,
    lemma_slacks,
    paired_difference_se,
    profile_arrays,
)
from ..parallel import ordered_map
from ..rng import derive_seed, uniforms
from .config import ExperimentConfig
from .output import EXIT_CHECK_FAILED, EXIT_OK, ExperimentResult

__all__ = [
    "ValleyStats",
    "valley_sample",
    "valley_schedule",
    "run_scan",
    "run_transition",
    "run_valleys",
    "run_var_scaling",
    "run_lemma_suite",
    "run_oracle",
    "run_experiment",
    "decreasing_with_separation",
    "DEFAULT_T_GRIDS",
]

DEFAULT_T_GRIDS = {
    "scan": (0.0, 0.25, 0.5, 0.75, 1.0),
    "transition": (),
    "valleys": (0.3,),
    "var-scaling": (0.0,),
    "oracle": (0.0, 0.25, 0.5, 0.9),
    "lemmas": (),
}

CORR_NEAR_ONE = 0.9
MONO_TOL = 1e-12


def _size(v: Sequence[int]) -> int:
    return int(sum(abs(int(c)) for c in v))


def _t_grid(cfg: ExperimentConfig) -> tuple[float, ...]:
    return tuple(cfg.t_grid) if cfg.t_grid else DEFAULT_T_GRIDS[cfg.experiment]


def decreasing_with_separation(values: Sequence[float], ses: Sequence[float], z: float = 3.0) -> dict:
    """Point estimates strictly decreasing and first/last separated by ``z`` SE."""
    vals = [float(x) for x in values]
    monotone = all(b < a for a, b in zip(vals, vals[1:]))
    gap = vals[0] - vals[-1] if vals else float("nan")
    se = math.hypot(ses[0], ses[-1]) if vals else float("nan")
    zscore = gap / se if se > 0 else (math.inf if gap > 0 else -math.inf)
    return {"monotone": monotone, "separation_z": zscore, "passed": bool(monotone and zscore >= z)}


def _meta(cfg: ExperimentConfig, dist: WeightDistribution, t_grid) -> dict:
    return {"experiment": cfg.experiment, "seed": cfg.seed, "d": cfg.d,
            "v": [list(v) for v in cfg.targets()],
            "padding": cfg.padding if cfg.padding is not None else "auto",
            "dist": dist.spec, "n_samples": cfg.n_samples, "t_grid": list(t_grid)}


# ---------------------------------------------------------------------------
# scan


SCAN_COLUMNS = ("size", "t", "corr", "corr_se", "corr_unclipped", "cov", "cov_se",
                "overlap_per_v", "overlap_per_v_se", "coinfluence_sum", "coinfluence_sum_se",
                "var_T", "var_T_se", "seed", "n_samples", "censored")


def run_scan(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution
    t_grid = tuple(sorted(set(_t_grid(cfg))))
    q = {"var_T", "cov", "corr", "overlap"} | ({"coinfluence_sum"} if cfg.coinfluence else set())
    rows, by_size = [], {}
    for v in cfg.targets():
        n1 = _size(v)
        rep = estimate(dist, v, t_grid, cfg.n_samples, cfg.seed, q, padding=cfg.padding,
                       workers=cfg.workers)
        var = rep.get("var_T", 0.0)
        by_size[n1] = (rep, var)
        for t in t_grid:
            corr, cov, ov = rep.get("corr", t), rep.get("cov", t), rep.get("overlap", t)
            ci = rep.get("coinfluence_sum", t) if cfg.coinfluence else None
            rows.append({
                "size": n1, "t": t, "corr": corr.estimate, "corr_se": corr.stderr,
                "corr_unclipped": corr.unclipped, "cov": cov.estimate, "cov_se": cov.stderr,
                "overlap_per_v": ov.estimate / n1, "overlap_per_v_se": ov.stderr / n1,
                "coinfluence_sum": ci.estimate if ci else float("nan"),
                "coinfluence_sum_se": ci.stderr if ci else float("nan"),
                "var_T": var.estimate, "var_T_se": var.stderr,
                "seed": cfg.seed, "n_samples": cfg.n_samples, "censored": corr.censored,
            })
    summary: dict = {"transition_scale": {}, "corr_below_scale": {}, "overlap_decreasing": {}}
    for n1, (rep, var) in by_size.items():
        scale = var.estimate / n1
        summary["transition_scale"][str(n1)] = scale
        below = [rep.get("corr", t).estimate for t in t_grid if 0.0 < t <= scale]
        summary["corr_below_scale"][str(n1)] = {
            "min_corr": min(below) if below else None,
            "near_one": all(c >= CORR_NEAR_ONE for c in below) if below else None}
    sizes = sorted(by_size)
    if len(sizes) >= 2:
        for t in t_grid:
            if t == 0.0:
                continue
            ests = [by_size[n][0].get("overlap", t) for n in sizes]
            summary["overlap_decreasing"][repr(t)] = decreasing_with_separation(
                [e.estimate / n for e, n in zip(ests, sizes)],
                [e.stderr / n for e, n in zip(ests, sizes)])
    return ExperimentResult("scan", SCAN_COLUMNS, rows, summary, _meta(cfg, dist, t_grid),
                            plot_x="size", plot_y="overlap_per_v", plot_group="t")


# ---------------------------------------------------------------------------
# transition


TRANSITION_COLUMNS = ("size", "alpha", "t", "corr", "corr_se", "overlap_per_v",
                      "overlap_per_v_se", "overlap_alpha_per_v", "var_T", "seed", "n_samples",
                      "censored")


def run_transition(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution
    alphas = tuple(sorted(cfg.alphas))
    rows = []
    summary: dict = {"sizes": {}}
    fitted_a, fitted_b = {}, {}
    for v in cfg.targets():
        n1 = _size(v)
        pre = estimate(dist, v, (0.0,), cfg.n_samples, cfg.seed, {"var_T"}, padding=cfg.padding,
                       workers=cfg.workers)
        var = pre.get("var_T", 0.0).estimate
        t_of = {a: min(1.0, a * var / n1) for a in alphas}
        grid = tuple(sorted({0.0, *t_of.values()}))
        rep = estimate(dist, v, grid, cfg.n_samples, cfg.seed, {"corr", "overlap"},
                       padding=cfg.padding, workers=cfg.workers)
        corr = {a: rep.get("corr", t_of[a]) for a in alphas}
        ov = {a: rep.get("overlap", t_of[a]) for a in alphas}
        c0, o0 = rep.get("corr", 0.0), rep.get("overlap", 0.0)
        rows.append({"size": n1, "alpha": 0.0, "t": 0.0, "corr": c0.estimate,
                     "corr_se": c0.stderr, "overlap_per_v": o0.estimate / n1,
                     "overlap_per_v_se": o0.stderr / n1, "overlap_alpha_per_v": 0.0,
                     "var_T": var, "seed": cfg.seed, "n_samples": cfg.n_samples,
                     "censored": c0.censored})
        for a in alphas:
            rows.append({"size": n1, "alpha": a, "t": t_of[a], "corr": corr[a].estimate,
                         "corr_se": corr[a].stderr, "overlap_per_v": ov[a].estimate / n1,
                         "overlap_per_v_se": ov[a].stderr / n1,
                         "overlap_alpha_per_v": ov[a].estimate * a / n1, "var_T": var,
                         "seed": cfg.seed, "n_samples": cfg.n_samples,
                         "censored": corr[a].censored})
        # corr nonincreasing in alpha, up to 3 paired standard errors
        steps = []
        chain = [c0] + [corr[a] for a in alphas]
        for prev, nxt in zip(chain, chain[1:]):
            se = paired_difference_se(nxt, prev)
            steps.append({"increase": nxt.estimate - prev.estimate, "se": se,
                          "ok": nxt.estimate - prev.estimate <= 3 * se})
        big = [ov[a].estimate * a / n1 for a in alphas if a >= 2.0]
        small_alpha = alphas[0]
        info = {
            "var_T": var,
            "corr_nonincreasing": all(s["ok"] for s in steps),
            "corr_steps": steps,
            "min_alpha": small_alpha,
            "corr_at_min_alpha": corr[small_alpha].estimate,
            "corr_at_min_alpha_ok": corr[small_alpha].estimate >= CORR_NEAR_ONE,
            "overlap_alpha_ratio": (max(big) / min(big)) if big and min(big) > 0 else None,
            "fitted_C_a": max(((1.0 - corr[a].estimate) / a for a in alphas), default=None),
            "fitted_C_b": max((ov[a].estimate * a / n1 for a in alphas), default=None),
        }
        info["overlap_alpha_bounded"] = (info["overlap_alpha_ratio"] is not None
                                         and info["overlap_alpha_ratio"] <= 4.0)
        fitted_a[n1], fitted_b[n1] = info["fitted_C_a"], info["fitted_C_b"]
        summary["sizes"][str(n1)] = info
    if len(fitted_a) >= 2:
        for name, fits in (("C_a", fitted_a), ("C_b", fitted_b)):
            vals = [x for x in fits.values() if x and x > 0]
            ratio = max(vals) / min(vals) if vals else None
            summary[f"{name}_ratio_across_sizes"] = ratio
            summary[f"{name}_stable"] = ratio is not None and ratio <= 2.0
    return ExperimentResult("transition", TRANSITION_COLUMNS, rows, summary,
                            _meta(cfg, dist, ()), plot_x="alpha", plot_y="corr",
                            plot_group="size")


# ---------------------------------------------------------------------------
# multiple valleys


@dataclass
class ValleyStats:
    k: int
    t: float
    O_k: int
    dT_k: float
    overlaps: np.ndarray = field(repr=False)
    censored: bool = False


def valley_schedule(dist: WeightDistribution, size: int, d: int = 2, eps: float | None = None,
                    c: float = 1.0, c_prime: float = 1.0) -> dict:
    """Resampling time and replica count from the valley argument's schedule shapes.

    ``c`` and ``c_prime`` stand in for the unknown constants.
    """
    eps = default_eps(dist) if eps is None else eps
    F = float(cdf(dist, dist.r + eps))
    t = F ** (1.0 / (2 * d))
    psi = size / (c * t * math.log(size)) + c_prime * size * F ** (1.0 / d) / t
    kstar = (size / psi) ** 0.25 - 1.0
    k = max(1, int(math.floor(min(t ** -0.5, kstar))))
    return {"eps": eps, "t": t, "psi": psi, "k_star": kstar, "k": k,
            "alpha": size ** 0.75 * psi ** 0.25, "beta": t ** 0.25 * size}


def _valley_once(seed: int, dist: WeightDistribution, region: Region, k: int,
                 t_values: Sequence[float]) -> tuple[list[ValleyStats], bool]:
    field = DynamicalField(seed, dist, region, replica_count=k)
    c0 = field.config_slice(0.0)
    _, pi, touched = geodesy.shortest_path(c0)
    T = c0.path_weight(pi)
    out = []
    for t in t_values:
        paths = [pi]
        times = []
        for i in range(1, k + 1):
            _, p_i, hit = geodesy.shortest_path(field.config_slice(t, replica=i))
            touched |= hit
            paths.append(p_i)
            times.append(c0.path_weight(p_i) - T)
        M = np.zeros((k + 1, k + 1), dtype=np.int64)
        sets = [set(p.tolist()) for p in paths]
        for a in range(k + 1):
            M[a, a] = len(sets[a])
            for b in range(a + 1, k + 1):
                M[a, b] = M[b, a] = len(sets[a] & sets[b])
        off = M[~np.eye(k + 1, dtype=bool)]
        out.append(ValleyStats(k, float(t), int(off.max()), float(max(times)), M))
    return out, touched


def valley_sample(seed: int, dist: WeightDistribution, v: Sequence[int], k: int,
                  t_values: Sequence[float], padding: int | None = None,
                  max_retries: int = 2) -> list[ValleyStats]:
    """``O_k`` and ``dT_k`` of one seeded field for every ``t`` (witness paths)."""
    pad = default_padding(v) if padding is None else int(padding)
    for _ in range(max_retries + 1):
        stats, touched = _valley_once(seed, dist, Region.around(v, padding=pad), k, t_values)
        if not touched:
            return stats
        pad *= 2
    for s in stats:
        s.censored = True
    return stats


VALLEY_COLUMNS = ("size", "k", "t", "O_k_per_v", "O_k_per_v_se", "dT_k_per_v", "dT_k_per_v_se",
                  "mean_O_k", "mean_dT_k", "seed", "n_samples", "censored")


def run_valleys(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution
    rows, summary = [], {"schedule": {}, "decreasing": {}}
    series: dict[str, list] = {}
    for v in cfg.targets():
        n1 = _size(v)
        if cfg.schedule:
            sch = valley_schedule(dist, n1, cfg.d, cfg.eps, cfg.proxy_c, cfg.proxy_c_prime)
            summary["schedule"][str(n1)] = sch
            k, t_values = sch["k"], (sch["t"],)
        else:
            k, t_values = cfg.k, _t_grid(cfg)
        seeds = [derive_seed(cfg.seed, "valleys", n1, j) for j in range(cfg.n_samples)]
        per_seed = ordered_map(partial(valley_sample, dist=dist, v=v, k=k, t_values=t_values,
                                       padding=cfg.padding), seeds, workers=cfg.workers)
        for ti, t in enumerate(t_values):
            stats = [s[ti] for s in per_seed]
            keep = [s for s in stats if not s.censored]
            n_cens = len(stats) - len(keep)
            if n_cens > 0.01 * len(stats) or not keep:
                raise CensoringBudgetExceeded(
                    f"{n_cens} of {len(stats)} valley samples touched the boundary at |v|={n1}")
            O = np.array([s.O_k for s in keep], dtype=float) / n1
            dT = np.array([s.dT_k for s in keep]) / n1
            n = len(keep)
            row = {"size": n1, "k": k, "t": t, "O_k_per_v": O.mean(),
                   "O_k_per_v_se": O.std(ddof=1) / math.sqrt(n), "dT_k_per_v": dT.mean(),
                   "dT_k_per_v_se": dT.std(ddof=1) / math.sqrt(n), "mean_O_k": O.mean() * n1,
                   "mean_dT_k": dT.mean() * n1, "seed": cfg.seed, "n_samples": cfg.n_samples,
                   "censored": n_cens}
            rows.append(row)
            key = "schedule" if cfg.schedule else f"k={k},t={t!r}"
            series.setdefault(key, []).append(row)
    for key, ser in series.items():
        if len(ser) >= 2:
            summary["decreasing"][key] = {
                "O_k_per_v": decreasing_with_separation([r["O_k_per_v"] for r in ser],
                                                        [r["O_k_per_v_se"] for r in ser]),
                "dT_k_per_v": decreasing_with_separation([r["dT_k_per_v"] for r in ser],
                                                         [r["dT_k_per_v_se"] for r in ser]),
            }
    return ExperimentResult("valleys", VALLEY_COLUMNS, rows, summary,
                            _meta(cfg, dist, _t_grid(cfg)), plot_x="size", plot_y="O_k_per_v",
                            plot_group="t")


# ---------------------------------------------------------------------------
# variance scaling


VAR_COLUMNS = ("size", "var_T", "var_T_se", "var_per_v", "var_per_v_se", "var_log_ratio",
               "low_weight_ratio", "low_weight_ratio_se", "mean_T", "path_length", "seed",
               "n_samples", "censored")


def run_var_scaling(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution
    targets = cfg.targets()
    if len(targets) < 3:
        raise ValueError("var-scaling needs at least three sizes")
    eps = default_eps(dist) if cfg.eps is None else cfg.eps
    F = float(cdf(dist, dist.r + eps)) if np.isfinite(eps) else float("nan")
    rows = []
    for v in targets:
        n1 = _size(v)
        rep = estimate(dist, v, (0.0,), cfg.n_samples, cfg.seed,
                       {"var_T", "mean_T", "path_length", "low_weight"}, padding=cfg.padding,
                       workers=cfg.workers, low_eps=eps)
        var, low = rep.get("var_T"), rep.get("low_weight")
        norm = n1 * F ** (1.0 / cfg.d) if F > 0 else float("nan")
        rows.append({"size": n1, "var_T": var.estimate, "var_T_se": var.stderr,
                     "var_per_v": var.estimate / n1, "var_per_v_se": var.stderr / n1,
                     "var_log_ratio": var.estimate * math.log(n1) / n1,
                     "low_weight_ratio": low.estimate / norm, "low_weight_ratio_se": low.stderr / norm,
                     "mean_T": rep.get("mean_T").estimate,
                     "path_length": rep.get("path_length").estimate, "seed": cfg.seed,
                     "n_samples": cfg.n_samples, "censored": var.censored})
    steps = [{"increase": b["var_per_v"] - a["var_per_v"],
              "se": math.hypot(a["var_per_v_se"], b["var_per_v_se"])} for a, b in zip(rows, rows[1:])]
    for s in steps:
        s["ok"] = s["increase"] <= 3 * s["se"]
    lw = [r["low_weight_ratio"] for r in rows if np.isfinite(r["low_weight_ratio"])]
    vl = [r["var_log_ratio"] for r in rows]
    summary = {
        "eps": eps,
        "var_per_v_nonincreasing": all(s["ok"] for s in steps),
        "var_per_v_steps": steps,
        "low_weight_ratio_spread": (max(lw) / min(lw)) if lw and min(lw) > 0 else None,
        "var_log_ratio_spread": (max(vl) / min(vl)) if min(vl) > 0 else None,
    }
    summary["low_weight_ratio_stable"] = (summary["low_weight_ratio_spread"] is not None
                                          and summary["low_weight_ratio_spread"] <= 4.0)
    return ExperimentResult("var-scaling", VAR_COLUMNS, rows, summary, _meta(cfg, dist, (0.0,)),
                            plot_x="size", plot_y="var_per_v")


# ---------------------------------------------------------------------------
# oracle corpus


ORACLE_COLUMNS = ("check", "function", "atoms", "t", "value", "passed", "seed", "n_samples",
                  "censored")
COV_TOL = 1e-9


def _nonincreasing(values: np.ndarray) -> bool:
    tol = MONO_TOL * max(1.0, float(np.max(np.abs(values))))
    return bool(np.all(np.diff(values) <= tol) and np.all(values >= -tol))


def oracle_checks(t_values: Sequence[float] = DEFAULT_T_GRIDS["oracle"],
                  grid_points: int = 101) -> list[dict]:
    """Covariance-formula residuals and monotonicity over the function corpus."""
    s_grid = np.linspace(0.0, 1.0, grid_points)
    out = []
    for item in oracle.corpus():
        f = item.function
        for atoms_name, dist in oracle.ATOM_SETS.items():
            Q = oracle.q_polynomial(f, dist)
            infs = [oracle.influence_polynomial(f, i, dist) for i in range(f.m)]
            total = infs[0]
            for p in infs[1:]:
                total = total + p
            for t in t_values:
                res = (float(Q(t)) - float(Q(1.0))) - total.integral(t, 1.0)
                out.append({"check": "cov_formula", "function": f.name, "atoms": atoms_name,
                            "t": float(t), "value": res, "passed": abs(res) <= COV_TOL})
            q_ok = _nonincreasing(np.asarray(Q(s_grid)))
            out.append({"check": "Q_monotone", "function": f.name, "atoms": atoms_name,
                        "t": float("nan"), "value": float(np.min(Q(s_grid))), "passed": q_ok})
            inf_ok = all(_nonincreasing(np.asarray(p(s_grid))) for p in infs)
            out.append({"check": "Inf_monotone", "function": f.name, "atoms": atoms_name,
                        "t": float("nan"), "value": float(min(np.min(p(s_grid)) for p in infs)),
                        "passed": inf_ok})
    return out


def run_oracle(cfg: ExperimentConfig) -> ExperimentResult:
    checks = oracle_checks(_t_grid(cfg))
    rows = [dict(c, seed=cfg.seed, n_samples=0, censored=0) for c in checks]
    failed = [c for c in checks if not c["passed"]]
    summary = {
        "checks": len(checks),
        "failures": len(failed),
        "max_abs_residual": max(abs(c["value"]) for c in checks if c["check"] == "cov_formula"),
        "table": [{k: c[k] for k in ("check", "function", "atoms", "t", "value", "passed")}
                  for c in checks],
    }
    dist = cfg.distribution
    return ExperimentResult("oracle", ORACLE_COLUMNS, rows, summary, _meta(cfg, dist, _t_grid(cfg)),
                            exit_code=EXIT_CHECK_FAILED if failed else EXIT_OK)


# ---------------------------------------------------------------------------
# lemma suite


LEMMA_COLUMNS = ("check", "status", "checked", "failures", "min_slack", "note", "seed",
                 "n_samples", "censored")
LEMMA_NAMES = ("positive_part", "delta_bd", "H")


def lemma_sample(seed: int, dist: WeightDistribution, region: Region, eps: float,
                 gamma: float) -> dict:
    """Lemma slacks on every edge of one random profile pair (plus the mutant)."""
    t = float(uniforms(seed, "lemma-t", np.zeros((1, 1), dtype=np.int64))[0])
    field = DynamicalField(seed, dist, region)
    a0 = geodesy.analyze(field.config_slice(0.0))
    at = geodesy.analyze(field.config_slice(t))
    Z0, H0, _ = profile_arrays(a0.A, a0.B, dist)
    Zt, Ht, _ = profile_arrays(at.A, at.B, dist)
    tol = LEMMA_TOL * np.maximum.reduce([np.ones_like(Z0), np.abs(Z0), np.abs(Zt), H0, Ht])
    sl = lemma_slacks(dist, Z0, H0, Zt, Ht, eps, gamma)
    out = {}
    for name in LEMMA_NAMES:
        s = sl[name]
        if s is None:
            out[name] = None
            continue
        out[name] = (len(s), int(np.count_nonzero(s < -tol)), float(np.min(s)))
    mutant = lemma_slacks(dist, Z0, H0, Zt, Ht, eps, gamma,
                          coinfluence=-co_influence_values(dist, Z0, H0, Zt, Ht))["positive_part"]
    out["mutant_failures"] = int(np.count_nonzero(mutant < -tol))
    return out


def lemma_checks(dist: WeightDistribution, region: Region, n_samples: int, seed: int,
                 eps: float | None = None, gamma: float | None = None, workers: int = 1) -> dict:
    eps = default_eps(dist) if eps is None else eps
    gamma = default_gamma(dist, eps) if gamma is None else gamma
    seeds = [derive_seed(seed, "lemmas", j) for j in range(n_samples)]
    samples = ordered_map(partial(lemma_sample, dist=dist, region=region, eps=eps, gamma=gamma),
                          seeds, workers=workers, chunk=64)
    agg = {"eps": eps, "gamma": gamma}
    for name in LEMMA_NAMES:
        vals = [s[name] for s in samples if s[name] is not None]
        if not vals:
            agg[name] = {"status": "skip", "checked": 0, "failures": 0, "min_slack": float("nan")}
            continue
        checked = sum(v[0] for v in vals)
        failures = sum(v[1] for v in vals)
        agg[name] = {"status": "fail" if failures else "pass", "checked": checked,
                     "failures": failures, "min_slack": min(v[2] for v in vals)}
    mut = sum(s["mutant_failures"] for s in samples)
    agg["negative_control"] = {"status": "pass" if mut > 0 else "fail", "checked": n_samples,
                               "failures": mut, "min_slack": float("nan")}
    return agg


def run_lemma_suite(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution
    region = Region.box(cfg.box)
    agg = lemma_checks(dist, region, cfg.n_samples, cfg.seed, cfg.eps, cfg.gamma, cfg.workers)
    rows = []
    notes = {"negative_control": "sign-flipped co-influence must be caught"}
    for name in (*LEMMA_NAMES, "negative_control"):
        a = agg[name]
        rows.append({"check": name, "status": a["status"], "checked": a["checked"],
                     "failures": a["failures"], "min_slack": a["min_slack"],
                     "note": notes.get(name, ""), "seed": cfg.seed, "n_samples": cfg.n_samples,
                     "censored": 0})
    oc = oracle_checks()
    n_fail = sum(not c["passed"] for c in oc)
    rows.append({"check": "oracle_corpus", "status": "fail" if n_fail else "pass",
                 "checked": len(oc), "failures": n_fail,
                 "min_slack": -max(abs(c["value"]) for c in oc if c["check"] == "cov_formula"),
                 "note": "covariance formula and monotonicity", "seed": cfg.seed,
                 "n_samples": 0, "censored": 0})
    if dist.is_integer_atomic:
        bounds = []
        for shape in ((2, 2), (2, 3)):
            try:
                bounds += oracle.integer_influence_bounds(Region.box(shape), dist)
            except oracle.GuardError:
                pass
        n_fail = sum(not b.holds for b in bounds)
        slack = min((min(b.influence - b.lower, b.upper - b.influence) for b in bounds),
                    default=float("nan"))
        rows.append({"check": "integer_bound", "status": "fail" if n_fail else "pass",
                     "checked": len(bounds), "failures": n_fail, "min_slack": slack,
                     "note": "exact enumeration", "seed": cfg.seed, "n_samples": 0, "censored": 0})
    else:
        rows.append({"check": "integer_bound", "status": "skip", "checked": 0, "failures": 0,
                     "min_slack": float("nan"), "note": "weight law is not integer-valued",
                     "seed": cfg.seed, "n_samples": 0, "censored": 0})
    failed = [r["check"] for r in rows if r["status"] == "fail"]
    summary = {"eps": agg["eps"], "gamma": agg["gamma"], "failed": failed,
               "table": [{k: r[k] for k in ("check", "status", "checked", "failures", "min_slack")}
                         for r in rows]}
    meta = _meta(cfg, dist, ())
    meta["v"] = [list(region.target)]
    meta["box"] = list(cfg.box)
    return ExperimentResult("lemmas", LEMMA_COLUMNS, rows, summary, meta,
                            exit_code=EXIT_CHECK_FAILED if failed else EXIT_OK)


RUNNERS = {
    "scan": run_scan,
    "transition": run_transition,
    "valleys": run_valleys,
    "var-scaling": run_var_scaling,
    "oracle": run_oracle,
    "lemmas": run_lemma_suite,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
