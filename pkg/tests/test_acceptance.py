"""Acceptance checks, one test per criterion, each reporting a PASS/FAIL line."""
from __future__ import annotations

import time

import numpy as np
import pytest
from scipy import stats

from _quadrature import integrate_dF
from fppchaos import geodesy, oracle
from fppchaos.distributions import PRESETS, atomic, shifted_exponential, uniform
from fppchaos.experiments import cli
from fppchaos.experiments.config import ExperimentConfig
from fppchaos.experiments.runners import lemma_checks, oracle_checks, run_experiment
from fppchaos.field import DynamicalField, Region
from fppchaos.influence import edge_profile, estimate, paired_difference_se, recomputed_D

HALVES = atomic({1: 0.5, 2: 0.5})
ZERO_ONE = atomic({0: 0.3, 1: 0.7})
THREE = atomic({1: 0.2, 2: 0.5, 4: 0.3})
BITS = atomic({0: 0.5, 1: 0.5})
U01 = uniform(0, 1)
EXP1 = shifted_exponential(1.0)
EXP_SHIFT = shifted_exponential(2.0, 0.5)


def slice_at(seed: int, dist, region: Region, rs: np.random.Generator):
    return DynamicalField(seed, dist, region).config_slice(float(rs.uniform()))


# 1 ------------------------------------------------------------------------------------


def test_covariance_formula_over_corpus(criterion):
    start = time.perf_counter()
    checks = [c for c in oracle_checks((0.0, 0.25, 0.5, 0.9)) if c["check"] == "cov_formula"]
    elapsed = time.perf_counter() - start
    worst = max(abs(c["value"]) for c in checks)
    names = {c["function"] for c in checks}
    ok = (len(checks) == 50 * 3 * 4 and worst <= 1e-9 and elapsed <= 300
          and {"T(2, 2)", "T(2, 3)"} <= names and {c["atoms"] for c in checks} >= {"halves12"})
    criterion(1, ok, f"{len(checks)} residuals, max |residual| {worst:.2e}, {elapsed:.1f}s")
    assert ok


# 2 ------------------------------------------------------------------------------------


def test_replacement_identity(criterion):
    start = time.perf_counter()
    rs = np.random.default_rng(2)
    laws = [(HALVES, True), (ZERO_ONE, True), (THREE, True), (U01, False), (EXP1, False),
            (EXP_SHIFT, False)]
    cases = worst_rel = mismatches = 0
    for j in range(100):
        dist, integral = laws[j % len(laws)]
        v = (int(rs.integers(2, 7)), int(rs.integers(-2, 3)))
        cfg = slice_at(j, dist, Region.around(v, padding=2), rs)
        an = geodesy.analyze(cfg)
        for _ in range(10):
            e = int(rs.integers(cfg.region.n_edges))
            x = float(rs.integers(0, 6)) if integral else float(rs.uniform(0, 3))
            T_x, _, _ = geodesy.shortest_path(cfg.replaced(e, x))
            rv = geodesy.replacement_values(cfg, e)
            for A, B in ((an.A[e], an.B[e]), (rv.A, rv.B)):
                pred = min(A, B + x)
                if integral:
                    mismatches += T_x != pred
                else:
                    rel = abs(T_x - pred) / max(abs(T_x), 1e-300)
                    worst_rel = max(worst_rel, rel)
                    mismatches += rel > 1e-12
            cases += 1
    elapsed = time.perf_counter() - start
    ok = cases == 1000 and mismatches == 0 and elapsed <= 60
    criterion(2, ok, f"{cases} cases (bulk and per-edge), {mismatches} mismatches, "
                     f"max continuous rel err {worst_rel:.1e}, {elapsed:.1f}s")
    assert ok


# 3 ------------------------------------------------------------------------------------


def test_profile_identity(criterion):
    rs = np.random.default_rng(3)
    laws = [HALVES, ZERO_ONE, THREE, U01, EXP1, EXP_SHIFT]
    worst_id = worst_mean = 0.0
    bound_failures = profiles = nonzero = 0
    for j in range(1000):
        dist = laws[j % len(laws)]
        v = (int(rs.integers(2, 5)), int(rs.integers(0, 3)))
        cfg = slice_at(1000 + j, dist, Region.around(v, padding=2), rs)
        if j % 2 == 0:
            path = geodesy.geodesic(cfg).witness_path
            e = int(path[rs.integers(len(path))])
        else:
            e = int(rs.integers(cfg.region.n_edges))
        p = edge_profile(cfg, e, dist)
        base = list(dist.support_values) if dist.is_atomic else []
        extra = [p.Z, p.Y] if p.Z < dist.r + 10 else []
        x = np.array(base + extra)
        x = np.concatenate([x, dist.r + rs.exponential(1.0, 20 - len(x))])
        closed, fresh = p.D(x), recomputed_D(cfg, e, dist, x)
        worst_id = max(worst_id, float(np.max(np.abs(closed - fresh))))
        mean = integrate_dF(dist, lambda y: float(recomputed_D(cfg, e, dist, y)[0]),
                           kinks=(p.A - p.B,))
        worst_mean = max(worst_mean, abs(mean))
        mu = dist.mu
        for D, tol in ((closed, 1e-12), (fresh, 1e-9)):
            bound_failures += int(np.sum(D < -mu - tol))
            bound_failures += int(np.sum(np.abs(D) > (mu + x) * (p.Z > dist.r) + tol))
        profiles += 1
        nonzero += p.Z > dist.r
    ok = worst_id <= 1e-9 and worst_mean <= 1e-9 and bound_failures == 0
    criterion(3, ok, f"{profiles} profiles x 20 points ({nonzero} nonzero), max |D - recomputed| "
                     f"{worst_id:.1e}, max |mean| {worst_mean:.1e}, {bound_failures} bound failures")
    assert ok


# 4 ------------------------------------------------------------------------------------


def test_geodesic_intersection(criterion):
    rs = np.random.default_rng(4)
    shapes = [(2, 2), (3, 3), (2, 5), (3, 4), (4, 4), (3, 5), (4, 5), (5, 5)]
    laws = [HALVES, ZERO_ONE, THREE, U01, atomic({1: 1.0})]
    mismatches = largest = 0
    for j in range(200):
        shape = shapes[j % len(shapes)]
        dist = laws[(j // len(shapes)) % len(laws)]
        region = Region.box(shape)
        largest = max(largest, region.n_edges)
        cfg = slice_at(4000 + j, dist, region, rs)
        res = geodesy.geodesic(cfg)
        paths = geodesy.enumerate_all_geodesics(cfg)
        common = set.intersection(*(set(p) for p in paths))
        mismatches += common != set(res.pi.tolist())
    ok = mismatches == 0 and largest <= 40
    criterion(4, ok, f"200 instances up to {largest} edges, {mismatches} mismatches")
    assert ok


# 5 ------------------------------------------------------------------------------------


def test_integer_weight_bounds(criterion):
    bounds = []
    for shape in ((2, 2), (2, 3), (3, 2)):
        bounds += oracle.integer_influence_bounds(Region.box(shape), HALVES, (0.0, 0.5))
    fails = sum(not b.holds for b in bounds)
    slack = min(min(b.influence - b.lower, b.upper - b.influence) for b in bounds)
    ok = fails == 0 and {b.t for b in bounds} == {0.0, 0.5}
    criterion(5, ok, f"{len(bounds)} (edge, t) pairs, {fails} violations, min slack {slack:.3g}")
    assert ok


# 6 ------------------------------------------------------------------------------------


def test_lemma_suite(criterion):
    parts, ok = [], True
    for name in ("uniform", "exp"):
        agg = lemma_checks(PRESETS[name], Region.box((4, 4)), 10_000, seed=6)
        for lemma in ("positive_part", "delta_bd", "H"):
            a = agg[lemma]
            ok &= a["status"] == "pass" and a["checked"] > 0 and a["failures"] == 0
            parts.append(f"{name}/{lemma} {a['failures']}/{a['checked']}")
        ok &= agg["negative_control"]["status"] == "pass"
    criterion(6, ok, "10^4 configs per law; failures/checked: " + ", ".join(parts))
    assert ok


# 7 ------------------------------------------------------------------------------------


def test_monotonicity(criterion):
    checks = [c for c in oracle_checks() if c["check"] in ("Q_monotone", "Inf_monotone")]
    exact_fail = sum(not c["passed"] for c in checks)
    grid = (0.0, 0.25, 0.5, 0.75, 1.0)
    rep = estimate(U01, (32, 0), grid, 2000, seed=7, quantities={"overlap"})
    series = rep.series("overlap")
    worst_z = -np.inf
    for prev, nxt in zip(series, series[1:]):
        se = paired_difference_se(nxt, prev)
        worst_z = max(worst_z, (nxt.estimate - prev.estimate) / se if se > 0 else
                      (np.inf if nxt.estimate > prev.estimate else -np.inf))
    ok = exact_fail == 0 and worst_z <= 3.0
    means = ", ".join(f"{e.estimate:.2f}" for e in series)
    criterion(7, ok, f"{len(checks)} exact grid checks, {exact_fail} failures; overlap at |v|=32 "
                     f"[{means}], largest increase {worst_z:.2f} paired SE")
    assert ok


# 8 ------------------------------------------------------------------------------------


def _joint(a, b, values):
    return np.array([[np.sum((a == x) & (b == y)) for y in values] for x in values], dtype=float)


def _chi2_against_resampling(a, b, dist, s):
    obs = _joint(a.ravel(), b.ravel(), dist.support_values)
    p = dist.atom_probs
    exp = (s * np.outer(p, p) + (1 - s) * np.diag(p)) * obs.sum()
    keep = exp.ravel() > 0
    assert obs.ravel()[~keep].sum() == 0
    return stats.chisquare(obs.ravel()[keep], exp.ravel()[keep]).pvalue


def test_coupling_identities(criterion):
    pvals = {}
    for dist, name in ((BITS, "bits"), (THREE, "three")):
        for s, t in ((0.5, 0.75), (0.2, 0.6), (0.3, 0.3)):
            X, Y, Z = oracle.coupling_draw(oracle.CouplingParams(s, t), dist, 1, seed=8, n=100_000)
            pvals[f"{name} (X,Y) s={s}"] = _chi2_against_resampling(X, Y, dist, s)
            pvals[f"{name} (X,Z) t={t}"] = _chi2_against_resampling(X, Z, dist, t)
        for t in (0.3, 0.5):
            f = DynamicalField(80 + int(10 * t), dist, Region.box((225, 225)), replica_count=2)
            a = f.config_slice(t, replica=1).weights
            b = f.config_slice(t, replica=2).weights
            assert len(a) >= 100_000
            pvals[f"{name} replicas t={t}"] = _chi2_against_resampling(
                a, b, dist, oracle.effective_time(t))
    worst = min(pvals, key=pvals.get)
    ok = all(p > 0.001 for p in pvals.values())
    criterion(8, ok, f"{len(pvals)} chi-square tests at 10^5 draws, smallest p {pvals[worst]:.3g} "
                     f"({worst})")
    assert ok


# 9 ------------------------------------------------------------------------------------


def test_chaos_trend(criterion):
    start = time.perf_counter()
    cfg = ExperimentConfig(experiment="scan", sizes=(16, 32, 64), t_grid=(0.5,), n_samples=2000,
                           dist="uniform:0,1", seed=9)
    res = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    dec = res.summary["overlap_decreasing"][repr(0.5)]
    vals = ", ".join(f"{r['overlap_per_v']:.4f}" for r in res.rows)
    ok = dec["passed"] and elapsed <= 900
    criterion(9, ok, f"overlap/|v| at t=0.5 for 16/32/64: [{vals}], separation "
                     f"{dec['separation_z']:.1f} SE, {elapsed / 60:.1f} min")
    assert ok


# 10 -----------------------------------------------------------------------------------


def test_transition(criterion):
    cfg = ExperimentConfig(experiment="transition", v=(64, 0), n_samples=1000,
                           dist="uniform:0,1", seed=10)
    res = run_experiment(cfg)
    info = res.summary["sizes"]["64"]
    ok = (info["corr_nonincreasing"] and info["corr_at_min_alpha"] >= 0.9
          and info["min_alpha"] == 0.125 and info["overlap_alpha_bounded"])
    worst = max(s["increase"] / s["se"] if s["se"] > 0 else 0.0 for s in info["corr_steps"])
    criterion(10, ok, f"corr(alpha=1/8) {info['corr_at_min_alpha']:.4f}, largest corr increase "
                      f"{worst:.2f} SE, overlap*alpha/|v| ratio over alpha 2..8 "
                      f"{info['overlap_alpha_ratio']:.2f}")
    assert ok


# 11 -----------------------------------------------------------------------------------


def test_multiple_valleys(criterion):
    start = time.perf_counter()
    cfg = ExperimentConfig(experiment="valleys", sizes=(16, 32, 64, 128), k=4, t_grid=(0.3,),
                           n_samples=500, dist="uniform:0,1", seed=11)
    res = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    dec = res.summary["decreasing"]["k=4,t=0.3"]
    O, dT = dec["O_k_per_v"], dec["dT_k_per_v"]
    ok = O["passed"] and dT["passed"] and elapsed <= 1200
    criterion(11, ok, f"O_k/|v| separation {O['separation_z']:.1f} SE, dT_k/|v| separation "
                      f"{dT['separation_z']:.1f} SE, both monotone={O['monotone'] and dT['monotone']}, "
                      f"{elapsed / 60:.1f} min")
    assert ok


# 12 -----------------------------------------------------------------------------------


RUNS = {
    "scan": ["--sizes", "8,16", "--samples", "64", "--t-grid", "0:1:3"],
    "valleys": ["--sizes", "8,16", "--samples", "32", "--k", "2", "--t-grid", "0.3"],
    "lemmas": ["--samples", "128"],
    "var-scaling": ["--sizes", "4,8,12", "--samples", "48", "--dist", "exp"],
}


def test_reproducibility(criterion, tmp_path, capsys):
    differing = []
    for name, args in RUNS.items():
        blobs = {}
        for workers in (1, 4, 8):
            out = tmp_path / f"w{workers}" / f"{name}.csv"
            code = cli.main([name, "--seed", "12", "--workers", str(workers), "--out", str(out),
                             *args])
            assert code == 0
            blobs[workers] = (out.read_bytes(), out.with_suffix(".json").read_bytes())
        if not blobs[1] == blobs[4] == blobs[8]:
            differing.append(name)
    capsys.readouterr()
    ok = not differing
    criterion(12, ok, f"{len(RUNS)} experiments at 1/4/8 workers, CSV+JSON byte-identical"
                      + (f"; differing: {differing}" if differing else ""))
    assert ok
