"""Acceptance criteria 1-10, each at its stated tolerance and time limit.

Every test records a one-line summary of what it measured; conftest prints
those lines with PASS/FAIL after the run.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import norm

import sdp_battery as bat
from conftest import random_scenarios
from vlpc import experiments as ex
from vlpc import sdp
from vlpc.errors import InfeasibleError
from vlpc.fisher import crlb_trace, fim
from vlpc.ook import (RateContext, delta_threshold, mi_from_snr_arg, rate_exact,
                      rate_lower_bound)
from vlpc.positioning import p_p_for_snr, solve_position
from vlpc.robust import AllocationConfig, bcd_optimize, nonrobust_allocation
from vlpc.robust import worst_case_cvar_quadratic
from vlpc.scenario import Scenario, gain_vector, los_gain, los_gain_gradient

B, S2, A = 20e6, 1e-21, 0.007


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def monotone(values, direction, slack=0.02):
    """True if ``values`` move in ``direction`` (+1 up, -1 down) allowing one
    inversion of at most ``slack`` relative size."""
    bad = []
    for a, b in zip(values, values[1:]):
        step = direction * (b - a)
        if step < 0:
            bad.append(-step / max(abs(a), abs(b), 1e-300))
    return len(bad) == 0 or (len(bad) == 1 and bad[0] <= slack)


def test_criterion_1_crlb_oracle(record_property):
    scs = random_scenarios(20, seed=101)
    rng = np.random.default_rng(1)
    worst = 0.0
    with Timer() as t:
        for s in scs:
            p = rng.uniform(0.0, s.p_p_max)
            info = fim(s, None, p)
            got = crlb_trace(info)
            want = s.bandwidth_hz * np.trace(np.linalg.inv(info.matrix))
            worst = max(worst, abs(got - want) / want)
    record_property("detail", f"max rel err {worst:.2e}, {t.elapsed:.3f} s")
    assert worst <= 1e-10
    assert t.elapsed < 1.0


def test_criterion_2_gradient_audit(record_property):
    sc = Scenario()
    rng = np.random.default_rng(2)
    worst = 0.0
    step = 1e-6
    with Timer() as t:
        for _ in range(100):
            u = np.array([rng.uniform(0.5, 4.5), rng.uniform(0.5, 4.5), rng.uniform(0.2, 2.6)])
            for i in range(sc.n_pd):
                g = los_gain_gradient(sc, i, u)
                fd = np.empty(3)
                for a in range(3):
                    e = np.zeros(3)
                    e[a] = step
                    fd[a] = (los_gain(sc, i, u + e) - los_gain(sc, i, u - e)) / (2 * step)
                worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    record_property("detail", f"max rel err {worst:.2e}, {t.elapsed:.3f} s")
    assert worst <= 1e-5
    assert t.elapsed < 1.0


def test_criterion_3_estimator_efficiency(record_property):
    sc = Scenario()
    snrs = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    cfg = ex.ExperimentConfig(sweep_param="snr_db", values=snrs, trials=1000)
    with Timer() as t:
        rows = ex.run_positioning_sweep(cfg, sc)
        est = solve_position(sc, gain_vector(sc), init_guess=(2.5, 2.5, 1.5))
    at15 = rows[snrs.index(15.0)]
    ratio = at15["rmse"] / at15["sqrt_crlb"]
    err0 = float(np.linalg.norm(est.u_hat - sc.mu_position))
    rmse = [r["rmse"] for r in rows]
    trend = all(b <= a for a, b in zip(rmse, rmse[1:]))
    record_property("detail", f"RMSE/sqrtCRLB at 15 dB {ratio:.3f}, noiseless err {err0:.1e} m, "
                    f"RMSE 0->30 dB {rmse[0]:.4f}->{rmse[-1]:.4f} m, {t.elapsed:.1f} s")
    assert 0.8 <= ratio <= 3.0
    assert err0 <= 1e-6
    assert trend
    assert t.elapsed < 60.0


def _mc_mi(r, n, rng):
    # sampled log likelihood ratio with the exact hinge mean as control variate
    z = rng.standard_normal(n)
    u = r * z - 0.5 * r * r
    m = -0.5 * r * r
    hinge = m * norm.cdf(m / r) + r * norm.pdf(m / r)
    return 1.0 - (hinge + np.mean(np.log1p(np.exp(-np.abs(u))))) / math.log(2.0)


def test_criterion_4_rate_bound_ordering(record_property):
    rng = np.random.default_rng(4)
    violations = 0
    with Timer() as t:
        for _ in range(1000):
            s = 10 ** rng.uniform(-8, -4)
            ctx = RateContext(s, 10 ** rng.uniform(-3, 1.5), A, B, S2)
            violations += rate_lower_bound(ctx) > rate_exact(ctx)
        args = np.geomspace(0.1, 20.0, 10)
        mc_rng = np.random.default_rng(40)
        errs = [abs(mi_from_snr_arg(r) - _mc_mi(r, 1_000_000, mc_rng)) for r in args]
    record_property("detail", f"{violations} Jensen violations, max |quad - MC| "
                    f"{max(errs):.1e}, {t.elapsed:.1f} s")
    assert violations == 0
    assert max(errs) <= 1e-3
    assert t.elapsed < 120.0


def test_criterion_5_delta_equivalence(record_property):
    rng = np.random.default_rng(5)
    mismatches = 0
    with Timer() as t:
        for _ in range(1000):
            rbar = rng.uniform(0.0, 31e6)
            h = rng.uniform(1e-7, 2e-5, size=3)
            v = rng.standard_normal(3)
            v /= np.linalg.norm(v)
            p_c = rng.uniform(1e-3, 50.0)
            s = float(v @ h)
            d = delta_threshold(rbar, B, S2, A)
            lhs = rate_lower_bound(RateContext(s, p_c, A, B, S2)) <= rbar
            mismatches += lhs != (s * s <= d / p_c)
    record_property("detail", f"{mismatches} mismatches, {t.elapsed:.3f} s")
    assert mismatches == 0
    assert t.elapsed < 1.0


def test_criterion_6_cvar_oracles(record_property):
    with Timer() as t:
        lin = worst_case_cvar_quadratic([[0.0]], [1.0], 0.0, [0.0], [[1.0]], 0.05)
        quad = worst_case_cvar_quadratic([[1.0]], [0.0], 0.0, [0.0], [[1.0]], 0.1)
    record_property("detail", f"linear {lin:.6f} (sqrt19 {math.sqrt(19):.6f}), "
                    f"quadratic {quad:.6f}, {t.elapsed:.2f} s")
    assert abs(lin - math.sqrt(19.0)) <= 1e-4
    assert abs(quad - 10.0) <= 1e-4
    assert t.elapsed < 5.0


def test_criterion_7_sdp_battery(record_property):
    worst, verified = 0.0, 0
    with Timer() as t:
        for case in bat.OPTIMAL_CASES:
            prob, want = case()
            sol = sdp.solve(prob)
            assert sol.status == sdp.OPTIMAL, case.__name__
            worst = max(worst, abs(sol.objective - want))
            verified += sdp.verify_solution(prob, sol).ok
        prob = bat.infeasible_trace()
        sol = sdp.solve(prob)
        cert = sol.status == sdp.INFEASIBLE and sdp.verify_solution(prob, sol).ok
    record_property("detail", f"{len(bat.OPTIMAL_CASES)} problems, max err {worst:.1e}, "
                    f"{verified} verified, infeasible certified {cert}, {t.elapsed:.2f} s")
    assert worst <= 1e-6
    assert verified == len(bat.OPTIMAL_CASES)
    assert cert
    assert t.elapsed < 10.0


def test_criterion_8_robust_outage(record_property):
    sc = Scenario()
    cfg = ex.ExperimentConfig(n_draws=10_000)
    notes, ok = [], True
    with Timer() as t:
        for p_out in (0.05, 0.01):
            acfg = AllocationConfig.from_scenario(sc, 10.0, 10e6, p_out)
            slack = 3 * math.sqrt(p_out * (1 - p_out) / cfg.n_draws)
            try:
                res = bcd_optimize(sc, sc.mu_position, acfg)
            except InfeasibleError as exc:
                notes.append(f"{p_out:.0%}: infeasible ({exc})")
                ok = False
                continue
            out, _ = ex.empirical_outage(sc, res, res.moments, 10e6, cfg.n_draws, cfg.seed)
            notes.append(f"{p_out:.0%}: outage {out:.4f}")
            ok &= out <= p_out + slack
        acfg = AllocationConfig.from_scenario(sc, 10.0, 10e6, 0.05)
        base = nonrobust_allocation(sc, sc.mu_position, acfg)
        mom = ex._moments_for(sc, base.p_p, cfg)
        nr, _ = ex.empirical_outage(sc, base, mom, 10e6, cfg.n_draws, cfg.seed)
        notes.append(f"non-robust outage {nr:.4f}")
        ok &= abs(nr - 0.5) <= 0.05
    record_property("detail", "; ".join(notes) + f"; {t.elapsed:.1f} s")
    assert t.elapsed < 300.0
    assert ok, "; ".join(notes)


def test_criterion_9_bcd_behaviour(record_property):
    sc = Scenario()
    cases = [(10.0, 10e6, 0.05), (10.0, 10e6, 0.10), (10.0, 5e6, 0.05), (20.0, 5e6, 0.05)]
    with Timer() as t:
        results = [(c, bcd_optimize(sc, sc.mu_position, AllocationConfig.from_scenario(sc, *c)))
                   for c in cases]
    default = results[0][1]
    objs = [e[0] for e in default.trace]
    mono = all(b <= a + 1e-8 for a, b in zip(objs, objs[1:]))
    feasible = True
    for (p_total, _, _), r in results:
        for _, p_p, p_c in r.trace + [(r.crlb, r.p_p, r.p_c)]:
            feasible &= p_p + p_c <= p_total * (1 + 1e-9)
            feasible &= 0 <= p_p <= sc.p_p_max * (1 + 1e-12) and 0 <= p_c <= sc.p_c_max
    record_property("detail", f"default: {default.iterations} iterations "
                    f"({len(default.info['evaluations'])} VLC solves incl. start search), "
                    f"monotone {mono}, feasible {feasible}, {t.elapsed:.1f} s")
    assert default.converged and default.iterations <= 30
    assert mono
    assert feasible
    assert t.elapsed < 120.0


def test_criterion_10_trends(record_property):
    sc = Scenario()
    notes, ok = [], True

    def run(param, values, **kw):
        cfg = ex.ExperimentConfig(sweep_param=param, values=values, **kw)
        rows = ex.run_allocation_sweep(cfg, sc)
        assert all(r["status"] == "ok" for r in rows), [r.get("message") for r in rows]
        return {k: [r[k] for r in rows] for k in ("p_p", "p_c", "crlb", "avg_rate")}

    def check(label, seq, direction):
        nonlocal ok
        good = monotone(seq, direction)
        ok &= good
        notes.append(f"{label} {'ok' if good else 'FAILED'}")

    with Timer() as t:
        a = run("p_out", (0.05, 0.1, 0.15, 0.2, 0.3), p_total=10.0, rbar=10e6)
        check("Pout: Pp up", a["p_p"], +1)
        check("Pc down", a["p_c"], -1)
        check("CRLB down", a["crlb"], -1)
        b = run("p_total", (8.0, 10.0, 12.0, 14.0, 16.0), p_out=0.05, rbar=5e6)
        check("PT: CRLB down", b["crlb"], -1)
        check("avg rate up", b["avg_rate"], +1)
        c = run("rbar", (1e6, 2e6, 3e6, 4e6, 5e6), p_total=8.0, p_out=0.05)
        check("rbar: Pp down", c["p_p"], -1)
        check("Pc up", c["p_c"], +1)
        check("CRLB up", c["crlb"], +1)
    rates = ", ".join(f"{x / 1e6:.2f}" for x in b["avg_rate"])
    record_property("detail", "; ".join(notes) + f"; PT-sweep avg rate [{rates}] Mb/s; "
                    f"{t.elapsed:.1f} s")
    assert t.elapsed < 600.0
    assert ok, "; ".join(notes)
