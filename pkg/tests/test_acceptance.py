"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records a PASS/FAIL line (printed in the terminal summary and to
stdout) before asserting, so a failing criterion still reports its numbers.
"""

import random
import struct
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import (
    ACCEPTANCE,
    oracle_type1,
    oracle_type2,
    oracle_type3,
    random_mutation,
    random_small_kb,
)
from sdhkb import CostModel, Observation, check_invariants, predict, update
from sdhkb.bench import generate_random_kb, time_queries
from sdhkb.coverage_sim import (
    WorkloadParams,
    coverage,
    sample_kernel_count,
    select_kernel_preferential,
    simulate_uncoverage,
)
from sdhkb.fixtures import FIXTURES, build_fixture, node_classification
from sdhkb.persistence import dumps, loads
from sdhkb.queries import query_type1, query_type2, query_type3

SWEEP = (100, 1_000, 10_000)
TRIALS = 10_000


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    means = {}
    for n in SWEEP:
        kb = generate_random_kb(n, p=2 / 3, h=10, seed=0, lam=2.5)
        for qt in (1, 2, 3):
            means[n, qt] = time_queries(kb, qt, TRIALS, seed=1).mean_latency
    return means, time.perf_counter() - t0


def test_criterion_01_latency_under_1ms(sweep):
    means, elapsed = sweep
    worst = max(means[10_000, qt] for qt in (1, 2, 3))
    ok = worst < 1e6 and elapsed < 120
    record(1, ok, f"10k steps: T1={means[10_000, 1]:.0f} T2={means[10_000, 2]:.0f} "
                  f"T3={means[10_000, 3]:.0f} ns; sweep {elapsed:.1f} s")


def test_criterion_02_latency_ordering(sweep):
    means, _ = sweep
    rows, ok = [], True
    for n in SWEEP:
        t1, t2, t3 = (means[n, qt] for qt in (1, 2, 3))
        good = t2 <= t1 * 1.01 and t2 <= t3 * 1.01 and t1 <= t3 * 1.05
        ok &= good
        rows.append(f"{n}: {t2:.0f}<={t1:.0f}<={t3:.0f}")
    record(2, ok, "; ".join(rows))


def test_criterion_03_type1_scaling(sweep):
    means, _ = sweep
    ratios = [means[b, 1] / means[a, 1] for a, b in zip(SWEEP, SWEEP[1:])]
    record(3, all(r <= 15 for r in ratios), "T1 ratio per 10x: " + ", ".join(f"{r:.2f}" for r in ratios))


def test_criterion_04_coverage_example():
    c = coverage({"K1", "K2", "K3"}, {"K1", "K2"})
    exact = Fraction(c).limit_denominator(10**6) == Fraction(2, 3)
    ok = exact and abs(c - 2 / 3) <= 1e-12 and abs((1 - c) - 1 / 3) <= 1e-12
    record(4, ok, f"coverage={c!r} uncoverage={1 - c!r}")


def test_criterion_05_uncoverage_curve():
    params = WorkloadParams(lam=2.5, p=2 / 3, n_workflows=200, steps_per_workflow=4, universe_kernels=100)
    sizes = list(range(101))
    t0 = time.perf_counter()
    pts = simulate_uncoverage(params, sizes, seed=0, replicates=50)
    elapsed = time.perf_counter() - t0
    u = [pt.mean_uncoverage for pt in pts]
    monotone = all(b <= a for a, b in zip(u, u[1:]))
    ends = u[0] == 1.0 and u[100] == 0.0
    early = min(u[:30]) < 0.2
    ok = monotone and ends and early and elapsed < 30
    record(5, ok, f"monotone={monotone} u(0)={u[0]} u(100)={u[100]} "
                  f"u(29)={u[29]:.3f} (need <0.2) u(30)={u[30]:.3f}; {elapsed:.2f} s")


def test_criterion_06_preferential_sampler():
    rng = np.random.default_rng(6)
    n = 100_000
    hits = np.bincount([select_kernel_preferential([1, 0], 2.5, rng) for _ in range(n)], minlength=2) / n
    err = np.abs(hits - [7 / 12, 5 / 12]).max()
    record(6, err <= 0.02, f"rates={hits.round(4).tolist()} max abs err={err:.4f}")


def test_criterion_07_geometric_sampler():
    rng = np.random.default_rng(7)
    rows, ok = [], True
    for p in (0.25, 2 / 3, 0.9):
        mean = sum(sample_kernel_count(p, rng) for _ in range(1_000_000)) / 1_000_000
        rel = abs(mean - 1 / p) * p
        ok &= rel <= 0.05
        rows.append(f"p={p:.3g}: mean={mean:.4f} rel err={rel:.4f}")
    record(7, ok, "; ".join(rows))


def test_criterion_08_oracle_equivalence():
    mismatches = 0
    checked = 0
    for seed in range(100):
        kb = random_small_kb(seed, max_vertices=50)
        assert kb.n_vertices() <= 50
        for s in kb.steps:
            mismatches += query_type1(kb, s) != oracle_type1(kb, s)
            checked += 1
        for k in kb.kernels:
            t3 = query_type3(kb, k)
            mismatches += t3 != oracle_type3(kb, k)
            union = [(h, e) for h in sorted(kb.hardware) if (e := query_type2(kb, k, h)) is not None]
            mismatches += t3 != union
            for h in kb.hardware:
                mismatches += query_type2(kb, k, h) is not oracle_type2(kb, k, h)
                checked += 1
    record(8, mismatches == 0, f"{checked} lookups over 100 KBs, {mismatches} mismatches")


def _bits(kb):
    return [
        struct.pack("<d", x)
        for e in sorted(kb.perf_edges.values(), key=lambda e: e.id)
        for v in e.mappings
        for x in v.model.time_params + v.model.energy_params
    ]


def test_criterion_09_round_trip():
    failures = []
    kbs = [(f"random {s}", random_small_kb(s, mutations=s % 25)) for s in range(100)]
    kbs += [(name, build_fixture(name)) for name in FIXTURES]
    for label, kb in kbs:
        back = loads(dumps(kb))
        if back != kb or _bits(back) != _bits(kb):
            failures.append(label)
    record(9, not failures, f"{len(kbs)} KBs, failures: {failures or 'none'}")


def test_criterion_10_invariant_fuzz():
    violations = []
    n_mut = 0
    for session in range(100):
        rng = random.Random(10_000 + session)
        kb = random_small_kb(session)
        for _ in range(100):
            total = sum(k.frequency for k in kb.kernels.values())
            before = len(kb.kernels)
            op = random_mutation(kb, rng)
            n_mut += 1
            problems = check_invariants(kb)
            if op == "merge" and len(kb.kernels) < before:
                if sum(k.frequency for k in kb.kernels.values()) != total:
                    problems.append("merge changed total frequency")
            if problems:
                violations.append((session, op, problems[0]))
    record(10, not violations, f"{n_mut} mutations, {len(violations)} violations"
                               + (f", first: {violations[0]}" if violations else ""))


def test_criterion_11_model_convergence():
    rng = random.Random(11)
    worst = 0
    for _ in range(50):
        model = CostModel([rng.uniform(0.1, 20)] + [rng.uniform(-1, 1) for _ in range(3)], [0.0] * 4)
        meta = [rng.uniform(0, 1), rng.choice([8.0, 16.0, 32.0]), rng.uniform(0, 5)]
        obs = Observation(meta, rng.uniform(0.5, 50.0), 1.0)
        for it in range(1, 1001):
            model = update(model, obs, 0.5)
            if abs(predict(model, meta)[0] - obs.observed_time) <= 0.01 * obs.observed_time:
                break
        worst = max(worst, it)
    record(11, worst <= 200, f"worst case over 50 random models: {worst} iterations")


def test_criterion_12_fixture_fidelity():
    kb, _ = node_classification()
    name = {v.name: v.id for v in (*kb.steps.values(), *kb.kernels.values(), *kb.hardware.values())}
    inference, forward, fpga = name["inference"], name["forward propagation"], name["FPGA"]
    path = forward in query_type1(kb, inference) and query_type2(kb, forward, fpga) is not None
    path &= fpga in [h for h, _ in query_type3(kb, forward)]
    ok = len(kb.steps) == 4 and path
    record(12, ok, f"steps={len(kb.steps)} inference->forward propagation->FPGA present={path}")
