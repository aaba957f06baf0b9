"""Random knowledge bases and query-latency measurement."""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import astuple, dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import _backend
from .coverage_sim import DEFAULT_LAMBDA, DEFAULT_P
from .errors import InvalidArgumentError
from .graph import KnowledgeBase
from .perfmodel import CostModel
from .queries import query_type1, query_type2, query_type3

DEFAULT_H = 10
CSV_HEADER = ("n_steps", "query_type", "trials", "mean_ns", "p50_ns", "p95_ns")


@dataclass(frozen=True)
class BenchResult:
    n_steps: int
    query_type: int
    trials: int
    mean_latency: float
    p50: float
    p95: float


def generate_random_kb(
    n_steps: int,
    p: float = DEFAULT_P,
    h: int = DEFAULT_H,
    seed: int = 0,
    lam: float = DEFAULT_LAMBDA,
    disjoint: bool = False,
) -> KnowledgeBase:
    """Build a random knowledge base for benchmarking.

    Every step gets one decomposition of ``k ~ Geometric(p)`` kernels. By
    default kernels come from a growing shared pool: an existing kernel is
    drawn with weight ``frequency + lam`` and a brand-new kernel with weight
    ``lam``. ``disjoint=True`` gives every link its own fresh kernel instead.
    Each kernel maps to a uniformly random non-empty subset of the ``h``
    hardware nodes with one constant-time cost model.
    """
    if n_steps < 1 or h < 1:
        raise InvalidArgumentError("n_steps and h must be positive")
    if not 0.0 < p <= 1.0:
        raise InvalidArgumentError(f"p must be in (0, 1], got {p}")
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be > 0, got {lam}")
    rng = np.random.default_rng(seed)
    kb = KnowledgeBase()
    hw_ids = [
        kb.add_hardware(f"hw{j}", {"slot": float(j)}, float(rng.uniform(0.0, 50.0)))
        for j in range(h)
    ]
    step_ids = [kb.add_step(f"step{i}", rng.random(3).tolist()) for i in range(n_steps)]

    counts = rng.geometric(p, size=n_steps)
    n_links = int(counts.sum())
    if disjoint:
        choices = np.arange(n_links, dtype=np.int64)
        n_kernels = n_links
    else:
        freqs = np.zeros(n_links, dtype=np.int64)
        choices, n_kernels = _backend.attach_draws(rng.random(n_links), freqs, 0, float(lam), True)
    kernel_ids = [kb.add_kernel(f"kernel{i}", identified=True) for i in range(n_kernels)]

    pos = 0
    for sid, k in zip(step_ids, counts.tolist()):
        for seq in range(k):
            kb.link_step_kernel(sid, kernel_ids[choices[pos]], 0, seq)
            pos += 1

    for kid in kernel_ids:
        while True:
            mask = rng.random(h) < 0.5
            if mask.any():
                break
        times = rng.uniform(0.1, 10.0, size=h)
        for j in np.flatnonzero(mask).tolist():
            kb.link_kernel_hardware(kid, hw_ids[j], [CostModel.constant(float(times[j]), 1.0)])
    kb.record_execution(None, (kernel_ids[c] for c in choices.tolist()))
    return kb


def kb_checksum(kb: KnowledgeBase) -> str:
    return hashlib.sha256(repr(kb.snapshot()).encode()).hexdigest()


def _targets(kb: KnowledgeBase, query_type: int, n: int, rng: np.random.Generator) -> list[tuple]:
    if query_type == 1:
        steps = sorted(kb.steps)
        return [(steps[i],) for i in rng.integers(0, len(steps), size=n).tolist()]
    if query_type == 2:
        pairs = sorted((e.kernel_id, e.hardware_id) for e in kb.perf_edges.values())
        return [pairs[i] for i in rng.integers(0, len(pairs), size=n).tolist()]
    if query_type == 3:
        kernels = sorted(kb.kernels)
        return [(kernels[i],) for i in rng.integers(0, len(kernels), size=n).tolist()]
    raise InvalidArgumentError(f"query type must be 1, 2 or 3, got {query_type}")


QUERIES = {1: query_type1, 2: query_type2, 3: query_type3}


def time_queries(
    kb: KnowledgeBase, query_type: int, trials: int, seed: int = 0, batch: bool = False
) -> BenchResult:
    """Time ``trials`` queries on uniformly random valid targets.

    A warm-up of ``trials // 10`` queries runs first and is not recorded.
    Per-query timing uses ``perf_counter_ns``; with ``batch`` the whole run
    is timed once and every percentile reports the mean.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be positive")
    if not kb.steps or not kb.kernels or not kb.perf_edges:
        raise InvalidArgumentError("cannot benchmark an empty knowledge base")
    rng = np.random.default_rng(seed)
    warmup = trials // 10
    targets = _targets(kb, query_type, warmup + trials, rng)
    fn = QUERIES[query_type]
    for args in targets[:warmup]:
        fn(kb, *args)
    targets = targets[warmup:]
    clock = time.perf_counter_ns
    if batch:
        t0 = clock()
        for args in targets:
            fn(kb, *args)
        mean = (clock() - t0) / trials
        return BenchResult(len(kb.steps), query_type, trials, mean, mean, mean)
    samples = np.empty(trials, dtype=np.float64)
    for i, args in enumerate(targets):
        t0 = clock()
        fn(kb, *args)
        samples[i] = clock() - t0
    p50, p95 = np.percentile(samples, [50, 95])
    return BenchResult(len(kb.steps), query_type, trials, float(samples.mean()), float(p50), float(p95))


def run_sweep(
    sizes: Sequence[int],
    p: float = DEFAULT_P,
    h: int = DEFAULT_H,
    trials: int = 10_000,
    seed: int = 0,
    query_types: Iterable[int] = (1, 2, 3),
    lam: float = DEFAULT_LAMBDA,
    disjoint: bool = False,
    batch: bool = False,
) -> list[BenchResult]:
    results = []
    types = list(query_types)
    for n in sizes:
        kb = generate_random_kb(n, p, h, seed, lam, disjoint)
        for qt in types:
            results.append(time_queries(kb, qt, trials, seed, batch))
    return results


def write_csv(results: Iterable[BenchResult], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow(astuple(r))

