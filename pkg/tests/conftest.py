import random

import pytest

from sdhkb import CostModel, KnowledgeBase
from sdhkb.errors import KBError
from sdhkb.fixtures import convolution, node_classification


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def conv_kb():
    return convolution()


@pytest.fixture
def node_kb():
    return node_classification()[0]


def random_model(rng: random.Random, dim: int = 3) -> CostModel:
    return CostModel(
        [rng.uniform(0.1, 10.0)] + [rng.uniform(-1.0, 1.0) for _ in range(dim)],
        [rng.uniform(0.0, 100.0)] + [rng.uniform(-1.0, 1.0) for _ in range(dim)],
        rng.randrange(5),
    )


def random_small_kb(seed: int, max_vertices: int = 50, mutations: int = 0) -> KnowledgeBase:
    """Random KB of at most ``max_vertices`` vertices built through the public API."""
    rng = random.Random(seed)
    kb = KnowledgeBase()
    n_hw = rng.randint(1, 8)
    n_steps = rng.randint(1, 15)
    n_kernels = rng.randint(1, max_vertices - n_hw - n_steps - 2)
    hws = [kb.add_hardware(f"h{i}", {"x": rng.random()}, rng.uniform(0, 30)) for i in range(n_hw)]
    steps = [kb.add_step(f"s{i}", [rng.random(), rng.choice([8.0, 16.0, 32.0]), rng.random()]) for i in range(n_steps)]
    kernels = [kb.add_kernel(f"k{i}", rng.random() < 0.7) for i in range(n_kernels)]
    for s in steps:
        for d in range(rng.randint(0, 3)):
            for _ in range(rng.randint(1, 4)):
                kb.link_step_kernel(s, rng.choice(kernels), d, None, {"w": rng.random()})
    for k in kernels:
        for h in rng.sample(hws, rng.randint(0, len(hws))):
            kb.link_kernel_hardware(k, h, [random_model(rng) for _ in range(rng.randint(1, 3))])
    kb.record_execution(None, [rng.choice(kernels) for _ in range(rng.randint(0, 30))])
    for _ in range(mutations):
        random_mutation(kb, rng)
    return kb


def random_mutation(kb: KnowledgeBase, rng: random.Random) -> str:
    """Apply one random mutation; illegal attempts must raise without side effects."""
    op = rng.choice(["step", "kernel", "hardware", "link_sk", "link_kh", "merge", "record"])
    kernels = sorted(kb.kernels)
    try:
        if op == "step":
            kb.add_step("s", [rng.random() for _ in range(kb.feature_dim or 3)])
        elif op == "kernel":
            kb.add_kernel("k", rng.random() < 0.5)
        elif op == "hardware":
            kb.add_hardware("h", {}, rng.uniform(0, 10))
        elif op == "link_sk" and kb.steps and kernels:
            s = rng.choice(sorted(kb.steps))
            d = rng.randrange(3)
            # occasionally propose a wrong position to exercise the gap check
            seq = len(kb.decompositions(s).get(d, [])) + (rng.random() < 0.2)
            kb.link_step_kernel(s, rng.choice(kernels), d, seq)
        elif op == "link_kh" and kernels and kb.hardware:
            kb.link_kernel_hardware(rng.choice(kernels), rng.choice(sorted(kb.hardware)), [random_model(rng)])
        elif op == "merge" and len(kernels) >= 2:
            kb.merge_kernels(rng.sample(kernels, rng.randint(2, min(4, len(kernels)))), "m")
        elif op == "record" and kernels:
            kb.record_execution(None, [rng.choice(kernels) for _ in range(rng.randint(0, 5))])
    except KBError:
        pass
    return op


# --- brute-force oracles: scan raw edge tables, never the adjacency indexes


def oracle_type1(kb, step):
    return sorted({e.kernel_id for e in kb.kernel_maps.values() if e.step_id == step})


def oracle_type2(kb, kernel, hardware):
    hits = [e for e in kb.perf_edges.values() if e.kernel_id == kernel and e.hardware_id == hardware]
    assert len(hits) <= 1
    return hits[0] if hits else None


def oracle_type3(kb, kernel):
    return sorted(
        ((e.hardware_id, e) for e in kb.perf_edges.values() if e.kernel_id == kernel),
        key=lambda t: t[0],
    )


def oracle_decompositions(kb, step):
    return {e.d_id for e in kb.kernel_maps.values() if e.step_id == step}
