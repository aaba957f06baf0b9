"""Read-only queries against a :class:`~sdhkb.graph.KnowledgeBase`.

None of these functions mutate the graph, so they may run concurrently with
each other but never alongside a mutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Collection, Sequence

from .errors import DimensionMismatchError, InvalidArgumentError, NoMappingError, UnknownEntityError
from .graph import KnowledgeBase, PerformanceModelEdge
from .perfmodel import predict


@dataclass(frozen=True)
class HardwareRecommendation:
    hardware_id: int
    variant_id: int
    predicted_time: float
    predicted_energy: float
    reconfig_penalty: float
    total_cost: float


@dataclass(frozen=True)
class StepCostEstimate:
    hardware_id: int
    estimated_time: float
    support: int
    confidence_weight: float


# The three latency-critical queries reach into the adjacency indexes
# directly; they sit on the benchmark's hot path.


def query_type1(kb: KnowledgeBase, step: int) -> list[int]:
    """All kernels linked to ``step`` over every decomposition, ascending id."""
    adjacent = kb._step_adj.get(step)
    if adjacent is None:
        raise UnknownEntityError(f"unknown step {step}")
    return sorted(set(adjacent))


def query_type2(kb: KnowledgeBase, kernel: int, hardware: int) -> PerformanceModelEdge | None:
    """The performance-model edge for the pair, or ``None`` when unlinked."""
    links = kb._kernel_hw.get(kernel)
    if links is None:
        raise UnknownEntityError(f"unknown kernel {kernel}")
    edge = links.get(hardware)
    if edge is None and hardware not in kb.hardware:
        raise UnknownEntityError(f"unknown hardware {hardware}")
    return edge


def query_type3(kb: KnowledgeBase, kernel: int) -> list[tuple[int, PerformanceModelEdge]]:
    """``(hardware id, edge)`` for every hardware the kernel maps to, ascending id.

    Equivalent to a Type-2 lookup against every hardware configuration;
    vertex ids are allocated in increasing order, so walking the hardware
    table yields ascending ids.
    """
    links = kb._kernel_hw.get(kernel)
    if links is None:
        raise UnknownEntityError(f"unknown kernel {kernel}")
    return [(hid, links[hid]) for hid in kb.hardware if hid in links]


def list_decompositions(kb: KnowledgeBase, step: int) -> set[int]:
    return set(kb.decompositions(step))


def resolve_decomposition(
    kb: KnowledgeBase, step: int, d_id: int
) -> list[tuple[int, dict[str, float]]]:
    """Kernels of one decomposition in execution order, with their edge weights."""
    seq = kb.decompositions(step).get(d_id)
    if seq is None:
        raise UnknownEntityError(f"step {step} has no decomposition {d_id}")
    return [(e.kernel_id, dict(e.weight)) for e in seq]


def recommend_hardware(
    kb: KnowledgeBase,
    kernel: int,
    metadata: Sequence[float],
    current_config: int | None,
    available: Collection[int],
) -> list[HardwareRecommendation]:
    """Rank available hardware for ``kernel`` by predicted time plus reconfiguration.

    Each hardware contributes its cheapest variant. Hardware other than
    ``current_config`` pays its reconfiguration cost. Ties fall back to
    hardware id, then variant id.
    """
    links = kb.hardware_links(kernel)
    if not available:
        raise InvalidArgumentError("available hardware set is empty")
    for hid in available:
        if hid not in kb.hardware:
            raise UnknownEntityError(f"unknown hardware {hid}")
    recs = []
    for hid in sorted(set(available)):
        edge = links.get(hid)
        if edge is None:
            continue
        penalty = 0.0 if hid == current_config else kb.hardware[hid].reconfig_cost
        best = None
        for v in edge.mappings:
            t, en = predict(v.model, metadata)
            cand = HardwareRecommendation(hid, v.variant_id, t, en, penalty, t + penalty)
            if best is None or cand.total_cost < best.total_cost:
                best = cand
        recs.append(best)
    if not recs:
        raise NoMappingError(f"kernel {kernel} has no mapping to any available hardware")
    recs.sort(key=lambda r: (r.total_cost, r.hardware_id, r.variant_id))
    return recs


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine of the angle between ``a`` and ``b``, clamped at 0; 0 for zero vectors."""
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return max(0.0, dot / (na * nb))


def step_hardware_times(kb: KnowledgeBase, step: int) -> dict[int, float]:
    """Best execution time of ``step`` per hardware configuration.

    Uses the step's lowest-numbered decomposition; each kernel runs its
    fastest variant with the step's own features as model input. Hardware
    that cannot run every kernel of the decomposition is left out.
    """
    decomps = kb.decompositions(step)
    if not decomps:
        return {}
    seq = decomps[min(decomps)]
    feats = kb.steps[step].features
    totals: dict[int, float] | None = None
    for e in seq:
        per_hw = {
            hid: min(predict(v.model, feats)[0] for v in edge.mappings)
            for hid, edge in kb._kernel_hw[e.kernel_id].items()
        }
        if totals is None:
            totals = per_hw
        else:
            totals = {hid: totals[hid] + t for hid, t in per_hw.items() if hid in totals}
    return totals or {}


def estimate_step_cost(kb: KnowledgeBase, features: Sequence[float], k: int = 3) -> list[StepCostEstimate]:
    """Per-hardware time estimate for an unseen step from its k most similar known steps.

    Known steps are those with at least one decomposition. The estimate on a
    hardware node is the similarity-weighted mean of the neighbours' best
    times there; neighbours with zero similarity or no full mapping on that
    hardware do not contribute.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    if kb.feature_dim is not None and len(features) != kb.feature_dim:
        raise DimensionMismatchError(f"expected {kb.feature_dim} features, got {len(features)}")
    known = [sid for sid in sorted(kb.steps) if kb._decomp[sid]]
    if not known:
        raise NoMappingError("knowledge base holds no decomposed steps")
    scored = sorted(
        ((cosine_similarity(features, kb.steps[sid].features), sid) for sid in known),
        key=lambda t: (-t[0], t[1]),
    )[:k]
    if all(sim == 0.0 for sim, _ in scored):
        raise NoMappingError("no known step is similar to the given features")

    sums: dict[int, float] = {}
    weights: dict[int, float] = {}
    support: dict[int, int] = {}
    for sim, sid in scored:
        if sim == 0.0:
            continue
        for hid, t in step_hardware_times(kb, sid).items():
            sums[hid] = sums.get(hid, 0.0) + sim * t
            weights[hid] = weights.get(hid, 0.0) + sim
            support[hid] = support.get(hid, 0) + 1
    return [
        StepCostEstimate(hid, sums[hid] / weights[hid], support[hid], weights[hid])
        for hid in sorted(sums)
    ]
