"""Tripartite knowledge graph: steps -> kernels -> hardware configurations.

The structure has no internal locking. Any number of readers may share a
:class:`KnowledgeBase`, but mutations must not overlap with reads or with
each other; callers serialize writes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DimensionMismatchError,
    DuplicateEdgeError,
    InvalidArgumentError,
    LayerViolationError,
    SequenceGapError,
    UnknownEntityError,
)
from .perfmodel import CostModel

#: Names used when the first step inserted has exactly three features.
DEFAULT_FEATURE_NAMES = ("access_irregularity", "precision_bits", "compute_comm_ratio")


@dataclass(slots=True)
class StepNode:
    id: int
    name: str
    features: tuple[float, ...]


@dataclass(slots=True)
class KernelNode:
    id: int
    name: str
    identified: bool
    frequency: int = 0


@dataclass(slots=True)
class HardwareNode:
    id: int
    name: str
    characteristics: dict[str, float]
    reconfig_cost: float


@dataclass(slots=True)
class KernelMapEdge:
    id: int
    step_id: int
    kernel_id: int
    d_id: int
    seq_index: int
    weight: dict[str, float] = field(default_factory=dict)


@dataclass(slots=True)
class MappingVariant:
    variant_id: int
    model: CostModel


@dataclass(slots=True)
class PerformanceModelEdge:
    id: int
    kernel_id: int
    hardware_id: int
    mappings: list[MappingVariant]


@dataclass(slots=True)
class Workflow:
    """Finite-state machine over step ids.

    ``unknown_steps`` lists states that are deliberately absent from the
    knowledge base (steps still awaiting discovery).
    """

    id: int
    states: list[int]
    transitions: list[tuple[int, int, str]] = field(default_factory=list)
    initial: int = 0
    terminal: frozenset[int] = frozenset()
    unknown_steps: frozenset[int] = frozenset()

    def validate(self, kb: "KnowledgeBase") -> None:
        n = len(self.states)
        for src, dst, _ in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise InvalidArgumentError(f"transition {src}->{dst} outside {n} states")
        if n and not 0 <= self.initial < n:
            raise InvalidArgumentError(f"initial state {self.initial} outside {n} states")
        for t in self.terminal:
            if not 0 <= t < n:
                raise InvalidArgumentError(f"terminal state {t} outside {n} states")
        for sid in self.states:
            if sid not in kb.steps and sid not in self.unknown_steps:
                raise UnknownEntityError(f"unknown step {sid} in workflow {self.id}")


class KnowledgeBase:
    """In-memory tripartite graph with adjacency indexes for fast queries.

    Vertex ids come from one counter shared by all three layers, so an id
    names exactly one vertex kind. Edge ids come from a second counter.
    """

    def __init__(self, feature_names: Sequence[str] | None = None) -> None:
        self.feature_names: tuple[str, ...] | None = (
            tuple(feature_names) if feature_names is not None else None
        )
        self.steps: dict[int, StepNode] = {}
        self.kernels: dict[int, KernelNode] = {}
        self.hardware: dict[int, HardwareNode] = {}
        self.kernel_maps: dict[int, KernelMapEdge] = {}
        self.perf_edges: dict[int, PerformanceModelEdge] = {}
        self.next_vertex_id = 0
        self.next_edge_id = 0
        # step id -> d_id -> edges ordered by seq_index
        self._decomp: dict[int, dict[int, list[KernelMapEdge]]] = {}
        # step id -> kernel ids of its edges, with repeats (flat adjacency)
        self._step_adj: dict[int, list[int]] = {}
        # kernel id -> ids of KernelMapEdges targeting it
        self._kernel_steps: dict[int, set[int]] = {}
        # kernel id -> hardware id -> edge
        self._kernel_hw: dict[int, dict[int, PerformanceModelEdge]] = {}

    # ------------------------------------------------------------------
    # schema

    @property
    def feature_dim(self) -> int | None:
        return None if self.feature_names is None else len(self.feature_names)

    def _fix_schema(self, dim: int) -> None:
        if self.feature_names is None:
            if dim == len(DEFAULT_FEATURE_NAMES):
                self.feature_names = DEFAULT_FEATURE_NAMES
            else:
                self.feature_names = tuple(f"feature_{i}" for i in range(dim))
        elif dim != len(self.feature_names):
            raise DimensionMismatchError(
                f"expected {len(self.feature_names)} features, got {dim}"
            )

    def _alloc_vertex(self) -> int:
        vid = self.next_vertex_id
        self.next_vertex_id += 1
        return vid

    def _alloc_edge(self) -> int:
        eid = self.next_edge_id
        self.next_edge_id += 1
        return eid

    # ------------------------------------------------------------------
    # vertices

    def add_step(self, name: str, features: Sequence[float]) -> int:
        feats = tuple(float(v) for v in features)
        self._fix_schema(len(feats))
        sid = self._alloc_vertex()
        self.steps[sid] = StepNode(sid, name, feats)
        self._decomp[sid] = {}
        self._step_adj[sid] = []
        return sid

    def add_kernel(self, name: str, identified: bool = True) -> int:
        kid = self._alloc_vertex()
        self.kernels[kid] = KernelNode(kid, name, bool(identified), 0)
        self._kernel_steps[kid] = set()
        self._kernel_hw[kid] = {}
        return kid

    def add_hardware(
        self,
        name: str,
        characteristics: Mapping[str, float] | None = None,
        reconfig_cost: float = 0.0,
    ) -> int:
        reconfig_cost = float(reconfig_cost)
        if not reconfig_cost >= 0.0:
            raise InvalidArgumentError(f"reconfig_cost must be >= 0, got {reconfig_cost}")
        hid = self._alloc_vertex()
        chars = {str(k): float(v) for k, v in (characteristics or {}).items()}
        self.hardware[hid] = HardwareNode(hid, name, chars, reconfig_cost)
        return hid

    def vertex_kind(self, vid: int) -> str:
        if vid in self.steps:
            return "step"
        if vid in self.kernels:
            return "kernel"
        if vid in self.hardware:
            return "hardware"
        raise UnknownEntityError(f"unknown vertex {vid}")

    def _require(self, vid: int, kind: str) -> None:
        actual = self.vertex_kind(vid)
        if actual != kind:
            raise LayerViolationError(f"vertex {vid} is a {actual}, expected a {kind}")

    # ------------------------------------------------------------------
    # edges

    def link_step_kernel(
        self,
        step: int,
        kernel: int,
        d_id: int = 0,
        seq_index: int | None = None,
        weight: Mapping[str, float] | None = None,
    ) -> int:
        """Append ``kernel`` to decomposition ``d_id`` of ``step``.

        ``seq_index`` defaults to the next free position and must equal it
        when given.
        """
        self._require(step, "step")
        self._require(kernel, "kernel")
        if d_id < 0:
            raise InvalidArgumentError(f"d_id must be non-negative, got {d_id}")
        seq = self._decomp[step].get(d_id, [])
        if seq_index is None:
            seq_index = len(seq)
        if seq_index != len(seq):
            raise SequenceGapError(
                f"step {step} decomposition {d_id} has {len(seq)} kernels; "
                f"seq_index must be {len(seq)}, got {seq_index}"
            )
        eid = self._alloc_edge()
        edge = KernelMapEdge(
            eid, step, kernel, d_id, seq_index, {str(k): float(v) for k, v in (weight or {}).items()}
        )
        self._attach_kernel_map(edge)
        return eid

    def _attach_kernel_map(self, edge: KernelMapEdge) -> None:
        self.kernel_maps[edge.id] = edge
        self._decomp[edge.step_id].setdefault(edge.d_id, []).append(edge)
        self._step_adj[edge.step_id].append(edge.kernel_id)
        self._kernel_steps[edge.kernel_id].add(edge.id)

    def _check_model_dim(self, model: CostModel) -> None:
        self._fix_schema(model.n_features)

    def link_kernel_hardware(self, kernel: int, hardware: int, models: Sequence[CostModel]) -> int:
        self._require(kernel, "kernel")
        self._require(hardware, "hardware")
        models = list(models)
        if not models:
            raise InvalidArgumentError("at least one cost model variant is required")
        if hardware in self._kernel_hw[kernel]:
            raise DuplicateEdgeError(f"kernel {kernel} is already linked to hardware {hardware}")
        for m in models:
            self._check_model_dim(m)
        eid = self._alloc_edge()
        edge = PerformanceModelEdge(
            eid, kernel, hardware, [MappingVariant(i, m) for i, m in enumerate(models)]
        )
        self._attach_perf_edge(edge)
        return eid

    def _attach_perf_edge(self, edge: PerformanceModelEdge) -> None:
        self.perf_edges[edge.id] = edge
        self._kernel_hw[edge.kernel_id][edge.hardware_id] = edge

    def set_model(self, kernel: int, hardware: int, variant_id: int, model: CostModel) -> None:
        """Replace one variant's model (used after an online update)."""
        edge = self._kernel_hw.get(kernel, {}).get(hardware)
        if edge is None:
            raise UnknownEntityError(f"no mapping from kernel {kernel} to hardware {hardware}")
        for v in edge.mappings:
            if v.variant_id == variant_id:
                self._check_model_dim(model)
                v.model = model
                return
        raise UnknownEntityError(f"edge {edge.id} has no variant {variant_id}")

    # ------------------------------------------------------------------
    # structural rewrites

    def merge_kernels(self, kernel_ids: Sequence[int], new_name: str) -> int:
        """Fuse several kernels into one new kernel.

        Runs of adjacent positions held by merged kernels inside a
        decomposition collapse to a single position (weights are united,
        earlier positions winning on key clashes); sequence indexes are then
        re-compacted. Hardware mappings of the merged kernels toward a common
        hardware node are united into one edge with renumbered variants.
        """
        ids = list(kernel_ids)
        if len(ids) < 2:
            raise InvalidArgumentError("merge needs at least two kernels")
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError(f"duplicate kernel ids in merge list {ids}")
        for k in ids:
            if k not in self.kernels:
                raise UnknownEntityError(f"unknown kernel {k}")
        merged = set(ids)

        new_id = self._alloc_vertex()
        new_kernel = KernelNode(
            new_id,
            new_name,
            all(self.kernels[k].identified for k in ids),
            sum(self.kernels[k].frequency for k in ids),
        )
        self.kernels[new_id] = new_kernel
        self._kernel_steps[new_id] = set()
        self._kernel_hw[new_id] = {}

        touched: set[tuple[int, int]] = set()
        for k in ids:
            for eid in self._kernel_steps[k]:
                e = self.kernel_maps[eid]
                touched.add((e.step_id, e.d_id))
        for step, d_id in sorted(touched):
            rewritten: list[KernelMapEdge] = []
            prev_merged = False
            for e in self._decomp[step][d_id]:
                if e.kernel_id in merged:
                    if prev_merged:
                        head = rewritten[-1]
                        for key, val in e.weight.items():
                            head.weight.setdefault(key, val)
                        del self.kernel_maps[e.id]
                        continue
                    e.kernel_id = new_id
                    self._kernel_steps[new_id].add(e.id)
                    prev_merged = True
                else:
                    prev_merged = False
                rewritten.append(e)
            for i, e in enumerate(rewritten):
                e.seq_index = i
            self._decomp[step][d_id] = rewritten
        for step in {s for s, _ in touched}:
            decomps = self._decomp[step]
            self._step_adj[step] = [e.kernel_id for d in sorted(decomps) for e in decomps[d]]

        by_hw: dict[int, list[MappingVariant]] = {}
        for k in ids:
            for hid, edge in self._kernel_hw[k].items():
                by_hw.setdefault(hid, []).extend(edge.mappings)
                del self.perf_edges[edge.id]
        for hid in sorted(by_hw):
            variants = [MappingVariant(i, v.model) for i, v in enumerate(by_hw[hid])]
            self._attach_perf_edge(PerformanceModelEdge(self._alloc_edge(), new_id, hid, variants))

        for k in ids:
            del self.kernels[k]
            del self._kernel_steps[k]
            del self._kernel_hw[k]
        return new_id

    def record_execution(self, workflow: Workflow | None, trace: Iterable[int]) -> None:
        """Bump kernel usage counts by their occurrences in ``trace``.

        Validation happens before any counter moves, so a bad trace leaves
        the graph untouched.
        """
        counts = Counter(trace)
        for k in counts:
            if k not in self.kernels:
                raise UnknownEntityError(f"unknown kernel {k}")
        if workflow is not None:
            workflow.validate(self)
        for k, n in counts.items():
            self.kernels[k].frequency += n

    # ------------------------------------------------------------------
    # read helpers

    def decompositions(self, step: int) -> dict[int, list[KernelMapEdge]]:
        try:
            return self._decomp[step]
        except KeyError:
            raise UnknownEntityError(f"unknown step {step}") from None

    def hardware_links(self, kernel: int) -> dict[int, PerformanceModelEdge]:
        try:
            return self._kernel_hw[kernel]
        except KeyError:
            raise UnknownEntityError(f"unknown kernel {kernel}") from None

    def n_vertices(self) -> int:
        return len(self.steps) + len(self.kernels) + len(self.hardware)

    def n_edges(self) -> int:
        return len(self.kernel_maps) + len(self.perf_edges)

    def snapshot(self) -> tuple:
        """Canonical, comparable view of the whole graph (used for equality)."""
        return (
            self.feature_names,
            self.next_vertex_id,
            self.next_edge_id,
            sorted((s.id, s.name, s.features) for s in self.steps.values()),
            sorted((k.id, k.name, k.identified, k.frequency) for k in self.kernels.values()),
            sorted(
                (h.id, h.name, sorted(h.characteristics.items()), h.reconfig_cost)
                for h in self.hardware.values()
            ),
            sorted(
                (e.id, e.step_id, e.kernel_id, e.d_id, e.seq_index, sorted(e.weight.items()))
                for e in self.kernel_maps.values()
            ),
            sorted(
                (e.id, e.kernel_id, e.hardware_id, [(v.variant_id, v.model) for v in e.mappings])
                for e in self.perf_edges.values()
            ),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"KnowledgeBase(steps={len(self.steps)}, kernels={len(self.kernels)}, "
            f"hardware={len(self.hardware)}, edges={self.n_edges()})"
        )


def check_invariants(kb: KnowledgeBase) -> list[str]:
    """Scan the whole graph and describe every broken invariant."""
    problems: list[str] = []
    layers = (set(kb.steps), set(kb.kernels), set(kb.hardware))
    for i in range(3):
        for j in range(i + 1, 3):
            for vid in sorted(layers[i] & layers[j]):
                problems.append(f"vertex {vid} belongs to more than one layer")
    for table in (kb.steps, kb.kernels, kb.hardware):
        for vid, node in table.items():
            if node.id != vid:
                problems.append(f"vertex key {vid} holds node with id {node.id}")
            if vid >= kb.next_vertex_id:
                problems.append(f"vertex {vid} not below id counter {kb.next_vertex_id}")
    if list(kb.hardware) != sorted(kb.hardware):
        problems.append("hardware table is not in ascending id order")
    for k in kb.kernels.values():
        if k.frequency < 0:
            problems.append(f"kernel {k.id} has negative frequency")
    for h in kb.hardware.values():
        if not h.reconfig_cost >= 0:
            problems.append(f"hardware {h.id} has negative reconfiguration cost")
    dim = kb.feature_dim
    for s in kb.steps.values():
        if dim is not None and len(s.features) != dim:
            problems.append(f"step {s.id} has {len(s.features)} features, schema has {dim}")

    for eid, e in kb.kernel_maps.items():
        if e.id != eid:
            problems.append(f"edge key {eid} holds edge with id {e.id}")
        if e.step_id not in kb.steps or e.kernel_id not in kb.kernels:
            problems.append(f"kernel-map edge {eid} joins {e.step_id}->{e.kernel_id}, not step->kernel")
        if eid >= kb.next_edge_id:
            problems.append(f"edge {eid} not below id counter {kb.next_edge_id}")
    for eid, e in kb.perf_edges.items():
        if e.id != eid:
            problems.append(f"edge key {eid} holds edge with id {e.id}")
        if e.kernel_id not in kb.kernels or e.hardware_id not in kb.hardware:
            problems.append(
                f"performance edge {eid} joins {e.kernel_id}->{e.hardware_id}, not kernel->hardware"
            )
        if eid >= kb.next_edge_id or eid in kb.kernel_maps:
            problems.append(f"edge id {eid} reused or beyond counter")
        if not e.mappings:
            problems.append(f"performance edge {eid} has no mapping variants")
        if [v.variant_id for v in e.mappings] != list(range(len(e.mappings))):
            problems.append(f"performance edge {eid} variant ids are not 0..n-1")
        for v in e.mappings:
            if dim is not None and v.model.n_features != dim:
                problems.append(f"performance edge {eid} variant {v.variant_id} has wrong dimension")

    pairs = Counter((e.kernel_id, e.hardware_id) for e in kb.perf_edges.values())
    for pair, n in pairs.items():
        if n > 1:
            problems.append(f"{n} performance edges for kernel/hardware pair {pair}")

    # decomposition contiguity, checked from the raw edge table
    positions: dict[tuple[int, int], list[int]] = {}
    for e in kb.kernel_maps.values():
        positions.setdefault((e.step_id, e.d_id), []).append(e.seq_index)
    for key, seqs in positions.items():
        if sorted(seqs) != list(range(len(seqs))):
            problems.append(f"step {key[0]} decomposition {key[1]} has seq indexes {sorted(seqs)}")

    # indexes agree with edge tables
    indexed = 0
    for sid, decomps in kb._decomp.items():
        if sid not in kb.steps:
            problems.append(f"decomposition index references missing step {sid}")
        for d_id, seq in decomps.items():
            for i, e in enumerate(seq):
                indexed += 1
                if kb.kernel_maps.get(e.id) is not e or e.seq_index != i or e.d_id != d_id:
                    problems.append(f"decomposition index out of sync at edge {e.id}")
    if indexed != len(kb.kernel_maps):
        problems.append("decomposition index does not cover every kernel-map edge")
    if set(kb._decomp) != set(kb.steps) or set(kb._step_adj) != set(kb.steps):
        problems.append("step index keys differ from step set")
    for sid, adj in kb._step_adj.items():
        expected = sorted(e.kernel_id for seq in kb._decomp.get(sid, {}).values() for e in seq)
        if sorted(adj) != expected:
            problems.append(f"adjacency of step {sid} out of sync with its decompositions")
    for kid, hw in kb._kernel_hw.items():
        for hid, e in hw.items():
            if kb.perf_edges.get(e.id) is not e or e.kernel_id != kid or e.hardware_id != hid:
                problems.append(f"hardware index out of sync at edge {e.id}")
    if sum(len(hw) for hw in kb._kernel_hw.values()) != len(kb.perf_edges):
        problems.append("hardware index does not cover every performance edge")
    for kid, eids in kb._kernel_steps.items():
        for eid in eids:
            e = kb.kernel_maps.get(eid)
            if e is None or e.kernel_id != kid:
                problems.append(f"kernel-step index out of sync at edge {eid}")
    if set(kb._kernel_steps) != set(kb.kernels) or set(kb._kernel_hw) != set(kb.kernels):
        problems.append("kernel indexes differ from kernel set")
    return problems
