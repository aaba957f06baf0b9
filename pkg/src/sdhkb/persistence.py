"""Save and load a knowledge base as XML.

Format version 1 (see docs/FILE_FORMAT.md)::

    <knowledge-base format-version="1" next-vertex-id=".." next-edge-id="..">
      <feature-schema>            <!-- empty when no schema is fixed yet -->
        <feature name=".."/>
      </feature-schema>
      <steps><step id name features="f0 f1 .."/></steps>
      <kernels><kernel id name identified frequency/></kernels>
      <hardware-configs>
        <hardware id name reconfig-cost><characteristic key value/></hardware>
      </hardware-configs>
      <kernel-maps>
        <kernel-map id step kernel d-id seq-index><weight key value/></kernel-map>
      </kernel-maps>
      <performance-models>
        <performance-model id kernel hardware>
          <variant id update-count time-params=".." energy-params=".."/>
        </performance-model>
      </performance-models>
    </knowledge-base>

Reals are written with ``repr`` which round-trips every double exactly.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from pathlib import Path

from .errors import FormatError, InvariantViolationError, KBError, StorageError
from .graph import (
    HardwareNode,
    KernelMapEdge,
    KernelNode,
    KnowledgeBase,
    MappingVariant,
    PerformanceModelEdge,
    StepNode,
    check_invariants,
)
from .perfmodel import CostModel

FORMAT_VERSION = "1"


def _reals(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def to_element(kb: KnowledgeBase) -> ET.Element:
    root = ET.Element(
        "knowledge-base",
        {
            "format-version": FORMAT_VERSION,
            "next-vertex-id": str(kb.next_vertex_id),
            "next-edge-id": str(kb.next_edge_id),
        },
    )
    schema = ET.SubElement(root, "feature-schema")
    for name in kb.feature_names or ():
        ET.SubElement(schema, "feature", {"name": name})

    steps = ET.SubElement(root, "steps")
    for s in sorted(kb.steps.values(), key=lambda n: n.id):
        ET.SubElement(steps, "step", {"id": str(s.id), "name": s.name, "features": _reals(s.features)})

    kernels = ET.SubElement(root, "kernels")
    for k in sorted(kb.kernels.values(), key=lambda n: n.id):
        ET.SubElement(
            kernels,
            "kernel",
            {
                "id": str(k.id),
                "name": k.name,
                "identified": "true" if k.identified else "false",
                "frequency": str(k.frequency),
            },
        )

    hardware = ET.SubElement(root, "hardware-configs")
    for h in sorted(kb.hardware.values(), key=lambda n: n.id):
        el = ET.SubElement(
            hardware, "hardware", {"id": str(h.id), "name": h.name, "reconfig-cost": repr(h.reconfig_cost)}
        )
        for key in sorted(h.characteristics):
            ET.SubElement(el, "characteristic", {"key": key, "value": repr(h.characteristics[key])})

    maps = ET.SubElement(root, "kernel-maps")
    for e in sorted(kb.kernel_maps.values(), key=lambda e: e.id):
        el = ET.SubElement(
            maps,
            "kernel-map",
            {
                "id": str(e.id),
                "step": str(e.step_id),
                "kernel": str(e.kernel_id),
                "d-id": str(e.d_id),
                "seq-index": str(e.seq_index),
            },
        )
        for key in sorted(e.weight):
            ET.SubElement(el, "weight", {"key": key, "value": repr(e.weight[key])})

    models = ET.SubElement(root, "performance-models")
    for e in sorted(kb.perf_edges.values(), key=lambda e: e.id):
        el = ET.SubElement(
            models,
            "performance-model",
            {"id": str(e.id), "kernel": str(e.kernel_id), "hardware": str(e.hardware_id)},
        )
        for v in e.mappings:
            ET.SubElement(
                el,
                "variant",
                {
                    "id": str(v.variant_id),
                    "update-count": str(v.model.update_count),
                    "time-params": _reals(v.model.time_params),
                    "energy-params": _reals(v.model.energy_params),
                },
            )
    return root


def dumps(kb: KnowledgeBase) -> str:
    root = to_element(kb)
    ET.indent(root)
    return '<?xml version="1.0" encoding="utf-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def save(kb: KnowledgeBase, path: str | os.PathLike) -> None:
    path = Path(path)
    text = dumps(kb)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write knowledge base to {path}: {exc.strerror or exc}") from exc


# ----------------------------------------------------------------------
# loading


def _describe(el: ET.Element) -> str:
    attrs = " ".join(f'{k}="{v}"' for k, v in el.attrib.items())
    return f"<{el.tag} {attrs}>" if attrs else f"<{el.tag}>"


def _attr(el: ET.Element, name: str, conv=str):
    raw = el.get(name)
    if raw is None:
        raise FormatError(f"{_describe(el)}: missing attribute {name!r}")
    try:
        return conv(raw)
    except ValueError:
        raise FormatError(f"{_describe(el)}: bad value for {name!r}: {raw!r}") from None


def _int(raw: str) -> int:
    return int(raw, 10)


def _bool(raw: str) -> bool:
    if raw not in ("true", "false"):
        raise ValueError(raw)
    return raw == "true"


def _real_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split())


def _section(root: ET.Element, tag: str) -> ET.Element:
    el = root.find(tag)
    if el is None:
        raise FormatError(f"missing <{tag}> section")
    return el


def _children(section: ET.Element, tag: str) -> list[ET.Element]:
    for child in section:
        if child.tag != tag:
            raise FormatError(f"unexpected {_describe(child)} inside <{section.tag}>")
    return list(section)


def from_element(root: ET.Element) -> KnowledgeBase:
    if root.tag != "knowledge-base":
        raise FormatError(f"root element is <{root.tag}>, expected <knowledge-base>")
    version = root.get("format-version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version!r} (expected {FORMAT_VERSION!r})")

    names = [_attr(f, "name") for f in _children(_section(root, "feature-schema"), "feature")]
    kb = KnowledgeBase(names or None)
    kb.next_vertex_id = _attr(root, "next-vertex-id", _int)
    kb.next_edge_id = _attr(root, "next-edge-id", _int)

    def claim_vertex(vid: int, el: ET.Element) -> None:
        if vid in kb.steps or vid in kb.kernels or vid in kb.hardware:
            raise InvariantViolationError(f"{_describe(el)}: vertex id {vid} already used")

    for el in _children(_section(root, "steps"), "step"):
        vid = _attr(el, "id", _int)
        claim_vertex(vid, el)
        kb.steps[vid] = StepNode(vid, _attr(el, "name"), _attr(el, "features", _real_list))
        kb._decomp[vid] = {}
        kb._step_adj[vid] = []
    for el in _children(_section(root, "kernels"), "kernel"):
        vid = _attr(el, "id", _int)
        claim_vertex(vid, el)
        kb.kernels[vid] = KernelNode(
            vid, _attr(el, "name"), _attr(el, "identified", _bool), _attr(el, "frequency", _int)
        )
        kb._kernel_steps[vid] = set()
        kb._kernel_hw[vid] = {}
    for el in _children(_section(root, "hardware-configs"), "hardware"):
        vid = _attr(el, "id", _int)
        claim_vertex(vid, el)
        chars = {
            _attr(c, "key"): _attr(c, "value", float) for c in _children(el, "characteristic")
        }
        kb.hardware[vid] = HardwareNode(vid, _attr(el, "name"), chars, _attr(el, "reconfig-cost", float))

    # Type-3 queries walk the hardware table and rely on ascending ids
    kb.hardware = dict(sorted(kb.hardware.items()))

    seen_edges: set[int] = set()

    def claim_edge(eid: int, el: ET.Element) -> None:
        if eid in seen_edges:
            raise InvariantViolationError(f"{_describe(el)}: edge id {eid} already used")
        seen_edges.add(eid)

    maps = []
    for el in _children(_section(root, "kernel-maps"), "kernel-map"):
        eid = _attr(el, "id", _int)
        claim_edge(eid, el)
        edge = KernelMapEdge(
            eid,
            _attr(el, "step", _int),
            _attr(el, "kernel", _int),
            _attr(el, "d-id", _int),
            _attr(el, "seq-index", _int),
            {_attr(w, "key"): _attr(w, "value", float) for w in _children(el, "weight")},
        )
        if edge.step_id not in kb.steps or edge.kernel_id not in kb.kernels:
            raise InvariantViolationError(
                f"{_describe(el)}: kernel-map must join a step to a kernel"
            )
        maps.append(edge)
    for edge in sorted(maps, key=lambda e: (e.step_id, e.d_id, e.seq_index)):
        kb._attach_kernel_map(edge)

    for el in _children(_section(root, "performance-models"), "performance-model"):
        eid = _attr(el, "id", _int)
        claim_edge(eid, el)
        kid, hid = _attr(el, "kernel", _int), _attr(el, "hardware", _int)
        if kid not in kb.kernels or hid not in kb.hardware:
            raise InvariantViolationError(
                f"{_describe(el)}: performance-model must join a kernel to a hardware node"
            )
        if hid in kb._kernel_hw[kid]:
            raise InvariantViolationError(f"{_describe(el)}: duplicate kernel/hardware pair")
        variants = []
        for v in _children(el, "variant"):
            try:
                model = CostModel(
                    _attr(v, "time-params", _real_list),
                    _attr(v, "energy-params", _real_list),
                    _attr(v, "update-count", _int),
                )
            except KBError as exc:
                raise FormatError(f"{_describe(v)}: {exc}") from None
            variants.append(MappingVariant(_attr(v, "id", _int), model))
        edge = PerformanceModelEdge(eid, kid, hid, variants)
        kb.perf_edges[eid] = edge
        kb._kernel_hw[kid][hid] = edge

    problems = check_invariants(kb)
    if problems:
        raise InvariantViolationError("invalid knowledge base: " + "; ".join(problems[:5]))
    return kb


def loads(text: str) -> KnowledgeBase:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise FormatError(f"XML parse error at line {line}, column {col}: {exc}") from None
    return from_element(root)


def load(path: str | os.PathLike) -> KnowledgeBase:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read knowledge base {path}: {exc.strerror or exc}") from exc
    try:
        return loads(text)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
    except InvariantViolationError as exc:
        raise type(exc)(f"{path}: {exc}") from None
