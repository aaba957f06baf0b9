"""Command-line interface.

Exit codes: 0 ok, 2 usage / bad parameter, 3 unknown entity or no answer,
4 I/O or parse failure, 5 invariant violation.

Every command prints human-readable text by default; ``--json`` switches to
one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import bench, coverage_sim as coverage, persistence, queries
from .errors import InvalidArgumentError, KBError, StorageError, UnknownEntityError
from .fixtures import FIXTURES, build_fixture
from .graph import KnowledgeBase, PerformanceModelEdge
from .perfmodel import CostModel, Observation, update

ENV_KB = "SDHKB_KB"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 4


def _ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _reals(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _key_value(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    try:
        if not sep or not key:
            raise ValueError
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected KEY=NUMBER, got {text!r}") from None


def _variant(text: str) -> CostModel:
    time_part, sep, energy_part = text.partition("/")
    time_params = _reals(time_part)
    energy_params = _reals(energy_part) if sep else [0.0] * len(time_params)
    try:
        return CostModel(time_params, energy_params)
    except KBError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _edge_json(edge: PerformanceModelEdge | None) -> dict[str, Any] | None:
    if edge is None:
        return None
    return {
        "edge_id": edge.id,
        "kernel": edge.kernel_id,
        "hardware": edge.hardware_id,
        "variants": [
            {
                "variant_id": v.variant_id,
                "time_params": list(v.model.time_params),
                "energy_params": list(v.model.energy_params),
                "update_count": v.model.update_count,
            }
            for v in edge.mappings
        ],
    }


class Output:
    def __init__(self, as_json: bool, stream=None) -> None:
        self.as_json = as_json
        self.stream = stream or sys.stdout

    def emit(self, record: dict[str, Any], text: str) -> None:
        if self.as_json:
            print(json.dumps(record, sort_keys=True), file=self.stream)
        else:
            print(text, file=self.stream)


# ----------------------------------------------------------------------
# commands


def _kb_path(args) -> Path:
    if args.kb is None:
        raise InvalidArgumentError(f"no knowledge base given (use --kb or set {ENV_KB})")
    return Path(args.kb)


def _load(args) -> KnowledgeBase:
    return persistence.load(_kb_path(args))


def _store(kb: KnowledgeBase, args) -> None:
    persistence.save(kb, getattr(args, "out", None) or _kb_path(args))


def cmd_init(args, out: Output) -> None:
    path = _kb_path(args)
    if path.exists() and not args.force:
        raise InvalidArgumentError(f"{path} exists (use --force to overwrite)")
    names = args.features.split(",") if args.features else None
    persistence.save(KnowledgeBase(names), path)
    out.emit({"created": str(path)}, f"created empty knowledge base {path}")


def cmd_show(args, out: Output) -> None:
    kb = _load(args)
    record = {
        "feature_names": list(kb.feature_names or []),
        "steps": [{"id": s.id, "name": s.name, "features": list(s.features)} for s in kb.steps.values()],
        "kernels": [
            {"id": k.id, "name": k.name, "identified": k.identified, "frequency": k.frequency}
            for k in kb.kernels.values()
        ],
        "hardware": [
            {"id": h.id, "name": h.name, "reconfig_cost": h.reconfig_cost, "characteristics": h.characteristics}
            for h in kb.hardware.values()
        ],
        "kernel_maps": len(kb.kernel_maps),
        "performance_models": len(kb.perf_edges),
    }
    lines = [repr(kb)]
    lines += [f"  step {s.id}: {s.name} {list(s.features)}" for s in kb.steps.values()]
    lines += [
        f"  kernel {k.id}: {k.name} ({'identified' if k.identified else 'unidentified'}, freq {k.frequency})"
        for k in kb.kernels.values()
    ]
    lines += [f"  hardware {h.id}: {h.name} (reconfig {h.reconfig_cost} ms)" for h in kb.hardware.values()]
    out.emit(record, "\n".join(lines))


def _need(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise InvalidArgumentError(
            f"query type {args.type} needs " + ", ".join(f"--{n}" for n in missing)
        )


def cmd_query(args, out: Output) -> None:
    if args.decomposition is not None:
        if args.step is not None and args.step != args.decomposition:
            raise InvalidArgumentError("--decomposition and --step name different steps")
        args.step = args.decomposition
        args.type = "decomposition"
    if args.type is None:
        raise InvalidArgumentError("choose a query with --type or --decomposition")
    kb = _load(args)
    qt = args.type
    if qt == "1":
        _need(args, "step")
        kernels = queries.query_type1(kb, args.step)
        out.emit({"query": 1, "step": args.step, "kernels": kernels}, " ".join(map(str, kernels)))
    elif qt == "2":
        _need(args, "kernel", "hardware")
        edge = queries.query_type2(kb, args.kernel, args.hardware)
        text = "absent" if edge is None else json.dumps(_edge_json(edge))
        out.emit({"query": 2, "kernel": args.kernel, "hardware": args.hardware, "model": _edge_json(edge)}, text)
    elif qt == "3":
        _need(args, "kernel")
        rows = queries.query_type3(kb, args.kernel)
        record = {"query": 3, "kernel": args.kernel, "models": [_edge_json(e) for _, e in rows]}
        out.emit(record, "\n".join(f"{h}: {json.dumps(_edge_json(e))}" for h, e in rows))
    elif qt == "decomposition":
        _need(args, "step", "d-id")
        seq = queries.resolve_decomposition(kb, args.step, args.d_id)
        record = {"query": "decomposition", "step": args.step, "d_id": args.d_id,
                  "kernels": [k for k, _ in seq], "weights": [w for _, w in seq]}
        out.emit(record, " ".join(str(k) for k, _ in seq))
    elif qt == "decompositions":
        _need(args, "step")
        d_ids = sorted(queries.list_decompositions(kb, args.step))
        out.emit({"query": "decompositions", "step": args.step, "d_ids": d_ids}, " ".join(map(str, d_ids)))
    elif qt == "recommend":
        _need(args, "kernel", "metadata")
        available = args.available if args.available is not None else sorted(kb.hardware)
        recs = queries.recommend_hardware(kb, args.kernel, args.metadata, args.current, available)
        out.emit(
            {"query": "recommend", "kernel": args.kernel, "ranking": [asdict(r) for r in recs]},
            "\n".join(
                f"hardware {r.hardware_id} variant {r.variant_id}: total {r.total_cost:.6g} ms "
                f"(time {r.predicted_time:.6g} + reconfig {r.reconfig_penalty:.6g})"
                for r in recs
            ),
        )
    elif qt == "estimate":
        _need(args, "features")
        ests = queries.estimate_step_cost(kb, args.features, args.k)
        out.emit(
            {"query": "estimate", "estimates": [asdict(e) for e in ests]},
            "\n".join(
                f"hardware {e.hardware_id}: {e.estimated_time:.6g} ms (support {e.support})" for e in ests
            ),
        )


def cmd_add(args, out: Output) -> None:
    path = _kb_path(args)
    kb = persistence.load(path) if path.exists() else KnowledgeBase()
    what = args.what
    if what == "step":
        if args.name is None or args.features is None:
            raise InvalidArgumentError("add step needs --name and --features")
        new_id = kb.add_step(args.name, args.features)
    elif what == "kernel":
        if args.name is None:
            raise InvalidArgumentError("add kernel needs --name")
        new_id = kb.add_kernel(args.name, not args.unidentified)
    elif what == "hardware":
        if args.name is None:
            raise InvalidArgumentError("add hardware needs --name")
        new_id = kb.add_hardware(args.name, dict(args.char or []), args.reconfig_cost)
    else:
        if args.kernel is None:
            raise InvalidArgumentError("add link needs --kernel")
        if args.step is not None and args.hardware is None:
            new_id = kb.link_step_kernel(args.step, args.kernel, args.d_id or 0, args.seq, dict(args.weight or []))
        elif args.hardware is not None and args.step is None:
            if not args.variant:
                raise InvalidArgumentError("kernel-to-hardware link needs at least one --variant")
            new_id = kb.link_kernel_hardware(args.kernel, args.hardware, args.variant)
        else:
            raise InvalidArgumentError("add link needs exactly one of --step or --hardware")
    _store(kb, args)
    out.emit({"added": what, "id": new_id}, f"added {what} {new_id}")


def cmd_merge(args, out: Output) -> None:
    kb = _load(args)
    new_id = kb.merge_kernels(args.kernels, args.name)
    _store(kb, args)
    out.emit(
        {"merged": args.kernels, "id": new_id, "frequency": kb.kernels[new_id].frequency},
        f"merged {args.kernels} into kernel {new_id}",
    )


def cmd_record(args, out: Output) -> None:
    kb = _load(args)
    kb.record_execution(None, args.trace)
    _store(kb, args)
    freqs = {str(k): kb.kernels[k].frequency for k in sorted(set(args.trace))}
    out.emit({"frequencies": freqs}, " ".join(f"{k}:{v}" for k, v in freqs.items()))


def cmd_update_model(args, out: Output) -> None:
    kb = _load(args)
    edge = queries.query_type2(kb, args.kernel, args.hardware)
    if edge is None:
        raise UnknownEntityError(f"no mapping from kernel {args.kernel} to hardware {args.hardware}")
    variant = next((v for v in edge.mappings if v.variant_id == args.variant), None)
    if variant is None:
        raise UnknownEntityError(f"edge {edge.id} has no variant {args.variant}")
    model = update(variant.model, Observation(args.metadata, args.time, args.energy), args.rate)
    kb.set_model(args.kernel, args.hardware, args.variant, model)
    _store(kb, args)
    out.emit(
        {"kernel": args.kernel, "hardware": args.hardware, "variant": args.variant,
         "time_params": list(model.time_params), "energy_params": list(model.energy_params),
         "update_count": model.update_count},
        f"updated model (update #{model.update_count})",
    )


def _open_output(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_bench(args, out: Output) -> None:
    results = bench.run_sweep(
        args.sizes, args.p, args.h, args.trials, args.seed, args.types, args.lam, args.disjoint, args.batch
    )
    stream, close = _open_output(args.output)
    try:
        bench.write_csv(results, stream)
    finally:
        if close:
            stream.close()


def cmd_simulate(args, out: Output) -> None:
    params = coverage.WorkloadParams(
        args.lam, args.p, args.workflows, args.steps, args.universe, args.open_universe
    )
    sizes = args.kb_sizes if args.kb_sizes is not None else list(range(0, args.universe + 1, 5))
    if sizes[-1] != args.universe and args.kb_sizes is None:
        sizes.append(args.universe)
    points = coverage.simulate_uncoverage(params, sizes, args.seed, args.replicates)
    stream, close = _open_output(args.output)
    try:
        stream.write("kb_size,mean_uncoverage,stddev\n")
        for pt in points:
            stream.write(f"{pt.kb_kernel_count},{pt.mean_uncoverage!r},{pt.stddev!r}\n")
    finally:
        if close:
            stream.close()


def cmd_fixture(args, out: Output) -> None:
    kb = build_fixture(args.name)
    persistence.save(kb, args.output)
    out.emit({"fixture": args.name, "path": str(args.output)}, f"wrote {args.name} to {args.output}")


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdhkb", description="Tripartite compiler knowledge base.")
    parser.add_argument("--json", action="store_true", help="emit JSON lines instead of text")
    sub = parser.add_subparsers(dest="command", required=True)

    kb_opt = argparse.ArgumentParser(add_help=False)
    kb_opt.add_argument(
        "--kb", default=os.environ.get(ENV_KB), help=f"knowledge base file (default: ${ENV_KB})"
    )
    out_opt = argparse.ArgumentParser(add_help=False)
    out_opt.add_argument("--out", help="write the modified knowledge base here instead of --kb")

    p = sub.add_parser("init", parents=[kb_opt], help="create an empty knowledge base file")
    p.add_argument("--features", help="comma-separated feature names (fixes the schema)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("show", parents=[kb_opt], help="summarize a knowledge base")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("query", parents=[kb_opt], help="answer a query")
    p.add_argument(
        "--type",
        choices=["1", "2", "3", "decomposition", "decompositions", "recommend", "estimate"],
    )
    p.add_argument("--decomposition", type=int, metavar="STEP", help="shorthand: resolve a decomposition of STEP")
    p.add_argument("--step", type=int)
    p.add_argument("--kernel", type=int)
    p.add_argument("--hardware", type=int)
    p.add_argument("--d-id", type=int)
    p.add_argument("--metadata", type=_reals, help="feature vector fed to cost models")
    p.add_argument("--current", type=int, help="currently configured hardware id")
    p.add_argument("--available", type=_ints, help="available hardware ids (default: all)")
    p.add_argument("--features", type=_reals, help="features of an unknown step (estimate)")
    p.add_argument("--k", type=int, default=3, help="neighbours used by estimate (default: 3)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("add", parents=[kb_opt, out_opt], help="add a vertex or an edge")
    p.add_argument("what", choices=["step", "kernel", "hardware", "link"])
    p.add_argument("--name")
    p.add_argument("--features", type=_reals)
    p.add_argument("--unidentified", action="store_true", help="kernel lacks a known optimized mapping")
    p.add_argument("--char", type=_key_value, action="append", metavar="KEY=VALUE")
    p.add_argument("--reconfig-cost", type=float, default=0.0, help="milliseconds (default: 0)")
    p.add_argument("--step", type=int)
    p.add_argument("--kernel", type=int)
    p.add_argument("--hardware", type=int)
    p.add_argument("--d-id", type=int)
    p.add_argument("--seq", type=int, help="sequence position (default: append)")
    p.add_argument("--weight", type=_key_value, action="append", metavar="KEY=VALUE")
    p.add_argument(
        "--variant", type=_variant, action="append", metavar="T0,T1,../E0,E1,..",
        help="time and energy coefficients (intercept first); repeat for more variants",
    )
    p.set_defaults(func=cmd_add)

    p = sub.add_parser("merge", parents=[kb_opt, out_opt], help="merge kernels into one")
    p.add_argument("--kernels", type=_ints, required=True)
    p.add_argument("--name", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("record", parents=[kb_opt, out_opt], help="count an execution trace")
    p.add_argument("--trace", type=_ints, required=True, help="comma-separated kernel ids")
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("update-model", parents=[kb_opt, out_opt], help="apply one online model update")
    p.add_argument("--kernel", type=int, required=True)
    p.add_argument("--hardware", type=int, required=True)
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--metadata", type=_reals, required=True)
    p.add_argument("--time", type=float, required=True, help="observed time (ms)")
    p.add_argument("--energy", type=float, default=0.0, help="observed energy (mJ)")
    p.add_argument("--rate", type=float, default=0.5)
    p.set_defaults(func=cmd_update_model)

    p = sub.add_parser("bench", help="query latency sweep, CSV output")
    p.add_argument("--sizes", type=_ints, default=[100, 1000, 10000])
    p.add_argument("--p", type=float, default=coverage.DEFAULT_P)
    p.add_argument("--h", type=int, default=bench.DEFAULT_H)
    p.add_argument("--lam", type=float, default=coverage.DEFAULT_LAMBDA)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--types", type=_ints, default=[1, 2, 3])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--disjoint", action="store_true", help="fresh kernels for every link")
    p.add_argument("--batch", action="store_true", help="time the whole run instead of each query")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="uncoverage curve, CSV output")
    p.add_argument("--lam", type=float, default=coverage.DEFAULT_LAMBDA)
    p.add_argument("--p", type=float, default=coverage.DEFAULT_P)
    p.add_argument("--workflows", type=int, default=200)
    p.add_argument("--steps", type=int, default=4, help="steps per workflow")
    p.add_argument("--universe", type=int, default=100)
    p.add_argument("--kb-sizes", type=_ints, help="ascending sizes (default: 0,5,..,universe)")
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--open-universe", action="store_true", help="kernels appear only when first drawn")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fixture", help="write a reference knowledge base")
    p.add_argument("name", help=f"one of: {', '.join(FIXTURES)}")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args.json)
    try:
        args.func(args, out)
    except KBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
