"""Command-line front end: mining, scoring, and evaluation reports.

Every command writes a JSON manifest beside its primary output recording
input digests and the run configuration; two runs with equal manifests
produce byte-identical output files.

Exit codes: 0 on success, 2 on unusable input, 3 on an internal invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from typing import Sequence

from . import __version__
from .errors import InputError, InvariantError
from .graph import AttributedGraph, SymbolTable, load_coresets, load_graph
from .miner import (
    GAIN_MODES,
    GAIN_NET,
    AttributeStar,
    MineResult,
    mine,
    pattern_json_line,
)
from .rules import coverage_ratio, load_rule_library, pairs_as_labels, split_to_pairs
from .scoring import SENTINEL, evaluate_completion, fuse_scores, score_node

logger = logging.getLogger(__name__)

TIE_BREAK_POLICY = "gain-desc,pair-id-lex/v1"

STATS_COLUMNS = [
    "iteration",
    "evaluated_pairs",
    "possible_pairs",
    "update_ratio",
    "accepted_x",
    "accepted_y",
    "net_gain_bits",
    "total_bits",
]


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(args: argparse.Namespace, inputs: dict[str, str], outputs: dict[str, str]) -> None:
    manifest = {
        "version": __version__,
        "command": args.command,
        "algo": getattr(args, "algo", None),
        "gain": getattr(args, "gain", None),
        "threads": getattr(args, "threads", None),
        "tie_break": TIE_BREAK_POLICY,
        "attribute_order": getattr(args, "_attribute_order", None),
        "inputs": {
            name: {"path": path, "sha256": _sha256(path)}
            for name, path in inputs.items()
        },
        "outputs": outputs,
    }
    path = args.out + ".manifest.json"
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _load_inputs(args: argparse.Namespace) -> tuple[AttributedGraph, dict[str, str], list | None]:
    graph, _ = load_graph(args.edges, args.attrs)
    inputs = {"edges": args.edges, "attrs": args.attrs}
    coresets = None
    if getattr(args, "coresets", None):
        coresets = load_coresets(args.coresets, graph.values)
        inputs["coresets"] = args.coresets
    args._attribute_order = sorted(graph.values.names)
    return graph, inputs, coresets


def _run_mine(args: argparse.Namespace, graph: AttributedGraph, coresets) -> MineResult:
    return mine(
        graph,
        algorithm=args.algo,
        coresets=coresets,
        gain_mode=args.gain,
        threads=args.threads,
        verbose=args.verbose,
    )


def _write_stats(path: str, result: MineResult, graph: AttributedGraph) -> None:
    def labels(leafset) -> str:
        return ",".join(sorted(graph.values.name(a) for a in leafset))

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STATS_COLUMNS)
        for it in result.stats.iterations:
            writer.writerow(
                [
                    it.iteration,
                    it.evaluated_pairs,
                    it.possible_pairs,
                    it.update_ratio,
                    labels(it.accepted_x),
                    labels(it.accepted_y),
                    it.net_gain_bits,
                    it.total_bits,
                ]
            )


def cmd_mine(args: argparse.Namespace) -> None:
    graph, inputs, coresets = _load_inputs(args)
    result = _run_mine(args, graph, coresets)
    with open(args.out, "w", encoding="utf-8") as handle:
        for star in result.patterns:
            handle.write(pattern_json_line(star, graph.values) + "\n")
    stats_path = args.stats or args.out + ".stats.csv"
    _write_stats(stats_path, result, graph)
    outputs = {"patterns": args.out, "stats": stats_path}
    if args.dump_db:
        with open(args.dump_db, "w", encoding="utf-8") as handle:
            result.db.dump_jsonl(handle, graph)
        outputs["db_dump"] = args.dump_db
    _write_manifest(args, inputs, outputs)
    logger.info(
        "mined %d patterns in %d merges (%.3f -> %.3f bits)",
        len(result.patterns),
        len(result.merges),
        result.stats.initial_bits,
        result.stats.final_bits,
    )


def cmd_stats(args: argparse.Namespace) -> None:
    graph, inputs, coresets = _load_inputs(args)
    result = _run_mine(args, graph, coresets)
    _write_stats(args.out, result, graph)
    _write_manifest(args, inputs, {"stats": args.out})


def _parse_pattern_file(path: str, values: SymbolTable) -> list[AttributeStar]:
    patterns = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                coreset = tuple(sorted(_require_value(values, a, path, lineno) for a in row["core"]))
                leafset = tuple(sorted(_require_value(values, a, path, lineno) for a in row["leaves"]))
                star = AttributeStar(
                    coreset, leafset, float(row["code_bits"]), int(row["frequency"]), int(row["rank"])
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise InputError(f"{path}:{lineno}: bad pattern line ({exc})") from exc
            patterns.append(star)
    patterns.sort(key=lambda s: s.rank)
    return patterns


def _require_value(values: SymbolTable, name: str, path: str, lineno: int) -> int:
    sid = values.lookup(name)
    if sid is None:
        raise InputError(f"{path}:{lineno}: attribute value {name!r} not in the graph")
    return sid


def _read_node_list(path: str, graph: AttributedGraph) -> list[int]:
    nodes = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            label = raw.strip()
            if not label or label.startswith("#"):
                continue
            vid = graph.vertices.lookup(label)
            if vid is None:
                raise InputError(f"{path}:{lineno}: unknown vertex {label!r}")
            nodes.append(vid)
    if not nodes:
        raise InputError(f"{path}: no target nodes")
    return nodes


def _read_external_scores(path: str, attribute_order: list[str]) -> dict[str, list[float]]:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise InputError(f"{path}: expected a JSON object of vertex -> score array")
    out = {}
    for vertex, scores in payload.items():
        if not isinstance(scores, list) or len(scores) != len(attribute_order):
            raise InputError(
                f"{path}: vertex {vertex!r} needs {len(attribute_order)} scores "
                "(lexicographic attribute order)"
            )
        out[vertex] = [float(s) for s in scores]
    return out


def cmd_score(args: argparse.Namespace) -> None:
    graph, inputs, coresets = _load_inputs(args)
    if args.patterns:
        patterns = _parse_pattern_file(args.patterns, graph.values)
        inputs["patterns"] = args.patterns
    else:
        patterns = _run_mine(args, graph, coresets).patterns
    nodes = _read_node_list(args.nodes, graph)
    inputs["nodes"] = args.nodes

    attribute_order = args._attribute_order
    lex_to_id = [graph.values.lookup(name) for name in attribute_order]
    external = None
    if args.external:
        external = _read_external_scores(args.external, attribute_order)
        inputs["external"] = args.external

    def rank_one(v: int) -> dict:
        scores = score_node(patterns, graph, v)
        label = graph.vertices.name(v)
        if external is not None:
            ext_lex = external.get(label)
            if ext_lex is None:
                raise InputError(f"no external scores for vertex {label!r}")
            ext = [0.0] * len(scores)
            for lex_index, vid in enumerate(lex_to_id):
                ext[vid] = ext_lex[lex_index]
            fused = fuse_scores(scores, ext)
            ranked = [(graph.values.name(i), s) for i, s in enumerate(fused)]
        else:
            ranked = [
                (graph.values.name(i), s)
                for i, s in enumerate(scores)
                if s != SENTINEL
            ]
        ranked.sort(key=lambda item: (-item[1], item[0]))
        return {
            "vertex": label,
            "ranked": [{"attr": attr, "score": score} for attr, score in ranked],
        }

    if args.threads and args.threads > 1 and len(nodes) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(rank_one, nodes))
    else:
        rows = [rank_one(v) for v in nodes]

    with open(args.out, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    _write_manifest(args, inputs, {"scores": args.out})


def _read_truth(path: str) -> dict[str, set[str]]:
    truth: dict[str, set[str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise InputError(f"{path}:{lineno}: expected 'v<TAB>a1,a2,...'")
            truth[parts[0]] = {tok for tok in parts[1].split(",") if tok}
    return truth


def _read_predictions(path: str) -> dict[str, list[str]]:
    predictions: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                predictions[row["vertex"]] = [entry["attr"] for entry in row["ranked"]]
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise InputError(f"{path}:{lineno}: bad score line ({exc})") from exc
    if not predictions:
        raise InputError(f"{path}: no predictions")
    return predictions


def cmd_eval_completion(args: argparse.Namespace) -> None:
    predictions = _read_predictions(args.predictions)
    truth = _read_truth(args.truth)
    rows = evaluate_completion(predictions, truth, args.k)
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "recall", "ndcg", "nodes", "skipped"])
        for row in rows:
            writer.writerow([row["k"], row["recall"], row["ndcg"], row["nodes"], row["skipped"]])
    args._attribute_order = None
    _write_manifest(
        args, {"predictions": args.predictions, "truth": args.truth}, {"metrics": args.out}
    )


def cmd_eval_coverage(args: argparse.Namespace) -> None:
    values = SymbolTable()
    patterns = _parse_pattern_file_interning(args.patterns, values)
    library = load_rule_library(args.library)
    found = pairs_as_labels(split_to_pairs(patterns), values)
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "coverage"])
        for k in args.k:
            writer.writerow([k, coverage_ratio(library, found, k)])
    args._attribute_order = None
    _write_manifest(
        args, {"patterns": args.patterns, "library": args.library}, {"coverage": args.out}
    )


def _parse_pattern_file_interning(path: str, values: SymbolTable) -> list[AttributeStar]:
    """Pattern-file parse that interns values as they appear (no graph needed)."""
    patterns = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                coreset = tuple(sorted(values.intern(a) for a in row["core"]))
                leafset = tuple(sorted(values.intern(a) for a in row["leaves"]))
                star = AttributeStar(
                    coreset, leafset, float(row["code_bits"]), int(row["frequency"]), int(row["rank"])
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise InputError(f"{path}:{lineno}: bad pattern line ({exc})") from exc
            patterns.append(star)
    if not patterns:
        raise InputError(f"{path}: no patterns")
    patterns.sort(key=lambda s: s.rank)
    return patterns


def _parse_k_list(text: str) -> list[int]:
    try:
        ks = [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from exc
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("k values must be positive integers")
    return ks


def _add_graph_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--edges", required=True, help="edge file (u<TAB>v per line)")
    parser.add_argument("--attrs", required=True, help="attribute file (v<TAB>a1,a2,...)")
    parser.add_argument(
        "--coresets", help="optional coreset file enabling multi-value coresets"
    )


def _add_mining_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=["basic", "partial"], default="partial")
    parser.add_argument("--gain", choices=list(GAIN_MODES), default=GAIN_NET)
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count(),
        help="worker threads for gain evaluation and scoring",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starmine",
        description="Mine compressing star-shaped attribute patterns from an attributed graph.",
    )
    parser.add_argument("--verbose", action="store_true", help="per-iteration length report")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mine = sub.add_parser("mine", help="mine patterns")
    _add_graph_arguments(p_mine)
    _add_mining_arguments(p_mine)
    p_mine.add_argument("--out", required=True, help="pattern output (JSON Lines)")
    p_mine.add_argument("--stats", help="per-iteration stats CSV (default: <out>.stats.csv)")
    p_mine.add_argument("--dump-db", help="write the final inverted database as JSON Lines")
    p_mine.set_defaults(func=cmd_mine)

    p_stats = sub.add_parser("stats", help="mine and report per-iteration statistics")
    _add_graph_arguments(p_stats)
    _add_mining_arguments(p_stats)
    p_stats.add_argument("--out", required=True, help="stats CSV output")
    p_stats.set_defaults(func=cmd_stats)

    p_score = sub.add_parser("score", help="score completion candidates for target nodes")
    _add_graph_arguments(p_score)
    _add_mining_arguments(p_score)
    p_score.add_argument("--nodes", required=True, help="target-node list, one label per line")
    p_score.add_argument("--patterns", help="reuse a mined pattern file instead of mining")
    p_score.add_argument(
        "--external",
        help="external completion scores (JSON vertex -> array in lexicographic attribute order)",
    )
    p_score.add_argument("--out", required=True, help="scored nodes output (JSON Lines)")
    p_score.set_defaults(func=cmd_score)

    p_evalc = sub.add_parser("eval-completion", help="Recall@K / NDCG@K against ground truth")
    p_evalc.add_argument("--predictions", required=True, help="score command output")
    p_evalc.add_argument("--truth", required=True, help="truth file (v<TAB>a1,a2,...)")
    p_evalc.add_argument("--k", type=_parse_k_list, default=[10], help="comma-separated k list")
    p_evalc.add_argument("--out", required=True, help="metrics CSV output")
    p_evalc.set_defaults(func=cmd_eval_completion)

    p_evalr = sub.add_parser("eval-coverage", help="rule-library coverage of mined pair rules")
    p_evalr.add_argument("--patterns", required=True, help="mined pattern file")
    p_evalr.add_argument("--library", required=True, help="valid-rule library (JSON array)")
    p_evalr.add_argument("--k", type=_parse_k_list, default=[10], help="comma-separated k list")
    p_evalr.add_argument("--out", required=True, help="coverage CSV output")
    p_evalr.set_defaults(func=cmd_eval_coverage)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
