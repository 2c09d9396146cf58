"""Command-line front end.

Subcommands: embed, merge, errors, classify, linkpred, ppr.
Exit codes: 0 ok, 1 usage error, 2 data error, 3 capability error
(an operation that would need to materialize beyond the dense guard).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import evaluation, graph, linalg, pipeline, similarity, sketch

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CAPABILITY = 3

SKETCHER_ALIASES = {
    "fd": "fd",
    "hash": "hashing",
    "rp": "random_projection",
    "sample": "sampling",
    "svd": "svd",
}
EDGE_OP_ALIASES = {
    "average": "average",
    "concat": "concat",
    "hadamard": "hadamard",
    "l1": "weighted_l1",
    "l2": "weighted_l2",
}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_graph(path: str, directed) -> tuple[graph.Graph, np.ndarray]:
    with open(path) as fh:
        return graph.load_edgelist(fh, undirected=not bool(directed))


def _read_config_file(path: str) -> dict[str, str]:
    """TOML-style "key = value" lines; '#' comments; flags take precedence."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip().strip('"')
    return values


_EMBED_KEYS = {
    "dim": int,
    "alpha": float,
    "sketcher": str,
    "walks": int,
    "exact": lambda v: str(v).lower() in ("1", "true", "yes"),
    "tol": float,
    "order": str,
    "seed": int,
    "checkpoint_every": float,
    "sv_exponent": float,
    "workers": int,
    "out": str,
}

_EMBED_DEFAULTS = {
    "dim": 128,
    "alpha": 0.85,
    "sketcher": "fd",
    "walks": 10_000,
    "exact": False,
    "tol": 1e-8,
    "order": "random",
    "seed": 0,
    "checkpoint_every": 1.0,
    "sv_exponent": 0.5,
    "workers": 1,
    "out": None,
}


def _merge_embed_options(args) -> dict:
    """CLI flags override config-file values, which override defaults."""
    merged = dict(_EMBED_DEFAULTS)
    if args.config:
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - set(_EMBED_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in file_values.items():
            merged[key] = _EMBED_KEYS[key](raw)
    for key in _EMBED_KEYS:
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            merged[key] = flag
    if merged["out"] is None:
        raise UsageError("--out is required (flag or config file)")
    return merged


def _run_config(options: dict) -> pipeline.RunConfig:
    ppr = similarity.PprConfig(
        alpha=options["alpha"],
        method="exact" if options["exact"] else "monte_carlo",
        tol=options["tol"],
        walks_per_node=options["walks"],
        seed=options["seed"],
    )
    return pipeline.RunConfig(
        dim=options["dim"],
        sketcher=SKETCHER_ALIASES[options["sketcher"]],
        ppr=ppr,
        order=options["order"],
        seed=options["seed"],
        checkpoint_every=options["checkpoint_every"],
        sv_exponent=options["sv_exponent"],
        workers=options["workers"],
    )


def _write_embedding(emb: sketch.Embedding, ids: np.ndarray, path: Path) -> None:
    with open(path, "w") as fh:
        sketch.write_embedding_text(emb, ids, fh)


def cmd_embed(args) -> int:
    options = _merge_embed_options(args)
    g, ids = _load_graph(args.graph, args.directed)
    config = _run_config(options)
    out = Path(options["out"])
    with open(out.with_suffix(out.suffix + ".ids"), "w") as fh:
        graph.write_id_map(ids, fh)

    if config.sketcher == "svd":
        emb = pipeline.embed_oracle(g, config)
        _write_embedding(emb, ids, out)
        return EXIT_OK

    state = None
    if args.resume:
        with open(args.resume, "rb") as fh:
            state = sketch.load_sketch(fh)

    def checkpoint(current: sketch.Sketch, rows: int, fraction: float) -> None:
        with open(f"{out}.rows{rows}.ckpt", "wb") as fh:
            sketch.save_sketch(current, fh)
        emb = current.embedding(config.dim, sv_exponent=config.sv_exponent)
        _write_embedding(emb, ids, Path(f"{out}.rows{rows}.emb"))

    state = pipeline.embed_stream(g, config, state=state, checkpoint=checkpoint)
    with open(f"{out}.ckpt", "wb") as fh:
        sketch.save_sketch(state, fh)
    _write_embedding(state.embedding(config.dim, sv_exponent=config.sv_exponent), ids, out)
    return EXIT_OK


def cmd_merge(args) -> int:
    with open(args.a, "rb") as fh:
        a = sketch.load_sketch(fh)
    with open(args.b, "rb") as fh:
        b = sketch.load_sketch(fh)
    merged = sketch.merge(a, b)
    with open(args.out, "wb") as fh:
        sketch.save_sketch(merged, fh)
    return EXIT_OK


def cmd_errors(args) -> int:
    g, _ = _load_graph(args.graph, args.directed)
    ppr = similarity.PprConfig(
        alpha=args.alpha,
        method="exact" if args.exact else "monte_carlo",
        tol=args.tol,
        walks_per_node=args.walks,
        seed=args.seed,
    )
    if g.n > args.max_nodes:
        raise linalg.CapabilityError(f"errors sweep guard: {g.n} nodes exceeds {args.max_nodes}")
    matrix = pipeline.similarity_matrix(g, ppr)
    kind = SKETCHER_ALIASES[args.sketcher]
    dims = [int(tok) for tok in args.dims.split(",")]
    print("d\tce\tpe_k")
    for d in dims:
        if kind == "svd":
            emb = linalg.svd_oracle_embedding(matrix, d, sv_exponent=1.0)
        else:
            state = sketch.make_sketch(kind, d, g.n, seed=args.seed)
            order = pipeline.node_order(g.n, args.order, args.seed)
            for v in order:
                state.insert(matrix[v], index=int(v))
            emb = state.embedding(d, sv_exponent=1.0)
        ce = linalg.covariance_error(matrix, emb)
        pe = linalg.projection_error(matrix, emb, args.k)
        print(f"{d}\t{ce:.6g}\t{pe:.6g}")
    return EXIT_OK


def cmd_classify(args) -> int:
    with open(args.emb) as fh:
        ids, vectors = sketch.read_embedding_text(fh)
    with open(args.labels) as fh:
        raw = evaluation.load_labels(fh)
    labels = evaluation.align_labels(raw, ids)
    seeds = [args.seed + i for i in range(args.repeats)]
    micro_mean, micro_std, macro_mean, macro_std = evaluation.repeat_classify(
        vectors.T, labels, args.train_frac, seeds, c=args.c
    )
    print("micro_f1_mean\tmicro_f1_std\tmacro_f1_mean\tmacro_f1_std")
    print(f"{micro_mean:.6f}\t{micro_std:.6f}\t{macro_mean:.6f}\t{macro_std:.6f}")
    return EXIT_OK


def cmd_linkpred(args) -> int:
    with open(args.emb) as fh:
        ids, vectors = sketch.read_embedding_text(fh)
    index_of = {int(orig): i for i, orig in enumerate(ids)}

    def internal(pairs):
        return np.array([[index_of[u], index_of[v]] for u, v in pairs], dtype=np.int64)

    with open(args.train_pos) as fh:
        train_pos = internal(evaluation.parse_edge_pairs(fh))
    with open(args.test_pos) as fh:
        test_pos = internal(evaluation.parse_edge_pairs(fh))

    g, g_ids = _load_graph(args.graph, args.directed)
    negatives = evaluation.sample_non_edges(g, len(train_pos) + len(test_pos), args.seed)
    if args.dump_negatives:
        with open(args.dump_negatives, "w") as fh:
            evaluation.write_edge_pairs(
                ((int(g_ids[u]), int(g_ids[v])) for u, v in negatives), fh
            )
    # Graph internal ids -> original ids -> embedding row indices.
    neg_emb = np.array(
        [[index_of[int(g_ids[u])], index_of[int(g_ids[v])]] for u, v in negatives],
        dtype=np.int64,
    )
    train_neg = neg_emb[: len(train_pos)]
    test_neg = neg_emb[len(train_pos):]
    op = EDGE_OP_ALIASES[args.op]
    accuracy, auc = evaluation.link_predict_presplit(
        vectors.T, train_pos, train_neg, test_pos, test_neg, op, c=args.c
    )
    print("operator\taccuracy\tauc")
    print(f"{args.op}\t{accuracy:.6f}\t{auc:.6f}")
    return EXIT_OK


def cmd_ppr(args) -> int:
    g, ids = _load_graph(args.graph, args.directed)
    cfg = similarity.PprConfig(
        alpha=args.alpha,
        method="exact" if args.exact else "monte_carlo",
        tol=args.tol,
        walks_per_node=args.walks,
        seed=args.seed,
    )
    if args.nodes:
        wanted = [int(tok) for tok in args.nodes.split(",")]
        back = {int(orig): i for i, orig in enumerate(ids)}
        nodes = [back[w] for w in wanted]
    else:
        nodes = range(g.n)
    for v in nodes:
        if cfg.method == "exact":
            vec = similarity.ppr_exact(g, v, cfg)
        else:
            vec = similarity.ppr_monte_carlo(g, v, cfg)
        entries = " ".join(
            f"{ids[i]}:{vec[i]:.10g}" for i in np.nonzero(vec > 1e-9)[0]
        )
        print(f"{ids[v]} {entries}")
    return EXIT_OK


def _add_ppr_flags(p) -> None:
    p.add_argument("--alpha", type=float, default=0.85, help="restart probability")
    p.add_argument("--exact", action="store_true", help="exact power iteration instead of walks")
    p.add_argument("--walks", type=int, default=10_000, help="Monte-Carlo walks per node")
    p.add_argument("--tol", type=float, default=1e-8, help="exact-mode L1 tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--directed", action="store_true", help="treat the edge list as directed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphsketch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="stream similarity rows into a sketch and write an embedding")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--out", help="output embedding path")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--dim", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--sketcher", choices=sorted(SKETCHER_ALIASES))
    p.add_argument("--walks", type=int)
    p.add_argument("--exact", action="store_true", default=None)
    p.add_argument("--tol", type=float)
    p.add_argument("--order", choices=("random", "natural"))
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=float)
    p.add_argument("--sv-exponent", dest="sv_exponent", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--resume", help="sketch checkpoint to continue from")
    p.add_argument("--directed", action="store_true", default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("merge", help="merge two sketch checkpoints")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("errors", help="covariance/projection error sweep over dimensions")
    p.add_argument("graph")
    p.add_argument("--dims", required=True, help="comma-separated sketch dimensions")
    p.add_argument("--k", type=int, default=10, help="projection-error rank")
    p.add_argument("--sketcher", choices=sorted(SKETCHER_ALIASES), default="fd")
    p.add_argument("--order", choices=("random", "natural"), default="random")
    p.add_argument("--max-nodes", type=int, default=linalg.DEFAULT_DENSE_GUARD)
    _add_ppr_flags(p)
    p.set_defaults(func=cmd_errors)

    p = sub.add_parser("classify", help="node classification from an embedding file")
    p.add_argument("--emb", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-frac", dest="train_frac", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--c", type=float, default=1.0, help="logistic-regression C")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("linkpred", help="link prediction from an embedding file")
    p.add_argument("--emb", required=True)
    p.add_argument("--train-pos", dest="train_pos", required=True)
    p.add_argument("--test-pos", dest="test_pos", required=True)
    p.add_argument("--graph", required=True, help="snapshot used to sample negatives")
    p.add_argument("--op", choices=sorted(EDGE_OP_ALIASES), default="hadamard")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--dump-negatives", dest="dump_negatives")
    p.add_argument("--directed", action="store_true")
    p.set_defaults(func=cmd_linkpred)

    p = sub.add_parser("ppr", help="dump PPR rows as sparse text")
    p.add_argument("graph")
    p.add_argument("--nodes", help="comma-separated original node ids (default: all)")
    _add_ppr_flags(p)
    p.set_defaults(func=cmd_ppr)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except linalg.CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (OSError, ValueError, KeyError, similarity.PprConvergenceError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
