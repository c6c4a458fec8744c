"""Command-line pipeline: corpus -> embeddings -> clustering -> evaluation.

Each stage reads and writes JSON artifacts so intermediate results can be
inspected, cached, and re-run after edits. Every artifact embeds the
resolved configuration and a sha256 of each input file; identical inputs,
flags, and seed reproduce artifacts byte for byte at any --threads value
(thread count changes scheduling only, never results, so it is not part
of the recorded config).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .cluster import (
    SearchConfig,
    SearchTrace,
    brute_force_partition,
    count_partitions,
    nearest_neighbors,
    partition_payload,
    load_partition,
    swap_search,
)
from .corpus import balanced_shape, load_corpus
from .embeddings import (
    embed_static,
    embedding_set_payload,
    load_embedding_set,
    load_static_vectors,
    load_token_embeddings,
    pool_all,
)
from .errors import GuardRefusal, ValidationError
from .metrics import (
    GoldPartition,
    fleiss_kappa,
    load_annotations,
    load_triplets,
    majority_agreement_rate,
    ooo_accuracy,
    purity,
    random_purity_baseline,
    sample_triplets,
    save_triplets,
    validate_triplets,
)
from .pca import fit_pca, transform_pca
from .synthetic import write_synthetic_corpus
from .textprep import compute_tfidf, tokenize_corpus

# Random guessing picks the true intruder once in three; reported as the
# exact expectation rather than re-estimated each run.
CHANCE_OOO_ACCURACY = 1.0 / 3.0


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_artifact(path: Path, payload: dict, config: dict, inputs: list[str]) -> None:
    record = dict(payload)
    record["config"] = config
    record["inputs"] = {name: _sha256(name) for name in inputs}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_path(args, default_name: str, explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def cmd_embed(args) -> int:
    corpus = load_corpus(args.corpus)
    docs = tokenize_corpus(corpus)
    tfidf = compute_tfidf(docs)

    if args.dump_tfidf:
        dump = {
            "doc_count": tfidf.doc_count,
            "doc_freq": tfidf.doc_freq,
            "weights": tfidf.weights,
        }
        Path(args.dump_tfidf).write_text(
            json.dumps(dump, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    if args.vectors:
        vocabulary = set()
        for doc in docs:
            vocabulary.update(doc.tokens)
        lexicon = load_static_vectors(args.vectors, vocabulary)
        token_embeddings = [embed_static(doc, lexicon, tfidf) for doc in docs]
        source = args.vectors
    else:
        loaded = {te.doc_id: te for te in load_token_embeddings(args.tokens)}
        missing = [d.id for d in corpus.documents if d.id not in loaded]
        if missing:
            raise ValidationError(
                f"token-embedding file lacks documents: {', '.join(missing[:5])}"
            )
        extra = [i for i in loaded if i not in set(corpus.ids)]
        if extra:
            raise ValidationError(
                f"token-embedding file has unknown documents: {', '.join(extra[:5])}"
            )
        token_embeddings = [loaded[d.id] for d in corpus.documents]
        source = args.tokens

    for doc, te in zip(docs, token_embeddings):
        print(f"{te.doc_id}: {len(te.tokens)}/{len(doc.tokens)} tokens embedded")

    pooled = pool_all(token_embeddings, tfidf)
    n = len(pooled.ids)
    if args.pca_k > min(n - 1, pooled.dim):
        print(
            f"warning: {args.pca_k} components clamped to "
            f"{min(n - 1, pooled.dim)} (N={n}, D={pooled.dim})",
            file=sys.stderr,
        )
    model = fit_pca(pooled, args.pca_k)
    reduced = transform_pca(model, pooled)

    out = _out_path(args, "embeddings.json", args.out)
    config = {
        "command": "embed",
        "corpus": args.corpus,
        "vectors": args.vectors,
        "tokens": args.tokens,
        "pca_k": args.pca_k,
        "seed": args.seed,
    }
    _write_artifact(out, embedding_set_payload(reduced), config, [args.corpus, source])
    print(f"wrote {out} ({len(reduced.ids)} docs, dim {reduced.dim})")
    return 0


def cmd_cluster(args) -> int:
    es = load_embedding_set(args.embeddings)
    k, s = args.k, args.s
    if k is None or s is None:
        if not args.corpus:
            raise ValidationError("pass --k and --s, or --corpus with group labels")
        shape = balanced_shape(load_corpus(args.corpus))
        k = k if k is not None else shape[0]
        s = s if s is not None else shape[1]
    if args.exact:
        partition, report = brute_force_partition(es, k, s)
        trace = SearchTrace(accepted_strengths=(), proposals_evaluated=0, restart_index=0)
    else:
        cfg = SearchConfig(
            seed=args.seed,
            restarts=args.restarts,
            patience=args.patience,
            max_proposals=args.max_proposals,
        )
        partition, report, trace = swap_search(es, k, s, cfg, threads=args.threads)

    members: dict[int, list[str]] = {c: [] for c in range(k)}
    for doc_id, label in zip(es.ids, partition.assignment):
        members[label].append(doc_id)
    for c in range(k):
        print(f"cluster {c}: {' '.join(members[c])}")
    print(f"strength: {report.strength:.6f} (intra {report.intra:.6f}, inter {report.inter:.6f})")

    out = _out_path(args, "partition.json", args.out)
    config = {
        "command": "cluster",
        "embeddings": args.embeddings,
        "k": k,
        "s": s,
        "exact": args.exact,
        "seed": args.seed,
        "restarts": args.restarts,
        "patience": args.patience,
        "max_proposals": args.max_proposals,
    }
    _write_artifact(
        out, partition_payload(es.ids, partition, report, trace), config, [args.embeddings]
    )
    print(f"wrote {out}")
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    gold = GoldPartition.from_corpus(corpus)
    inputs = [args.corpus]

    report: dict = {"purity": None, "ooo_accuracy": None, "per_group": {}}

    if args.partition:
        ids, partition, _, _ = load_partition(args.partition)
        report["purity"] = purity(partition, gold, ids)
        inputs.append(args.partition)

    if args.embeddings and args.triplets:
        es = load_embedding_set(args.embeddings)
        triplets = load_triplets(args.triplets)
        validate_triplets(triplets, gold)
        accuracy, per_group = ooo_accuracy(es, triplets, gold)
        report["ooo_accuracy"] = accuracy
        report["per_group"] = per_group
        inputs.extend([args.embeddings, args.triplets])
    elif args.embeddings or args.triplets:
        raise ValidationError("intruder accuracy needs both --embeddings and --triplets")

    mean, stderr = random_purity_baseline(
        gold, trials=args.trials, seed=args.seed, threads=args.threads
    )
    report["baselines"] = {
        "random_purity_mean": mean,
        "random_purity_stderr": stderr,
        "random_purity_trials": args.trials,
        "random_ooo_accuracy": CHANCE_OOO_ACCURACY,
    }

    if args.annotations:
        matrix = load_annotations(args.annotations)
        report["fleiss_kappa"] = fleiss_kappa(matrix)
        report["majority_agreement"] = majority_agreement_rate(matrix)
        inputs.append(args.annotations)

    def fmt(value) -> str:
        return f"{value:.3f}" if value is not None else "-"

    print(f"{'method':<12} {'purity':>8} {'intruder':>10}")
    print(f"{'random':<12} {fmt(mean):>8} {fmt(CHANCE_OOO_ACCURACY):>10}")
    print(f"{'run':<12} {fmt(report['purity']):>8} {fmt(report['ooo_accuracy']):>10}")
    if args.annotations:
        print(
            f"agreement: kappa {report['fleiss_kappa']:.3f}, "
            f"majority rate {report['majority_agreement']:.3f}"
        )

    out = _out_path(args, "report.json", args.out)
    config = {
        "command": "eval",
        "corpus": args.corpus,
        "partition": args.partition,
        "embeddings": args.embeddings,
        "triplets": args.triplets,
        "annotations": args.annotations,
        "trials": args.trials,
        "seed": args.seed,
    }
    _write_artifact(out, report, config, inputs)
    print(f"wrote {out}")
    return 0


def cmd_triplets(args) -> int:
    corpus = load_corpus(args.corpus)
    gold = GoldPartition.from_corpus(corpus)
    triplets = sample_triplets(gold, args.count, args.seed, by_pair=args.by_pair)
    out = _out_path(args, "triplets.json", args.out)
    payload = [{"a": t.a, "b": t.b, "intruder": t.intruder} for t in triplets]
    config = {
        "command": "triplets",
        "corpus": args.corpus,
        "count": args.count,
        "by_pair": args.by_pair,
        "seed": args.seed,
    }
    _write_artifact(out, {"triplets": payload}, config, [args.corpus])
    print(f"wrote {out} ({len(triplets)} triplets)")
    return 0


def cmd_baseline(args) -> int:
    corpus = load_corpus(args.corpus)
    gold = GoldPartition.from_corpus(corpus)
    mean, stderr = random_purity_baseline(
        gold, trials=args.trials, seed=args.seed, threads=args.threads
    )
    k, s = gold.shape()
    print(f"random purity over {args.trials} trials (k={k}, s={s}): {mean:.4f} +- {stderr:.4f}")
    out = _out_path(args, "baseline.json", args.out)
    payload = {
        "random_purity_mean": mean,
        "random_purity_stderr": stderr,
        "trials": args.trials,
        "k": k,
        "s": s,
        "random_ooo_accuracy": CHANCE_OOO_ACCURACY,
    }
    config = {
        "command": "baseline",
        "corpus": args.corpus,
        "trials": args.trials,
        "seed": args.seed,
    }
    _write_artifact(out, payload, config, [args.corpus])
    print(f"wrote {out}")
    return 0


def cmd_neighbors(args) -> int:
    es = load_embedding_set(args.embeddings)
    if args.m < 1:
        raise ValidationError(f"neighbor count must be >= 1, got {args.m}")
    results = nearest_neighbors(es, args.id, args.m)
    width = max(len(doc_id) for doc_id, _ in results)
    for doc_id, dist in results:
        print(f"{doc_id:<{width}}  {dist:.6f}")
    return 0


def cmd_count_space(args) -> int:
    ordered = count_partitions(args.n, args.k, args.s, ordered=True)
    unordered = count_partitions(args.n, args.k, args.s, ordered=False)
    print(f"ordered: {ordered}")
    print(f"unordered: {unordered}")
    return 0


def cmd_synthetic(args) -> int:
    corpus_path = _out_path(args, "corpus.json", args.out_corpus)
    vectors_path = _out_path(args, "vectors.txt", args.out_vectors)
    write_synthetic_corpus(
        corpus_path,
        vectors_path,
        k=args.k,
        s=args.s,
        seed=args.seed,
        sep=args.sep,
        dim=args.dim,
        doc_len=args.doc_len,
    )
    print(f"wrote {corpus_path} ({args.k * args.s} docs) and {vectors_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    common.add_argument("--output-dir", default=".", help="directory for default output paths")
    common.add_argument("--json-errors", action="store_true", help="machine-readable errors on stderr")

    parser = argparse.ArgumentParser(
        prog="eqcluster",
        description="Embed documents, cluster them into equal-size groups, evaluate against gold labels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", parents=[common], help="corpus + token vectors -> document embeddings")
    p.add_argument("--corpus", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--vectors", help="static word-vector file (token v1 ... vD per line)")
    source.add_argument("--tokens", help="token-embedding interchange file (JSON Lines)")
    p.add_argument("--pca-k", type=int, default=40, help="PCA components (default 40)")
    p.add_argument("--dump-tfidf", help="also dump the TF-IDF table to this path")
    p.add_argument("--out", help="output path (default <output-dir>/embeddings.json)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", parents=[common], help="embeddings -> balanced partition")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k", type=int, help="cluster count (default: gold shape from --corpus)")
    p.add_argument("--s", type=int, help="cluster size (default: gold shape from --corpus)")
    p.add_argument("--corpus", help="labeled corpus supplying default k and s")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--patience", type=int, default=2000)
    p.add_argument("--max-proposals", type=int, default=200_000)
    p.add_argument(
        "--exact",
        action="store_true",
        help="exhaustive search instead of the swap heuristic (small N only)",
    )
    p.add_argument("--out", help="output path (default <output-dir>/partition.json)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", parents=[common], help="score a partition and embeddings against gold labels")
    p.add_argument("--corpus", required=True, help="labeled corpus")
    p.add_argument("--partition", help="partition file to score")
    p.add_argument("--embeddings", help="embedding cache for the intruder task")
    p.add_argument("--triplets", help="triplet file for the intruder task")
    p.add_argument("--annotations", help="annotation file for agreement statistics")
    p.add_argument("--trials", type=int, default=10_000, help="baseline Monte Carlo trials")
    p.add_argument("--out", help="output path (default <output-dir>/report.json)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("triplets", parents=[common], help="sample intruder triplets from gold groups")
    p.add_argument("--corpus", required=True, help="labeled corpus")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--by-pair", action="store_true", help="sample uniformly over pairs instead of groups")
    p.add_argument("--out", help="output path (default <output-dir>/triplets.json)")
    p.set_defaults(func=cmd_triplets)

    p = sub.add_parser("baseline", parents=[common], help="Monte Carlo random-partition purity baseline")
    p.add_argument("--corpus", required=True, help="labeled corpus")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out", help="output path (default <output-dir>/baseline.json)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("neighbors", parents=[common], help="nearest documents to one document")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--id", required=True, help="query document id")
    p.add_argument("-m", type=int, default=5, help="neighbor count")
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("count-space", parents=[common], help="count balanced assignments exactly")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.add_argument("s", type=int)
    p.set_defaults(func=cmd_count_space)

    p = sub.add_parser("synthetic", parents=[common], help="generate a corpus with planted groups")
    p.add_argument("--k", type=int, required=True, help="group count")
    p.add_argument("--s", type=int, required=True, help="group size")
    p.add_argument("--sep", type=float, default=10.0, help="center separation scale")
    p.add_argument("--dim", type=int, default=50, help="token vector dimension")
    p.add_argument("--doc-len", type=int, default=120, help="tokens per document")
    p.add_argument("--out-corpus", help="corpus path (default <output-dir>/corpus.json)")
    p.add_argument("--out-vectors", help="vector path (default <output-dir>/vectors.txt)")
    p.set_defaults(func=cmd_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GuardRefusal as exc:
        return _report_error(args, exc, 4)
    except ValidationError as exc:
        return _report_error(args, exc, 2)
    except OSError as exc:
        return _report_error(args, exc, 3)


def _report_error(args, exc: Exception, code: int) -> int:
    if getattr(args, "json_errors", False):
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
