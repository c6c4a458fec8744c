"""Run a contextual language model over a corpus and emit token vectors.

The output is the JSON-Lines interchange format the eqcluster pipeline
consumes with `embed --tokens`: an optional meta line, then one record
per document holding the tokenizer's surface tokens and one hidden-state
vector per token. A sidecar manifest records everything needed to audit
the run (model, layer policy, dimension, per-document token counts and
chunk boundaries, content hashes, skipped documents).

Inference runs on CPU in eval mode under no_grad, so re-running with the
same inputs reproduces the output file byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

LAYER_POLICIES = ("last", "mean")


class ExportError(Exception):
    """Invalid input or a broken contract; maps to exit code 2."""


class ModelError(Exception):
    """The model could not be loaded or run; maps to exit code 1."""


@dataclass(frozen=True)
class ExportManifest:
    model_name: str
    layer_policy: str
    dim: int
    max_length: int
    tokenizer_lowercases: bool
    corpus_sha256: str
    output_sha256: str
    documents: dict[str, dict]
    skipped: list[dict]

    def token_count(self, doc_id: str) -> int:
        return self.documents[doc_id]["tokens"]


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def read_corpus(path: str | Path) -> list[dict]:
    """Read the corpus array; ids and texts only, labels pass through."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ExportError(f"{path}: invalid JSON: {exc.msg}")
    if not isinstance(data, list):
        raise ExportError(f"{path}: expected a JSON array of documents")
    seen = set()
    docs = []
    for index, record in enumerate(data):
        if not isinstance(record, dict):
            raise ExportError(f"{path}: record {index}: expected an object")
        for key in ("id", "text"):
            if key not in record:
                raise ExportError(f"{path}: record {index}: missing key {key!r}")
            if not isinstance(record[key], str):
                raise ExportError(f"{path}: record {index}: {key!r} must be a string")
        if record["id"] in seen:
            raise ExportError(f"{path}: record {index}: duplicate id {record['id']!r}")
        seen.add(record["id"])
        docs.append(record)
    if not docs:
        raise ExportError(f"{path}: corpus is empty")
    return docs


def load_model(name: str) -> tuple:
    """Load tokenizer and weights from a local path or hub name."""
    try:
        tokenizer = AutoTokenizer.from_pretrained(name)
        model = AutoModel.from_pretrained(name)
    except Exception as exc:
        raise ModelError(f"cannot load model {name!r}: {exc}")
    model.eval()
    return tokenizer, model


def effective_max_length(tokenizer, model, override: int | None) -> int:
    """Smallest of the model's position budget and any user override."""
    limit = int(getattr(model.config, "max_position_embeddings", 0)) or 512
    declared = getattr(tokenizer, "model_max_length", None)
    if declared and declared < 100_000:  # unset tokenizers report a sentinel
        limit = min(limit, int(declared))
    if override is not None:
        if override < 8:
            raise ExportError(f"--max-length must be >= 8, got {override}")
        limit = min(limit, override)
    return limit


def tokenizer_lowercases(tokenizer) -> bool:
    """Observed casing behavior, not a config flag read."""
    return tokenizer.tokenize("Casing") == tokenizer.tokenize("casing")


def chunk_starts(n_tokens: int, chunk_len: int) -> list[int]:
    return list(range(0, n_tokens, chunk_len))


@torch.no_grad()
def embed_tokens(tokenizer, model, text: str, layer_policy: str,
                 limit: int) -> tuple[list[str], list[int], np.ndarray]:
    """Hidden states for one document, chunked at the token level, no overlap.

    Returns the surface tokens that were embedded, the number of content
    tokens per chunk, and one vector row per token.
    """
    encoded = tokenizer(text, truncation=True, max_length=limit,
                        return_overflowing_tokens=True,
                        return_special_tokens_mask=True)
    tokens: list[str] = []
    sizes: list[int] = []
    rows = []
    for ids, special in zip(encoded["input_ids"], encoded["special_tokens_mask"]):
        keep = [i for i, flag in enumerate(special) if flag == 0]
        batch = torch.tensor([ids])
        outputs = model(input_ids=batch, attention_mask=torch.ones_like(batch),
                        output_hidden_states=True)
        states = outputs.hidden_states
        if layer_policy == "last":
            layer = states[-1]
        else:  # mean over the embedding layer and every encoder layer
            layer = torch.stack(states).mean(dim=0)
        rows.append(layer[0, keep].to(torch.float64).numpy())
        tokens.extend(tokenizer.convert_ids_to_tokens([ids[i] for i in keep]))
        sizes.append(len(keep))
    return tokens, sizes, np.concatenate(rows, axis=0)


def export_embeddings(
    corpus_path: str | Path,
    model_name: str,
    out_path: str | Path,
    layer_policy: str = "last",
    max_length: int | None = None,
    manifest_path: str | Path | None = None,
    log=print,
) -> ExportManifest:
    """Tokenize every document, run the model, write interchange + manifest.

    Documents whose text tokenizes to nothing are skipped with a warning
    and listed in the manifest so downstream runs can account for them.
    """
    if layer_policy not in LAYER_POLICIES:
        raise ExportError(
            f"unknown layer policy {layer_policy!r}; choose from {', '.join(LAYER_POLICIES)}"
        )
    docs = read_corpus(corpus_path)
    tokenizer, model = load_model(model_name)
    limit = effective_max_length(tokenizer, model, max_length)
    chunk_len = limit - tokenizer.num_special_tokens_to_add()
    if chunk_len < 1:
        raise ExportError(f"max length {limit} leaves no room for content tokens")

    dim = int(model.config.hidden_size)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    documents: dict[str, dict] = {}
    skipped: list[dict] = []
    with open(out_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"meta": {"dim": dim, "model": str(model_name)}},
                                sort_keys=True) + "\n")
        for doc in docs:
            tokens, sizes, vectors = embed_tokens(tokenizer, model, doc["text"],
                                                  layer_policy, limit)
            if not tokens:
                log(f"warning: {doc['id']}: no tokens, skipped")
                skipped.append({"id": doc["id"], "reason": "no tokens"})
                continue
            if vectors.shape != (len(tokens), dim):
                raise ExportError(
                    f"{doc['id']}: {len(tokens)} tokens but vector block "
                    f"of shape {vectors.shape}"
                )
            starts = chunk_starts(len(tokens), chunk_len)
            if sizes != [min(chunk_len, len(tokens) - s) for s in starts]:
                raise ExportError(
                    f"{doc['id']}: tokenizer chunked {sizes} instead of "
                    f"{chunk_len}-token windows"
                )
            record = {"id": doc["id"], "tokens": tokens, "vectors": vectors.tolist()}
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            documents[doc["id"]] = {"tokens": len(tokens), "chunks": starts}
            log(f"{doc['id']}: {len(tokens)} tokens, {len(starts)} chunk(s)")
    if not documents:
        out_path.unlink()
        raise ExportError("every document was skipped; nothing to export")

    manifest = ExportManifest(
        model_name=str(model_name),
        layer_policy=layer_policy,
        dim=dim,
        max_length=limit,
        tokenizer_lowercases=tokenizer_lowercases(tokenizer),
        corpus_sha256=sha256_file(corpus_path),
        output_sha256=sha256_file(out_path),
        documents=documents,
        skipped=skipped,
    )
    save_manifest(manifest, manifest_path or default_manifest_path(out_path))
    return manifest


def default_manifest_path(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".manifest.json")


def save_manifest(manifest: ExportManifest, path: str | Path) -> None:
    payload = {
        "model": manifest.model_name,
        "layer_policy": manifest.layer_policy,
        "dim": manifest.dim,
        "max_length": manifest.max_length,
        "tokenizer_lowercases": manifest.tokenizer_lowercases,
        "corpus_sha256": manifest.corpus_sha256,
        "output_sha256": manifest.output_sha256,
        "documents": manifest.documents,
        "skipped": manifest.skipped,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_manifest(path: str | Path) -> ExportManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ExportManifest(
        model_name=data["model"],
        layer_policy=data["layer_policy"],
        dim=data["dim"],
        max_length=data["max_length"],
        tokenizer_lowercases=data["tokenizer_lowercases"],
        corpus_sha256=data["corpus_sha256"],
        output_sha256=data["output_sha256"],
        documents=data["documents"],
        skipped=data["skipped"],
    )
