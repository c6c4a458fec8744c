"""Document collection loading and validation.

The corpus file is a UTF-8 JSON array; each element is an object with
required keys "id" and "text" and optional "title" and "group". Unknown
keys are rejected. Document order in the file is preserved everywhere
downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError

_REQUIRED_KEYS = {"id", "text"}
_ALLOWED_KEYS = {"id", "text", "title", "group"}


@dataclass(frozen=True)
class Document:
    """One unit of the collection: a short self-contained description."""

    id: str
    title: str = ""
    group: str | None = None
    text: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"document {self.id!r} has empty text")
        if self.group is not None and not self.group:
            raise ValidationError(f"document {self.id!r} has an empty group label")


@dataclass(frozen=True)
class Corpus:
    """An ordered, validated document collection.

    Immutable after construction; safe to share across workers. `groups`
    maps each group label to the ids carrying it, both in first-appearance
    order. Labels are all-or-nothing: either every document has one or
    none does.
    """

    documents: tuple[Document, ...]
    groups: dict[str, tuple[str, ...]] = field(init=False)

    def __post_init__(self):
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        labeled = [d for d in self.documents if d.group is not None]
        if labeled and len(labeled) != len(self.documents):
            missing = [d.id for d in self.documents if d.group is None]
            raise ValidationError(
                "group labels must cover all documents or none; "
                f"unlabeled: {', '.join(missing[:5])}"
            )
        groups: dict[str, list[str]] = {}
        for doc in labeled:
            groups.setdefault(doc.group, []).append(doc.id)
        object.__setattr__(self, "groups", {g: tuple(ids) for g, ids in groups.items()})

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    @property
    def is_labeled(self) -> bool:
        return bool(self.groups)

    def __getitem__(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)


def _record_error(index: int, message: str) -> ValidationError:
    return ValidationError(f"corpus record {index}: {message}")


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus file.

    Raises ValidationError with the record position for malformed records,
    duplicate ids, or partial group labels. Missing files raise the usual
    OSError.
    """
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"corpus file {path} is not valid UTF-8: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"corpus file {path} is not valid JSON "
            f"(line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    if not isinstance(data, list):
        raise ValidationError(f"corpus file {path} must contain a top-level JSON array")

    documents: list[Document] = []
    for index, record in enumerate(data):
        if not isinstance(record, dict):
            raise _record_error(index, "expected a JSON object")
        keys = set(record)
        unknown = keys - _ALLOWED_KEYS
        if unknown:
            raise _record_error(index, f"unknown keys: {', '.join(sorted(unknown))}")
        missing = _REQUIRED_KEYS - keys
        if missing:
            raise _record_error(index, f"missing required keys: {', '.join(sorted(missing))}")
        for key in keys:
            if not isinstance(record[key], str):
                raise _record_error(index, f"key {key!r} must be a string")
        try:
            documents.append(
                Document(
                    id=record["id"],
                    title=record.get("title", ""),
                    group=record.get("group"),
                    text=record["text"],
                )
            )
        except ValidationError as exc:
            raise _record_error(index, str(exc)) from exc
    return Corpus(documents=tuple(documents))


def balanced_shape(corpus: Corpus) -> tuple[int, int]:
    """Return (number of groups, common group size) for a fully labeled corpus.

    Raises ValidationError if the corpus is unlabeled or group sizes differ.
    """
    if not corpus.is_labeled:
        raise ValidationError("corpus has no group labels; balanced shape is undefined")
    sizes = {g: len(ids) for g, ids in corpus.groups.items()}
    distinct = set(sizes.values())
    if len(distinct) != 1:
        detail = ", ".join(f"{g}={n}" for g, n in sizes.items())
        raise ValidationError(f"groups are not equally sized: {detail}")
    return len(sizes), distinct.pop()
