"""Contextual token-embedding exporter for the eqcluster pipeline.

Runs a pretrained transformer over a corpus file and writes one
JSON-Lines record per document (surface tokens plus one hidden-state
vector each), the format `eqcluster embed --tokens` consumes, alongside
an audit manifest.
"""

from .export import (
    ExportError,
    ExportManifest,
    ModelError,
    export_embeddings,
    load_manifest,
    save_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "ExportError",
    "ExportManifest",
    "ModelError",
    "export_embeddings",
    "load_manifest",
    "save_manifest",
]
