"""Patch representation and classification."""

from .classify import (
    SIMILARITY_THRESHOLD,
    PatchClass,
    chunk_names,
    chunk_signature,
    chunks_related,
    chunks_similar,
    classify,
)
from .diff import ACTIONS, Chunk, FingerprintMismatch, Patch, apply_patch, ast_diff, fingerprint
from .ted import normalized_distance, tree_edit_distance, tree_size

__all__ = [
    "ACTIONS",
    "Chunk",
    "FingerprintMismatch",
    "Patch",
    "PatchClass",
    "SIMILARITY_THRESHOLD",
    "apply_patch",
    "ast_diff",
    "chunk_names",
    "chunk_signature",
    "chunks_related",
    "chunks_similar",
    "classify",
    "fingerprint",
    "normalized_distance",
    "tree_edit_distance",
    "tree_size",
]
