"""Manifest bundle parsing and content-addressed hashing.

A bundle is a multi-document YAML stream; every document must be a mapping
carrying apiVersion, kind, and metadata.name. The content hash is computed
over a canonical re-serialization (JSON, sorted keys) so that formatting
and whitespace differences never change a version's identity.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import yaml

from .errors import MalformedBundle


def canonical_json(obj: Any) -> str:
    """Serialize `obj` deterministically: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def parse_bundle(data: bytes) -> list[dict]:
    """Parse bundle bytes into a list of manifest documents.

    Raises MalformedBundle on unparsable YAML, empty streams, or documents
    missing apiVersion / kind / metadata.name.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedBundle(f"bundle is not utf-8: {exc}") from exc
    try:
        raw_docs = list(yaml.safe_load_all(text))
    except yaml.YAMLError as exc:
        raise MalformedBundle(f"bundle is not valid YAML: {exc}") from exc

    docs = [d for d in raw_docs if d is not None]
    if not docs:
        raise MalformedBundle("bundle contains no documents")
    for i, doc in enumerate(docs):
        if not isinstance(doc, dict):
            raise MalformedBundle(f"document {i} is not a mapping")
        for field in ("apiVersion", "kind"):
            if not isinstance(doc.get(field), str) or not doc[field]:
                raise MalformedBundle(f"document {i} missing {field}")
        meta = doc.get("metadata")
        if not isinstance(meta, dict) or not meta.get("name"):
            raise MalformedBundle(f"document {i} missing metadata.name")
    return docs


def content_hash(docs: list[dict]) -> str:
    """Digest of the canonicalized document stream."""
    joined = "\n".join(canonical_json(doc) for doc in docs)
    return sha256_hex(joined.encode("utf-8"))


_PARSE_CACHE: dict[str, list[dict]] = {}
_PARSE_CACHE_LIMIT = 64


def parse_bundle_cached(data: bytes) -> list[dict]:
    """parse_bundle with a content-keyed cache for immutable artifacts.

    Callers must treat the returned documents as frozen (copy before mutating).
    """
    key = sha256_hex(data)
    docs = _PARSE_CACHE.get(key)
    if docs is None:
        docs = parse_bundle(data)
        if len(_PARSE_CACHE) >= _PARSE_CACHE_LIMIT:
            _PARSE_CACHE.clear()
        _PARSE_CACHE[key] = docs
    return docs


def hash_bundle_bytes(data: bytes) -> str:
    return content_hash(parse_bundle(data))


def dump_bundle(docs: list[dict]) -> bytes:
    """Serialize documents as a deterministic multi-document YAML stream."""
    parts = [
        yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)
        for doc in docs
    ]
    return ("---\n" + "---\n".join(parts)).encode("utf-8")
