"""Canonical serialization and content-addressed ids.

Every artifact id is derived from the SHA-256 of its canonical JSON with
the id field removed, so identical content always deduplicates to the
same id and stored bytes can be verified against their name.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

ID_HEX_LEN = 16


def canonical_json(doc: Any) -> str:
    """Serialize a document deterministically (sorted keys, no whitespace)."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest_hex(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def content_id(kind: str, doc: dict) -> str:
    """Content-addressed id for an artifact document.

    The id field itself is excluded so assigning the id does not change it.
    """
    body = {k: v for k, v in doc.items() if k != "id"}
    return f"{kind}-{digest_hex(canonical_json(body))[:ID_HEX_LEN]}"


def normalized_digest(doc: Any) -> str:
    """Digest of a payload normalized for duplicate detection.

    Lowercases and collapses whitespace first, so trivially reformatted
    generations hash identically.
    """
    text = canonical_json(doc) if not isinstance(doc, str) else doc
    normalized = " ".join(text.lower().split())
    return digest_hex(normalized)
