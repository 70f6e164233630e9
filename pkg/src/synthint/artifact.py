"""Run-artifact serialization: canonical JSON with a stable content hash.

Canonical form: UTF-8 JSON, keys sorted, no insignificant whitespace,
floats rendered with 17 significant digits (enough to round-trip IEEE
doubles exactly), so semantically equal artifacts are byte-identical and
the SHA-256 of the canonical bytes is a stable run identity.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

from .errors import ArtifactHashMismatch, SchemaVersionMismatch

SCHEMA_VERSION = 1
TOP_LEVEL_KEYS = (
    "schema_version",
    "config",
    "panel",
    "partition",
    "counterfactuals",
    "diagnostics",
    "content_hash",
)


def _canonical(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number in artifact: {value}")
        if value == int(value) and abs(value) < 1e16:
            out.append(f"{value:.1f}")
        else:
            out.append(format(value, ".17g"))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canonical(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _canonical(value[key], out)
        out.append("}")
    else:
        raise TypeError(f"unserializable value of type {type(value).__name__}")


def canonical_bytes(doc: dict) -> bytes:
    out: list[str] = []
    _canonical(doc, out)
    return "".join(out).encode("utf-8")


def content_hash(doc: dict) -> str:
    """SHA-256 of the canonical serialization, excluding the hash field."""
    body = {k: v for k, v in doc.items() if k != "content_hash"}
    return hashlib.sha256(canonical_bytes(body)).hexdigest()


def write_run(doc: dict, path: str | Path) -> str:
    """Seal the artifact (embed its content hash) and write it atomically.

    Returns the content hash.
    """
    doc = dict(doc)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    doc["content_hash"] = content_hash(doc)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(canonical_bytes(doc))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return doc["content_hash"]


def dumps_run(doc: dict) -> bytes:
    """Canonical bytes of a sealed copy of the artifact."""
    doc = dict(doc)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    doc["content_hash"] = content_hash(doc)
    return canonical_bytes(doc)


def read_run(source: str | Path | bytes, verify: bool = True) -> dict:
    """Parse an artifact, checking schema version and (by default) that
    the embedded content hash matches the content."""
    if isinstance(source, bytes):
        raw = source
    else:
        raw = Path(source).read_bytes()
    doc = json.loads(raw.decode("utf-8"))
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"artifact schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    if verify:
        expected = doc.get("content_hash")
        actual = content_hash(doc)
        if expected != actual:
            raise ArtifactHashMismatch(
                f"embedded hash {expected!r} != computed {actual!r}"
            )
    return doc
