"""Fingerprinting and provenance metadata for reproducible outputs.

Every serialized artifact (spectra, scans, checkpoints) carries a short
fingerprint of the exact inputs that produced it.  Fingerprints are built
from a canonical JSON rendering, so they are stable across processes and
platforms; there is no random or time-dependent state anywhere in them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

ARTIFACT_VERSION = "0.1.0"


def to_plain(obj):
    """Recursively convert dataclasses/tuples to JSON-friendly structures."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"__type__": type(obj).__name__}
        for field in dataclasses.fields(obj):
            out[field.name] = to_plain(getattr(obj, field.name))
        return out
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, float):
        # repr round-trips exactly; canonical text form for hashing
        return repr(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, separators=(",", ":"))


def fingerprint(*objs) -> str:
    """Short stable hash of the given objects (16 hex chars)."""
    digest = hashlib.sha256()
    for obj in objs:
        digest.update(canonical_json(obj).encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()[:16]
