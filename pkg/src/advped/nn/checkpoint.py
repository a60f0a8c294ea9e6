"""Self-describing binary checkpoint container.

Layout: magic bytes "ADVPED01", a little-endian u32 metadata length, a JSON
metadata block (array manifest, counters, rng state, config fingerprint,
payload hash), then raw little-endian float64 parameter blocks in manifest
order. A small probe-regression JSON is written beside every checkpoint so
loads can verify forward outputs.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ADVPED01"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    """Base class for checkpoint failures."""


class CorruptCheckpointError(CheckpointError):
    """File is damaged: bad magic, truncation, hash mismatch, bad JSON."""


class CheckpointVersionError(CheckpointError):
    """File is a checkpoint of an unsupported format version."""


class CheckpointShapeError(CheckpointError):
    """Stored network shapes disagree with the requested configuration."""


class CheckpointConfigError(CheckpointError):
    """Stored config fingerprint disagrees with the active configuration."""


def probe_path(path) -> Path:
    return Path(str(path) + ".probe.json")


def write_checkpoint(path, metadata: dict, arrays) -> None:
    """Serialize named float arrays plus metadata.

    Parameters
    ----------
    path : path-like
        Destination file.
    metadata : dict
        JSON-serializable run state; format fields are added here.
    arrays : list of (name, ndarray)
        Written as float64 little-endian blocks in list order.
    """
    meta = dict(metadata)
    meta["format_version"] = FORMAT_VERSION
    meta["arrays"] = [{"name": name, "shape": list(a.shape)}
                      for name, a in arrays]
    payload = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in arrays)
    meta["payload_sha256"] = hashlib.sha256(payload).hexdigest()
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(payload)


def read_checkpoint(path):
    """Parse a checkpoint file.

    Returns
    -------
    (metadata, arrays)
        The metadata dict and a name -> float64 ndarray mapping.

    Raises
    ------
    CorruptCheckpointError, CheckpointVersionError
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CorruptCheckpointError(f"unreadable checkpoint: {exc}") from exc
    if len(data) < len(MAGIC) + 4:
        raise CorruptCheckpointError("truncated checkpoint (no header)")
    if data[:6] != MAGIC[:6]:
        raise CorruptCheckpointError("bad magic: not a checkpoint file")
    if data[:8] != MAGIC:
        raise CheckpointVersionError(
            f"unsupported checkpoint version tag {data[6:8]!r}")
    (meta_len,) = struct.unpack_from("<I", data, 8)
    meta_end = 12 + meta_len
    if len(data) < meta_end:
        raise CorruptCheckpointError("truncated checkpoint (metadata)")
    try:
        meta = json.loads(data[12:meta_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpointError(f"corrupt metadata: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"unsupported format_version {meta.get('format_version')!r}")
    payload = data[meta_end:]
    digest = hashlib.sha256(payload).hexdigest()
    if digest != meta.get("payload_sha256"):
        raise CorruptCheckpointError("payload hash mismatch")
    arrays = {}
    offset = 0
    for entry in meta.get("arrays", []):
        name, shape = entry["name"], tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise CorruptCheckpointError(f"truncated payload at array {name!r}")
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        arrays[name] = arr.reshape(shape).copy()
        offset += nbytes
    if offset != len(payload):
        raise CorruptCheckpointError("trailing bytes after last array")
    return meta, arrays


def write_probe(path, probe_input, outputs: dict) -> None:
    """Write the probe-regression file next to a checkpoint."""
    doc = {"input": [float(x) for x in probe_input],
           "outputs": {k: [float(x) for x in np.atleast_1d(v)]
                       for k, v in outputs.items()}}
    probe_path(path).write_text(json.dumps(doc, sort_keys=True, indent=1),
                                encoding="utf-8")


def read_probe(path):
    """Read the probe file; returns None when absent."""
    p = probe_path(path)
    if not p.exists():
        return None
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptCheckpointError(f"corrupt probe file: {exc}") from exc
