"""Binary model checkpoints.

Layout (all integers little-endian):

    bytes 0..3    magic b"AKGM"
    bytes 4..7    format version (uint32)
    bytes 8..11   header length H (uint32)
    bytes 12..    UTF-8 JSON header of H bytes:
                    dimension, entity_counts per kind, relations (in table
                    order), training config, payload_crc32
    then          payload: per kind (user, item, aspect), per ordinal, the
                  real part then the imaginary part as float32[D]; then each
                  relation vector in header order, re then im.

The payload size is fully determined by the header, so truncation is detected
by length and corruption by CRC32.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .embedding import KIND_ORDER, EmbeddingModel, TrainingConfig
from .graph import NodeKind, RelationType

MAGIC = b"AKGM"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def _payload_bytes(model: EmbeddingModel) -> bytes:
    chunks = []
    for kind in KIND_ORDER:
        table = model.kind_table(kind)
        inter = np.empty((table.shape[0], 2, model.dimension), dtype="<f4")
        inter[:, 0, :] = table.real
        inter[:, 1, :] = table.imag
        chunks.append(inter.tobytes())
    inter = np.empty((model.relation_table.shape[0], 2, model.dimension), dtype="<f4")
    inter[:, 0, :] = model.relation_table.real
    inter[:, 1, :] = model.relation_table.imag
    chunks.append(inter.tobytes())
    return b"".join(chunks)


def expected_payload_size(dimension: int, entity_count: int, relation_count: int) -> int:
    return (entity_count + relation_count) * 2 * dimension * 4


def save_model(model: EmbeddingModel, path) -> None:
    payload = _payload_bytes(model)
    header = {
        "dimension": model.dimension,
        "entity_counts": {kind.value: model.kind_counts[kind] for kind in KIND_ORDER},
        "relations": [rel.value for rel in model.relations],
        "config": model.config.to_dict(),
        "payload_crc32": zlib.crc32(payload),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def load_model(path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise CheckpointError("not an aspectkg model checkpoint")
    version, header_len = struct.unpack("<II", blob[4:12])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(blob) < 12 + header_len:
        raise CheckpointError("truncated checkpoint: incomplete header")
    try:
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None

    dimension = header["dimension"]
    kind_counts = {NodeKind(k): int(v) for k, v in header["entity_counts"].items()}
    relations = [RelationType(name) for name in header["relations"]]
    config = TrainingConfig.from_dict(header["config"])
    entity_count = sum(kind_counts.get(kind, 0) for kind in KIND_ORDER)

    payload = blob[12 + header_len :]
    expected = expected_payload_size(dimension, entity_count, len(relations))
    if len(payload) != expected:
        raise CheckpointError(
            f"truncated checkpoint: payload is {len(payload)} bytes, expected {expected}"
        )
    if zlib.crc32(payload) != header["payload_crc32"]:
        raise CheckpointError("checkpoint payload fails CRC check")

    flat = np.frombuffer(payload, dtype="<f4").reshape(entity_count + len(relations), 2, dimension)
    table = (flat[:, 0, :] + 1j * flat[:, 1, :]).astype(np.complex64)
    entity_table = np.ascontiguousarray(table[:entity_count])
    relation_table = np.ascontiguousarray(table[entity_count:])
    return EmbeddingModel(dimension, kind_counts, relations, entity_table, relation_table, config)
