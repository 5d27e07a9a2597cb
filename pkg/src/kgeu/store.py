"""Single-file model archive: JSON header, vocabulary dump, raw float64 rows.

Layout, byte-exact:

    KGEU1\\n                     magic
    <header bytes>\\n            ASCII decimal length of the header
    header                      canonical JSON (sorted keys, no spaces), UTF-8
    <vocab bytes>\\n             length of the vocabulary dump
    vocabulary dump             `<id>\\t<term>\\t<roles>` lines
    <payload bytes>\\n           length of the embedding payload
    payload                     little-endian float64: node rows in id
                                order, then transh normals in property-id
                                order

All parameters are stored and computed at 64-bit, so a load/save round
trip is bitwise exact.
"""

import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, FormatError
from .models import EmbeddingTable, ModelConfig
from .trainer import TrainConfig
from .vocab import Vocabulary, dump_vocabulary, parse_vocabulary

MAGIC = b"KGEU1\n"
FORMAT_VERSION = 1


def _header_dict(config: TrainConfig, vocab: Vocabulary) -> dict:
    m = config.model
    return {
        "format_version": FORMAT_VERSION,
        "model": m.model,
        "dim": m.dim,
        "norm": m.norm,
        "margin": m.margin,
        "complex_reg": m.complex_reg,
        "learning_rate": config.learning_rate,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "negatives": config.negatives,
        "corruption": config.corruption,
        "share": config.share,
        "seed": config.seed,
        "unify": vocab.unify,
    }


def save(table: EmbeddingTable, vocab: Vocabulary, config: TrainConfig, path: str | Path) -> None:
    """Write the archive; the table must be finite."""
    if not table.all_finite():
        raise FormatError("refusing to save non-finite parameters")
    header = json.dumps(_header_dict(config, vocab), sort_keys=True, separators=(",", ":")).encode()
    vocab_bytes = dump_vocabulary(vocab).encode()
    payload = table.node_vectors.astype("<f8").tobytes()
    if table.relation_normals is not None:
        payload += table.relation_normals.astype("<f8").tobytes()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(b"%d\n" % len(header))
        f.write(header)
        f.write(b"%d\n" % len(vocab_bytes))
        f.write(vocab_bytes)
        f.write(b"%d\n" % len(payload))
        f.write(payload)


def _read_sized(f, what: str) -> bytes:
    line = f.readline()
    if not line.endswith(b"\n"):
        raise FormatError(f"truncated archive before {what} length")
    try:
        n = int(line[:-1])
    except ValueError:
        raise FormatError(f"bad {what} length") from None
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated {what}")
    return data


def load(path: str | Path) -> tuple[EmbeddingTable, Vocabulary, TrainConfig]:
    """Read an archive back; validates version, shapes, and finiteness."""
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise FormatError("bad magic: not a model archive")
        try:
            header = json.loads(_read_sized(f, "header"))
        except json.JSONDecodeError:
            raise FormatError("header is not valid JSON") from None
        if header.get("format_version") != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {header.get('format_version')!r}")
        vocab = parse_vocabulary(_read_sized(f, "vocabulary").decode(), unify=header["unify"])
        payload = _read_sized(f, "payload")
        if f.read(1):
            raise FormatError("trailing bytes after payload")

    model_cfg = ModelConfig(
        model=header["model"],
        dim=header["dim"],
        norm=header["norm"],
        margin=header["margin"],
        complex_reg=header["complex_reg"],
    )
    config = TrainConfig(
        model=model_cfg,
        learning_rate=header["learning_rate"],
        epochs=header["epochs"],
        batch_size=header["batch_size"],
        negatives=header["negatives"],
        corruption=header["corruption"],
        share=header["share"],
        seed=header["seed"],
    )

    n_nodes = len(vocab)
    n_props = len(vocab.property_ids)
    width = model_cfg.width
    node_bytes = 8 * n_nodes * width
    normal_bytes = 8 * n_props * model_cfg.dim if model_cfg.model == "transh" else 0
    if len(payload) != node_bytes + normal_bytes:
        raise DimensionMismatchError(
            f"payload holds {len(payload)} bytes, expected {node_bytes + normal_bytes} "
            f"for {n_nodes} rows of width {width}"
        )
    nodes = np.frombuffer(payload[:node_bytes], dtype="<f8").reshape(n_nodes, width).copy()
    normals = None
    if model_cfg.model == "transh":
        normals = np.frombuffer(payload[node_bytes:], dtype="<f8").reshape(n_props, model_cfg.dim).copy()
    table = EmbeddingTable(model_cfg, nodes, normals, vocab.property_ids.copy())
    if not table.all_finite():
        raise FormatError("archive contains non-finite parameters")
    return table, vocab, config
