import numpy as np
import pytest

from kgeu import (
    DimensionMismatchError,
    FormatError,
    ModelConfig,
    TrainConfig,
    build_vocabulary,
    dump_vocabulary,
    intern,
    load,
    save,
    score,
    train,
)
from kgeu.store import MAGIC


def trained(bilingual_raws, model="transe", dim=4, unify=True, epochs=15):
    vocab = build_vocabulary(bilingual_raws, unify=unify)
    triples = intern(bilingual_raws, vocab).triples
    cfg = TrainConfig(model=ModelConfig(model=model, dim=dim), learning_rate=0.05, epochs=epochs, seed=9)
    result = train(triples, vocab, cfg)
    return result.table, vocab, cfg, triples


@pytest.mark.parametrize("model", ["transe", "transh", "complex"])
def test_round_trip_bitwise(tmp_path, bilingual_raws, model):
    table, vocab, cfg, triples = trained(bilingual_raws, model=model)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    table2, vocab2, cfg2 = load(path)
    assert np.array_equal(table.node_vectors, table2.node_vectors)
    if model == "transh":
        assert np.array_equal(table.relation_normals, table2.relation_normals)
    assert vocab2.id_to_term == vocab.id_to_term
    assert vocab2.unify == vocab.unify
    assert cfg2 == cfg
    for t in triples:
        assert score(table2, t) == score(table, t)


def test_save_load_save_is_byte_identical(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    p1, p2 = tmp_path / "a.kgeu", tmp_path / "b.kgeu"
    save(table, vocab, cfg, p1)
    save(*load(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_magic_at_offset_zero(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    assert path.read_bytes()[: len(MAGIC)] == b"KGEU1\n"


def test_exact_file_size(tmp_path, bilingual_raws):
    # 7-id vocabulary at dim 4: every section length is derivable
    table, vocab, cfg, _ = trained(bilingual_raws, model="transe", dim=4)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    data = path.read_bytes()
    header_len = int(data[len(MAGIC):].split(b"\n", 1)[0])
    vocab_bytes = dump_vocabulary(vocab).encode()
    payload = 8 * 4 * 7
    expected = (
        len(MAGIC)
        + len(str(header_len)) + 1 + header_len
        + len(str(len(vocab_bytes))) + 1 + len(vocab_bytes)
        + len(str(payload)) + 1 + payload
    )
    assert len(data) == expected


def test_transh_payload_includes_normals(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws, model="transh", dim=4)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    plain_payload = 8 * 4 * 7
    normals_payload = 8 * 4 * 3  # one normal per property id
    assert str(plain_payload + normals_payload).encode() in path.read_bytes()


def test_bad_magic_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    data = bytearray(path.read_bytes())
    data[:6] = b"KGEU9\n"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load(path)


def test_bad_version_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    data = path.read_bytes().replace(b'"format_version":1', b'"format_version":9')
    path.write_bytes(data)
    with pytest.raises(FormatError):
        load(path)


def test_truncated_payload_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(FormatError):
        load(path)


def test_row_count_mismatch_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    data = path.read_bytes()
    # drop one vocabulary line and fix the section length so only the
    # payload/vocabulary consistency check can catch it
    vocab_bytes = dump_vocabulary(vocab).encode()
    lines = vocab_bytes.splitlines(keepends=True)
    shorter = b"".join(lines[:-1])
    data = data.replace(b"%d\n" % len(vocab_bytes) + vocab_bytes, b"%d\n" % len(shorter) + shorter)
    path.write_bytes(data)
    with pytest.raises(DimensionMismatchError):
        load(path)


def test_trailing_garbage_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    path.write_bytes(path.read_bytes() + b"extra")
    with pytest.raises(FormatError):
        load(path)


def test_non_finite_save_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    table.node_vectors[0, 0] = np.nan
    with pytest.raises(FormatError):
        save(table, vocab, cfg, tmp_path / "model.kgeu")


def test_non_finite_load_rejected(tmp_path, bilingual_raws):
    table, vocab, cfg, _ = trained(bilingual_raws)
    path = tmp_path / "model.kgeu"
    save(table, vocab, cfg, path)
    data = bytearray(path.read_bytes())
    data[-8:] = np.array([np.inf]).tobytes()
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load(path)
