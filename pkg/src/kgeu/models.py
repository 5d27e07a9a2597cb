"""Embedding model parameter layout, initialization, scoring, and gradients.

Three scoring functions over one row-per-id table:

* transe:  score(s,p,o) = -||v_s + v_p - v_o||            (L1 or L2)
* transh:  score(s,p,o) = -||proj(v_s) + v_p - proj(v_o)|| with
           proj(x) = x - (w_p . x) w_p for a unit normal w_p per relation
* complex: score(s,p,o) = Re( sum_k s_k * r_k * conj(o_k) ), rows storing
           dim real parts followed by dim imaginary parts

A unified vocabulary id owns a single row, so a term's entity-role and
relation-role vectors are the same storage and stay identical through
training. Gradients are analytic, returned sparsely for exactly the rows
a positive/negative pair touches, and are checked against central finite
differences in the test suite.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError
from .vocab import Triple, Vocabulary

MODELS = ("transe", "transh", "complex")
NORMS = ("l1", "l2")


@dataclass(frozen=True)
class ModelConfig:
    model: str = "transe"
    dim: int = 200
    norm: str = "l2"
    margin: float = 1.0       # margin-ranking models only
    complex_reg: float = 1e-3  # logistic-loss L2 weight, complex only

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfigError(f"unknown model {self.model!r}")
        if self.dim <= 0:
            raise InvalidConfigError("dim must be positive")
        if self.norm not in NORMS:
            raise InvalidConfigError(f"unknown norm {self.norm!r}")
        if self.margin <= 0:
            raise InvalidConfigError("margin must be positive")
        if self.complex_reg < 0:
            raise InvalidConfigError("complex_reg must be non-negative")

    @property
    def width(self) -> int:
        """Stored row width: 2*dim for complex (real+imaginary), else dim."""
        return 2 * self.dim if self.model == "complex" else self.dim


@dataclass
class EmbeddingTable:
    """Learned parameters: one row per vocabulary id, plus per-relation
    hyperplane normals for transh."""

    config: ModelConfig
    node_vectors: np.ndarray                 # (n_ids, width) float64
    relation_normals: np.ndarray | None      # (n_properties, dim), transh only
    property_ids: np.ndarray                 # ascending; row k of normals is property_ids[k]

    def normal_slot(self, p: np.ndarray | int) -> np.ndarray | int:
        """Dense index of property id(s) into relation_normals."""
        return np.searchsorted(self.property_ids, p)

    def copy(self) -> "EmbeddingTable":
        normals = None if self.relation_normals is None else self.relation_normals.copy()
        return EmbeddingTable(self.config, self.node_vectors.copy(), normals, self.property_ids)

    def all_finite(self) -> bool:
        ok = bool(np.all(np.isfinite(self.node_vectors)))
        if self.relation_normals is not None:
            ok = ok and bool(np.all(np.isfinite(self.relation_normals)))
        return ok


def init_embeddings(
    config: ModelConfig,
    vocab: Vocabulary,
    rng: np.random.Generator,
    share: str = "always",
) -> EmbeddingTable:
    """Draw every row i.i.d. uniform on [-6/sqrt(w), +6/sqrt(w)] for row
    width w, then apply per-model normalization.

    transe entity rows are L2-normalized to 1. transh hyperplane normals
    are drawn the same way and normalized to unit length. With
    share='init-only' on a non-unified vocabulary, each term holding both
    roles has its entity-role row initialized as a copy of its
    relation-role row (the rows then train independently); a unified
    vocabulary shares storage structurally and ignores the flag.
    """
    if share not in ("always", "init-only"):
        raise InvalidConfigError(f"unknown share mode {share!r}")
    n = len(vocab)
    width = config.width
    bound = 6.0 / np.sqrt(width)
    nodes = rng.uniform(-bound, bound, size=(n, width))

    if share == "init-only" and not vocab.unify:
        for _, eid, pid in vocab.shared_terms():
            nodes[eid] = nodes[pid]

    if config.model == "transe":
        ent = vocab.entity_ids
        nodes[ent] = _unit_rows(nodes[ent])

    normals = None
    if config.model == "transh":
        nbound = 6.0 / np.sqrt(config.dim)
        normals = rng.uniform(-nbound, nbound, size=(len(vocab.property_ids), config.dim))
        normals = _unit_rows(normals)

    return EmbeddingTable(config, nodes, normals, vocab.property_ids.copy())


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=-1, keepdims=True)
    return rows / np.maximum(norms, 1e-300)


def renormalize_entities(table: EmbeddingTable, vocab: Vocabulary) -> None:
    """transe constraint: entity rows (shared rows included) back to unit L2."""
    ent = vocab.entity_ids
    table.node_vectors[ent] = _unit_rows(table.node_vectors[ent])


def renormalize_normals(table: EmbeddingTable, slots: np.ndarray | None = None) -> None:
    """transh constraint: hyperplane normals back to unit L2."""
    if slots is None:
        table.relation_normals[:] = _unit_rows(table.relation_normals)
    else:
        table.relation_normals[slots] = _unit_rows(table.relation_normals[slots])


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def _norm_and_unit(d: np.ndarray, norm: str) -> tuple[np.ndarray, np.ndarray]:
    """Batch norm of difference rows and the gradient d||d||/dd."""
    if norm == "l2":
        n = np.linalg.norm(d, axis=-1)
        unit = d / np.where(n > 0.0, n, 1.0)[..., None]
        return n, unit
    n = np.abs(d).sum(axis=-1)
    return n, np.sign(d)


def _complex_parts(rows: np.ndarray, dim: int):
    return rows[..., :dim], rows[..., dim:]


def score_batch(table: EmbeddingTable, s: np.ndarray, p: np.ndarray, o: np.ndarray) -> np.ndarray:
    """Scores for aligned id arrays; higher means more plausible."""
    cfg = table.config
    vs = table.node_vectors[s]
    vp = table.node_vectors[p]
    vo = table.node_vectors[o]
    if cfg.model == "transe":
        n, _ = _norm_and_unit(vs + vp - vo, cfg.norm)
        return -n
    if cfg.model == "transh":
        w = table.relation_normals[table.normal_slot(p)]
        u = vs - vo
        d = u - (np.sum(w * u, axis=-1, keepdims=True)) * w + vp
        n, _ = _norm_and_unit(d, cfg.norm)
        return -n
    dim = cfg.dim
    sr, si = _complex_parts(vs, dim)
    rr, ri = _complex_parts(vp, dim)
    orr, oi = _complex_parts(vo, dim)
    return np.sum((sr * rr - si * ri) * orr + (sr * ri + si * rr) * oi, axis=-1)


def score(table: EmbeddingTable, t: Triple) -> float:
    """Score one triple with the table's own model."""
    s, p, o = (np.array([v], dtype=np.int64) for v in (t.s, t.p, t.o))
    return float(score_batch(table, s, p, o)[0])


def score_transe(table: EmbeddingTable, t: Triple) -> float:
    assert table.config.model == "transe"
    return score(table, t)


def score_transh(table: EmbeddingTable, t: Triple) -> float:
    assert table.config.model == "transh"
    return score(table, t)


def score_complex(table: EmbeddingTable, t: Triple) -> float:
    assert table.config.model == "complex"
    return score(table, t)


# ---------------------------------------------------------------------------
# Pair loss and gradients
# ---------------------------------------------------------------------------

@dataclass
class SparseGrad:
    """Gradient rows for exactly the ids a batch of pairs touched.

    `node_ids` are unique ascending vocabulary ids; `normal_slots` are
    unique dense indices into relation_normals (transh only, else empty).
    """

    width: int
    dim: int
    node_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    node_grads: np.ndarray | None = None
    normal_slots: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    normal_grads: np.ndarray | None = None

    def node_grad(self, id_: int) -> np.ndarray:
        i = np.searchsorted(self.node_ids, id_)
        if i == len(self.node_ids) or self.node_ids[i] != id_:
            return np.zeros(self.width)
        return self.node_grads[i]

    def normal_grad(self, slot: int) -> np.ndarray:
        i = np.searchsorted(self.normal_slots, slot)
        if i == len(self.normal_slots) or self.normal_slots[i] != slot:
            return np.zeros(self.dim)
        return self.normal_grads[i]

    def max_abs(self) -> float:
        m = 0.0
        if len(self.node_ids):
            m = float(np.max(np.abs(self.node_grads)))
        if len(self.normal_slots):
            m = max(m, float(np.max(np.abs(self.normal_grads))))
        return m


def scatter_sum(ids: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum `rows` into one row per unique id; ids returned ascending."""
    if len(ids) == 0:
        return ids.astype(np.int64), rows
    order = np.argsort(ids, kind="stable")
    ids_sorted = ids[order]
    rows_sorted = rows[order]
    starts = np.flatnonzero(np.r_[True, ids_sorted[1:] != ids_sorted[:-1]])
    return ids_sorted[starts], np.add.reduceat(rows_sorted, starts, axis=0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _pair_reg_ids(pos: np.ndarray, neg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair distinct touched ids: (B,6) sorted ids and a first-occurrence
    mask, so each row regularizes once per pair even when roles collide."""
    ids6 = np.concatenate([pos, neg], axis=1)
    ids6 = np.sort(ids6, axis=1)
    first = np.ones_like(ids6, dtype=bool)
    first[:, 1:] = ids6[:, 1:] != ids6[:, :-1]
    return ids6, first


def pair_loss_batch(table: EmbeddingTable, pos: np.ndarray, neg: np.ndarray) -> np.ndarray:
    """Per-pair training loss for aligned (B,3) positive/negative id arrays.

    Margin models: max(0, margin - score(pos) + score(neg)).
    complex: softplus(-score(pos)) + softplus(score(neg)) plus complex_reg
    times the squared L2 norm of each distinct row the pair touches.
    """
    cfg = table.config
    sp = score_batch(table, pos[:, 0], pos[:, 1], pos[:, 2])
    sn = score_batch(table, neg[:, 0], neg[:, 1], neg[:, 2])
    if cfg.model in ("transe", "transh"):
        return np.maximum(0.0, cfg.margin - sp + sn)
    loss = _softplus(-sp) + _softplus(sn)
    if cfg.complex_reg > 0.0:
        ids6, first = _pair_reg_ids(pos, neg)
        sq = np.sum(table.node_vectors[ids6] ** 2, axis=-1)
        loss = loss + cfg.complex_reg * np.sum(sq * first, axis=1)
    return loss


def pair_grad_batch(
    table: EmbeddingTable, pos: np.ndarray, neg: np.ndarray
) -> tuple[SparseGrad, np.ndarray]:
    """Analytic gradient of pair_loss_batch summed over the batch.

    Returns the sparse gradient and the per-pair losses. Rows shared
    between roles or between the two triples accumulate every
    contribution they receive.
    """
    cfg = table.config
    if cfg.model in ("transe", "transh"):
        return _margin_grad(table, pos, neg)
    return _complex_grad(table, pos, neg)


def _margin_score_parts(table: EmbeddingTable, ids: np.ndarray):
    """Score and per-role score gradients for a (B,3) id array."""
    cfg = table.config
    vs = table.node_vectors[ids[:, 0]]
    vp = table.node_vectors[ids[:, 1]]
    vo = table.node_vectors[ids[:, 2]]
    if cfg.model == "transe":
        n, unit = _norm_and_unit(vs + vp - vo, cfg.norm)
        # score = -n: d/dvs = -unit, d/dvp = -unit, d/dvo = +unit
        return -n, -unit, -unit, unit, None, None
    w = table.relation_normals[table.normal_slot(ids[:, 1])]
    u = vs - vo
    wu = np.sum(w * u, axis=-1, keepdims=True)
    d = u - wu * w + vp
    n, unit = _norm_and_unit(d, cfg.norm)
    g = -unit                                   # dscore/dd
    gw = np.sum(g * w, axis=-1, keepdims=True)
    g_proj = g - gw * w                         # dscore/dvs; dvo is its negation
    grad_w = -(gw * u + wu * g)                 # dscore/dw
    return -n, g_proj, g, -g_proj, grad_w, w


def _margin_grad(table, pos, neg):
    cfg = table.config
    sp, p_ds, p_dp, p_do, p_dw, _ = _margin_score_parts(table, pos)
    sn, n_ds, n_dp, n_do, n_dw, _ = _margin_score_parts(table, neg)
    viol = cfg.margin - sp + sn
    losses = np.maximum(0.0, viol)
    act = (viol > 0.0).astype(np.float64)[:, None]
    # dL/dscore(pos) = -1, dL/dscore(neg) = +1 where the hinge is active
    ids = np.concatenate([pos[:, 0], pos[:, 1], pos[:, 2], neg[:, 0], neg[:, 1], neg[:, 2]])
    rows = np.concatenate([
        -act * p_ds, -act * p_dp, -act * p_do,
        act * n_ds, act * n_dp, act * n_do,
    ])
    node_ids, node_grads = scatter_sum(ids, rows)
    grad = SparseGrad(cfg.width, cfg.dim, node_ids, node_grads)
    if cfg.model == "transh":
        slots = np.concatenate([table.normal_slot(pos[:, 1]), table.normal_slot(neg[:, 1])])
        wrows = np.concatenate([-act * p_dw, act * n_dw])
        grad.normal_slots, grad.normal_grads = scatter_sum(slots, wrows)
    return grad, losses


def _complex_score_parts(table: EmbeddingTable, ids: np.ndarray):
    dim = table.config.dim
    sr, si = _complex_parts(table.node_vectors[ids[:, 0]], dim)
    rr, ri = _complex_parts(table.node_vectors[ids[:, 1]], dim)
    orr, oi = _complex_parts(table.node_vectors[ids[:, 2]], dim)
    sc = np.sum((sr * rr - si * ri) * orr + (sr * ri + si * rr) * oi, axis=-1)
    ds = np.concatenate([rr * orr + ri * oi, -ri * orr + rr * oi], axis=1)
    dr = np.concatenate([sr * orr + si * oi, -si * orr + sr * oi], axis=1)
    do = np.concatenate([sr * rr - si * ri, sr * ri + si * rr], axis=1)
    return sc, ds, dr, do


def _complex_grad(table, pos, neg):
    cfg = table.config
    sp, p_ds, p_dr, p_do = _complex_score_parts(table, pos)
    sn, n_ds, n_dr, n_do = _complex_score_parts(table, neg)
    losses = _softplus(-sp) + _softplus(sn)
    cp = -_sigmoid(-sp)[:, None]   # dL/dscore(pos)
    cn = _sigmoid(sn)[:, None]     # dL/dscore(neg)
    ids = [pos[:, 0], pos[:, 1], pos[:, 2], neg[:, 0], neg[:, 1], neg[:, 2]]
    rows = [cp * p_ds, cp * p_dr, cp * p_do, cn * n_ds, cn * n_dr, cn * n_do]
    if cfg.complex_reg > 0.0:
        ids6, first = _pair_reg_ids(pos, neg)
        sq = np.sum(table.node_vectors[ids6] ** 2, axis=-1)
        losses = losses + cfg.complex_reg * np.sum(sq * first, axis=1)
        reg_ids = ids6[first]
        reg_rows = 2.0 * cfg.complex_reg * table.node_vectors[reg_ids]
        ids.append(reg_ids)
        rows.append(reg_rows)
    node_ids, node_grads = scatter_sum(np.concatenate(ids), np.concatenate(rows))
    return SparseGrad(cfg.width, cfg.dim, node_ids, node_grads), losses


def pair_loss(table: EmbeddingTable, positive: Triple, negative: Triple) -> float:
    pos = np.array([positive], dtype=np.int64)
    neg = np.array([negative], dtype=np.int64)
    return float(pair_loss_batch(table, pos, neg)[0])


def gradient(table: EmbeddingTable, positive: Triple, negative: Triple) -> SparseGrad:
    """Sparse gradient of the pair loss for one positive/negative pair."""
    pos = np.array([positive], dtype=np.int64)
    neg = np.array([negative], dtype=np.int64)
    grad, _ = pair_grad_batch(table, pos, neg)
    return grad
