"""Negative sampling, sparse Adam, and the training loop.

Training is single-writer and fully deterministic for a given seed: the
seed spawns three independent streams (initialization, epoch shuffling,
negative sampling), batches sum pair gradients in fixed index order, and
all arithmetic is float64.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDatasetError, InvalidConfigError, NonFiniteUpdateError
from .models import (
    EmbeddingTable,
    ModelConfig,
    SparseGrad,
    init_embeddings,
    pair_grad_batch,
    renormalize_entities,
    renormalize_normals,
)
from .vocab import Triple, TripleIndex, Vocabulary

MAX_REJECTION_ATTEMPTS = 100
FULL_BATCH_LIMIT = 10_000  # datasets smaller than this default to one batch per epoch


@dataclass(frozen=True)
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    learning_rate: float = 0.001
    epochs: int = 1000
    batch_size: int | None = None      # None: 512, or full-batch under FULL_BATCH_LIMIT
    negatives: int = 1                 # negatives per positive
    corruption: str = "uniform"        # replace head or tail, uniformly
    share: str = "always"              # or "init-only": copy at init, train apart
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidConfigError("epochs must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidConfigError("batch_size must be at least 1")
        if self.negatives < 1:
            raise InvalidConfigError("negatives must be at least 1")
        if self.corruption != "uniform":
            raise InvalidConfigError(f"unknown corruption scheme {self.corruption!r}")
        if self.share not in ("always", "init-only"):
            raise InvalidConfigError(f"unknown share mode {self.share!r}")

    def resolved_batch_size(self, n_triples: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return n_triples if n_triples < FULL_BATCH_LIMIT else 512


def negative_sample(
    t: Triple, vocab: Vocabulary, index: TripleIndex, rng: np.random.Generator
) -> tuple[Triple, bool]:
    """Corrupt head or tail (never the predicate) with a uniform entity.

    Resamples while the corrupted triple is a known positive, up to
    MAX_REJECTION_ATTEMPTS; then the last sample is accepted anyway.
    Returns the negative and whether the cap was exhausted.
    """
    entities = vocab.entity_ids
    corrupt_head = rng.random() < 0.5
    candidate = t
    for _ in range(MAX_REJECTION_ATTEMPTS):
        repl = int(entities[rng.integers(len(entities))])
        candidate = Triple(repl, t.p, t.o) if corrupt_head else Triple(t.s, t.p, repl)
        if candidate not in index:
            return candidate, False
    return candidate, True


class AdamState:
    """First/second-moment accumulators shaped like every parameter,
    updated sparsely: rows a step does not touch keep their moments."""

    def __init__(self, table: EmbeddingTable, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m_nodes = np.zeros_like(table.node_vectors)
        self.v_nodes = np.zeros_like(table.node_vectors)
        if table.relation_normals is not None:
            self.m_normals = np.zeros_like(table.relation_normals)
            self.v_normals = np.zeros_like(table.relation_normals)
        else:
            self.m_normals = self.v_normals = None

    def _update(self, params: np.ndarray, m: np.ndarray, v: np.ndarray,
                ids: np.ndarray, grads: np.ndarray, lr: float) -> None:
        b1, b2 = self.beta1, self.beta2
        # overflow/invalid surface as non-finite params and raise below
        with np.errstate(invalid="ignore", over="ignore"):
            m[ids] = b1 * m[ids] + (1.0 - b1) * grads
            v[ids] = b2 * v[ids] + (1.0 - b2) * grads ** 2
            m_hat = m[ids] / (1.0 - b1 ** self.step)
            v_hat = v[ids] / (1.0 - b2 ** self.step)
            params[ids] -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
        if not np.all(np.isfinite(params[ids])):
            raise NonFiniteUpdateError()


def adam_step(table: EmbeddingTable, adam: AdamState, grad: SparseGrad, learning_rate: float) -> None:
    """One bias-corrected Adam step applied to the touched rows only."""
    adam.step += 1
    if len(grad.node_ids):
        adam._update(table.node_vectors, adam.m_nodes, adam.v_nodes,
                     grad.node_ids, grad.node_grads, learning_rate)
    if len(grad.normal_slots):
        adam._update(table.relation_normals, adam.m_normals, adam.v_normals,
                     grad.normal_slots, grad.normal_grads, learning_rate)


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    wall_ms: float

    def log_line(self) -> str:
        return f"{self.epoch}\t{self.mean_loss:.6f}\t{self.wall_ms:.1f}"


@dataclass
class TrainResult:
    table: EmbeddingTable
    log: list[EpochStats]
    rejection_cap_hits: int

    def log_text(self) -> str:
        return "".join(s.log_line() + "\n" for s in self.log)


def train(
    train_triples: list[Triple],
    vocab: Vocabulary,
    config: TrainConfig,
    index: TripleIndex | None = None,
) -> TrainResult:
    """Run the full training loop and return the learned table.

    Per epoch: shuffle, corrupt each positive into `negatives` negatives,
    sum pair gradients per batch, apply Adam, then re-apply per-model
    constraints (transe entity renorm at epoch end; transh normals after
    every step). The known-triple index for corruption rejection defaults
    to the training set itself.
    """
    if not train_triples:
        raise EmptyDatasetError("no training triples")
    if index is None:
        index = TripleIndex(train_triples)

    init_rng, shuffle_rng, sample_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(3)
    )
    table = init_embeddings(config.model, vocab, init_rng, share=config.share)
    adam = AdamState(table)

    triples = np.array(train_triples, dtype=np.int64)
    n = len(triples)
    batch_size = config.resolved_batch_size(n)
    cap_hits = 0
    log: list[EpochStats] = []

    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(n)
        loss_sum = 0.0
        pair_count = 0
        for batch_no, start in enumerate(range(0, n, batch_size)):
            pos = triples[order[start:start + batch_size]]
            if config.negatives > 1:
                pos = np.repeat(pos, config.negatives, axis=0)
            neg = np.empty_like(pos)
            for i, row in enumerate(pos):
                cand, capped = negative_sample(Triple(*row), vocab, index, sample_rng)
                cap_hits += capped
                neg[i] = cand
            try:
                grad, losses = pair_grad_batch(table, pos, neg)
                adam_step(table, adam, grad, config.learning_rate)
            except NonFiniteUpdateError:
                raise NonFiniteUpdateError(epoch=epoch, batch=batch_no) from None
            if config.model.model == "transh" and len(grad.normal_slots):
                renormalize_normals(table, grad.normal_slots)
            loss_sum += float(losses.sum())
            pair_count += len(losses)
        if config.model.model == "transe":
            renormalize_entities(table, vocab)
        if not table.all_finite():
            raise NonFiniteUpdateError(epoch=epoch)
        wall_ms = (time.perf_counter() - t0) * 1e3
        log.append(EpochStats(epoch, loss_sum / pair_count, wall_ms))

    return TrainResult(table, log, cap_hits)
