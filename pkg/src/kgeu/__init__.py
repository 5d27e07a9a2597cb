"""Knowledge-graph embedding toolkit.

TransE, TransH, and ComplEx over an optionally unified vocabulary in
which a term used both as a node and as a predicate owns a single
embedding row, plus training, link-prediction evaluation, and dataset
tooling.
"""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    FormatError,
    InvalidConfigError,
    InvalidSpecError,
    KgeError,
    MalformedLineError,
    NonFiniteUpdateError,
    TrueAnswerNotCandidateError,
    UnknownTermError,
)
from .ingest import RawTriple, drop_literals, parse_ntriples, parse_tsv, write_ntriples, write_tsv
from .vocab import (
    DatasetStats,
    Triple,
    TripleIndex,
    Vocabulary,
    build_vocabulary,
    dataset_stats,
    dump_vocabulary,
    intern,
    parse_vocabulary,
    unknown_terms,
)
from .models import (
    EmbeddingTable,
    ModelConfig,
    SparseGrad,
    gradient,
    init_embeddings,
    pair_grad_batch,
    pair_loss,
    pair_loss_batch,
    score,
    score_batch,
    score_complex,
    score_transe,
    score_transh,
)
from .trainer import AdamState, TrainConfig, TrainResult, adam_step, negative_sample, train
from .evaluator import (
    EvalConfig,
    EvalReport,
    candidate_set,
    evaluate,
    model_label,
    rank,
    rank_from_scores,
    render_report_table,
    summarize_reports,
)
from .toy import ToySpec, generate_toy, mini_bilingual
from .store import load, save
