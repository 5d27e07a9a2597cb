import numpy as np
import pytest

from kgeu import RawTriple, Triple, build_vocabulary, intern
from kgeu.toy import mini_bilingual


@pytest.fixture
def bilingual_raws() -> list[RawTriple]:
    return mini_bilingual()


@pytest.fixture
def bilingual_vocab(bilingual_raws):
    return build_vocabulary(bilingual_raws, unify=True)


@pytest.fixture
def bilingual_triples(bilingual_raws, bilingual_vocab) -> list[Triple]:
    return intern(bilingual_raws, bilingual_vocab).triples


def random_graph(rng: np.random.Generator, n_entities: int, n_relations: int, n_triples: int,
                 property_nodes: bool = False) -> list[RawTriple]:
    """Random raw triples over e0..eN / r0..rM, optionally with a few
    statements about the relations themselves."""
    raws = []
    seen = set()
    while len(raws) < n_triples:
        s = int(rng.integers(n_entities))
        o = int(rng.integers(n_entities))
        p = int(rng.integers(n_relations))
        if (s, p, o) in seen:
            continue
        seen.add((s, p, o))
        raws.append(RawTriple(f"e{s}", f"r{p}", f"e{o}"))
    if property_nodes and n_relations >= 2:
        raws.append(RawTriple("r0", "r1", f"e{int(rng.integers(n_entities))}"))
        raws.append(RawTriple(f"e{int(rng.integers(n_entities))}", "r0", "r1"))
    return raws
