"""Triple ingestion from N-Triples-subset and tab-separated files.

Both parsers are pure functions of their input: every valid statement line
yields exactly one :class:`RawTriple`, in file order, duplicates included.
Prefixed names are not expanded; terms are opaque tokens, which keeps
datasets with non-IRI identifiers (FB15K-style `/m/...` tokens) loadable.
"""

import re
from typing import Iterable, NamedTuple, TextIO

from .errors import MalformedLineError


class RawTriple(NamedTuple):
    subject: str
    predicate: str
    object: str
    is_literal: bool = False


# Grammar subset: `<IRI> <IRI> <IRI> .` or `<IRI> <IRI> "literal" .`
# IRIs may not contain whitespace or angle brackets; literals may not
# contain raw quotes or tabs (tab-free terms keep the vocabulary dump and
# TSV formats unambiguous).
_NT_LINE = re.compile(
    r'<([^<>\s]+)>[ \t]+<([^<>\s]+)>[ \t]+'
    r'(?:<([^<>\s]+)>|"([^"\t]*)")[ \t]*\.[ \t]*$'
)


def _lines(source: str | TextIO) -> Iterable[str]:
    # Split on \n only, so string and file inputs see identical lines.
    if isinstance(source, str):
        raw = source.split("\n")
        if raw and raw[-1] == "":
            raw.pop()
    else:
        raw = source
    return (line.rstrip("\n").rstrip("\r") for line in raw)


def parse_ntriples(source: str | TextIO) -> list[RawTriple]:
    """Parse an N-Triples subset: one statement per line, `#` comments.

    Literal objects are kept verbatim (quotes stripped) and flagged via
    ``is_literal``. Raises MalformedLineError with a 1-based line number
    for any non-blank, non-comment line outside the grammar.
    """
    triples = []
    for line_no, line in enumerate(_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _NT_LINE.fullmatch(stripped)
        if m is None:
            raise MalformedLineError(line_no, f"not a valid statement: {stripped!r}")
        s, p, o_iri, o_lit = m.groups()
        if o_iri is not None:
            triples.append(RawTriple(s, p, o_iri))
        else:
            if o_lit == "":
                raise MalformedLineError(line_no, "empty literal object")
            triples.append(RawTriple(s, p, o_lit, is_literal=True))
    return triples


def parse_tsv(source: str | TextIO) -> list[RawTriple]:
    """Parse `subject<TAB>predicate<TAB>object` lines; blank lines allowed."""
    triples = []
    for line_no, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLineError(line_no, f"expected 3 tab-separated fields, got {len(fields)}")
        if any(f == "" for f in fields):
            raise MalformedLineError(line_no, "empty field")
        triples.append(RawTriple(fields[0], fields[1], fields[2]))
    return triples


def write_tsv(triples: Iterable[RawTriple]) -> str:
    """Serialize triples to the TSV format (LF line endings)."""
    return "".join(f"{t.subject}\t{t.predicate}\t{t.object}\n" for t in triples)


def write_ntriples(triples: Iterable[RawTriple]) -> str:
    out = []
    for t in triples:
        obj = f'"{t.object}"' if t.is_literal else f"<{t.object}>"
        out.append(f"<{t.subject}> <{t.predicate}> {obj} .\n")
    return "".join(out)


def drop_literals(triples: Iterable[RawTriple]) -> tuple[list[RawTriple], int]:
    """Split off literal-object triples; returns (kept, dropped count).

    The default pipeline discards literal statements before vocabulary
    construction; pass --keep-literals on the CLI to intern them as
    opaque terms instead.
    """
    triples = list(triples)
    kept = [t for t in triples if not t.is_literal]
    return kept, len(triples) - len(kept)
