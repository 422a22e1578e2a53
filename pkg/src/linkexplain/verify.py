"""Retrieval-based link verification: a tf-idf inverted index with a strict
co-mention tier, returning snippet passages a steward can read."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


class VerifyError(Exception):
    pass


class DuplicateDocId(VerifyError):
    pass


class EmptyCorpus(VerifyError):
    pass


class EmptyIndex(VerifyError):
    pass


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str


def tokenize(text: str) -> List[str]:
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def tokenize_with_spans(text: str) -> List[Tuple[str, int, int]]:
    """(lowercased token, start char, end char) triples; offsets index the raw text."""
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


@dataclass
class CorpusIndex:
    postings: Dict[str, List[Tuple[str, int]]]  # term -> [(doc_id, tf)] sorted by doc_id
    doc_lengths: Dict[str, int]
    documents: Dict[str, Document]

    @property
    def doc_count(self) -> int:
        return len(self.documents)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        if df == 0:
            return 0.0
        return math.log(1.0 + self.doc_count / df)


@dataclass
class Passage:
    doc_id: str
    snippet: str
    score: float
    u_found: bool
    v_found: bool

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "snippet": self.snippet,
            "score": self.score,
            "mentions": {"u_found": self.u_found, "v_found": self.v_found},
        }


@dataclass
class VerificationResult:
    u: str
    v: str
    passages: List[Passage]
    verdict_hint: str  # both_mentioned | one_mentioned | none

    def to_record(self) -> dict:
        return {
            "link": {"u": self.u, "v": self.v},
            "passages": [p.to_record() for p in self.passages],
            "verdict_hint": self.verdict_hint,
        }


def index_corpus(docs: Sequence[Document]) -> CorpusIndex:
    """Build the inverted index; tokens are lowercase alphanumeric runs."""
    if not docs:
        raise EmptyCorpus("no documents")
    documents: Dict[str, Document] = {}
    for doc in docs:
        if doc.doc_id in documents:
            raise DuplicateDocId(doc.doc_id)
        documents[doc.doc_id] = doc
    postings: Dict[str, List[Tuple[str, int]]] = {}
    doc_lengths: Dict[str, int] = {}
    for doc_id in sorted(documents):
        tokens = tokenize(documents[doc_id].title + " " + documents[doc_id].body)
        doc_lengths[doc_id] = len(tokens)
        tfs: Dict[str, int] = {}
        for token in tokens:
            tfs[token] = tfs.get(token, 0) + 1
        for term, tf in tfs.items():
            postings.setdefault(term, []).append((doc_id, tf))
    for plist in postings.values():
        plist.sort(key=lambda entry: entry[0])
    return CorpusIndex(postings=postings, doc_lengths=doc_lengths, documents=documents)


def _mentions(doc_tokens: set, name_tokens: List[str]) -> bool:
    # a "mention" requires every token of the name to appear in the document
    return bool(name_tokens) and all(t in doc_tokens for t in name_tokens)


def _snippet(doc: Document, u_tokens: List[str], v_tokens: List[str], window: int = 15) -> str:
    spans = tokenize_with_spans(doc.body)
    if not spans:
        return doc.body[:120]
    tokens = [t for t, _, _ in spans]
    first_u = next((i for i, t in enumerate(tokens) if t in u_tokens), None)
    first_v = next((i for i, t in enumerate(tokens) if t in v_tokens), None)
    hits = [i for i in (first_u, first_v) if i is not None]
    center = (min(hits) + max(hits)) // 2 if hits else 0
    lo = max(0, center - window)
    hi = min(len(spans) - 1, center + window)
    return doc.body[spans[lo][1] : spans[hi][2]]


def score_document(
    index: CorpusIndex, doc_id: str, query_terms: Sequence[str]
) -> float:
    """Length-normalized tf-idf over the query terms, no tier bonus."""
    length = index.doc_lengths[doc_id]
    if length == 0:
        return 0.0
    score = 0.0
    for term in query_terms:
        for posting_doc, tf in index.postings.get(term, ()):
            if posting_doc == doc_id:
                score += (tf / length) * index.idf(term)
                break
    return score


def verify_link(
    index: CorpusIndex, name_u: str, name_v: str, top_k: int = 5
) -> VerificationResult:
    """Rank documents for the pair of names; co-mention documents always
    outrank single-mention ones via a tier bonus that exceeds any base score."""
    if not index.documents:
        raise EmptyIndex("index has no documents")
    if not name_u or not name_v:
        raise VerifyError("names must be non-empty")
    u_tokens = tokenize(name_u)
    v_tokens = tokenize(name_v)
    query_terms = u_tokens + v_tokens
    # the base score is bounded by sum(idf) since tf/len <= 1
    tier_bonus = 1.0 + sum(index.idf(t) for t in set(query_terms))

    scored: List[Passage] = []
    for doc_id in sorted(index.documents):
        doc = index.documents[doc_id]
        doc_tokens = set(tokenize(doc.title + " " + doc.body))
        u_found = _mentions(doc_tokens, u_tokens)
        v_found = _mentions(doc_tokens, v_tokens)
        if not u_found and not v_found:
            continue
        score = score_document(index, doc_id, query_terms)
        if u_found and v_found:
            score += tier_bonus
        scored.append(
            Passage(
                doc_id=doc_id,
                snippet=_snippet(doc, u_tokens, v_tokens),
                score=score,
                u_found=u_found,
                v_found=v_found,
            )
        )
    scored.sort(key=lambda p: (-p.score, p.doc_id))
    passages = scored[:top_k]
    if any(p.u_found and p.v_found for p in passages):
        hint = "both_mentioned"
    elif passages:
        hint = "one_mentioned"
    else:
        hint = "none"
    return VerificationResult(u=name_u, v=name_v, passages=passages, verdict_hint=hint)
