"""BM25 inverted index over a file manifest.

Scoring uses the nonnegative ln(1 + (N - df + 0.5) / (df + 0.5)) IDF variant,
so no token can subtract from a document's score, with k1=0.9 / b=0.4
defaults. Query-token contributions are summed in sorted unique-token order,
which keeps scores bit-for-bit reproducible.
"""

from __future__ import annotations

import json
import math
import os
from bisect import bisect_left
from dataclasses import dataclass, field

from .ingest import FileManifest
from .tokenization import TokenizerConfig, tokenize

INDEX_FORMAT = "bugloc-bm25"
INDEX_VERSION = 1


class EmptyCorpus(ValueError):
    """Raised when asked to index a manifest with no files."""


class UnknownDoc(KeyError):
    """Raised when a doc_id is not part of the index."""


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4


@dataclass(frozen=True)
class RankedResults:
    """Top-k search output: (path, score) pairs, best first.

    Scores are non-increasing; exact ties order lexicographically by path.
    """

    entries: tuple[tuple[str, float], ...]
    k_requested: int

    def paths(self) -> list[str]:
        return [path for path, _ in self.entries]

    def to_dict(self) -> dict:
        return {
            "entries": [[p, s] for p, s in self.entries],
            "k_requested": self.k_requested,
        }


@dataclass(frozen=True)
class Bm25Index:
    doc_count: int
    avg_doc_len: float
    postings: dict[str, list[tuple[int, int]]]  # token -> [(doc_id, tf)], by doc_id
    doc_lens: list[int]
    doc_paths: list[str]
    params: Bm25Params = field(default_factory=Bm25Params)
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)

    def idf(self, token: str) -> float:
        plist = self.postings.get(token)
        if not plist:
            return 0.0
        df = len(plist)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_index(
    manifest: FileManifest,
    config: TokenizerConfig | None = None,
    params: Bm25Params | None = None,
) -> Bm25Index:
    """Index one document per manifest file; doc ids follow manifest order."""
    if not manifest.files:
        raise EmptyCorpus(f"no files to index under {manifest.root!r}")
    cfg = config if config is not None else TokenizerConfig()
    prm = params if params is not None else Bm25Params()

    postings: dict[str, dict[int, int]] = {}
    doc_lens: list[int] = []
    doc_paths: list[str] = []
    for doc_id, source in enumerate(manifest.files):
        tokens = tokenize(source.content, cfg)
        doc_lens.append(len(tokens))
        doc_paths.append(source.relative_path)
        for token in tokens:
            tf_map = postings.setdefault(token, {})
            tf_map[doc_id] = tf_map.get(doc_id, 0) + 1

    sorted_postings = {
        token: sorted(tf_map.items()) for token, tf_map in postings.items()
    }
    n = len(doc_lens)
    return Bm25Index(
        doc_count=n,
        avg_doc_len=sum(doc_lens) / n,
        postings=sorted_postings,
        doc_lens=doc_lens,
        doc_paths=doc_paths,
        params=prm,
        tokenizer=cfg,
    )


def _norm_denominator(index: Bm25Index, tf: int, doc_len: int) -> float:
    k1, b = index.params.k1, index.params.b
    avgdl = index.avg_doc_len if index.avg_doc_len > 0 else 1.0
    return tf + k1 * (1.0 - b + b * doc_len / avgdl)


def score(index: Bm25Index, query_tokens: list[str], doc_id: int) -> float:
    """BM25 score of one document for pre-tokenized query terms.

    Each unique query token contributes
    idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl));
    tokens absent from the index or the document contribute 0.
    """
    if not 0 <= doc_id < index.doc_count:
        raise UnknownDoc(doc_id)
    k1 = index.params.k1
    total = 0.0
    for token in sorted(set(query_tokens)):
        plist = index.postings.get(token)
        if not plist:
            continue
        pos = bisect_left(plist, (doc_id,))
        if pos == len(plist) or plist[pos][0] != doc_id:
            continue
        tf = plist[pos][1]
        total += index.idf(token) * tf * (k1 + 1.0) / _norm_denominator(
            index, tf, index.doc_lens[doc_id]
        )
    return total


def search(index: Bm25Index, query: str, k: int) -> RankedResults:
    """Top-k documents for `query`; zero-score documents never appear."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = tokenize(query, index.tokenizer)
    k1 = index.params.k1
    scores: dict[int, float] = {}
    for token in sorted(set(tokens)):
        plist = index.postings.get(token)
        if not plist:
            continue
        idf = index.idf(token)
        for doc_id, tf in plist:
            contribution = idf * tf * (k1 + 1.0) / _norm_denominator(
                index, tf, index.doc_lens[doc_id]
            )
            scores[doc_id] = scores.get(doc_id, 0.0) + contribution
    ranked = sorted(
        ((index.doc_paths[doc_id], s) for doc_id, s in scores.items()),
        key=lambda item: (-item[1], item[0]),
    )
    return RankedResults(tuple(ranked[:k]), k)


# ---------------------------------------------------------------------------
# Persistence: versioned JSON lines, header record then one postings record
# per token in sorted order. See docs/index-format.md.
# ---------------------------------------------------------------------------


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def save_index(index: Bm25Index, path: str | os.PathLike) -> None:
    """Write the index as deterministic JSON lines (same index, same bytes)."""
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "doc_count": index.doc_count,
        "avg_doc_len": index.avg_doc_len,
        "doc_lens": index.doc_lens,
        "doc_paths": index.doc_paths,
        "params": {"k1": index.params.k1, "b": index.params.b},
        "tokenizer": index.tokenizer.to_dict(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps(header) + "\n")
        for token in sorted(index.postings):
            record = {"t": token, "p": [[d, tf] for d, tf in index.postings[token]]}
            fh.write(_dumps(record) + "\n")


def load_index(path: str | os.PathLike) -> Bm25Index:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != INDEX_FORMAT or header.get("version") != INDEX_VERSION:
            raise ValueError(f"not a {INDEX_FORMAT} v{INDEX_VERSION} file: {path}")
        postings: dict[str, list[tuple[int, int]]] = {}
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            postings[record["t"]] = [(int(d), int(tf)) for d, tf in record["p"]]
    return Bm25Index(
        doc_count=int(header["doc_count"]),
        avg_doc_len=float(header["avg_doc_len"]),
        postings=postings,
        doc_lens=[int(x) for x in header["doc_lens"]],
        doc_paths=list(header["doc_paths"]),
        params=Bm25Params(float(header["params"]["k1"]), float(header["params"]["b"])),
        tokenizer=TokenizerConfig.from_dict(header["tokenizer"]),
    )
