"""Code-aware tokenization shared by the index, the query builder, and file views.

The pipeline is: extract word runs (letters, digits, underscore), optionally
split each word at snake_case / camelCase boundaries, optionally re-emit the
whole lowered word as a compound token, then lowercase / stopword / length
filter. The same configuration must be applied at index time and query time,
so the config is stored alongside the index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Classic minimal English stopword list (the Lucene StandardAnalyzer set).
# Deliberately small: aggressive lists also swallow code words such as
# "do", "out", or "get" that carry signal in identifiers.
DEFAULT_STOPWORDS: frozenset[str] = frozenset(
    """
    a an and are as at be but by for if in into is it no not of on or such
    that the their then there these they this to was will with
    """.split()
)

_WORD_RE = re.compile(r"[A-Za-z0-9_]+")

# Boundaries inside an identifier chunk: lower/digit followed by upper
# (getValue -> get|Value), or an acronym run followed by a TitleCase word
# (HTTPServer -> HTTP|Server).
_CAMEL_BOUNDARY_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer settings, applied identically to documents and queries."""

    lowercase: bool = True
    split_identifiers: bool = True
    emit_compound: bool = True
    min_token_len: int = 1
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    stem: bool = False

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "split_identifiers": self.split_identifiers,
            "emit_compound": self.emit_compound,
            "min_token_len": self.min_token_len,
            "stopwords": sorted(self.stopwords),
            "stem": self.stem,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TokenizerConfig":
        return cls(
            lowercase=bool(data.get("lowercase", True)),
            split_identifiers=bool(data.get("split_identifiers", True)),
            emit_compound=bool(data.get("emit_compound", True)),
            min_token_len=int(data.get("min_token_len", 1)),
            stopwords=frozenset(data.get("stopwords", DEFAULT_STOPWORDS)),
            stem=bool(data.get("stem", False)),
        )


def split_identifier(word: str) -> list[str]:
    """Split one word at underscores and camelCase boundaries.

    >>> split_identifier("getRequirement")
    ['get', 'Requirement']
    >>> split_identifier("do_clean")
    ['do', 'clean']
    """
    parts: list[str] = []
    for chunk in word.split("_"):
        if chunk:
            parts.extend(p for p in _CAMEL_BOUNDARY_RE.split(chunk) if p)
    return parts


def word_spans(text: str) -> list[tuple[int, int]]:
    """(start, end) spans of the word runs in `text`, in order.

    This is the word-segmentation stage of the tokenizer; file views count
    and cut on these spans so the original surrounding text survives.
    """
    return [m.span() for m in _WORD_RE.finditer(text)]


def word_count(text: str) -> int:
    return sum(1 for _ in _WORD_RE.finditer(text))


def tokenize(text: str, config: TokenizerConfig | None = None) -> list[str]:
    """Tokenize `text` under `config` (defaults used when omitted).

    Emits, per word run: its identifier parts (when splitting is on), then
    the whole lowered word as a compound token when it actually split.
    Stopword and length filters apply to every emitted token.
    """
    cfg = config if config is not None else TokenizerConfig()
    out: list[str] = []
    for word in _WORD_RE.findall(text):
        parts = split_identifier(word) if cfg.split_identifiers else [word]
        emitted = list(parts)
        if cfg.emit_compound and len(parts) > 1:
            emitted.append(word)
        for token in emitted:
            if cfg.lowercase:
                token = token.lower()
            if len(token) < cfg.min_token_len:
                continue
            if token.lower() in cfg.stopwords:
                continue
            if cfg.stem and token.isalpha():
                token = porter_stem(token)
            out.append(token)
    return out


# ---------------------------------------------------------------------------
# Porter stemmer (off by default; enabled via TokenizerConfig.stem for
# ablations). Standard 1980 algorithm, operating on lowercase ASCII words.
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count VC sequences: [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        vowel = not _is_consonant(stem, i)
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
    ):
        return word[-1] not in "wxy"
    return False


def _replace_suffix(word: str, rules: list[tuple[str, str, int]]) -> str:
    """Apply the first matching (suffix, replacement, min_measure) rule."""
    for suffix, repl, min_m in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_m:
                return stem + repl
            return word
    return word


_STEP2_RULES = [
    ("ational", "ate", 0), ("tional", "tion", 0), ("enci", "ence", 0),
    ("anci", "ance", 0), ("izer", "ize", 0), ("abli", "able", 0),
    ("alli", "al", 0), ("entli", "ent", 0), ("eli", "e", 0),
    ("ousli", "ous", 0), ("ization", "ize", 0), ("ation", "ate", 0),
    ("ator", "ate", 0), ("alism", "al", 0), ("iveness", "ive", 0),
    ("fulness", "ful", 0), ("ousness", "ous", 0), ("aliti", "al", 0),
    ("iviti", "ive", 0), ("biliti", "ble", 0),
]

_STEP3_RULES = [
    ("icate", "ic", 0), ("ative", "", 0), ("alize", "al", 0),
    ("iciti", "ic", 0), ("ical", "ic", 0), ("ful", "", 0), ("ness", "", 0),
]

_STEP4_SUFFIXES = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def porter_stem(word: str) -> str:
    """Porter-stem a lowercase word; words of length <= 2 pass through."""
    if len(word) <= 2:
        return word

    # Step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif not word.endswith("ss") and word.endswith("s"):
        word = word[:-1]

    # Step 1b
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        fired = False
        for suffix in ("ed", "ing"):
            if word.endswith(suffix) and _has_vowel(word[: -len(suffix)]):
                word = word[: -len(suffix)]
                fired = True
                break
        if fired:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # Steps 2 and 3
    word = _replace_suffix(word, _STEP2_RULES)
    word = _replace_suffix(word, _STEP3_RULES)

    # Step 4
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    continue
                word = stem
            break

    # Step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word
