"""Bug-report field extraction schema and retrieval-query construction.

A bug report is distilled by a model into seven fixed fields (a prose
explanation plus code signals: paths, filenames, identifiers, a code
snippet, a stack trace, an error message). Queries concatenate a configured
group of those fields; five standard groups cover the ablation space from
"everything" down to "identifiers + snippet".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple

# Schema order is fixed; queries always render member fields in this order.
SCHEMA_FIELDS = (
    "explanation",
    "paths",
    "filenames",
    "identifiers",
    "code_snippet",
    "stacktrace",
    "error_message",
)
LIST_FIELDS = frozenset({"paths", "filenames", "identifiers"})

# Wire keys of the JSON object models emit (and the cache files store).
FIELD_JSON_KEYS = {
    "explanation": "explanation",
    "paths": "path",
    "filenames": "filename",
    "identifiers": "identifiers",
    "code_snippet": "code_snippet",
    "stacktrace": "stacktrace",
    "error_message": "error_message",
}
_JSON_KEY_TO_FIELD = {v: k for k, v in FIELD_JSON_KEYS.items()}


class FormatError(ValueError):
    """Model output held no usable JSON object, or a field type is hopeless."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class ExtractedFields:
    """The seven extraction fields; every field present, empties allowed."""

    explanation: str = ""
    paths: tuple[str, ...] = ()
    filenames: tuple[str, ...] = ()
    identifiers: tuple[str, ...] = ()
    code_snippet: str = ""
    stacktrace: str = ""
    error_message: str = ""

    def __post_init__(self) -> None:
        for name in LIST_FIELDS:
            values = tuple(v for v in getattr(self, name) if v)
            object.__setattr__(self, name, values)

    def is_empty(self) -> bool:
        return all(not getattr(self, name) for name in SCHEMA_FIELDS)

    def to_json_dict(self) -> dict:
        out: dict[str, Any] = {}
        for name in SCHEMA_FIELDS:
            value = getattr(self, name)
            out[FIELD_JSON_KEYS[name]] = list(value) if name in LIST_FIELDS else value
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExtractedFields":
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            name = _JSON_KEY_TO_FIELD.get(key)
            if name is None:
                continue  # unknown keys are ignored
            if name in LIST_FIELDS:
                kwargs[name] = _coerce_list(value, key)
            else:
                kwargs[name] = _coerce_text(value, key)
        return cls(**kwargs)


class Group(str, Enum):
    """The five query-field groups used in the retrieval ablation."""

    G1_FULL = "G1"
    G2_EXPLANATION = "G2"
    G3_ALL_CODE = "G3"
    G4_ID_SNIPPETS = "G4"
    G5_EXP_ID_SNIPPETS = "G5"


_GROUP_MEMBERS: dict[Group, tuple[str, ...]] = {
    Group.G1_FULL: SCHEMA_FIELDS,
    Group.G2_EXPLANATION: ("explanation",),
    Group.G3_ALL_CODE: ("identifiers", "code_snippet", "stacktrace", "error_message"),
    Group.G4_ID_SNIPPETS: ("identifiers", "code_snippet"),
    Group.G5_EXP_ID_SNIPPETS: ("explanation", "identifiers", "code_snippet"),
}


@dataclass(frozen=True)
class FieldGroup:
    id: Group
    members: tuple[str, ...]


def field_group(group_id: Group | str) -> FieldGroup:
    """Fixed membership for one of the five ablation groups."""
    gid = Group(group_id)
    return FieldGroup(gid, _GROUP_MEMBERS[gid])


class ExtractionPrompt(NamedTuple):
    prompt: str
    schema: dict


# JSON Schema for the extraction reply; string fields may arrive as single
# strings or arrays (parse_extraction coerces either way).
EXTRACTION_SCHEMA: dict = {
    "type": "object",
    "properties": {
        "explanation": {"type": "string"},
        "path": {"type": "array", "items": {"type": "string"}},
        "filename": {"type": "array", "items": {"type": "string"}},
        "identifiers": {"type": "array", "items": {"type": "string"}},
        "code_snippet": {"type": "string"},
        "stacktrace": {"type": "string"},
        "error_message": {"type": "string"},
    },
    "required": [
        "explanation",
        "path",
        "filename",
        "identifiers",
        "code_snippet",
        "stacktrace",
        "error_message",
    ],
}

_EXTRACTION_TEMPLATE = """\
Read the bug report below and extract its key content as a single JSON object
with exactly these keys:

- "explanation": one short paragraph summarizing the bug in your own words
- "path": directory or file paths mentioned in the report (array of strings)
- "filename": file names mentioned in the report (array of strings)
- "identifiers": class, method, function, or variable names mentioned
  (array of strings)
- "code_snippet": any code fragment quoted in the report (string)
- "stacktrace": any stack trace quoted in the report (string)
- "error_message": any error message quoted in the report (string)

Use an empty string or an empty array for anything the report does not
contain. Reply with the JSON object only, no other text.

Bug report:
{description}
"""


def extraction_prompt(bug_description: str) -> ExtractionPrompt:
    """Prompt asking a model for the seven-field JSON, plus its schema."""
    if not bug_description:
        raise ValueError("bug_description must be non-empty")
    return ExtractionPrompt(
        _EXTRACTION_TEMPLATE.format(description=bug_description),
        EXTRACTION_SCHEMA,
    )


_decoder = json.JSONDecoder()


def extract_first_json_value(text: str, kinds: tuple[type, ...] = (dict,)) -> Any:
    """First JSON value of the wanted kind(s) embedded anywhere in `text`.

    Tolerates surrounding prose and code fences; returns None when nothing
    parses. When several objects appear, the first one wins.
    """
    openers = {dict: "{", list: "["}
    starts = "".join(openers[k] for k in kinds if k in openers)
    for pos, ch in enumerate(text):
        if ch not in starts:
            continue
        try:
            value, _ = _decoder.raw_decode(text, pos)
        except ValueError:
            continue
        if isinstance(value, kinds):
            return value
    return None


def _coerce_text(value: Any, key: str) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, list):
        parts = [_coerce_text(item, key) for item in value]
        if any(isinstance(item, (dict, list)) for item in value):
            raise FormatError(f"field {key!r} has an uncoercible nested type")
        return " ".join(p for p in parts if p)
    raise FormatError(f"field {key!r} has uncoercible type {type(value).__name__}")


def _coerce_list(value: Any, key: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (str, int, float, bool)):
        text = str(value).strip()
        return (text,) if text else ()
    if isinstance(value, list):
        items: list[str] = []
        for item in value:
            if isinstance(item, (dict, list)):
                raise FormatError(f"field {key!r} has an uncoercible list item")
            if item is None:
                continue
            text = str(item).strip()
            if text:
                items.append(text)
        return tuple(items)
    raise FormatError(f"field {key!r} has uncoercible type {type(value).__name__}")


def parse_extraction(raw: str) -> ExtractedFields:
    """Parse a model reply into ExtractedFields.

    Accepts prose or code fences around the JSON, fills missing keys with
    empties, and coerces scalar-vs-list mismatches (a scalar becomes a
    singleton list). Raises FormatError when no JSON object can be found or
    a field value cannot be coerced.
    """
    obj = extract_first_json_value(raw, (dict,))
    if obj is None:
        raise FormatError("no JSON object found in model output")
    return ExtractedFields.from_json_dict(obj)


_DQUOTE_RE = re.compile(r'"')


def _render_field(fields: ExtractedFields, name: str) -> str:
    value = getattr(fields, name)
    if name in LIST_FIELDS:
        items = [_DQUOTE_RE.sub("", v).strip() for v in value]
        items = [v for v in items if v]
        return "[" + ", ".join(items) + "]" if items else ""
    return _DQUOTE_RE.sub("", value).strip()


def build_query(fields: ExtractedFields, group: FieldGroup | Group | str) -> str:
    """Concatenate the group's non-empty field values into one query string.

    List fields render as "[a, b]". Rendered values are comma-joined except
    after the explanation, which reads as prose and is followed by a bare
    space. Field names and double quotes never reach the output.
    """
    if not isinstance(group, FieldGroup):
        group = field_group(group)
    pieces = [
        (name, _render_field(fields, name))
        for name in group.members
    ]
    pieces = [(name, text) for name, text in pieces if text]
    if not pieces:
        return ""
    out = pieces[0][1]
    for (prev_name, _), (_, text) in zip(pieces, pieces[1:]):
        out += (" " if prev_name == "explanation" else ", ") + text
    return out


def baseline_query(bug_description: str) -> str:
    """The unmodified bug description, as-is."""
    return bug_description
