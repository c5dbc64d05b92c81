"""Chat-completion gateway with a live HTTP backend and a scripted test backend.

`complete` enforces the decoding contract used throughout: greedy decoding
(temperature 0), a fixed seed passed through on a best-effort basis, a 16k
approximate-token context budget, and a hard wall-clock timeout surfaced as
finish_reason="timeout" rather than an exception so callers can count it.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx
import yaml

from .tokenization import word_count

ROLES = ("system", "user", "assistant", "tool")

FINISH_STOP = "stop"
FINISH_LENGTH = "length"
FINISH_TIMEOUT = "timeout"
FINISH_ERROR = "error"

DEFAULT_SEED = 42
DEFAULT_CONTEXT_TOKENS = 16384
DEFAULT_TIMEOUT_SECONDS = 600


class BackendUnreachable(ConnectionError):
    """The live backend could not be reached or answered unusably."""


class ScriptExhausted(RuntimeError):
    """A strict scripted backend ran out of replies."""


class MatcherViolation(AssertionError):
    """A scripted reply's matcher substring was missing from the prompt."""


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass
class ChatRequest:
    messages: list[Message]
    temperature: float = 0.0
    seed: int = DEFAULT_SEED
    max_context_tokens: int = DEFAULT_CONTEXT_TOKENS
    timeout_seconds: int = DEFAULT_TIMEOUT_SECONDS

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0].role not in ("system", "user"):
            raise ValueError("first message must be system or user")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")

    def prompt_text(self) -> str:
        return "\n".join(m.content for m in self.messages)


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = FINISH_STOP
    latency_ms: int = 0


class Backend(Protocol):
    def send(self, request: ChatRequest) -> ChatResponse: ...


def approx_token_count(text: str) -> int:
    """Cheap model-independent token estimate: word runs."""
    return word_count(text)


def trim_to_budget(
    messages: Sequence[Message],
    max_tokens: int,
    count: Callable[[str], int] = approx_token_count,
) -> list[Message]:
    """Drop the oldest non-system messages until the estimate fits the budget.

    The system message and the final message are never dropped; tool-result
    truncation upstream should make this a rarely-needed safety valve.
    """
    kept = list(messages)
    total = sum(count(m.content) for m in kept)
    while total > max_tokens:
        for i, msg in enumerate(kept[:-1]):
            if msg.role != "system":
                total -= count(msg.content)
                del kept[i]
                break
        else:
            break
    return kept


def complete(request: ChatRequest, backend: Backend) -> ChatResponse:
    """Send `request` through `backend` under the request's timeout.

    Returns finish_reason="timeout" (empty content) when the backend does not
    answer in time; the worker is abandoned, so the caller never blocks past
    the timeout. Backend connectivity failures raise BackendUnreachable.
    """
    trimmed = trim_to_budget(request.messages, request.max_context_tokens)
    if trimmed is not request.messages:
        request = ChatRequest(
            messages=trimmed,
            temperature=request.temperature,
            seed=request.seed,
            max_context_tokens=request.max_context_tokens,
            timeout_seconds=request.timeout_seconds,
        )
    start = time.monotonic()
    box: queue.Queue = queue.Queue(maxsize=1)

    def _worker() -> None:
        try:
            box.put(("ok", backend.send(request)))
        except TimeoutError as exc:
            box.put(("timeout", exc))
        except BaseException as exc:  # re-raised on the caller thread
            box.put(("raise", exc))

    threading.Thread(target=_worker, daemon=True).start()
    try:
        kind, payload = box.get(timeout=request.timeout_seconds)
    except queue.Empty:
        kind, payload = "timeout", None
    elapsed_ms = int((time.monotonic() - start) * 1000)
    if kind == "timeout":
        return ChatResponse("", FINISH_TIMEOUT, elapsed_ms)
    if kind == "raise":
        raise payload
    response: ChatResponse = payload
    if response.finish_reason == FINISH_TIMEOUT:
        return ChatResponse("", FINISH_TIMEOUT, elapsed_ms)
    return ChatResponse(response.content, response.finish_reason, elapsed_ms)


# ---------------------------------------------------------------------------
# Scripted backend: deterministic replay for tests, demos, and fixtures.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptEntry:
    reply: str
    matcher: str | None = None
    delay_seconds: float = 0.0


def _normalize_entry(entry) -> ScriptEntry:
    if isinstance(entry, ScriptEntry):
        return entry
    if isinstance(entry, str):
        return ScriptEntry(reply=entry)
    if isinstance(entry, tuple):  # (matcher, reply)
        matcher, reply = entry
        return ScriptEntry(reply=reply, matcher=matcher)
    if isinstance(entry, dict):
        return ScriptEntry(
            reply=str(entry["reply"]),
            matcher=entry.get("matcher"),
            delay_seconds=float(entry.get("delay_seconds", 0.0)),
        )
    raise TypeError(f"cannot build a script entry from {type(entry).__name__}")


class ScriptedBackend:
    """Replays a fixed list of replies, in order.

    Optional per-entry matchers assert the outgoing prompt contains a
    substring and fail loudly when it does not. An exhausted script answers
    with a finish_reason="error" reply naming ScriptExhausted (or raises,
    when strict=True).
    """

    def __init__(self, script: Sequence, strict: bool = False):
        if not script:
            raise ValueError("script must be non-empty")
        self.entries = [_normalize_entry(e) for e in script]
        self.strict = strict
        self.calls = 0
        self._cursor = 0
        self._lock = threading.Lock()

    @property
    def remaining(self) -> int:
        return len(self.entries) - self._cursor

    def send(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls += 1
            if self._cursor >= len(self.entries):
                if self.strict:
                    raise ScriptExhausted(
                        f"script exhausted after {len(self.entries)} replies"
                    )
                return ChatResponse(
                    "ScriptExhausted: no scripted reply left", FINISH_ERROR
                )
            entry = self.entries[self._cursor]
            self._cursor += 1
        if entry.matcher is not None and entry.matcher not in request.prompt_text():
            raise MatcherViolation(
                f"scripted reply {self._cursor} expected prompt to contain "
                f"{entry.matcher!r}"
            )
        if entry.delay_seconds > 0:
            time.sleep(entry.delay_seconds)
        return ChatResponse(entry.reply, FINISH_STOP)


def load_script(path: str | Path) -> list[ScriptEntry]:
    """Load a flat reply script from a YAML or JSON file."""
    data = _load_structured(path)
    if not isinstance(data, list):
        raise ValueError(f"script file must hold a list: {path}")
    return [_normalize_entry(e) for e in data]


def load_script_book(path: str | Path) -> dict[str, list[ScriptEntry]]:
    """Load a per-task script book: {task_id or "*": [entries]}.

    Each task gets a fresh backend over its entry list ("*" is the
    fallback), which keeps batch runs deterministic under parallelism.
    """
    data = _load_structured(path)
    if isinstance(data, list):
        return {"*": [_normalize_entry(e) for e in data]}
    if isinstance(data, dict):
        return {
            str(task_id): [_normalize_entry(e) for e in entries]
            for task_id, entries in data.items()
        }
    raise ValueError(f"script file must hold a list or mapping: {path}")


def _load_structured(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text)


# ---------------------------------------------------------------------------
# Live backend: JSON-over-HTTP chat-completions shape.
# ---------------------------------------------------------------------------


class HttpChatBackend:
    """POSTs the messages array to a chat-completions style endpoint."""

    def __init__(
        self,
        url: str,
        model: str,
        api_key: str | None = None,
        extra_headers: dict[str, str] | None = None,
    ):
        self.url = url
        self.model = model
        self.api_key = api_key
        self.extra_headers = dict(extra_headers or {})

    def send(self, request: ChatRequest) -> ChatResponse:
        headers = {"Content-Type": "application/json", **self.extra_headers}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "temperature": request.temperature,
            "seed": request.seed,
        }
        try:
            response = httpx.post(
                self.url,
                json=payload,
                headers=headers,
                timeout=request.timeout_seconds,
            )
        except httpx.TimeoutException as exc:
            raise TimeoutError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"{self.url}: {exc}") from exc
        if response.status_code >= 400:
            raise BackendUnreachable(
                f"{self.url}: HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            data = response.json()
            choice = data["choices"][0]
            content = choice["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise BackendUnreachable(
                f"{self.url}: malformed chat-completions reply: {exc}"
            ) from exc
        finish = choice.get("finish_reason", FINISH_STOP)
        if finish not in (FINISH_STOP, FINISH_LENGTH):
            finish = FINISH_STOP
        return ChatResponse(content or "", finish)
