"""Remote rubric scoring of surface text structure.

Builds the grading prompt, sends it to an HTTP evaluator endpoint as a
single-message chat completion, parses the structured reply, and averages the
three aspect scores.  Parse failures are retried; after exhausting retries
the result degrades to a flagged zero rather than failing the batch.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from typing import Callable

import httpx

from .errors import (
    EmptyEssay,
    EvaluationParseError,
    MalformedObject,
    MissingKey,
    MissingTerminator,
    NonInteger,
    OutOfRange,
    TransportError,
)

END_MARKER = "<EOE>"
SCORE_KEYS = ("flow", "organization", "balance")
SCORE_MIN, SCORE_MAX = 0, 5

# Maximum characters allowed between the score object and the end marker.
_MARKER_WINDOW = 64

RUBRIC = """You will act as an English instructor and evaluate the quality of an essay or story written by a student in response to given instructions. When grading, consider the following discourse aspects of the text.
- Logical Flow and Structure (flow): Assess the logical progression of ideas and the overall organization of the text, ensuring that it is easy to follow and well-structured.
- Hierarchical Organization (organization): Examine the organization of ideas in a hierarchical manner, from general to specific, ensuring that each section supports the main argument or narrative.
- Balance and Emphasis (balance): Ensure that important ideas are appropriately emphasized and that there is a balance in the coverage of different points or sections of the text.

For each aspect, you need to assign an integer score from 0 (worst quality) to 5 (best quality).
When assigning the score, carefully consider which specific parts of the text relate to each aspect.

Assign lower scores when:
- The text is poorly structured and do not conform to the standard of an English essay or a story.
- The text contains a lot of non-sensical words such as special tokens or programming code.
- The text contains a lot of non-English words.
- The text does not fully answer the writing instruction with full content, and therefore, is unfinished.

Your evaluation output should conform to the following JSON format:
{
  "flow": int,
  "organization": int,
  "balance": int
}

Write <EOE> after outputting the JSON result."""

INSTRUCTION_HEADER = "The writing instruction is:"
ESSAY_HEADER = "The essay is:"


@dataclass(frozen=True, slots=True)
class EvaluatorScores:
    flow: int
    organization: int
    balance: int

    def mean(self) -> float:
        return (self.flow + self.organization + self.balance) / 3

    def render(self) -> str:
        """Reply text a well-behaved evaluator would produce for these scores."""
        body = json.dumps(
            {"flow": self.flow, "organization": self.organization, "balance": self.balance}
        )
        return f"{body}\n{END_MARKER}"


@dataclass(frozen=True, slots=True)
class SurfaceScore:
    value: float
    raw: EvaluatorScores | None
    attempts: int
    degraded: bool


@dataclass(frozen=True)
class EvaluatorClientConfig:
    endpoint: str
    model: str = "evaluator"
    timeout: float = 60.0
    max_retries: int = 2
    max_in_flight: int = 8
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


def build_prompt(instruction: str, essay: str) -> str:
    """Rubric, then the writing instruction, then the essay; byte-stable."""
    if not essay.strip():
        raise EmptyEssay("cannot score an empty essay")
    return (
        f"{RUBRIC}\n\n"
        f"{INSTRUCTION_HEADER}\n{instruction}\n\n"
        f"{ESSAY_HEADER}\n{essay}"
    )


_OBJECT_START_RE = re.compile(r"\{")


def parse_evaluation(raw: str) -> EvaluatorScores:
    """Extract the first score object from an evaluator reply.

    Leading prose is tolerated and unknown keys are ignored; the end marker
    must follow the object within a short window.
    """
    decoder = json.JSONDecoder()
    found_object = False
    for match in _OBJECT_START_RE.finditer(raw):
        try:
            obj, end = decoder.raw_decode(raw, match.start())
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        found_object = True
        if not all(key in obj for key in SCORE_KEYS):
            continue
        tail = raw[end : end + _MARKER_WINDOW + len(END_MARKER)]
        if END_MARKER not in tail:
            raise MissingTerminator(
                f"no {END_MARKER} within {_MARKER_WINDOW} characters after the score object"
            )
        values = {}
        for key in SCORE_KEYS:
            value = obj[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise NonInteger(f"aspect {key!r} must be an integer, got {value!r}")
            if not (SCORE_MIN <= value <= SCORE_MAX):
                raise OutOfRange(
                    f"aspect {key!r} = {value} outside [{SCORE_MIN}, {SCORE_MAX}]"
                )
            values[key] = value
        return EvaluatorScores(**values)
    if found_object:
        raise MissingKey(f"no object with keys {SCORE_KEYS} in reply")
    raise MalformedObject("no well-formed JSON object in reply")


Transport = Callable[[dict], str]


class HttpTransport:
    """POSTs a chat-style completion request and returns the reply text."""

    def __init__(self, config: EvaluatorClientConfig):
        self._config = config
        self._client = httpx.Client(timeout=config.timeout)

    def __call__(self, payload: dict) -> str:
        try:
            response = self._client.post(self._config.endpoint, json=payload)
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise TransportError(f"evaluator request failed: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise TransportError(f"evaluator reply is not JSON: {exc}") from exc
        return _extract_text(body)


def _extract_text(body) -> str:
    if isinstance(body, dict):
        if isinstance(body.get("text"), str):
            return body["text"]
        # OpenAI-style chat completion fallback
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                message = first.get("message")
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
    raise TransportError("evaluator reply carries no text field")


class ScriptedTransport:
    """Deterministic in-process stand-in for the remote evaluator.

    ``replies`` are returned in order (the last one repeats); callables are
    invoked with the request payload.  Tracks the peak number of concurrent
    calls so tests can assert the in-flight cap.
    """

    def __init__(self, replies: list[str | Exception | Callable[[dict], str]]):
        if not replies:
            raise ValueError("need at least one scripted reply")
        self._replies = list(replies)
        self._calls = 0
        self._lock = threading.Lock()
        self._active = 0
        self.peak_concurrency = 0
        self.requests: list[dict] = []

    def __call__(self, payload: dict) -> str:
        with self._lock:
            index = min(self._calls, len(self._replies) - 1)
            self._calls += 1
            self._active += 1
            self.peak_concurrency = max(self.peak_concurrency, self._active)
            self.requests.append(payload)
        try:
            reply = self._replies[index]
            if isinstance(reply, Exception):
                raise reply
            if callable(reply):
                return reply(payload)
            return reply
        finally:
            with self._lock:
                self._active -= 1

    @property
    def call_count(self) -> int:
        return self._calls


class EvaluatorClient:
    """Shareable client enforcing the configured in-flight cap."""

    def __init__(self, config: EvaluatorClientConfig, transport: Transport | None = None):
        self.config = config
        self._transport = transport if transport is not None else HttpTransport(config)
        self._gate = threading.BoundedSemaphore(config.max_in_flight)

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        with self._gate:
            return self._transport(payload)


def evaluate(instruction: str, essay: str, client: EvaluatorClient) -> SurfaceScore:
    """Score one essay; degrade to a flagged zero when parsing keeps failing."""
    prompt = build_prompt(instruction, essay)
    max_attempts = 1 + client.config.max_retries
    attempts = 0
    transport_failure: TransportError | None = None
    while attempts < max_attempts:
        attempts += 1
        try:
            reply = client.complete(prompt)
        except TransportError as exc:
            transport_failure = exc
            continue
        transport_failure = None
        try:
            scores = parse_evaluation(reply)
        except EvaluationParseError:
            continue
        return SurfaceScore(
            value=scores.mean(), raw=scores, attempts=attempts, degraded=False
        )
    if transport_failure is not None:
        raise TransportError(
            f"evaluator unreachable after {attempts} attempts: {transport_failure}"
        )
    return SurfaceScore(value=0.0, raw=None, attempts=attempts, degraded=True)
