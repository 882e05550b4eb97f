"""Element classification: prompts, the deterministic mock, and the LLM path.

Each capture event gets an element type, a description capped at 30 words,
and up to three keywords. The mock classifier derives all three from the
event's text payload with fixed rules so the whole pipeline runs offline
and reproducibly; the LLM classifier sends the screenshot plus the
checked-in prompt to a chat-completions endpoint and parses the structured
reply, enforcing the same caps by truncation.
"""

from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass
from importlib import resources
from string import Template
from typing import Protocol

import httpx

from .capture import CaptureEvent
from .errors import (
    EmptyArgument,
    LlmUnavailable,
    UnparseableReply,
    ValidationFailed,
)
from .model import (
    MAX_DESCRIPTION_WORDS,
    MAX_KEYWORDS,
    Clue,
    ElementType,
    MediaKind,
    Tag,
    TagKind,
    normalize_tag,
    validate_clue,
)

logger = logging.getLogger(__name__)

ENVIRONMENT_MARKERS = ("ENTER", "CHALLENGE", "LISTEN")

_WORD_RE = re.compile(r"[A-Za-z0-9']+")


def _resource_text(name: str) -> str:
    return resources.files("cluecart.resources").joinpath(name).read_text(
        encoding="utf-8"
    )


def render_classification_prompt() -> str:
    """The categorization/description/keywords prompt, verbatim from the fixture."""
    return _resource_text("classify.txt")


def render_lookup_prompt(keyword: str, game: str) -> str:
    """Real-world-context prompt with the keyword and game substituted in."""
    if not keyword.strip():
        raise EmptyArgument("keyword must be non-empty")
    if not game.strip():
        raise EmptyArgument("game must be non-empty")
    return Template(_resource_text("lookup.txt")).substitute(keyword=keyword, game=game)


def load_stopwords() -> frozenset[str]:
    return frozenset(
        line.strip() for line in _resource_text("stopwords.txt").splitlines() if line.strip()
    )


_STOPWORDS = load_stopwords()


@dataclass
class ElementClassification:
    element: ElementType
    description: str
    keywords: list[str]


class Classifier(Protocol):
    def classify(self, event: CaptureEvent) -> ElementClassification: ...

    def lookup(self, keyword: str, game: str) -> str: ...


def truncate_words(text: str, limit: int) -> str:
    words = text.split()
    if len(words) <= limit:
        return " ".join(words)
    return " ".join(words[:limit])


def extract_keywords(text: str, limit: int = MAX_KEYWORDS) -> list[str]:
    """Up to `limit` most frequent non-stopword tokens, ties by first occurrence."""
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    for pos, match in enumerate(_WORD_RE.finditer(text)):
        token = match.group().lower()
        if token in _STOPWORDS:
            continue
        counts[token] = counts.get(token, 0) + 1
        first_seen.setdefault(token, pos)
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return ranked[:limit]


def mock_classify(event: CaptureEvent) -> ElementClassification:
    """Rule-based stand-in for the vision LLM; pure function of the event.

    Rule order: recordings are cut-scenes; a speaker means dialogue;
    inventory text or flag means artifact; the all-caps environment markers
    mean environment; any other text is a text clue; otherwise a detected
    character makes it a related-character clue, and the fallback is
    environment.
    """
    ocr = event.payload.ocr_text
    if event.media.kind is MediaKind.RECORDING:
        element = ElementType.CUT_SCENE
    elif event.payload.speaker:
        element = ElementType.DIALOGUE
    elif "inventory" in (f.lower() for f in event.payload.flags) or "inventory" in ocr.lower():
        element = ElementType.ARTIFACT
    elif any(marker in ocr for marker in ENVIRONMENT_MARKERS):
        element = ElementType.ENVIRONMENT
    elif ocr.strip():
        element = ElementType.TEXT
    elif event.detected_characters:
        element = ElementType.RELATED_CHARACTER
    else:
        element = ElementType.ENVIRONMENT

    label = element.label + ":"
    budget = MAX_DESCRIPTION_WORDS - len(label.split())
    body = truncate_words(ocr, budget)
    description = f"{label} {body}" if body else label
    return ElementClassification(
        element=element,
        description=description,
        keywords=extract_keywords(ocr),
    )


class MockClassifier:
    """Deterministic classifier used in mock mode and offline tests."""

    def classify(self, event: CaptureEvent) -> ElementClassification:
        return mock_classify(event)

    def lookup(self, keyword: str, game: str) -> str:
        render_lookup_prompt(keyword, game)  # same argument checks as the LLM path
        return f"MOCK({keyword}|{game})"


# -- LLM path -----------------------------------------------------------------

class LlmClient:
    """Minimal chat-completions client with a bounded in-flight request cap."""

    def __init__(
        self,
        endpoint: str,
        api_key: str,
        max_inflight: int = 4,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self._sem = threading.Semaphore(max_inflight)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, prompt: str, image_path: str | None = None) -> str:
        content: list[dict] = [{"type": "text", "text": prompt}]
        if image_path is not None:
            content.append({"type": "image_url", "image_url": {"url": image_path}})
        body = {"messages": [{"role": "user", "content": content}]}
        headers = {"Authorization": f"Bearer {self.api_key}"}
        with self._sem:
            try:
                resp = self._client.post(self.endpoint, json=body, headers=headers)
                resp.raise_for_status()
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                raise LlmUnavailable(f"LLM request failed: {exc}") from exc

    def close(self) -> None:
        self._client.close()


_REPLY_LABELS = {
    "text-only": ElementType.TEXT,
    "dialogue": ElementType.DIALOGUE,
    "artifact": ElementType.ARTIFACT,
    "environment": ElementType.ENVIRONMENT,
}

_FIELD_RE = re.compile(
    r"^\s*(?:[-*\s]*)\**\s*(element|description|keywords)\s*:?\**\s*:?\s*(.*)$",
    re.IGNORECASE,
)


def parse_classification_reply(reply: str) -> ElementClassification:
    """Parse the Element/Description/Keywords reply structure.

    Tolerates markdown bold markers and bullet prefixes; raises
    UnparseableReply when any of the three fields is missing or the element
    label is not one of the four the prompt defines.
    """
    fields: dict[str, str] = {}
    current: str | None = None
    for line in reply.splitlines():
        m = _FIELD_RE.match(line)
        if m:
            current = m.group(1).lower()
            fields[current] = m.group(2).strip()
        elif current == "description" and line.strip():
            fields[current] += " " + line.strip()
    missing = {"element", "description", "keywords"} - set(fields)
    if missing:
        raise UnparseableReply(f"missing fields: {sorted(missing)}")
    raw_label = fields["element"].strip().strip('"`\'.,').lower()
    element = None
    for label, etype in _REPLY_LABELS.items():
        if label in raw_label:
            element = etype
            break
    if element is None:
        raise UnparseableReply(f"unknown element label: {fields['element']!r}")
    keywords = [k.strip() for k in re.split(r"[,;]", fields["keywords"]) if k.strip()]
    return ElementClassification(
        element=element, description=fields["description"], keywords=keywords
    )


def enforce_constraints(cls: ElementClassification) -> ElementClassification:
    """Cap description and keywords by truncation, logging when trimming."""
    description = cls.description
    if len(description.split()) > MAX_DESCRIPTION_WORDS:
        logger.warning(
            "description of %d words truncated to %d",
            len(description.split()),
            MAX_DESCRIPTION_WORDS,
        )
        description = truncate_words(description, MAX_DESCRIPTION_WORDS)
    keywords: list[str] = []
    seen: set[str] = set()
    for kw in cls.keywords:
        kw = kw.strip()
        if not kw or kw.casefold() in seen:
            continue
        seen.add(kw.casefold())
        keywords.append(kw[:64])
        if len(keywords) == MAX_KEYWORDS:
            break
    if len(cls.keywords) > MAX_KEYWORDS:
        logger.warning("keywords trimmed from %d to %d", len(cls.keywords), MAX_KEYWORDS)
    return ElementClassification(cls.element, description, keywords)


def llm_classify(event: CaptureEvent, client: LlmClient) -> ElementClassification:
    """Classify via the LLM endpoint; one retry on an unparseable reply."""
    prompt = render_classification_prompt()
    if event.media.kind is MediaKind.RECORDING:
        # The prompt covers screenshot categories only; recordings are
        # non-interactive sequences and resolve directly to cut-scenes.
        return enforce_constraints(mock_classify(event))
    last_error: UnparseableReply | None = None
    for _ in range(2):
        reply = client.complete(prompt, image_path=event.media.path)
        try:
            return enforce_constraints(parse_classification_reply(reply))
        except UnparseableReply as exc:
            last_error = exc
    raise last_error  # type: ignore[misc]


class LlmClassifier:
    """Classifier backed by a remote LLM endpoint."""

    def __init__(self, client: LlmClient):
        self.client = client

    def classify(self, event: CaptureEvent) -> ElementClassification:
        return llm_classify(event, self.client)

    def lookup(self, keyword: str, game: str) -> str:
        return self.client.complete(render_lookup_prompt(keyword, game))


def build_clue(event: CaptureEvent, cls: ElementClassification) -> Clue:
    """Combine a capture event and its classification into a validated clue.

    Machine tags come first: one character tag per detected character, one
    location tag per detected location, then the achievement tag when the
    capture was achievement-triggered.
    """
    tags: list[Tag] = []
    for name in event.detected_characters:
        tags.append(normalize_tag(TagKind.CHARACTER, name))
    for name in event.detected_locations:
        tags.append(normalize_tag(TagKind.LOCATION, name))
    if event.achievement is not None:
        tags.append(normalize_tag(TagKind.ACHIEVEMENT, event.achievement))
    clue = Clue(
        id=event.id,
        media=event.media,
        timestamp_ms=event.timestamp_ms,
        tags=tags,
        element=cls.element,
        description=cls.description,
        keywords=list(cls.keywords),
    )
    report = validate_clue(clue)
    if not report.passed:
        raise ValidationFailed(report.violations)
    return clue
