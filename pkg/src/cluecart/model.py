"""Domain types for clues and the two-level narrative taxonomy.

Level one (TagKind) groups clues the way creators file them: by character,
location, or achievement, plus user-created custom tags. Level two
(ElementType) is the in-game attribute of the captured clue itself.

All types here are plain values: safe to copy, hash (where frozen), and
share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyLabel, LabelTooLong

MAX_DESCRIPTION_WORDS = 30
MAX_KEYWORDS = 3
MAX_LABEL_CHARS = 64

_WS = re.compile(r"\s+")


class TagKind(str, Enum):
    CHARACTER = "character"
    LOCATION = "location"
    ACHIEVEMENT = "achievement"
    CUSTOM = "custom"

    @property
    def machine_assigned(self) -> bool:
        return self is not TagKind.CUSTOM


class ElementType(str, Enum):
    CUT_SCENE = "cut_scene"
    RELATED_CHARACTER = "related_character"
    ENVIRONMENT = "environment"
    ARTIFACT = "artifact"
    TEXT = "text"
    DIALOGUE = "dialogue"

    @property
    def label(self) -> str:
        return _ELEMENT_LABELS[self]


_ELEMENT_LABELS = {
    ElementType.CUT_SCENE: "Cut-scene",
    ElementType.RELATED_CHARACTER: "Related Character",
    ElementType.ENVIRONMENT: "Environment",
    ElementType.ARTIFACT: "Artifact",
    ElementType.TEXT: "Text",
    ElementType.DIALOGUE: "Dialogue",
}

# Display order of element groups in listings (matches the interface's
# group layout, which differs from the enum declaration order).
ELEMENT_GROUP_ORDER = (
    ElementType.CUT_SCENE,
    ElementType.RELATED_CHARACTER,
    ElementType.ENVIRONMENT,
    ElementType.ARTIFACT,
    ElementType.DIALOGUE,
    ElementType.TEXT,
)


class MediaKind(str, Enum):
    SCREENSHOT = "screenshot"
    RECORDING = "recording"


@dataclass(frozen=True)
class Tag:
    """Typed label. Equality and hashing ignore label case."""

    kind: TagKind
    label: str

    def key(self) -> tuple[str, str]:
        return (self.kind.value, self.label.casefold())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tag):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.label}"


def normalize_tag(kind: TagKind, raw_label: str) -> Tag:
    """Trim and collapse internal whitespace; reject blank or oversized labels.

    Idempotent: normalizing an already-normalized label is a no-op.
    """
    label = _WS.sub(" ", raw_label.strip())
    if not label:
        raise EmptyLabel(f"blank label for {kind.value} tag")
    if len(label) > MAX_LABEL_CHARS:
        raise LabelTooLong(f"label exceeds {MAX_LABEL_CHARS} chars: {label[:32]}...")
    return Tag(kind, label)


def parse_tag(text: str) -> Tag:
    """Parse the `kind:label` syntax used by the CLI and query strings.

    The label may itself contain colons; only the first one splits.
    """
    kind_s, sep, label = text.partition(":")
    if not sep:
        raise EmptyLabel(f"expected kind:label, got {text!r}")
    try:
        kind = TagKind(kind_s.strip().lower())
    except ValueError:
        raise EmptyLabel(f"unknown tag kind {kind_s!r}") from None
    return normalize_tag(kind, label)


@dataclass(frozen=True)
class MediaRef:
    kind: MediaKind
    path: str

    def path_is_safe(self) -> bool:
        """Relative, and never escapes the data directory."""
        if not self.path or self.path.startswith(("/", "\\")):
            return False
        parts = re.split(r"[/\\]", self.path)
        return ".." not in parts and "" not in parts


def word_count(text: str) -> int:
    """Whitespace-delimited token count; punctuation stays attached."""
    return len(text.split())


@dataclass
class Clue:
    """One captured narrative fragment after classification."""

    id: str
    media: MediaRef
    timestamp_ms: int
    tags: list[Tag] = field(default_factory=list)
    element: ElementType = ElementType.ENVIRONMENT
    description: str = ""
    keywords: list[str] = field(default_factory=list)

    def has_tag(self, tag: Tag) -> bool:
        return any(t == tag for t in self.tags)

    def has_keyword(self, keyword: str) -> bool:
        cf = keyword.casefold()
        return any(k.casefold() == cf for k in self.keywords)

    def copy(self) -> Clue:
        return Clue(
            id=self.id,
            media=self.media,
            timestamp_ms=self.timestamp_ms,
            tags=list(self.tags),
            element=self.element,
            description=self.description,
            keywords=list(self.keywords),
        )


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def validate_clue(clue: Clue) -> ValidationReport:
    """Check every clue invariant; report violations instead of raising."""
    v: list[str] = []
    if not clue.id:
        v.append("id-empty")
    if clue.timestamp_ms < 0:
        v.append("timestamp<0")
    if not clue.media.path_is_safe():
        v.append("media-path-unsafe")
    if word_count(clue.description) > MAX_DESCRIPTION_WORDS:
        v.append(f"description>{MAX_DESCRIPTION_WORDS}w")
    if len(clue.keywords) > MAX_KEYWORDS:
        v.append(f"keywords>{MAX_KEYWORDS}")
    seen_kw: set[str] = set()
    for kw in clue.keywords:
        if not kw.strip():
            v.append("keyword-empty")
        if len(kw) > MAX_LABEL_CHARS:
            v.append("keyword-too-long")
        cf = kw.casefold()
        if cf in seen_kw:
            v.append("keyword-duplicate")
        seen_kw.add(cf)
    seen_tags: set[tuple[str, str]] = set()
    for tag in clue.tags:
        if tag.key() in seen_tags:
            v.append("tag-duplicate")
        seen_tags.add(tag.key())
        if not tag.label.strip():
            v.append("tag-label-empty")
        if len(tag.label) > MAX_LABEL_CHARS:
            v.append("tag-label-too-long")
    return ValidationReport(v)


# -- serialization (canonical field order, shared by store and service) ------

def tag_to_dict(tag: Tag) -> dict:
    return {"kind": tag.kind.value, "label": tag.label}


def tag_from_dict(d: dict) -> Tag:
    return Tag(TagKind(d["kind"]), d["label"])


def clue_to_dict(clue: Clue) -> dict:
    return {
        "id": clue.id,
        "media": {"kind": clue.media.kind.value, "path": clue.media.path},
        "timestamp_ms": clue.timestamp_ms,
        "tags": [tag_to_dict(t) for t in clue.tags],
        "element": clue.element.value,
        "description": clue.description,
        "keywords": list(clue.keywords),
    }


def clue_from_dict(d: dict) -> Clue:
    return Clue(
        id=d["id"],
        media=MediaRef(MediaKind(d["media"]["kind"]), d["media"]["path"]),
        timestamp_ms=d["timestamp_ms"],
        tags=[tag_from_dict(t) for t in d["tags"]],
        element=ElementType(d["element"]),
        description=d["description"],
        keywords=list(d["keywords"]),
    )
