"""Tag-priority search, related-clue recommendation, and element sorting.

A query is an ordered tag list; position encodes drag-assigned priority.
The tag at zero-based index r in a query of length n contributes weight
n - r when the clue carries it, so matching a higher-priority tag always
outweighs matching the same number of lower-priority ones of equal count.
Only the induced ordering is observable: any positive rescaling of the
weights ranks identically.

Ties break by timestamp ascending (encounter order), then id, so every
listing is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    DuplicateTag,
    MachineTagImmutable,
    MissingQuery,
    TooManyKeywords,
    UnknownTag,
)
from .model import (
    ELEMENT_GROUP_ORDER,
    MAX_KEYWORDS,
    Clue,
    ElementType,
    Tag,
    TagKind,
    normalize_tag,
    validate_clue,
)
from .errors import ValidationFailed
from .store import ClueStore


@dataclass(frozen=True)
class TagQuery:
    """Ordered tags; index 0 is the highest priority."""

    tags: tuple[Tag, ...]

    def __post_init__(self):
        keys = [t.key() for t in self.tags]
        if len(keys) != len(set(keys)):
            raise DuplicateTag("query tags must be unique")

    @classmethod
    def of(cls, *tags: Tag) -> "TagQuery":
        return cls(tuple(tags))

    def __len__(self) -> int:
        return len(self.tags)


@dataclass
class RankedResult:
    clue_id: str
    score: int
    matched: list[Tag] = field(default_factory=list)


def relevance_score(clue: Clue, query: TagQuery) -> int:
    n = len(query.tags)
    return sum(n - r for r, tag in enumerate(query.tags) if clue.has_tag(tag))


def _ranked(clue: Clue, query: TagQuery) -> RankedResult:
    n = len(query.tags)
    matched = [t for t in query.tags if clue.has_tag(t)]
    score = sum(n - r for r, t in enumerate(query.tags) if clue.has_tag(t))
    return RankedResult(clue_id=clue.id, score=score, matched=matched)


def search(store: ClueStore, query: TagQuery) -> list[RankedResult]:
    """Clues matching at least one query tag, best first.

    Candidates come from the inverted index (union of the query tags'
    postings), so unrelated clues are never scored.
    """
    candidate_ids: set[str] = set()
    for tag in query.tags:
        candidate_ids |= store.ids_with_tag(tag)
    results = []
    for cid in candidate_ids:
        clue = store.get(cid)
        ranked = _ranked(clue, query)
        if ranked.score > 0:
            results.append((ranked, clue.timestamp_ms))
    results.sort(key=lambda rc: (-rc[0].score, rc[1], rc[0].clue_id))
    return [r for r, _ in results]


def recommend_related(store: ClueStore, clue_id: str) -> list[RankedResult]:
    """Search on the clue's own tags (stored order), minus the clue itself."""
    clue = store.get(clue_id)  # raises UnknownClue
    query = TagQuery(tuple(clue.tags))
    return [r for r in search(store, query) if r.clue_id != clue_id]


class SortMode:
    TEMPORAL = "temporal"
    TAG_RELEVANCE = "relevance"


def sort_elements(
    store: ClueStore,
    mode: str,
    query: TagQuery | None = None,
) -> list[tuple[ElementType, list[Clue]]]:
    """Whole-library view grouped by element type in the fixed display order.

    Unlike search, zero-score clues stay in the listing; under tag-relevance
    ordering they fall to the tail of their group.
    """
    if mode == SortMode.TAG_RELEVANCE and query is None:
        raise MissingQuery("tag-relevance sorting requires a query")
    if mode not in (SortMode.TEMPORAL, SortMode.TAG_RELEVANCE):
        raise MissingQuery(f"unknown sort mode: {mode!r}")

    groups: dict[ElementType, list[Clue]] = {e: [] for e in ELEMENT_GROUP_ORDER}
    for clue in store.all_clues():
        groups[clue.element].append(clue)

    for element, clues in groups.items():
        if mode == SortMode.TEMPORAL:
            clues.sort(key=lambda c: (c.timestamp_ms, c.id))
        else:
            assert query is not None
            clues.sort(
                key=lambda c: (-relevance_score(c, query), c.timestamp_ms, c.id)
            )
    return [(e, groups[e]) for e in ELEMENT_GROUP_ORDER]


# -- per-clue edits (custom tags, keywords) -----------------------------------

def add_custom_tag(store: ClueStore, clue_id: str, label: str) -> Clue:
    clue = store.get(clue_id)
    tag = normalize_tag(TagKind.CUSTOM, label)
    if clue.has_tag(tag):
        raise DuplicateTag(f"clue {clue_id} already carries {tag}")
    clue.tags.append(tag)
    store.update(clue)
    return clue


def remove_custom_tag(store: ClueStore, clue_id: str, label: str) -> Clue:
    clue = store.get(clue_id)
    tag = normalize_tag(TagKind.CUSTOM, label)
    if not clue.has_tag(tag):
        for existing in clue.tags:
            if existing.label.casefold() == tag.label.casefold():
                raise MachineTagImmutable(f"{existing} is machine-assigned")
        raise UnknownTag(f"clue {clue_id} has no custom tag {label!r}")
    clue.tags = [t for t in clue.tags if t != tag]
    store.update(clue)
    return clue


def edit_keywords(store: ClueStore, clue_id: str, keywords: list[str]) -> Clue:
    if len(keywords) > MAX_KEYWORDS:
        raise TooManyKeywords(f"{len(keywords)} keywords, cap is {MAX_KEYWORDS}")
    clue = store.get(clue_id)
    clue.keywords = [k.strip() for k in keywords]
    report = validate_clue(clue)
    if not report.passed:
        raise ValidationFailed(report.violations)
    store.update(clue)
    return clue
