"""Append-only clue store.

Each committed write appends one full clue snapshot as a JSONL line and
fsyncs before returning, so the on-disk log is the source of truth: replay
(last snapshot per id wins) rebuilds the in-memory state and the tag index
after a crash or restart. The store also works purely in memory when no
path is given (unit tests, oracle runs).
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .errors import DuplicateClue, UnknownClue
from .model import Clue, Tag, clue_from_dict, clue_to_dict


def clue_to_json(clue: Clue) -> str:
    return json.dumps(clue_to_dict(clue), ensure_ascii=False, separators=(",", ":"))


class ClueStore:
    """Clues by id plus an inverted tag index; many readers, one writer."""

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.RLock()
        self._clues: dict[str, Clue] = {}
        self._index: dict[tuple[str, str], set[str]] = {}
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            self._replay()

    def _replay(self) -> None:
        assert self._path is not None
        with open(self._path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                clue = clue_from_dict(json.loads(line))
                self._clues[clue.id] = clue
        for clue in self._clues.values():
            self._index_clue(clue)

    def _index_clue(self, clue: Clue) -> None:
        for tag in clue.tags:
            self._index.setdefault(tag.key(), set()).add(clue.id)

    def _unindex_clue(self, clue: Clue) -> None:
        for tag in clue.tags:
            ids = self._index.get(tag.key())
            if ids is not None:
                ids.discard(clue.id)
                if not ids:
                    del self._index[tag.key()]

    def _append_line(self, clue: Clue) -> None:
        if self._path is None:
            return
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._path, "a", encoding="utf-8") as f:
            f.write(clue_to_json(clue) + "\n")
            f.flush()
            os.fsync(f.fileno())

    # -- reads ----------------------------------------------------------------

    def __len__(self) -> int:
        with self._lock:
            return len(self._clues)

    def __contains__(self, clue_id: str) -> bool:
        with self._lock:
            return clue_id in self._clues

    def get(self, clue_id: str) -> Clue:
        with self._lock:
            try:
                return self._clues[clue_id].copy()
            except KeyError:
                raise UnknownClue(clue_id) from None

    def all_clues(self) -> list[Clue]:
        """Snapshot of every clue, in insertion order."""
        with self._lock:
            return [c.copy() for c in self._clues.values()]

    def ids_with_tag(self, tag: Tag) -> set[str]:
        with self._lock:
            return set(self._index.get(tag.key(), ()))

    # -- writes ---------------------------------------------------------------

    def add(self, clue: Clue) -> None:
        with self._lock:
            if clue.id in self._clues:
                raise DuplicateClue(clue.id)
            stored = clue.copy()
            self._clues[stored.id] = stored
            self._index_clue(stored)
            self._append_line(stored)

    def update(self, clue: Clue) -> None:
        """Replace an existing clue wholesale (tags/keywords edits)."""
        with self._lock:
            old = self._clues.get(clue.id)
            if old is None:
                raise UnknownClue(clue.id)
            self._unindex_clue(old)
            stored = clue.copy()
            self._clues[stored.id] = stored
            self._index_clue(stored)
            self._append_line(stored)
