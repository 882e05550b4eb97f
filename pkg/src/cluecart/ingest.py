"""Capture-log ingestion: classify each event and append the resulting clue.

Ingestion is idempotent on event ids: re-feeding a log adds nothing. A
malformed line aborts with its line number; a classifier failure skips
just that event and is reported, so one bad capture never blocks a
session.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .capture import iter_capture_log
from .classify import Classifier, build_clue
from .errors import CluecartError, MalformedLog
from .store import ClueStore


@dataclass
class IngestReport:
    created: int = 0
    skipped_duplicates: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "created": self.created,
            "skipped_duplicates": self.skipped_duplicates,
            "errors": list(self.errors),
        }


def ingest_text(store: ClueStore, text: str, classifier: Classifier) -> IngestReport:
    report = IngestReport()
    try:
        events = list(iter_capture_log(text))
    except ValueError as exc:
        line_no = getattr(exc.__cause__, "lineno", None)
        # iter_capture_log prefixes "line N:"; recover N for the error type
        msg = str(exc)
        try:
            n = int(msg.split(":", 1)[0].split()[1])
        except (IndexError, ValueError):
            n = line_no or 0
        raise MalformedLog(n, msg.split(":", 1)[1].strip() if ":" in msg else msg) from exc

    for line_no, event in events:
        if event.id in store:
            report.skipped_duplicates += 1
            continue
        try:
            cls = classifier.classify(event)
            clue = build_clue(event, cls)
        except CluecartError as exc:
            report.errors.append(f"event {event.id} (line {line_no}): {exc}")
            continue
        store.add(clue)
        report.created += 1
    return report
