"""Exception taxonomy shared across the package.

Every error raised by core operations derives from CluecartError so the
service and CLI layers can map them to HTTP statuses / exit codes in one
place.
"""


class CluecartError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "error"


# -- tag / clue validation ---------------------------------------------------

class EmptyLabel(CluecartError):
    code = "empty_label"


class LabelTooLong(CluecartError):
    code = "label_too_long"


class ValidationFailed(CluecartError):
    code = "validation_failed"

    def __init__(self, violations: list[str]):
        super().__init__("clue validation failed: " + ", ".join(violations))
        self.violations = violations


# -- capture simulator -------------------------------------------------------

class DegenerateCamera(CluecartError):
    code = "degenerate_camera"


class WrongKind(CluecartError):
    code = "wrong_kind"


class UnbalancedRecording(CluecartError):
    code = "unbalanced_recording"


class MalformedScript(CluecartError):
    code = "malformed_script"


# -- classification ----------------------------------------------------------

class EmptyArgument(CluecartError):
    code = "empty_argument"


class LlmUnavailable(CluecartError):
    code = "llm_unavailable"


class UnparseableReply(CluecartError):
    code = "unparseable_reply"


# -- store / retrieval -------------------------------------------------------

class UnknownClue(CluecartError):
    code = "unknown_clue"


class DuplicateClue(CluecartError):
    code = "duplicate_clue"


class DuplicateTag(CluecartError):
    code = "duplicate_tag"


class UnknownTag(CluecartError):
    code = "unknown_tag"


class MachineTagImmutable(CluecartError):
    code = "machine_tag_immutable"


class TooManyKeywords(CluecartError):
    code = "too_many_keywords"


class MissingQuery(CluecartError):
    code = "missing_query"


class MalformedLog(CluecartError):
    code = "malformed_log"

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


# -- interpretation graph ----------------------------------------------------

class UnknownNode(CluecartError):
    code = "unknown_node"


class UnknownEdge(CluecartError):
    code = "unknown_edge"


class UnknownGraph(CluecartError):
    code = "unknown_graph"


class ZeroSizeRect(CluecartError):
    code = "zero_size_rect"


class SelfLoop(CluecartError):
    code = "self_loop"


class NotAClueNode(CluecartError):
    code = "not_a_clue_node"


class KeywordNotOnClue(CluecartError):
    code = "keyword_not_on_clue"


class CycleDetected(CluecartError):
    code = "cycle_detected"


class SchemaMismatch(CluecartError):
    code = "schema_mismatch"


class CorruptDocument(CluecartError):
    code = "corrupt_document"
