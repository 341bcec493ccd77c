"""Exception types shared across the package."""


class TagRankError(Exception):
    """Base class for all package errors."""


class IngestionError(TagRankError):
    """A corpus record could not be parsed or validated."""

    def __init__(self, path, line_no, reason):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class UnknownNodeError(TagRankError, KeyError):
    """A node id does not exist in the graph."""


class EmptyNeighborhood(TagRankError):
    """Aggregation over an empty neighbor set is undefined; callers
    substitute the zero vector for cold nodes."""


class EmptySentence(TagRankError):
    """Encoding an empty token sequence is undefined; callers map this
    to the zero sentence vector."""


class QueryError(TagRankError):
    """A ranking query is unusable (e.g. keyword empty after tokenization)."""


class IndexBuildError(TagRankError):
    """Inverted-index construction failed (e.g. duplicate record ids)."""


class SnapshotFormatError(TagRankError):
    """A persisted model snapshot is malformed or truncated."""


class TrainingDiverged(TagRankError):
    """A non-finite value appeared during training."""

    def __init__(self, stage, step, detail=""):
        self.stage = stage
        self.step = step
        msg = f"non-finite value during {stage} at step {step}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class GradientError(TagRankError):
    """A non-finite analytic gradient was produced."""

    def __init__(self, op, coordinate):
        self.op = op
        self.coordinate = coordinate
        super().__init__(f"non-finite gradient in {op} at coordinate {coordinate}")
