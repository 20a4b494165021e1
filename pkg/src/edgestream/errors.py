"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class EdgeStreamError(Exception):
    """Base class for all toolkit errors."""


class GraphFormatError(EdgeStreamError):
    """Malformed input graph (header, adjacency, or binary layout)."""


class BalanceInfeasibleError(EdgeStreamError):
    """No block can take the current item without exceeding the balance cap."""


class PartitionStageError(EdgeStreamError):
    """Wraps a failure with the pipeline stage and batch index it occurred in."""

    def __init__(self, stage: str, batch: int, cause: BaseException):
        super().__init__(f"batch {batch}, stage '{stage}': {cause}")
        self.stage = stage
        self.batch = batch
        self.cause = cause
