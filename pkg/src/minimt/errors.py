"""Exception hierarchy shared across the toolkit.

Three branches matter to callers (the CLI maps them to exit codes):
usage problems, data problems, and numeric problems.
"""


class MinimtError(Exception):
    """Base class for all toolkit errors."""


class DataError(MinimtError):
    """Input data violates a documented precondition or format."""


class NumericError(MinimtError):
    """Numerical failure during training or inference."""


# -- corpus ----------------------------------------------------------------

class LineCountMismatch(DataError):
    """Source and target files have different line counts."""


class IoFailure(DataError):
    """File could not be read or written."""


class EncodingFailure(DataError):
    """File is not valid UTF-8."""


class EmptyCorpus(DataError):
    """Operation requires a non-empty corpus."""


# -- align -----------------------------------------------------------------

class SizeLimitExceeded(DataError):
    """Alignment instance exceeds the configured DP cell cap."""


class LadderMismatch(DataError):
    """Ladder does not cover the given sentence lists."""


# -- text ------------------------------------------------------------------

class UnknownId(DataError):
    """Decode was asked for an id outside the vocabulary."""


class VocabularyFrozen(DataError):
    """Insertion attempted on a frozen vocabulary."""


# -- nn / train ------------------------------------------------------------

class AllPadded(DataError):
    """Attention was asked to attend over a fully padded source row."""


class EmptyMask(DataError):
    """Metric requested over a mask with no non-PAD positions."""


class NonFiniteDetected(NumericError):
    """A NaN or Inf appeared in the forward or backward pass."""


# -- eval ------------------------------------------------------------------

class CountMismatch(DataError):
    """Hypothesis and reference lists differ in length."""
