"""Exception hierarchy shared across the pipeline.

Every module raises subclasses of :class:`DepsumError` so the CLI can turn any
pipeline failure into a one-line diagnostic and a nonzero exit code.
"""


class DepsumError(Exception):
    """Base class for all pipeline errors."""


# corpus ----------------------------------------------------------------

class MalformedRowError(DepsumError):
    """A transcript or label row has the wrong shape or an unparseable field."""


class UnknownSpeakerError(DepsumError):
    """Transcript speaker column holds something other than Ellie/Participant."""


class LabelMismatchError(DepsumError):
    """PHQ8_Binary contradicts the >= 10 threshold applied to PHQ8_Score."""


class DuplicateIdError(DepsumError):
    """The same session id appears twice in a label file."""


# tokenize --------------------------------------------------------------

class InvalidNError(DepsumError):
    """n-gram size below 1."""


# embed -----------------------------------------------------------------

class EmptyMatrixError(DepsumError):
    """Pooling requested over an embedding matrix with no rows."""


class ZeroNormError(DepsumError):
    """Cosine similarity is undefined for a zero-magnitude vector."""


class DimMismatchError(DepsumError):
    """Vectors of different dimensionality were combined."""


class MalformedLineError(DepsumError):
    """A vector-exchange JSONL line is not a valid {key, vector} object."""


class DuplicateKeyError(DepsumError):
    """The same key appears twice in a vector-exchange stream."""


class MissingVectorError(DepsumError):
    """A file-exchange backend was asked for a text it has no vector for."""


# summarize -------------------------------------------------------------

class EmptyCandidateSetError(DepsumError):
    """MMR selection needs at least one candidate phrase."""


# lexicon ---------------------------------------------------------------

class OutOfRangeError(DepsumError):
    """PHQ-8 score outside 0..24."""


class TermAbsentError(DepsumError):
    """Corpus statistics are inconsistent: tf > 0 for a term with df = 0."""


class DegenerateCorpusError(DepsumError):
    """Word scores need at least one depressed and one non-depressed document."""


# model -----------------------------------------------------------------

class DegenerateSplitError(DepsumError):
    """Training needs non-empty splits with both classes present in train."""
