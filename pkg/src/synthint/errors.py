"""Exception hierarchy for the synthint library."""


class SynthintError(Exception):
    """Base class for all library errors."""


# --- alignment / bucketing ---

class NeverReachedThreshold(SynthintError):
    """Unit's cumulative outcome never reaches the event threshold."""


class InsufficientPreHistory(SynthintError):
    """Fewer than the required fully observed days precede Day 0."""


class EmptyPanelAfterAlignment(SynthintError):
    """No unit survived event alignment."""


class NoMobilityData(SynthintError):
    """No mobility observations fall inside the scoring window."""


# --- engine ---

class NonFiniteInput(SynthintError):
    """Matrix contains NaN or infinite entries."""


class AllZeroSpectrum(SynthintError):
    """Every singular value is zero; no rank can be selected."""


class EmptyDonorGroup(SynthintError):
    """No donors remain for a (target, intervention) pair."""


class DimensionMismatch(SynthintError):
    """Vector/matrix shapes are inconsistent."""


class NoObservedPostData(SynthintError):
    """A unit has no observed post-period cells to validate against."""


# --- projection ---

class InsufficientPositivePoints(SynthintError):
    """Fewer than two strictly positive values to fit in log space."""


# --- ingest / artifact ---

class MalformedHeader(SynthintError):
    """CSV header does not match the expected schema."""


class UnparseableRow(SynthintError):
    """A CSV row could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SchemaVersionMismatch(SynthintError):
    """Artifact schema version is not one this library can read."""


class ArtifactHashMismatch(SynthintError):
    """Artifact content does not match its embedded content hash."""


class PipelineError(SynthintError):
    """Fatal failure of a pipeline stage; message names the stage."""
