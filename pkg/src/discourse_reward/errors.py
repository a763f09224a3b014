"""Exception hierarchy for the discourse reward engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


# --- document ingestion -----------------------------------------------------

class MalformedInput(EngineError):
    """Input bytes do not conform to the canonical document format."""


class InvariantViolation(EngineError):
    """Structurally parseable input that breaks a domain invariant."""


class EmptyDocument(EngineError):
    """Document has no text, tokens, or segments to work with."""


# --- motif engine -----------------------------------------------------------

class InvalidK(EngineError):
    """Motif size below the minimum of 2."""


class EmptyCorpus(EngineError):
    """A corpus-level statistic was requested on an empty corpus."""


# --- authorship classifier --------------------------------------------------

class SingleClassCorpus(EngineError):
    """Training requires at least one example of each class."""


class WidthMismatch(EngineError):
    """Feature width does not match the model contract."""


class FingerprintMismatch(EngineError):
    """Motif vocabulary fingerprint differs from the one the model was trained on."""


class VersionMismatch(EngineError):
    """Persisted file was written by an incompatible format version."""


class CorruptFile(EngineError):
    """Persisted file is truncated or not decodable."""


# --- surface evaluator ------------------------------------------------------

class EmptyEssay(EngineError):
    """An empty essay cannot be scored."""


class EvaluationParseError(EngineError):
    """Base class for failures while parsing an evaluator reply."""


class MissingTerminator(EvaluationParseError):
    """No end-of-evaluation marker after the score object."""


class MalformedObject(EvaluationParseError):
    """No well-formed score object in the reply."""


class MissingKey(EvaluationParseError):
    """Score object lacks one of the three aspect keys."""


class OutOfRange(EvaluationParseError):
    """Aspect score outside the 0..5 range."""


class NonInteger(EvaluationParseError):
    """Aspect score is not an integer."""


class TransportError(EngineError):
    """Remote evaluator unreachable or returned an unusable reply envelope."""


# --- reward engine ----------------------------------------------------------

class NegativeScore(EngineError):
    """Episodic reward sources must be non-negative."""


class IndexOutOfRange(EngineError):
    """A token index falls outside the reward tensor."""


class MissingDependency(EngineError):
    """The requested scoring mode lacks a required dependency."""


# --- math / analysis utilities ----------------------------------------------

class NonFinite(EngineError):
    """A kernel received a non-finite input."""


class LengthMismatch(EngineError):
    """Paired sequences have incompatible lengths."""


class ZeroVariance(EngineError):
    """Correlation is undefined for a constant sequence."""


class VocabularyMismatch(EngineError):
    """Two motif vectors were built over different vocabularies."""
