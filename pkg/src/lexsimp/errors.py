"""Exception types shared across the pipeline."""

from __future__ import annotations


class LexsimpError(Exception):
    """Base class for all package errors."""


class BackendError(LexsimpError):
    """Base class for model-backend failures."""


class UnsupportedLanguage(BackendError):
    """Requested language is not in the backend's supported set."""


class EmptyInput(BackendError):
    """Text input was empty after trimming."""


class InvalidPrefix(BackendError):
    """Decoder prefix does not begin with the backend's required start tokens."""


class BackendUnavailable(BackendError):
    """Remote backend cannot be reached or the model is not loaded."""


class MisalignedSpan(LexsimpError):
    """The complex-word span starts mid-token under the backend's tokenizer.

    The caller is expected to skip (or re-segment) the instance rather
    than silently re-tokenize.
    """


class WordTooLong(LexsimpError):
    """Greedy word completion hit the subtoken budget without reaching a boundary."""


class NoCandidates(LexsimpError):
    """Every generated candidate was filtered out; report an empty prediction."""


class MissingResources(LexsimpError):
    """No frequency table / embedding store is available for the language."""


class MalformedLine(LexsimpError):
    """A dataset line could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class LengthMismatch(LexsimpError):
    """Prediction and gold lists are not index-aligned."""
