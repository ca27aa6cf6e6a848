"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: usage errors exit 1,
missing artifacts exit 2, provider failures exit 3, data validation
failures exit 4.
"""


class SynapseError(Exception):
    """Base class for all package errors."""


class DataValidationError(SynapseError):
    """Input data violates a documented invariant (exit code 4)."""


class MissingArtifactError(SynapseError):
    """A required file (index, corpus, config) does not exist (exit code 2)."""


class ProviderError(SynapseError):
    """An embedding or LLM provider failed (exit code 3)."""


class RetriesExhaustedError(ProviderError):
    """Remote provider kept failing after the configured retry budget."""


class GroundingError(SynapseError):
    """Generated explanation cited evidence that does not exist."""


class EvolutionError(SynapseError):
    """Unrecoverable failure during an evolution run; carries the partial trace."""

    def __init__(self, message: str, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace
