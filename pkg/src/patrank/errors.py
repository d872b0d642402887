"""Exception hierarchy shared by all patrank modules.

Every error raised on bad user input derives from PatrankError so the CLI
can map it to exit code 1, keeping exit code 2 for genuine I/O failures.
"""


class PatrankError(Exception):
    """Base class for all validation and data errors."""


class ParseError(PatrankError):
    """A text input file could not be parsed; message carries the line number."""


class IntegrityError(PatrankError):
    """Referential or uniqueness violation (duplicate ids, unknown family)."""


class ConfigError(PatrankError):
    """Invalid configuration value, unknown section/view, bad parameter."""


class FormatError(PatrankError):
    """A binary or tabular file does not match its declared layout."""


class ShapeError(PatrankError):
    """Array dimensions do not line up."""


class EmptyInputError(PatrankError):
    """An operation that requires at least one element got none."""


class PairingError(PatrankError):
    """Paired score vectors do not align."""


class MissingScoresError(PatrankError):
    """A rerank score table does not cover the first-stage candidates."""


class DataError(PatrankError):
    """A recipe or probe input is missing from the corpus."""


class DegenerateClassError(DataError):
    """A class has no positive training examples."""
