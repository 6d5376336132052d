"""Exception types raised on malformed inputs.

Every loader error derives from :class:`DataError`, which the CLI maps to
exit code 1.
"""


class DataError(Exception):
    """Input data violates a documented format or invariant."""


class DuplicatePhone(DataError):
    pass


class MissingFeatures(DataError):
    pass


class FeatureWidthError(DataError):
    pass


class ZeroFeatureVector(DataError):
    pass


class UnknownPhone(DataError):
    pass


class EmptyPronunciation(DataError):
    pass


class OOVToken(DataError):
    """A word has no entry in the pronunciation lexicon."""


class FormatError(DataError):
    """A line of a TSV/JSONL file could not be parsed.

    ``line`` is the 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line
