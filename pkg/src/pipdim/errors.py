"""Exception types raised across the package."""


class PipdimError(Exception):
    """Base class for all errors raised by pipdim."""


class CorpusError(PipdimError, ValueError):
    """The corpus cannot be tokenized, counted or split."""


class FormatError(PipdimError, ValueError):
    """A file on disk does not follow the expected format."""


class DegenerateSpectrumError(PipdimError, ValueError):
    """A spectral gap required by a bound is zero or negative."""


class NoSignalError(PipdimError):
    """Spectrum estimation left no singular value above the noise floor."""


class IdentityViolation(PipdimError, ArithmeticError):
    """A numerical identity that must hold exactly was violated."""
