class PreconditionError(ValueError):
    """An operation was called outside its admissible parameter range."""


class CertificateError(PreconditionError):
    """A field lacks (or fails) the band certificate an operation requires."""
