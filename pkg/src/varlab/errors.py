"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class VarlabError(Exception):
    pass


class ValidationError(VarlabError, ValueError):
    """Bad input: wrong shape, out-of-range parameter, malformed config."""


class CertificateError(VarlabError):
    """An operator failed a certificate required by the experiment."""


class TailError(VarlabError):
    """A truncated sum or integral did not pass its tail diagnostic."""


class ConvergenceError(VarlabError):
    """An iterative procedure stopped before reaching its tolerance."""


class NotDiagonalizableError(VarlabError):
    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = defect


class TruncationWarning(UserWarning):
    pass


class ApproximationWarning(UserWarning):
    pass
