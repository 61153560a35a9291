"""Exception hierarchy shared by every module.

Two top-level families matter to callers: configuration/usage problems
(``UsageError``) and numerical breakdowns (``NumericalFailureError`` and its
subclasses). The CLI maps the former to exit code 1 and the latter to exit
code 2; verification shortfalls are reported by value, not by exception, and
map to exit code 3 in the CLI layer.
"""


class UsageError(Exception):
    """Bad configuration, malformed input file, or mismatched arguments."""


class NumericalFailureError(Exception):
    """A numerical guarantee was violated (norms, hermiticity, unitarity)."""


class DegeneracyError(NumericalFailureError):
    """Spectral gap below the degeneracy threshold; the audit refuses to guess."""


class TrackingError(NumericalFailureError):
    """Frame-to-frame level pairing was ambiguous or inconsistent."""


class GaugeCorruptionError(NumericalFailureError):
    """The diagonal connection acquired a non-negligible real part."""
