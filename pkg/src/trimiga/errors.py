"""Exception types shared across the package."""


class TrimigaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TrimigaError, ValueError):
    """A parameter lies outside the admissible domain."""


class InvalidGeometryError(TrimigaError, ValueError):
    """Geometry data violates a structural invariant (counts, weights, knots)."""


class InvalidRefinementError(TrimigaError, ValueError):
    """A refinement request would produce an invalid knot vector."""


class SingularMapError(TrimigaError):
    """The composite map is degenerate at the queried parameter."""

    def __init__(self, s, t, scale):
        self.s = s
        self.t = t
        self.scale = scale
        super().__init__(
            f"singular map at (s, t) = ({s:.6g}, {t:.6g}): jacobian scale {scale:.3e}"
        )


class NativeFormatError(TrimigaError, ValueError):
    """Plain-text geometry file cannot be parsed."""


class IgesParseError(TrimigaError, ValueError):
    """IGES file cannot be parsed; carries the offending line and section."""

    def __init__(self, message, line=None, section=None):
        self.line = line
        self.section = section
        where = ""
        if section is not None:
            where += f" [section {section}]"
        if line is not None:
            where += f" [line {line}]"
        super().__init__(message + where)


class UnsupportedTopologyError(TrimigaError, ValueError):
    """Trim boundary does not reduce to two curves plus straight closing edges."""


class AssemblyError(TrimigaError, ValueError):
    """Finite element assembly received inconsistent inputs."""


class SolveError(TrimigaError, RuntimeError):
    """Linear solve failed or produced an unacceptable residual."""
