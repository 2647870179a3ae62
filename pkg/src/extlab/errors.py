"""Exception types shared across the package."""


class ExtlabError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatch(ExtlabError):
    """Matrix or coordinate dimensions do not agree."""


class NotHermitian(ExtlabError):
    """Matrix violates the Hermitian-symmetry tolerance."""


class NotInRange(ExtlabError):
    """Right-hand side is not in the range of the minimal (closed) operator."""


class NotInDomain(ExtlabError):
    """Element fails the boundary conditions of the requested extension."""


class EpsOutOfRange(ExtlabError):
    """Spectral parameter eps outside the supported interval [1e-5, 0.5]."""


class ConsistencyFailure(ExtlabError):
    """A decomposition failed its reconstruction or membership check."""


class InsufficientProbes(ExtlabError):
    """Probe images do not span the deficiency subspace."""


class NotUnitary(ExtlabError):
    """Reconstructed parameter matrix is not unitary within tolerance."""


class ExtrapolationDivergence(ExtlabError):
    """Richardson residual estimate too large for a trustworthy limit."""
