"""Exception types raised across the package."""


class SphereBlassoError(Exception):
    """Base class for all package errors."""


class ZeroVector(SphereBlassoError, ValueError):
    """A vector that must be normalized has (numerically) zero length."""


class EmptyFlat(SphereBlassoError):
    """The intersection of the requested hyperplanes is the origin only."""


class Inconclusive(SphereBlassoError):
    """The feasibility oracle could not decide within its iteration budget."""

    def __init__(self, message, indices=None, signs=None):
        super().__init__(message)
        self.indices = indices
        self.signs = signs


class Nondifferentiable(SphereBlassoError):
    """The certificate has a kink at the requested point."""


class StratumBoundary(SphereBlassoError):
    """An atom sits (numerically) on a data hyperplane."""

    def __init__(self, message, atom=None, hyperplane=None):
        super().__init__(message)
        self.atom = atom
        self.hyperplane = hyperplane


class EmptyFamily(SphereBlassoError):
    """No stratum is compatible with the given atom."""


class TooLarge(SphereBlassoError, ValueError):
    """Input exceeds the size guard of an exponential-time routine."""


class SolverFailed(SphereBlassoError):
    """An inner solve did not produce a certified solution."""


class NotCertified(SphereBlassoError):
    """The primal-dual pair does not satisfy the optimality conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AtomCountChanged(SphereBlassoError):
    """A perturbed solve returned a different number of atoms than the baseline."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class ConfigError(SphereBlassoError, ValueError):
    """Malformed run configuration."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
