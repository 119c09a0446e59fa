"""Exception hierarchy shared by the solvers and the command line."""


class BDLSError(Exception):
    """Base class for every error raised by :mod:`bdls`."""


class ValidationError(BDLSError, ValueError):
    """Invalid parameters, configuration or rate family."""


class DomainError(BDLSError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class OutOfRegimeError(BDLSError):
    """The monomer concentration dropped to (or below) the threshold ``rho``."""


class StiffnessError(BDLSError):
    """The adaptive integrator needed a step below ``dt_min``.

    Attributes
    ----------
    t : float
        Time at which the integrator gave up.
    component : int
        Index into the state vector ``[u, c_2, ..., c_Imax]`` of the
        component that forced the last rejection (0 is the monomer, ``k``
        is the cluster of size ``k + 1``).
    """

    def __init__(self, message, t=float("nan"), component=-1):
        super().__init__(message)
        self.t = t
        self.component = component


class RegimeExit(BDLSError):
    """Raised by the LS solver when the projected monomer ``u <= rho``.

    The attribute ``t`` is the exit time (the horizon of the local theory).
    """

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t
