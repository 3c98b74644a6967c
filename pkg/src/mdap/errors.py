"""Exception types raised by the solvers and the instance I/O."""


class MdapError(Exception):
    """Base class for all package errors."""


class CapacityError(MdapError, ValueError):
    """An instance would exceed the configured entry limit."""


class InstanceFormatError(MdapError, ValueError):
    """An instance file is malformed."""


class InstanceVersionError(InstanceFormatError):
    pass


class InstanceLengthError(InstanceFormatError):
    pass


class Infeasible(MdapError):
    """No perfect matching avoids the forbidden entries."""


class Exhausted(MdapError):
    """A heuristic hit its escalation cap without finding a feasible step."""

    def __init__(self, message, escalations=0):
        super().__init__(message)
        self.escalations = escalations


class ScheduleError(MdapError, ValueError):
    """The BDTS parameter schedule is undefined for the requested (n, k)."""


class DegenerateFit(MdapError, ValueError):
    pass
