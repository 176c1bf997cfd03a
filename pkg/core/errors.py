from enum import Enum


class ExitStatus(Enum):
    """
    Process exit statuses, one per error category.

    Attributes
    ----------
    OK : int
        The run completed and every output was written.
    INTERNAL : int
        An unexpected exception escaped the command handler.
    USAGE : int
        The command line could not be parsed.
    CONFIG : int
        The parameters are inconsistent or invalid.
    OUTPUT : int
        An input could not be read or an output could not be written.
    NUMERICAL : int
        A numerical check or guard failed.
    """

    OK = 0
    INTERNAL = 1
    USAGE = 2
    CONFIG = 3
    OUTPUT = 4
    NUMERICAL = 5


class LabError(Exception):
    """Base exception for every failure the lab reports to the user."""

    status: ExitStatus = ExitStatus.INTERNAL


class ConfigError(LabError):
    """Raised when run parameters are inconsistent or a config file is malformed."""

    status = ExitStatus.CONFIG


class GridError(ConfigError):
    """Raised when a grid is invalid or does not match the requested operation."""


class DataSpecError(ConfigError):
    """Raised when a data specification is invalid."""


class DegenerateBumpError(ConfigError):
    """
    Raised when a bump pair cannot witness the obstruction.

    Attributes
    ----------
    quantity : str
        The name of the vanishing quadrature.
    value : float
        Its measured value.
    """

    def __init__(self, quantity: str, value: float) -> None:
        super().__init__(
            f"{quantity} = {value:.3e} is below the degeneracy threshold; "
            "choose another bump shape"
        )
        self.quantity: str = quantity
        self.value: float = value


class LayoutError(ConfigError):
    """Raised when cascade copies would have overlapping light cones."""


class OutputError(LabError):
    """Raised when an output path is not writable or an input file is unreadable."""

    status = ExitStatus.OUTPUT


class NumericalError(LabError):
    """Base class of failed numerical guards and checks."""

    status = ExitStatus.NUMERICAL


class EvaluationError(NumericalError):
    """
    Raised when an integrand returns non-finite samples.

    Attributes
    ----------
    abscissa : float
        The first abscissa with a non-finite sample.
    """

    def __init__(self, abscissa: float) -> None:
        super().__init__(f"non-finite integrand sample at x = {abscissa!r}")
        self.abscissa: float = abscissa


class TailError(NumericalError):
    """
    Raised when a transform input does not settle to a constant at both ends.

    Attributes
    ----------
    tail : float
        The measured mismatch between the two ends.
    """

    def __init__(self, tail: float) -> None:
        super().__init__(
            f"input is not constant at infinity (tail mismatch {tail:.3e})"
        )
        self.tail: float = tail


class SphereConstraintError(NumericalError):
    """Raised when slice values leave the unit sphere or their support window."""


class SupportLeakError(NumericalError):
    """Raised when initial data differ from e1 outside [-C, C]."""


class BlowUpError(NumericalError):
    """
    Raised when an update leaves the sphere by more than the guard allows.

    Attributes
    ----------
    time : float
        The time level being computed.
    position : float
        The node with the largest defect.
    defect : float
        The pre-projection defect ``||phi| - 1|`` at that node.
    """

    def __init__(self, time: float, position: float, defect: float) -> None:
        super().__init__(
            f"blow-up guard triggered at t = {time:.6g}, x = {position:.6g} "
            f"(sphere defect {defect:.3e})"
        )
        self.time: float = time
        self.position: float = position
        self.defect: float = defect


class ProfileError(NumericalError):
    """Raised when the travelling-wave description cannot be extracted."""


class WindowError(NumericalError):
    """Raised when the lower-bound frequency window is empty."""


class IdentityError(NumericalError):
    """Raised when a quadrature identity fails its tolerance."""


class ConvergenceError(NumericalError):
    """Raised when an observed convergence order falls below the floor."""
