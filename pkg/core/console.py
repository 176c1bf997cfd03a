import sys
from enum import Enum


class ColorCode(Enum):
    """
    ANSI color codes for terminal output.

    Attributes
    ----------
    GREEN : str
        Color code for passed checks.
    RED : str
        Color code for failed checks and errors.
    YELLOW : str
        Color code for warnings and unresolved comparisons.
    CYAN : str
        Color code for general information.
    RESET : str
        Color code to reset terminal color.
    """

    GREEN = "\033[92m"
    RED = "\033[91m"
    YELLOW = "\033[93m"
    CYAN = "\033[96m"
    RESET = "\033[0m"


PASS_MARK: str = "[ok]"
FAIL_MARK: str = "[fail]"


def print_colored(message: str, color: ColorCode) -> None:
    """
    Print a message to stdout, coloured only when stdout is a terminal.

    Parameters
    ----------
    message : str
        The message to print.
    color : ColorCode
        The color to use for the message.
    """
    if sys.stdout.isatty():
        print(f"{color.value}{message}{ColorCode.RESET.value}")
    else:
        print(message)


def print_check(label: str, passed: bool, detail: str = "") -> None:
    """
    Print a one-line pass/fail summary for a numerical check.

    Parameters
    ----------
    label : str
        What was checked.
    passed : bool
        Whether the check passed.
    detail : str
        Optional measured values appended to the line.
    """
    mark = PASS_MARK if passed else FAIL_MARK
    line = f"{mark} {label}" + (f": {detail}" if detail else "")
    print_colored(line, ColorCode.GREEN if passed else ColorCode.RED)
