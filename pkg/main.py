import logging
import sys

import pyfiglet
from dotenv import load_dotenv

from core import Lab, parse_and_dispatch
from core.config import LabData
from core.utils import setup_logging

# Load environment variables from a `.env` file
load_dotenv()

# Set up logging for the application
setup_logging()

_logger: logging.Logger = logging.getLogger(__name__)


def main(argv: list[str]) -> int:
    """
    The main entry point for the lab.

    Loads the command groups, prints the banner and dispatches the
    subcommand named in ``argv``.

    Parameters
    ----------
    argv : list of str
        Command-line arguments without the program name.

    Returns
    -------
    int
        The exit status.
    """
    lab = Lab()
    lab.load_groups()

    # Display a banner on stderr so stdout carries only the run summary
    print(pyfiglet.figlet_format("wavemap lab"), file=sys.stderr)  # pyright: ignore[reportUnknownMemberType]
    _logger.info(f"{LabData.NAME} {LabData.VERSION} started with {argv}")

    return parse_and_dispatch(argv, lab)


if __name__ == "__main__":
    try:
        sys.exit(main(sys.argv[1:]))
    except KeyboardInterrupt:
        _logger.info("KeyboardInterrupt detected.")
        sys.exit(130)
