#!/usr/bin/env python
"""Command-line entry for the TriCam lab: run, study, diag and bench."""
import logging.config
import sys


def main() -> None:
    """Configure logging from settings and hand over to the CLI."""
    try:
        from config import settings
        from runs.commands import main as run_command
    except ImportError as exc:
        raise ImportError(
            "Could not import the lab packages. Run this script from the tricam_lab "
            "directory and check that numpy, scipy and python-decouple are installed."
        ) from exc
    logging.config.dictConfig(settings.LOGGING)
    sys.exit(run_command(sys.argv[1:]))


if __name__ == '__main__':
    main()
