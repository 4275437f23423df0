"""Entry point for `python -m palinsieve`."""

import sys

from palinsieve.cli import main

sys.exit(main())
