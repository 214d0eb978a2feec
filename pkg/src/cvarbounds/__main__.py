"""Entry point for ``python -m cvarbounds``."""

import sys

from .cli import main

sys.exit(main())
