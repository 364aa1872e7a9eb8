"""Allow running the CLI as ``python -m minregion``."""

import sys

from .cli import main

sys.exit(main())
