"""Allow `python -m forward_arc`."""

import sys

from .cli import main

sys.exit(main())
