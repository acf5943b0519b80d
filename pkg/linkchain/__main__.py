"""Allows ``python -m linkchain``."""
import sys

from linkchain.cli import main

sys.exit(main())
