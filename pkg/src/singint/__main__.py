"""Entry point for python -m singint."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
