"""Allow `python -m scatterlink`."""
import sys

from .cli import main

sys.exit(main())
