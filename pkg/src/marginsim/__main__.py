"""Allow running as ``python -m marginsim``."""

from marginsim.cli import main

main()
