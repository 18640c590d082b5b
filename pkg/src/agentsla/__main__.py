import sys

from agentsla.cli import main

sys.exit(main())
