import sys

from fwshock.cli import main

sys.exit(main())
