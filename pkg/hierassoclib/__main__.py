import sys

from hierassoclib.cli import main

sys.exit(main())
