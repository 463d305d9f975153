import sys

from chevron.cli import main

sys.exit(main())
