import sys

from chaincore.cli import main

sys.exit(main())
