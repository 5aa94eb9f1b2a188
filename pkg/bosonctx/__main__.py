import sys

from bosonctx.cli import main

sys.exit(main())
