import sys

from fvelab.cli import main

sys.exit(main())
