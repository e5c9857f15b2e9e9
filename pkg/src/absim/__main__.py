import sys

from absim.cli import main

sys.exit(main())
