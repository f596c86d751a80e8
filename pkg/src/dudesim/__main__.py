import sys

from dudesim.cli import main

sys.exit(main())
