import sys

from cik.cli import main

sys.exit(main())
