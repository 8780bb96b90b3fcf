import sys

from onoc_xbar.cli import main

sys.exit(main())
