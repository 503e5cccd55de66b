import sys

from tsgeo.cli import main

sys.exit(main())
