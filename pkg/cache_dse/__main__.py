import sys

from cache_dse.cli import main

sys.exit(main())
