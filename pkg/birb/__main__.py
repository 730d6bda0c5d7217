import sys

from birb.cli.main import main

sys.exit(main())
