# -*- encoding: utf-8 -*-

"""Run the Command Line with ``python -m linslam``"""

import sys

from linslam.cli import main

if __name__ == "__main__":
    sys.exit(main())
