#!/usr/bin/env python3
"""Run the full 35-cell sweep with the reference default grids.

This is the long experiment (hours at the default frame count).  For a
quick look, pass --frames 50 and --jobs N.
"""

import sys

from zaklink.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", *sys.argv[1:]]))
