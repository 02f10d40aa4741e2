#!/usr/bin/env python3
"""Reproduce the single-axis operating-point studies (efficiency versus
delay spread, Doppler, pilot allocation and pilot power), writing
out/studies/*.json for the plot emitter."""

import sys

from zaklink.cli import main

if __name__ == "__main__":
    sys.exit(main(["zak-op-study", *sys.argv[1:]]))
