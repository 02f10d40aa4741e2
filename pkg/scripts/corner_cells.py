#!/usr/bin/env python3
"""Run the two corner cells (low-mobility small-cell, high-mobility
large-cell) at full frame count and print the relative efficiencies."""

import json
import sys

from zaklink.config import acceptance_config
from zaklink.sweep import run_cell


def main() -> int:
    cfg = acceptance_config()
    for nu_max, tau_s in ((100.0, 1.15e-6), (1600.0, 4.7e-6)):
        res = run_cell(cfg, nu_max, tau_s)
        print(
            json.dumps(
                {
                    "nu_max_hz": nu_max,
                    "tau_s_us": tau_s * 1e6,
                    "se_zak": res.se_zak,
                    "se_ofdm": res.se_ofdm,
                    "ratio": res.ratio,
                    "zak": res.best_zak,
                    "ofdm": res.best_ofdm,
                },
                indent=1,
            )
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
