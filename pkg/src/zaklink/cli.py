"""Command-line driver.

Subcommands:
  sweep         full (nu_max, tau_s) heatmap sweep
  cell          one cell
  zak-op-study  single-axis operating-point studies
  validate      formula and oracle-equivalence checks
  overheads     CP/pilot and strip overhead curves
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import load_config
from .ofdm_modem import declared_overhead_policy, ofdm_overheads
from .sweep import STUDY_KINDS, run_cell, run_study, run_sweep
from .validation import run_validation
from .zak_modem import zak_strip_overhead


def _add_common(p):
    p.add_argument("--config", default=None, help="TOML config path or preset name")
    p.add_argument("--seed", type=int, default=None, help="override base seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--frames", type=int, default=None, help="override frames per point")
    p.add_argument("--jobs", type=int, default=1, help="parallel cell workers")


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if args.frames is not None:
        cfg = dataclasses.replace(cfg, n_frames=args.frames)
    return cfg


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="zaklink")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sweep", help="run the full heatmap sweep")
    _add_common(p)

    p = sub.add_parser("cell", help="run a single (nu_max, tau_s) cell")
    _add_common(p)
    p.add_argument("--nu-max", type=float, required=True)
    p.add_argument("--tau-s", type=float, required=True)

    p = sub.add_parser("zak-op-study", help="operating-point studies")
    _add_common(p)
    p.add_argument("--kind", choices=list(STUDY_KINDS) + ["all"], default="all")

    p = sub.add_parser("validate", help="run the validation checks")
    _add_common(p)

    p = sub.add_parser("overheads", help="overhead curves")
    p.add_argument("--waveform", choices=("zak", "ofdm"), required=True)
    p.add_argument("--tau-s", type=float, required=True)
    p.add_argument("--nu-p", type=float, help="delay-Doppler Doppler period (zak)")
    p.add_argument(
        "--nu-s-list", type=str, help="comma-separated Doppler spreads in Hz (ofdm)"
    )

    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.cmd == "sweep":
            cfg = _load(args)
            run_sweep(cfg, args.out, jobs=args.jobs)
            print(f"wrote {args.out}/heatmap.csv")
            return 0

        if args.cmd == "cell":
            cfg = _load(args)
            res = run_cell(cfg, args.nu_max, args.tau_s)
            print(
                json.dumps(
                    {
                        "nu_max": res.nu_max,
                        "tau_s": res.tau_s,
                        "se_zak": res.se_zak,
                        "se_ofdm": res.se_ofdm,
                        "ratio": res.ratio,
                        "best_zak": res.best_zak,
                        "best_ofdm": res.best_ofdm,
                    },
                    indent=1,
                    sort_keys=True,
                )
            )
            return 0

        if args.cmd == "zak-op-study":
            cfg = _load(args)
            kinds = STUDY_KINDS if args.kind == "all" else (args.kind,)
            for kind in kinds:
                run_study(cfg, kind, args.out)
                print(f"wrote {args.out}/studies/{kind}.json")
            return 0

        if args.cmd == "validate":
            results = run_validation()
            ok = True
            for name, passed, detail in results:
                print(f"{'PASS' if passed else 'FAIL'}  {name}  [{detail}]")
                ok &= passed
            return 0 if ok else 1

        if args.cmd == "overheads":
            if args.waveform == "zak":
                if args.nu_p is None:
                    print("zak overheads need --nu-p", file=sys.stderr)
                    return 2
                tau_p = 1.0 / args.nu_p
                oh = zak_strip_overhead(args.tau_s, tau_p)
                print(f"tau_s={args.tau_s:g}s tau_p={tau_p:g}s strip_overhead={oh:.6g}")
            else:
                if not args.nu_s_list:
                    print("ofdm overheads need --nu-s-list", file=sys.stderr)
                    return 2
                print("nu_s_hz,scs_hz,n_dmrs_symbols,comb,cp_fraction,pilot_fraction,total_fraction")
                for tok in args.nu_s_list.split(","):
                    nu_s = float(tok)
                    num, dmrs = declared_overhead_policy(nu_s, args.tau_s)
                    cp, pf, tot = ofdm_overheads(num, dmrs)
                    print(
                        f"{nu_s:g},{num.scs:g},{len(dmrs.time_positions)},"
                        f"{dmrs.freq_comb},{cp:.6g},{pf:.6g},{tot:.6g}"
                    )
            return 0
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
