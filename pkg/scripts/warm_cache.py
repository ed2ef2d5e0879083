#!/usr/bin/env python3
"""Build the memoized run products every verification suite draws on.

Runs the shipped configurations once each (cheapest first) and stores the
observer products under HYPSLICE_CACHE, so that `hypslice verify ...` and
the test suite replay them instead of re-simulating.  Safe to re-run; only
missing products are built.

    HYPSLICE_CACHE=.cache python3 scripts/warm_cache.py [--skip-slow]
"""

import argparse
import os
import sys
import time
from dataclasses import replace

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--skip-slow", action="store_true",
                    help="skip the spacing-halved wave run and the long "
                         "Klein-Gordon-Zakharov run")
    args = ap.parse_args()
    if not os.environ.get("HYPSLICE_CACHE"):
        os.environ["HYPSLICE_CACHE"] = os.path.join(ROOT, ".cache")
        print(f"HYPSLICE_CACHE not set; using {os.environ['HYPSLICE_CACHE']}")

    from hypslice import config
    from hypslice.cli import ProductStore, coarsened_partner, refined_partner

    cfg_dir = os.path.join(ROOT, "configs")
    freewave = config.load(os.path.join(cfg_dir, "freewave.cfg"))
    short = config.load(os.path.join(cfg_dir, "freewave-short.cfg"))
    model = config.load(os.path.join(cfg_dir, "model.cfg"))
    zak = config.load(os.path.join(cfg_dir, "zakharov.cfg"))
    model_2h = coarsened_partner(model)

    jobs = [
        ("freewave-short probes", short, {"probes1"}),
        ("model coarse partner", model_2h, {"ladder", "probes3"}),
    ]
    for eps in (0.005, 0.02, 0.04):
        jobs.append((f"model coarse eps={eps}",
                     replace(model_2h, init=replace(model_2h.init, amplitude=eps)),
                     {"ladder"}))
    jobs += [
        ("model", model, {"ladder", "probes3"}),
        ("freewave", freewave, {"ladder", "ks2", "probes3", "curves"}),
    ]
    if not args.skip_slow:
        jobs += [
            ("zakharov", zak, {"tracker"}),
            ("freewave fine partner", refined_partner(freewave),
             {"ladder", "curves"}),
        ]

    store = ProductStore()
    t0 = time.perf_counter()
    for name, cfg, needs in jobs:
        t1 = time.perf_counter()
        store.get(cfg, needs)
        print(f"[warm] {name}: ready ({time.perf_counter() - t1:.1f} s)",
              flush=True)
    print(f"[warm] all products ready ({time.perf_counter() - t0:.1f} s total)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
