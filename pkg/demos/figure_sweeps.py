#!/usr/bin/env python3
"""Reproduce the three parameter-sweep trends as tidy tables.

Sweeps sensing apothem, per-cell content size, and transmit power with the
per-slot exhaustive policy under common random numbers, printing the mean
effective recovery area per value. Uses a reduced seed count to stay quick;
the acceptance suite runs the full versions.
"""

import uavcache as uc
from uavcache import calibrate, evaluate

base = calibrate.resolve(uc.default_config())
EPISODES = 6


def show(title, rows):
    print(f"\n=== {title} ===")
    print("   value        mean area [m^2]   stderr")
    for r in rows:
        print(f"   {r.value:<12g} {r.mean_area:12.0f}     {r.stderr_area:8.0f}")


# coverage sweep in a coverage-limited regime (light per-cell content)
light = calibrate.resolve(base.replace(content_bits_per_cell=[20e3, 20e3],
                                       beta0=base.beta0, tau_s=base.tau_s))
rows, _ = evaluate.sweep(light, "apothem_m", [100, 150, 200, 250, 300],
                         ["oracle"], episodes=EPISODES, base_seed=11)
show("sensing apothem (20 Kbits/cell)", rows)

rows, _ = evaluate.sweep(base, "content_bits_per_cell",
                         [73e3, 78e3, 83e3], ["oracle"],
                         episodes=EPISODES, base_seed=11)
show("per-cell content size", rows)

rows, _ = evaluate.sweep(base, "tx_power_w", [0.05, 0.10, 0.15], ["oracle"],
                         episodes=EPISODES, base_seed=11)
show("transmit power", rows)

print("\nexpected trends: area grows with apothem and power, shrinks with content size.")
