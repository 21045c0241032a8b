#!/usr/bin/env python3
"""Step the decision environment slot by slot and inspect what it reports.

Runs a handful of slots under the per-slot exhaustive-search policy and
prints the chosen joint action (scheduling, bandwidths, coding levels),
the eligible/selected drone counts, and the recovered map area.
"""

import numpy as np

import uavcache as uc
from uavcache import calibrate
from uavcache.env import CachingEnv

cfg = calibrate.resolve(uc.default_config())
env = CachingEnv(cfg)
state = env.reset(seed=42)

print(f"action space: {len(env.action_space)} joint decisions "
      f"(scheduling x bandwidth x k per sensing drone)")
print(f"initial state (recovery probs + normalized fragment sizes): {np.round(state, 3)}")
print()
print("slot  action                                  elig  sel   area[m^2]  reward")
total_area = 0.0
for _ in range(10):
    action, _ = env.exhaustive_slot_oracle()
    state, reward, metrics, done = env.step(action)
    desc = " ".join(
        f"SU{i}:{'on ' if x else 'off'} B={b / 1e6:.0f}MHz k={k}"
        for i, (x, b, k) in enumerate(zip(action.x, action.bandwidth_hz, action.k)))
    total_area += metrics.area_m2
    print(f"{metrics.slot:4d}  {desc}  {metrics.eligible_counts.tolist()}"
          f"  {metrics.selected_counts.tolist()}  {metrics.area_m2:9.0f}  {reward:.4f}")

print(f"\ncumulative area over 10 slots: {total_area:.0f} m^2 "
      f"(target area is {cfg.area_extent_m[0] * cfg.area_extent_m[1]:.0f} m^2)")
print("\nnote: world dynamics ignore the action, so the exhaustive per-slot")
print("search above is the exact optimal policy this scenario admits.")
