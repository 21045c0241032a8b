#!/usr/bin/env python3
"""Train a small Q-learning agent and compare it against the baselines.

A desk-scale run (120 episodes) that still shows the learning trend and a
shared-seed comparison against the single-relay, random, and exhaustive
policies. Expect a couple of minutes of compute.
"""

import numpy as np

import uavcache as uc
from uavcache import agents, calibrate, evaluate
from uavcache.env import CachingEnv

cfg = calibrate.resolve(uc.default_config()).replace(
    dqn=uc.DqnConfig(episodes=120))
env = CachingEnv(cfg)

print("training (120 episodes x 60 slots)...")
q, curve = agents.train_dqn(env, cfg.dqn, seed=0)
chunk = max(1, len(curve) // 6)
for start in range(0, len(curve), chunk):
    block = curve[start:start + chunk]
    mean = np.mean([p.mean_reward for p in block])
    print(f"  episodes {start:3d}-{start + len(block) - 1:3d}: "
          f"mean reward {mean:.4f}  (epsilon {block[-1].epsilon:.2f})")

agents.save_checkpoint(q, "/tmp/uavcache_demo_checkpoint.npz",
                       meta={"demo": True})
print("checkpoint written to /tmp/uavcache_demo_checkpoint.npz")

print("\nshared-seed evaluation (10 episodes each):")
results = evaluate.evaluate_policies(
    cfg, ["sacrl", "nct", "random", "oracle"], episodes=10, base_seed=500,
    checkpoints={"sacrl": "/tmp/uavcache_demo_checkpoint.npz"})
for name, res in results.items():
    print(f"  {name:7s} mean area {res.mean_area:9.0f} m^2 "
          f"(std {res.std_area:.0f})")
ratios = evaluate.pairwise_ratios(results)
print(f"\n  trained vs single-relay: {ratios['sacrl_vs_nct']:.2f}x")
print(f"  trained vs random:       {ratios['sacrl_vs_random']:.2f}x")
print(f"  trained vs exhaustive:   {ratios['sacrl_vs_oracle']:.2f}x")
