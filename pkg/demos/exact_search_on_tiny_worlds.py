"""
Exhaustive search as a yardstick
================================

On worlds small enough to enumerate, solve for the best possible action
sequence and measure how much each heuristic leaves on the table.
"""

from mcsim import RewardWeights, SimConfig, Simulator
from mcsim.baselines import make_policy, search_bound, solve
from mcsim.runner import play_episode

# a compact fast world, with service distance weighted up: trips can
# finish inside the horizon, so taking work beats sitting still
config = SimConfig(
    intervals_per_episode=2,
    max_tasks_per_interval=2,
    num_participants=3,
    grid_width=4,
    grid_height=4,
    speed_min=3.0,
    speed_max=5.0,
    cancel_prob=0.0,
    seed=0,
    weights=RewardWeights(1.0, 4.0, 0.5, 0.0, 0.5),
)
print("sequences to enumerate:", search_bound(config))

for seed in range(5):
    sim = Simulator(config)
    sim.reset(seed)
    best, plan = solve(sim)
    line = [f"seed {seed}: optimal {best:+.4f}"]
    for name in ("npf", "napf", "wpf"):
        result = play_episode(Simulator(config), make_policy(name, config), seed)
        gap = best - result.episode_return
        line.append(f"{name} -{gap:.4f}" if gap > 1e-12 else f"{name} ties")
    print("  ".join(line))
