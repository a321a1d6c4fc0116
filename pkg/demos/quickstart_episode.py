"""
One episode, step by step
=========================

Build a small world, assign with the nearest-participant heuristic, and
watch the five reward components move interval by interval.
"""

from mcsim import SimConfig, Simulator
from mcsim.baselines import make_policy

# a 6x6 grid, 4 intervals, up to 3 tasks arriving per interval, 5 workers
config = SimConfig(
    intervals_per_episode=4,
    max_tasks_per_interval=3,
    num_participants=5,
    grid_width=6,
    grid_height=6,
    seed=3,
)

sim = Simulator(config)
policy = make_policy("npf", config)
policy.begin_episode(3)
obs = sim.reset(3)

print(f"interval 0: {len(obs.tasks)} tasks pending, "
      f"{len(obs.participants)} participants")

total = 0.0
while not sim.done:
    action = policy.act(obs, sim)
    transition = sim.step(action)
    obs = transition.observation
    b = transition.breakdown
    total += transition.reward
    print(
        f"interval {obs.interval}: reward={transition.reward:+.4f}  "
        f"assign={b.o_assign_dist:+.3f} trip={b.o_trip_dist:+.3f} "
        f"time={b.o_time:+.3f} fair={b.o_fairness:+.3f} "
        f"energy={b.o_energy:+.3f}"
    )

print(f"episode return: {total:+.4f}")
print("final task counts:", sim.counts())

# the event log is a flat audit trail: interval,kind,task,participant,...
for line in sim.event_log()[:8]:
    print(" ", line)
