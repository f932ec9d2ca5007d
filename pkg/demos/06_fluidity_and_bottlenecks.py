"""Watch fluidity expose a throttled node.

Fluidity compares a node's observed output rate f_mu against the rate
its metadata promises (f_e): F = 1 - sqrt(1 - (f_mu/f_e)^2), so a
healthy node reads 1.0 and a starved one 0.0. The square root makes
early shortfalls loud: dropping to 60% of the promised rate already
reads F = 0.2.

Here a throttle node caps an expected 50 Hz stream at 30 frames/s; its
fluidity settles near 1 - sqrt(1 - 0.36) = 0.2 while every healthy node
stays at 1.0.
"""

from streamloom.heuristics import FluidityState, fluidity
from streamloom.heuristics.bench import bench_node

# the closed form, at a few operating points
print("closed form, f_e = 50 Hz:")
for f_mu in (50, 45, 30, 10, 0):
    print(f"  f_mu = {f_mu:>2} Hz -> F = {fluidity(f_mu, 50):.4f}")

# an estimator fed one timestamp per emitted frame converges to the same
state = FluidityState(f_e=50)
t = 0.0
while t < 30.0:
    state.observe(t)  # a node emitting at only 30 frames/s
    t += 1 / 30
print(f"\nwindowed estimate after 30 s at 30/s: F = {state.value(now=30.0):.3f}")

# the same shortfall, measured end to end through the bench harness
throttled = bench_node("throttle", {"rate_hz": 30.0},
                       n_samples=1500, rate_hz=50.0)
healthy = bench_node("smooth", {"cutoff_hz": 5.0},
                     n_samples=1500, rate_hz=50.0)
print(f"\nbench: throttle(30) on a 50 Hz stream -> F = {throttled.f:.3f}")
print(f"bench: smooth on the same stream       -> F = {healthy.f:.3f}")
