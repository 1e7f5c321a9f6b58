"""Deep residual networks as samples of a continuous-depth flow.

A constant 3-atom schedule drives dz/dt = E U relu(W z).  Residual networks
of depth L drawn from it approach the flow, and their path norms approach
the flow's dp(1) norm, which equals a matrix exponential for a constant
schedule.
"""
import numpy as np

from barronlab import (CompositionalFunction, comp_norms, eval_resnet, matrix_exp_nonneg,
                       random_schedule, resnet_path_norm, sample_resnet)

rng = np.random.default_rng(3)
sched = random_schedule(rng, D=4, m=2, n_atoms=3, scale=0.5)
fn = CompositionalFunction(2, np.ones(4), sched)
dp, tilde = comp_norms(fn, 1)
closed = np.ones(4) @ matrix_exp_nonneg(sched.segments[0].norm_rate(1)) @ np.ones(4)
print(f"dp(1) = {dp:.6f} by ODE, {closed:.6f} by matrix exponential; tilde dp(1) = {tilde:.4f}")

x = np.array([0.3, 0.6])
exact = fn(x, steps=2048)
for L in (4, 16, 64, 256):
    nets = [sample_resnet(fn, L, rng) for _ in range(40)]
    err = np.mean([(eval_resnet(n, x) - exact) ** 2 for n in nets])
    pn = np.mean([resnet_path_norm(n) for n in nets])
    print(f"L={L:>4}: mean squared output error {err:.3e}, mean path norm {pn:.5f}")
