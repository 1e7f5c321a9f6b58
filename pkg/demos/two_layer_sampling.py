"""Approximate a two-layer ReLU function by sampled networks.

A random 16-atom measure defines f.  Networks with m neurons drawn from it
approximate f with squared L2 error decaying like 1/m; drawing from the
symmetrized measure keeps every network's path norm equal to the Barron
norm.
"""
import numpy as np

from barronlab import (QuadratureSpec, barron_norm, l2_distance, path_norm_two_layer,
                       random_measure, sample_network, symmetrize)

rng = np.random.default_rng(1)
mu = random_measure(rng, dim=2, n_atoms=16)
sym = symmetrize(mu)
Q = barron_norm(mu, 1)
print(f"Barron norm B_1 = {Q:.4f}; after symmetrization B_inf = {barron_norm(sym, np.inf):.4f}")

quad = QuadratureSpec("monte_carlo", points=4096, seed=0)
print(f"{'m':>5} {'mean err^2':>12} {'3Q^2/m':>10} {'path norm':>10}")
for m in (8, 32, 128, 512):
    errs = [l2_distance(mu, sample_network(sym, m, rng), quad, dim=2) ** 2 for _ in range(50)]
    net = sample_network(sym, m, rng)
    print(f"{m:>5} {np.mean(errs):>12.3e} {3 * Q ** 2 / m:>10.3e} {path_norm_two_layer(net):>10.4f}")
