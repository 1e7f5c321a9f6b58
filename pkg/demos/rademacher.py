"""Empirical Rademacher complexity against the closed-form bounds.

For the unit path-norm ball of two-layer nets the linear-class value
E ||sum xi_i x_i||_inf / n is computed exactly over all sign vectors.
A finite family of residual nets gives a lower estimate for the
compositional class.
"""
import numpy as np

from barronlab import (ResidualNet, SampleSet, barron_rad_bound, comp_rad_bound,
                       empirical_rad_family, empirical_rad_linear, eval_resnet, resnet_path_norm)

rng = np.random.default_rng(11)
for n in (4, 8, 12, 16):
    S = SampleSet.uniform(n, 3, rng)
    est = empirical_rad_linear(S, Q=1.0)
    print(f"n={n:>2}: linear class {est.value:.4f} ({est.method}), bound {barron_rad_bound(1.0, 3, n):.4f}")

D, n = 4, 10
S = SampleSet.uniform(n, 2, rng)
family = []
for _ in range(100):
    net = ResidualNet(2, rng.normal(size=D), rng.normal(size=(8, D, 3)), rng.normal(size=(8, 3, D)))
    net = ResidualNet(2, net.alpha / resnet_path_norm(net), net.U, net.W)
    family.append(lambda x, net=net: eval_resnet(net, x))
est = empirical_rad_family(family, S)
print(f"100 residual nets, path norm 1: {est.value:.5f} <= {comp_rad_bound(1.0, D, n):.4f}")
