"""Two-layer functions inside the compositional space.

embed_barron turns a two-layer measure into a flow whose output matches it
exactly and whose tilde-D1 norm is 2 B_1 + 1.  compose_barron chains two
such flows on consecutive time intervals to represent h(g(x)).
"""
import numpy as np

from barronlab import barron_norm, comp_norms, compose_barron, embed_barron, random_measure

rng = np.random.default_rng(7)
mu = random_measure(rng, dim=3, n_atoms=5)
fn = embed_barron(mu)
x = rng.random((1000, 3))
print(f"embedding: max |f_flow - f| = {np.max(np.abs(fn(x) - mu(x))):.1e}")
print(f"tilde dp(1) = {comp_norms(fn, 1)[1]:.6f}, 2 B_1 + 1 = {2 * barron_norm(mu, 1) + 1:.6f}")

g = random_measure(rng, dim=2, n_atoms=4, positive=True)  # values stay in [0, 1]
h = random_measure(rng, dim=1, n_atoms=4)
comp = compose_barron(g, h)
x = rng.random((200, 2))
err = np.max(np.abs(comp(x, steps=512) - h(g(x)[:, None])))
dp = comp_norms(comp, 1)[0]
bound = (barron_norm(h, 1) + 1) * (barron_norm(g, 1) + 1)
print(f"composition: max error {err:.1e}, dp(1) = {dp:.4f} <= {bound:.4f}")
