"""Spectral upper bound on the Barron norm and the random-feature kernel.

For f(x) = cos(w.x) the spectral quantity is gamma = ||w||_1^2, so the
Barron norm is at most 2 ||w||_1^2 + 2 |f(0)| (the gradient at 0 vanishes).
The kernel k_pi averages relu features over a measure on directions.
"""
import numpy as np

from barronlab import TargetFunction, kernel_gram, random_measure, spectral_bound

w = np.array([1.5, -0.5])
target = TargetFunction(2, lambda x: np.cos(np.atleast_2d(x) @ w),
                        fourier_freqs=w[None, :], fourier_amps=[1.0])
gamma, bound = spectral_bound(target)
print(f"gamma = {gamma:.4f}, spectral bound on the Barron norm = {bound:.4f}")

rng = np.random.default_rng(0)
pi = random_measure(rng, dim=2, n_atoms=200)
x = rng.random((6, 2))
K = kernel_gram(pi, x)
print("Gram matrix eigenvalues:", np.round(np.linalg.eigvalsh(K), 5))
