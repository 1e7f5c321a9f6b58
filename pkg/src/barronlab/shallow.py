"""Two-layer networks: evaluation, path norm, Monte Carlo sampling, L2
distances, spectral Barron bounds and the random-feature kernel ``k_pi``."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, UnsupportedTargetError
from .measures import TwoLayerMeasure, TwoLayerNet, relu, _as_points
from .rng import as_generator

__all__ = [
    "TwoLayerNet",
    "TargetFunction",
    "QuadratureSpec",
    "eval_two_layer",
    "path_norm_two_layer",
    "sample_network",
    "sample_indices",
    "l2_distance",
    "spectral_bound",
    "kernel_kpi",
    "kernel_gram",
]


def eval_two_layer(net, x):
    """Value of ``(1/m) sum_j a_j relu(b_j.x + c_j)`` at ``x`` (point or batch)."""
    return net(x)


def path_norm_two_layer(net):
    """``(1/m) sum_j |a_j| (||b_j||_1 + |c_j|)``."""
    scales = np.abs(net.inner).sum(axis=1) + np.abs(net.bias)
    return float(np.abs(net.outer) @ scales / net.width)


def sample_indices(weights, m, rng):
    """Draw ``m`` atom indices by inverse CDF over ``weights``."""
    cdf = np.cumsum(weights)
    u = rng.random(m) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def sample_network(measure, m, rng=None):
    """Network of ``m`` neurons drawn i.i.d. from ``measure``."""
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    if not isinstance(measure, TwoLayerMeasure) or len(measure) == 0:
        raise InvalidParameterError("cannot sample from an empty measure")
    idx = sample_indices(measure.weights, m, as_generator(rng))
    return TwoLayerNet(measure.outer[idx], measure.inner[idx], measure.bias[idx])


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature for the uniform measure on ``[0, 1]^d``.

    ``tensor_grid`` uses the midpoint rule with ``round(points ** (1/d))``
    nodes per axis; ``monte_carlo`` draws ``points`` uniform nodes from
    ``seed``.
    """

    scheme: str = "monte_carlo"
    points: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("monte_carlo", "tensor_grid"):
            raise InvalidParameterError(f"unknown quadrature scheme {self.scheme!r}")
        if self.points < 1:
            raise InvalidParameterError("quadrature needs at least one point")

    def nodes(self, dim):
        if self.scheme == "monte_carlo":
            return as_generator(self.seed).random((self.points, dim))
        per_axis = max(1, int(round(self.points ** (1.0 / dim))))
        axis = (np.arange(per_axis) + 0.5) / per_axis
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


def l2_distance(f, g, quad, dim=None):
    """``(integral |f - g|^2 dmu)^(1/2)`` under uniform ``mu`` on the cube.

    ``f`` and ``g`` map an ``(n, d)`` array to ``(n,)`` values.  ``dim`` may
    be omitted when either argument carries a ``dim`` attribute.
    """
    if dim is None:
        dim = getattr(f, "dim", None) or getattr(g, "dim", None)
    if dim is None:
        raise InvalidParameterError("cannot infer the input dimension")
    x = quad.nodes(dim)
    diff = np.asarray(f(x), dtype=float) - np.asarray(g(x), dtype=float)
    return float(np.sqrt(np.mean(diff ** 2)))


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """A closed-form target on ``[0, 1]^d`` with optional side data.

    Fourier data is either a finite list of atoms (``fourier_freqs`` of
    shape ``(k, d)`` with amplitudes ``fourier_amps``) such that
    ``f(x) = sum_k amp_k cos(omega_k . x)``, or a ``spectral_density``
    callable ``omega -> fhat(omega)`` on ``R^d`` (integrated numerically;
    practical for d <= 2).
    """

    dim: int
    evaluator: Callable
    representation: Optional[TwoLayerMeasure] = None
    fourier_freqs: Optional[np.ndarray] = None
    fourier_amps: Optional[np.ndarray] = None
    spectral_density: Optional[Callable] = None
    value_at_zero: Optional[float] = None
    grad_at_zero: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.representation is not None:
            probe = np.random.default_rng(12345).random((64, self.dim))
            gap = np.max(np.abs(self(probe) - self.representation(probe)))
            if gap > 1e-10:
                raise InvalidParameterError(
                    f"evaluator disagrees with its representation by {gap:.3g}")

    def __call__(self, x):
        x, single = _as_points(x, self.dim)
        out = np.asarray(self.evaluator(x), dtype=float)
        return out[0] if single else out

    @property
    def has_fourier(self):
        return self.fourier_freqs is not None or self.spectral_density is not None

    def gamma(self):
        """``integral ||omega||_1^2 |fhat(omega)| domega`` for the supplied data."""
        if self.fourier_freqs is not None:
            om = np.atleast_2d(np.asarray(self.fourier_freqs, dtype=float))
            amps = np.asarray(self.fourier_amps, dtype=float)
            return float(np.abs(amps) @ np.abs(om).sum(axis=1) ** 2)
        if self.spectral_density is None:
            raise UnsupportedTargetError("target has no Fourier data")

        def integrand(*om):
            om = np.array(om)
            return np.abs(om).sum() ** 2 * abs(self.spectral_density(om))

        val, _ = integrate.nquad(integrand, [(-np.inf, np.inf)] * self.dim,
                                 opts={"epsabs": 1e-12, "epsrel": 1e-12, "limit": 200})
        return float(val)

    def f0(self):
        if self.value_at_zero is not None:
            return float(self.value_at_zero)
        return float(self(np.zeros(self.dim)))

    def grad0(self, h=1e-6):
        if self.grad_at_zero is not None:
            return np.asarray(self.grad_at_zero, dtype=float)
        # central differences; the evaluator must accept points just outside the cube
        eye = np.eye(self.dim) * h
        return (np.asarray(self.evaluator(eye)) - np.asarray(self.evaluator(-eye))) / (2 * h)


def spectral_bound(target):
    """Return ``(gamma, 2 gamma + 2 ||grad f(0)||_1 + 2 |f(0)|)``.

    ``gamma`` is computed for the one Fourier extension supplied with the
    target, so both numbers are upper bounds on the quantities defined by an
    infimum over extensions.
    """
    if not target.has_fourier:
        raise UnsupportedTargetError("spectral_bound needs Fourier data")
    gamma = target.gamma()
    bound = 2 * gamma + 2 * float(np.abs(target.grad0()).sum()) + 2 * abs(target.f0())
    return gamma, bound


def _directions(pi):
    return np.hstack([pi.inner, pi.bias[:, None]])


def _augment(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.hstack([x, np.ones((x.shape[0], 1))])


def kernel_kpi(pi, x, x2):
    """``E_{w ~ pi} relu(w.x~) relu(w.x2~)`` with ``x~ = (x, 1)``.

    Only the directions ``w = (b, c)`` and weights of ``pi`` are used.
    """
    w = _directions(pi)
    f1 = relu(_augment(x) @ w.T)[0]
    f2 = relu(_augment(x2) @ w.T)[0]
    return float(pi.weights @ (f1 * f2))


def kernel_gram(pi, x):
    """Gram matrix ``K[i, j] = k_pi(x_i, x_j)`` for an ``(n, d)`` batch."""
    feats = relu(_augment(x) @ _directions(pi).T)
    return (feats * pi.weights) @ feats.T
