"""Atomic parameter measures for two-layer ReLU representations.

A function in Barron space is written as the expectation

    f(x) = E_rho[ a * relu(b.x + c) ]

over a probability measure ``rho`` on neuron parameters ``(a, b, c)``.  Here
``rho`` is always a finite atomic measure, stored as parallel arrays.  The
norms computed are those OF the given representation; they upper-bound the
infimum-defined Barron norm.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "NeuronAtom",
    "TwoLayerMeasure",
    "TwoLayerNet",
    "relu",
    "canonicalize_atom",
    "barron_norm",
    "symmetrize",
    "measure_from_network",
    "random_measure",
]

WEIGHT_TOL = 1e-12


def relu(x):
    return np.maximum(x, 0.0)


def _frozen(arr, ndim, name):
    arr = np.array(arr, dtype=float)
    if arr.ndim != ndim:
        raise InvalidParameterError(f"{name} must have {ndim} dimension(s), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != dim:
        raise InvalidParameterError(f"points have dimension {x.shape[-1]}, expected {dim}")
    return x, single


def _scale(inner, bias):
    """``||b||_1 + |c|`` along the last axis of ``inner``."""
    return np.abs(inner).sum(axis=-1) + np.abs(bias)


@dataclass(frozen=True, eq=False)
class NeuronAtom:
    """One point mass of a two-layer measure: ``weight * delta(a, b, c)``."""

    weight: float
    outer: float
    inner: np.ndarray
    bias: float

    def __post_init__(self):
        vals = (self.weight, self.outer, self.bias)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidParameterError("atom has non-finite entries")
        if self.weight < 0:
            raise InvalidParameterError("atom weight must be nonnegative")
        object.__setattr__(self, "inner", _frozen(self.inner, 1, "inner"))

    @property
    def dim(self):
        return self.inner.shape[0]

    @property
    def is_canonical(self):
        s = _scale(self.inner, self.bias)
        if s == 0:
            return self.outer == 0
        return abs(s - 1.0) <= 1e-12

    def __call__(self, x):
        """Evaluate ``a * relu(b.x + c)`` (weight is ignored)."""
        x, single = _as_points(x, self.dim)
        out = self.outer * relu(x @ self.inner + self.bias)
        return out[0] if single else out


@dataclass(frozen=True, eq=False)
class TwoLayerMeasure:
    """Finite atomic probability measure over neuron parameters.

    Parameters
    ----------
    weights : (k,) array
        Probability masses, summing to one.
    outer : (k,) array
        Outer coefficients ``a``.
    inner : (k, d) array
        Inner weights ``b``.
    bias : (k,) array
        Biases ``c``.
    """

    weights: np.ndarray
    outer: np.ndarray
    inner: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights, 1, "weights")
        a = _frozen(self.outer, 1, "outer")
        b = _frozen(self.inner, 2, "inner")
        c = _frozen(self.bias, 1, "bias")
        k = w.shape[0]
        if k == 0:
            raise InvalidParameterError("a measure needs at least one atom")
        if a.shape[0] != k or b.shape[0] != k or c.shape[0] != k:
            raise InvalidParameterError("atom arrays have inconsistent lengths")
        if np.any(w < 0):
            raise InvalidParameterError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidParameterError(f"weights sum to {w.sum()!r}, not 1")
        for name, arr in zip(("weights", "outer", "inner", "bias"), (w, a, b, c)):
            object.__setattr__(self, name, arr)

    @classmethod
    def from_atoms(cls, atoms, renormalize=False):
        atoms = list(atoms)
        if not atoms:
            raise InvalidParameterError("a measure needs at least one atom")
        dims = {at.dim for at in atoms}
        if len(dims) != 1:
            raise InvalidParameterError(f"atoms have mixed dimensions {sorted(dims)}")
        w = np.array([at.weight for at in atoms])
        if renormalize:
            w = w / w.sum()
        return cls(w, [at.outer for at in atoms], np.stack([at.inner for at in atoms]),
                   [at.bias for at in atoms])

    @classmethod
    def renormalized(cls, weights, outer, inner, bias):
        """Build a measure after rescaling ``weights`` to sum exactly to one."""
        weights = np.asarray(weights, dtype=float)
        return cls(weights / weights.sum(), outer, inner, bias)

    @classmethod
    def zero(cls, dim):
        """The measure representing f = 0: a single zero atom."""
        return cls([1.0], [0.0], np.zeros((1, dim)), [0.0])

    @property
    def dim(self):
        return self.inner.shape[1]

    @property
    def atoms(self):
        return [NeuronAtom(w, a, b, c) for w, a, b, c in
                zip(self.weights, self.outer, self.inner, self.bias)]

    def __len__(self):
        return self.weights.shape[0]

    def atom_values(self, x):
        """Matrix of ``a_j relu(b_j.x_i + c_j)``, shape ``(n, k)``."""
        x, _ = _as_points(x, self.dim)
        return self.outer * relu(x @ self.inner.T + self.bias)

    def __call__(self, x):
        """Evaluate the represented function at a point or an ``(n, d)`` batch."""
        x, single = _as_points(x, self.dim)
        out = self.atom_values(x) @ self.weights
        return out[0] if single else out

    def path_scales(self):
        """Per-atom ``|a| (||b||_1 + |c|)``."""
        return np.abs(self.outer) * _scale(self.inner, self.bias)

    def canonical(self):
        """Apply :func:`canonicalize_atom` to every atom (weights unchanged)."""
        s = _scale(self.inner, self.bias)
        nz = s > 0
        safe = np.where(nz, s, 1.0)
        return TwoLayerMeasure(self.weights, np.where(nz, self.outer * s, 0.0),
                               self.inner / safe[:, None], self.bias / safe)


@dataclass(frozen=True, eq=False)
class TwoLayerNet:
    """Parameters of ``f_m(x) = (1/m) sum_j a_j relu(b_j.x + c_j)``."""

    outer: np.ndarray
    inner: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        a = _frozen(self.outer, 1, "outer")
        b = _frozen(self.inner, 2, "inner")
        c = _frozen(self.bias, 1, "bias")
        if a.shape[0] < 1:
            raise InvalidParameterError("a network needs at least one neuron")
        if b.shape[0] != a.shape[0] or c.shape[0] != a.shape[0]:
            raise InvalidParameterError("neuron arrays have inconsistent lengths")
        for name, arr in zip(("outer", "inner", "bias"), (a, b, c)):
            object.__setattr__(self, name, arr)

    @property
    def dim(self):
        return self.inner.shape[1]

    @property
    def width(self):
        return self.outer.shape[0]

    def __call__(self, x):
        x, single = _as_points(x, self.dim)
        out = relu(x @ self.inner.T + self.bias) @ self.outer / self.width
        return out[0] if single else out


def canonicalize_atom(atom):
    """Rescale an atom so that ``||b||_1 + |c| = 1``.

    ReLU is positively homogeneous, so ``a relu(b.x + c)`` is unchanged when
    ``a`` is multiplied and ``(b, c)`` divided by the same positive scalar.
    An atom with ``b = 0`` and ``c = 0`` becomes the zero atom.

    Examples
    --------
    >>> at = canonicalize_atom(NeuronAtom(1.0, 2.0, [1.0, 0.0], 1.0))
    >>> at.outer, list(at.inner), at.bias
    (4.0, [0.5, 0.0], 0.5)
    """
    if not isinstance(atom, NeuronAtom):
        raise InvalidParameterError("expected a NeuronAtom")
    s = float(_scale(atom.inner, atom.bias))
    if s == 0.0:
        return NeuronAtom(atom.weight, 0.0, np.zeros_like(atom.inner), 0.0)
    return NeuronAtom(atom.weight, atom.outer * s, atom.inner / s, atom.bias / s)


def barron_norm(measure, p=1.0):
    """``(E |a|^p (||b||_1 + |c|)^p)^(1/p)`` for this representation.

    ``p = inf`` gives the largest path scale among atoms of positive weight.
    """
    p = float(p)
    if not p >= 1.0:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    scales = measure.path_scales()
    if np.isinf(p):
        return float(scales[measure.weights > 0].max(initial=0.0))
    if p == 1.0:
        return float(measure.weights @ scales)
    top = scales.max()
    if top == 0.0:
        return 0.0
    # factor out the largest scale so s**p neither overflows nor underflows
    return float(top * (measure.weights @ (scales / top) ** p) ** (1.0 / p))


def symmetrize(measure):
    """Equivalent measure whose atoms all carry the same ``|a|``.

    Mass is moved in proportion to ``|a| (||b||_1 + |c|)``, directions are
    canonicalized, and every outer coefficient becomes ``sign(a) * M`` with
    ``M = E|a| (||b||_1 + |c|)``.  The output has the same Barron norm for
    every p, equal to the input's p = 1 norm.
    """
    mass = measure.weights * measure.path_scales()
    total = mass.sum()
    if total == 0.0:
        return TwoLayerMeasure.zero(measure.dim)
    keep = mass > 0
    can = measure.canonical()
    return TwoLayerMeasure.renormalized(
        mass[keep], np.sign(can.outer[keep]) * total, can.inner[keep], can.bias[keep])


def measure_from_network(net):
    """Probability measure reproducing a finite network exactly.

    After canonicalizing each neuron, neuron ``k`` gets mass ``|a_k| / A``
    and outer value ``sign(a_k) A / m`` where ``A = sum |a_k|``.
    """
    s = _scale(net.inner, net.bias)
    nz = s > 0
    safe = np.where(nz, s, 1.0)
    a = np.where(nz, net.outer * s, 0.0)
    total = np.abs(a).sum()
    if total == 0.0:
        return TwoLayerMeasure.zero(net.dim)
    keep = a != 0
    return TwoLayerMeasure.renormalized(
        np.abs(a[keep]), np.sign(a[keep]) * total / net.width,
        net.inner[keep] / safe[keep, None], net.bias[keep] / safe[keep])


def random_measure(rng, dim, n_atoms, scale=1.0, canonical=True, positive=False):
    """Random atomic measure, handy for tests and studies.

    Weights are Dirichlet(1), ``a`` uniform on ``[-scale, scale]`` (or
    ``[0, scale]`` when ``positive``), directions uniform in a cube and
    optionally projected onto the canonical sphere ``||b||_1 + |c| = 1``.
    """
    w = rng.dirichlet(np.ones(n_atoms))
    lo = 0.0 if positive else -scale
    a = rng.uniform(lo, scale, n_atoms)
    b = rng.uniform(-1.0, 1.0, (n_atoms, dim))
    c = rng.uniform(-1.0, 1.0, n_atoms)
    if canonical:
        s = _scale(b, c)
        b, c = b / s[:, None], c / s
    return TwoLayerMeasure.renormalized(w, a, b, c)
