"""Rademacher complexity: closed-form bounds and empirical estimates.

Empirical values are computed exactly by enumerating all ``2^n`` sign
vectors when ``n <= 20`` and by seeded Monte Carlo otherwise.  Enumeration
runs over fixed-size blocks of the sign index so the sum is formed in the
same order however the blocks are scheduled.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .rng import as_generator

__all__ = [
    "SampleSet",
    "RadEstimate",
    "barron_rad_bound",
    "comp_rad_bound",
    "empirical_rad_linear",
    "empirical_rad_family",
    "rad_from_values",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 20
MC_DRAWS = 10_000
_BLOCK = 1 << 14


@dataclass(frozen=True, eq=False)
class SampleSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidParameterError("a sample set is a nonempty (n, d) array")
        if np.any(pts < 0) or np.any(pts > 1):
            raise InvalidParameterError("sample points must lie in [0, 1]^d")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        aug = np.hstack([pts, np.ones((pts.shape[0], 1))])
        aug.setflags(write=False)
        object.__setattr__(self, "augmented", aug)

    @classmethod
    def uniform(cls, n, d, rng=None):
        return cls(as_generator(rng).random((n, d)))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class RadEstimate:
    value: float
    method: str
    n_signs: int
    stderr: Optional[float] = None


def barron_rad_bound(Q, d, n):
    """``2 Q sqrt(2 ln(2d) / n)``."""
    if Q < 0 or d < 1 or n < 1:
        raise InvalidParameterError("need Q >= 0, d >= 1, n >= 1")
    return 2.0 * Q * math.sqrt(2.0 * math.log(2 * d) / n)


def comp_rad_bound(Q, D, n):
    """``e^2 Q sqrt(2 ln(D) / n)``; requires ``D >= 2``."""
    if D < 2:
        raise InvalidParameterError("the compositional bound needs D >= 2")
    if Q < 0 or n < 1:
        raise InvalidParameterError("need Q >= 0, n >= 1")
    return math.e ** 2 * Q * math.sqrt(2.0 * math.log(D) / n)


def _signs(start, stop, n):
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return 1.0 - 2.0 * bits


def _workers():
    env = os.environ.get("BARRONLAB_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def _enumerate(stat, n, workers=None):
    """Sum of ``stat(signs)`` over all ``2^n`` sign vectors, block by block."""
    total = 1 << n
    starts = range(0, total, _BLOCK)

    def block(s):
        return float(np.sum(stat(_signs(s, min(s + _BLOCK, total), n))))

    workers = _workers() if workers is None else workers
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            partial = list(pool.map(block, starts))
    else:
        partial = [block(s) for s in starts]
    return math.fsum(partial) / total


def _estimate(stat, n, method, draws, rng):
    if method == "auto":
        method = "exact_enumeration" if n <= ENUMERATION_LIMIT else "monte_carlo"
    if method == "exact_enumeration":
        if n > ENUMERATION_LIMIT:
            raise InvalidParameterError(f"exact enumeration is limited to n <= {ENUMERATION_LIMIT}")
        return RadEstimate(_enumerate(stat, n) / n, method, 1 << n)
    if method != "monte_carlo":
        raise InvalidParameterError(f"unknown method {method!r}")
    gen = as_generator(rng)
    vals = np.concatenate([stat(1.0 - 2.0 * gen.integers(0, 2, (min(_BLOCK, draws - s), n)))
                           for s in range(0, draws, _BLOCK)])
    return RadEstimate(float(vals.mean()) / n, method, draws,
                       float(vals.std(ddof=1) / math.sqrt(draws)) / n)


def empirical_rad_linear(S, Q=1.0, method="auto", draws=MC_DRAWS, rng=None):
    """``Q (1/n) E ||sum_i xi_i x~_i||_inf``.

    This is the Rademacher complexity of the linear class
    ``{x -> w . x~ : ||w||_1 <= Q}`` on ``S`` (the l1 ball's support
    function is the sup-norm).
    """
    X = S.augmented
    est = _estimate(lambda s: np.abs(s @ X).max(axis=1), S.n, method, draws, rng)
    return _scaled(est, Q)


def rad_from_values(F, method="auto", draws=MC_DRAWS, rng=None):
    """Empirical complexity of a finite family given its value matrix ``F (k, n)``."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    return _estimate(lambda s: (s @ F.T).max(axis=1), F.shape[1], method, draws, rng)


def empirical_rad_family(family, S, method="auto", draws=MC_DRAWS, rng=None):
    """``(1/n) E sup_{f in family} sum_i xi_i f(x_i)`` over a finite family.

    This lower-bounds the complexity of any class containing the family.
    """
    family = list(family)
    if not family:
        raise InvalidParameterError("family must be nonempty")
    F = np.stack([np.asarray(f(S.points), dtype=float) for f in family])
    return rad_from_values(F, method, draws, rng)


def _scaled(est, Q):
    se = None if est.stderr is None else Q * est.stderr
    return RadEstimate(Q * est.value, est.method, est.n_signs, se)
