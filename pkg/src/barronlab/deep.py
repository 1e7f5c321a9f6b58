"""Residual networks and their continuous-depth limits.

A *schedule* is a piecewise-constant family ``{rho_t, t in [0, 1]}`` of
finite atomic measures over layer pairs ``(U, W)`` with ``U`` of shape
``(D, m)`` and ``W`` of shape ``(m, D)``.  Together with a readout ``alpha``
it defines

    z(x, 0) = V x,    dz/dt = E_{rho_t} U relu(W z),    f(x) = alpha . z(x, 1)

with ``V = [I_d; 0]``.  A depth-L residual network is the forward-Euler
skeleton of the same flow with layer weights drawn from ``rho_{l/L}``.

Constructions that need a constant input coordinate (the Barron embedding
and composition) set ``lift=True``: the initial state is then ``V x + e_d``,
i.e. the augmented input ``(x, 1)`` padded with zeros.
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import ndtr

from .errors import DivergenceError, InvalidParameterError, RangeError
from .measures import relu, _as_points
from .rng import as_generator
from .shallow import QuadratureSpec, sample_indices

__all__ = [
    "LayerAtom",
    "Segment",
    "ResidualSchedule",
    "CompositionalFunction",
    "ResidualNet",
    "FlowResult",
    "LipschitzEstimate",
    "eval_resnet",
    "resnet_path_norm",
    "flow_z",
    "flow_Np",
    "comp_norms",
    "matrix_exp_nonneg",
    "schedule_lipschitz",
    "embed_barron",
    "compose_barron",
    "sample_resnet",
    "schedule_from_resnet",
    "smoothed_relu",
    "smoothed_activation",
    "canonicalize_layer_atoms",
    "random_schedule",
    "inverse_dinf_bound",
    "batch_resnet_states",
]

DEFAULT_STEPS = 256
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _finite(arr, ndim, name):
    arr = np.array(arr, dtype=float)
    if arr.ndim != ndim:
        raise InvalidParameterError(f"{name} must have {ndim} dimensions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LayerAtom:
    weight: float
    U: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise InvalidParameterError("layer atom weight must be finite and nonnegative")
        object.__setattr__(self, "U", _finite(self.U, 2, "U"))
        object.__setattr__(self, "W", _finite(self.W, 2, "W"))
        if self.U.shape[::-1] != self.W.shape:
            raise InvalidParameterError(f"U {self.U.shape} and W {self.W.shape} do not pair up")


@dataclass(frozen=True, eq=False)
class Segment:
    """Atomic measure ``rho_t`` held constant for ``t`` in ``[t0, t1)``.

    ``U`` is ``(k, D, m)``, ``W`` is ``(k, m, D)``, ``weights`` is ``(k,)``.
    """

    t0: float
    t1: float
    weights: np.ndarray
    U: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        w = _finite(self.weights, 1, "weights")
        U = _finite(self.U, 3, "U")
        W = _finite(self.W, 3, "W")
        if not (len(w) == U.shape[0] == W.shape[0]) or len(w) == 0:
            raise InvalidParameterError("segment atom arrays have inconsistent lengths")
        if U.shape[1:] != W.shape[:0:-1]:
            raise InvalidParameterError(f"U {U.shape[1:]} and W {W.shape[1:]} do not pair up")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("segment weights must be nonnegative and sum to 1")
        if not 0.0 <= self.t0 < self.t1 <= 1.0:
            raise InvalidParameterError(f"bad segment interval [{self.t0}, {self.t1})")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "W", W)
        # stacked forms: relu(z @ Wst.T) * wrep @ Ust is the mean field
        k, D, m = U.shape
        object.__setattr__(self, "_Wst", W.reshape(k * m, D))
        object.__setattr__(self, "_Ust", (U.transpose(0, 2, 1) * w[:, None, None]).reshape(k * m, D))

    @classmethod
    def from_atoms(cls, t0, t1, atoms, renormalize=False):
        atoms = list(atoms)
        w = np.array([a.weight for a in atoms], dtype=float)
        if renormalize:
            w = w / w.sum()
        return cls(t0, t1, w, np.stack([a.U for a in atoms]), np.stack([a.W for a in atoms]))

    @property
    def atoms(self):
        return [LayerAtom(w, U, W) for w, U, W in zip(self.weights, self.U, self.W)]

    @property
    def width(self):
        return self.t1 - self.t0

    def field(self, z, activation=relu):
        """Mean field ``E U act(W z)`` for a batch ``z`` of shape ``(n, D)``."""
        return activation(z @ self._Wst.T) @ self._Ust

    def abs_products(self):
        """``|U_k| |W_k|`` for every atom, shape ``(k, D, D)``."""
        return np.abs(self.U) @ np.abs(self.W)

    def norm_rate(self, p=1.0):
        """Entrywise ``(E (|U||W|)^p)^(1/p)``; ``p = inf`` takes the entrywise max."""
        P = self.abs_products()
        p = float(p)
        if np.isinf(p):
            return P[self.weights > 0].max(axis=0)
        if p == 1.0:
            return np.tensordot(self.weights, P, axes=1)
        return np.tensordot(self.weights, P ** p, axes=1) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class ResidualSchedule:
    D: int
    m: int
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InvalidParameterError("a schedule needs at least one segment")
        if segs[0].t0 != 0.0 or segs[-1].t1 != 1.0:
            raise InvalidParameterError("segments must cover [0, 1]")
        for a, b in zip(segs, segs[1:]):
            if a.t1 != b.t0:
                raise InvalidParameterError(f"segments are not contiguous at t={a.t1}")
        for s in segs:
            if s.U.shape[1:] != (self.D, self.m):
                raise InvalidParameterError(f"segment U has shape {s.U.shape[1:]}, expected {(self.D, self.m)}")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, atoms_or_segment):
        """Single-segment schedule from a list of :class:`LayerAtom`."""
        seg = Segment.from_atoms(0.0, 1.0, atoms_or_segment)
        return cls(seg.U.shape[1], seg.U.shape[2], (seg,))

    @classmethod
    def zero(cls, D, m):
        return cls(D, m, (Segment(0.0, 1.0, [1.0], np.zeros((1, D, m)), np.zeros((1, m, D))),))

    @property
    def breakpoints(self):
        return np.array([s.t0 for s in self.segments] + [1.0])

    def segment_index(self, t):
        """Index of the segment containing ``t`` (right-open; ``t = 1`` is the last)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)


@dataclass(frozen=True, eq=False)
class CompositionalFunction:
    """``f(x) = alpha . z(x, 1)`` driven by a schedule."""

    d: int
    alpha: np.ndarray
    schedule: ResidualSchedule
    lift: bool = False

    def __post_init__(self):
        alpha = _finite(self.alpha, 1, "alpha")
        if alpha.shape[0] != self.schedule.D:
            raise InvalidParameterError("alpha length must equal the schedule width D")
        if self.schedule.D < self.d + (1 if self.lift else 0):
            raise InvalidParameterError("state width D is too small for the input")
        object.__setattr__(self, "alpha", alpha)

    @property
    def D(self):
        return self.schedule.D

    @property
    def dim(self):
        return self.d

    def initial_state(self, x):
        return _initial_state(x, self.d, self.D, self.lift)

    def __call__(self, x, steps=DEFAULT_STEPS, activation=relu):
        res = flow_z(self, x, steps=steps, activation=activation)
        return res.state @ self.alpha


@dataclass(frozen=True, eq=False)
class ResidualNet:
    """Depth-L residual network with stacked layers ``U (L, D, m)``, ``W (L, m, D)``."""

    d: int
    alpha: np.ndarray
    U: np.ndarray
    W: np.ndarray
    lift: bool = False

    def __post_init__(self):
        alpha = _finite(self.alpha, 1, "alpha")
        U = _finite(self.U, 3, "U")
        W = _finite(self.W, 3, "W")
        if U.shape[0] < 1:
            raise InvalidParameterError("a residual network needs L >= 1")
        if U.shape[0] != W.shape[0] or U.shape[1:] != W.shape[:0:-1]:
            raise InvalidParameterError("layer shapes are inconsistent")
        if alpha.shape[0] != U.shape[1]:
            raise InvalidParameterError("alpha length must equal D")
        if U.shape[1] < self.d + (1 if self.lift else 0):
            raise InvalidParameterError("state width D is too small for the input")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "W", W)

    L = property(lambda self: self.U.shape[0])
    D = property(lambda self: self.U.shape[1])
    m = property(lambda self: self.U.shape[2])
    dim = property(lambda self: self.d)

    @property
    def layers(self):
        return list(zip(self.U, self.W))

    def states(self, x, activation=relu):
        """Terminal states ``z_{L,L}(x)``."""
        z, single = _initial_state_batch(x, self.d, self.D, self.lift)
        L = self.L
        for U, W in zip(self.U, self.W):
            z = z + activation(z @ W.T) @ U.T / L
        if not np.all(np.isfinite(z)):
            raise DivergenceError("residual recursion produced non-finite values")
        return z[0] if single else z

    def __call__(self, x, activation=relu):
        return self.states(x, activation) @ self.alpha


@dataclass(frozen=True, eq=False)
class FlowResult:
    state: np.ndarray
    steps: int
    integrator: str = "rk4"


@dataclass(frozen=True)
class LipschitzEstimate:
    """Lipschitz coefficient and norm of a schedule.

    For schedules with jumps the true coefficient is infinite; ``coefficient``
    then holds the largest difference quotient between adjacent segment
    midpoints and ``discontinuous`` is set, so it is only a lower estimate.
    """

    coefficient: float
    norm: float
    discontinuous: bool


def _initial_state_batch(x, d, D, lift):
    x, single = _as_points(x, d)
    z = np.zeros((x.shape[0], D))
    z[:, :d] = x
    if lift:
        z[:, d] = 1.0
    return z, single


def _initial_state(x, d, D, lift):
    z, single = _initial_state_batch(x, d, D, lift)
    return z[0] if single else z


def eval_resnet(net, x):
    """``alpha . z_{L,L}(x)`` with ``z_{l+1} = z_l + U_l relu(W_l z_l) / L``."""
    return net(x)


def resnet_path_norm(net):
    """``|alpha|^T (I + |U_{L-1}||W_{L-1}|/L) ... (I + |U_0||W_0|/L) e``.

    Evaluated as a row vector from the left, so only nonnegative
    vector-matrix products are formed.
    """
    v = np.abs(net.alpha)
    L = net.L
    for U, W in zip(net.U[::-1], net.W[::-1]):
        v = v + (v @ np.abs(U)) @ np.abs(W) / L
    return float(v.sum())


def _segment_steps(schedule, steps):
    return [max(1, int(round(steps * s.width))) for s in schedule.segments]


def _rk4(rhs, y, h, n):
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def flow_z(fn, x, steps=DEFAULT_STEPS, activation=relu):
    """Integrate ``dz/dt = E_{rho_t} U act(W z)`` from ``t = 0`` to ``1``.

    Classical fourth-order Runge-Kutta; each segment receives about
    ``steps * width`` equal steps (at least one), so no step straddles a
    discontinuity of the schedule.
    """
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    z, single = _initial_state_batch(x, fn.d, fn.D, fn.lift)
    counts = _segment_steps(fn.schedule, steps)
    for seg, n in zip(fn.schedule.segments, counts):
        z = _rk4(lambda y: seg.field(y, activation), z, seg.width / n, n)
        if not np.all(np.isfinite(z)):
            raise DivergenceError(f"state flow diverged in segment [{seg.t0}, {seg.t1})")
    return FlowResult(z[0] if single else z, sum(counts))


def flow_Np(schedule, p=1.0, steps=DEFAULT_STEPS):
    """Integrate the norm flow ``dN/dt = (E (|U||W|)^p)^(1/p) N`` from ``N(0) = e``."""
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    if not float(p) >= 1.0:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    N = np.ones(schedule.D)
    counts = _segment_steps(schedule, steps)
    for seg, n in zip(schedule.segments, counts):
        A = seg.norm_rate(p)
        N = _rk4(lambda y: A @ y, N, seg.width / n, n)
        if not np.all(np.isfinite(N)):
            raise DivergenceError("norm flow diverged")
    return FlowResult(N, sum(counts))


def comp_norms(fn, p=1.0, steps=DEFAULT_STEPS):
    """``(|alpha|^T N_p(1), |alpha|^T N_p(1) + ||N_p(1)||_1 - D)`` for this representation."""
    N = flow_Np(fn.schedule, p, steps).state
    dp = float(np.abs(fn.alpha) @ N)
    return dp, dp + float(N.sum()) - fn.D


def matrix_exp_nonneg(M):
    """Exponential of a nonnegative square matrix.

    Scaling and squaring around a Taylor series: every term is
    entrywise nonnegative, so truncation is controlled relative to the
    partial sum and no cancellation occurs.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParameterError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise InvalidParameterError("matrix has non-finite entries")
    if np.any(M < 0):
        raise InvalidParameterError("matrix must be entrywise nonnegative")
    norm = np.abs(M).sum(axis=1).max(initial=0.0)
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    A = M / 2.0 ** s
    total = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, 60):
        term = term @ A / k
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    for _ in range(s):
        total = total @ total
    return total


def schedule_lipschitz(schedule):
    """Lipschitz coefficient and norm from the ``||E|U||W| ||_{1,1}`` profile."""
    norms = np.array([seg.norm_rate(1.0).sum() for seg in schedule.segments])
    mids = np.array([0.5 * (s.t0 + s.t1) for s in schedule.segments])
    if len(norms) == 1:
        return LipschitzEstimate(0.0, float(norms[0]), False)
    jumps = np.abs(np.diff(norms))
    coeff = float(np.max(jumps / np.diff(mids)))
    return LipschitzEstimate(coeff, float(norms[0]) + coeff, bool(np.any(jumps > 0)))


def embed_barron(measure, D=None, m=1):
    """Compositional representation of a two-layer (Barron) function.

    State layout (0-based): ``x`` in ``0..d-1``, the constant 1 in ``d``,
    the accumulator in ``d+1``.  Each atom ``(a, b, c)`` becomes a layer
    pair writing ``a relu(b.x + c)`` into the accumulator, so the field is
    constant in time and the flow reproduces ``f`` exactly.  The readout is
    the accumulator.
    """
    d = measure.dim
    D = d + 2 if D is None else int(D)
    if D < d + 2:
        raise InvalidParameterError(f"embedding needs D >= d + 2 = {d + 2}, got {D}")
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    k = len(measure)
    U = np.zeros((k, D, m))
    W = np.zeros((k, m, D))
    U[:, d + 1, 0] = measure.outer
    W[:, 0, :d] = measure.inner
    W[:, 0, d] = measure.bias
    seg = Segment(0.0, 1.0, measure.weights, U, W)
    alpha = np.zeros(D)
    alpha[d + 1] = 1.0
    return CompositionalFunction(d, alpha, ResidualSchedule(D, m, (seg,)), lift=True)


def _probe_points(d, n=4096, seed=2024):
    pts = QuadratureSpec("monte_carlo", n, seed).nodes(d)
    if d <= 10:
        corners = (np.arange(2 ** d)[:, None] >> np.arange(d)) & 1
        pts = np.vstack([pts, corners.astype(float)])
    return pts


def compose_barron(g, h, D=None, m=1, check_range=True):
    """Compositional representation of ``h(g(x))`` for Barron ``g`` and ``h``.

    State layout (0-based): ``x`` in ``0..d-1``, the constant 1 in ``d``,
    ``g`` accumulated in ``d+1`` over ``t in [0, 1/2)``, then ``h`` applied to
    coordinate ``d+1`` accumulated in ``d+2`` over ``[1/2, 1]``.  Each half
    runs at doubled rate.  ``g`` must map the cube into ``[0, 1]``; this is
    checked on a probe set.
    """
    d = g.dim
    if h.dim != 1:
        raise InvalidParameterError("h must be a function of one variable")
    D = d + 3 if D is None else int(D)
    if D < d + 3:
        raise InvalidParameterError(f"composition needs D >= d + 3 = {d + 3}, got {D}")
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    if check_range:
        vals = g(_probe_points(d))
        if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
            raise RangeError(f"g ranges over [{vals.min():.6g}, {vals.max():.6g}], not within [0, 1]")

    kg, kh = len(g), len(h)
    Ug, Wg = np.zeros((kg, D, m)), np.zeros((kg, m, D))
    Ug[:, d + 1, 0] = 2.0 * g.outer
    Wg[:, 0, :d] = g.inner
    Wg[:, 0, d] = g.bias
    Uh, Wh = np.zeros((kh, D, m)), np.zeros((kh, m, D))
    Uh[:, d + 2, 0] = 2.0 * h.outer
    Wh[:, 0, d + 1] = h.inner[:, 0]
    Wh[:, 0, d] = h.bias
    segs = (Segment(0.0, 0.5, g.weights, Ug, Wg), Segment(0.5, 1.0, h.weights, Uh, Wh))
    alpha = np.zeros(D)
    alpha[d + 2] = 1.0
    return CompositionalFunction(d, alpha, ResidualSchedule(D, m, segs), lift=True)


def sample_layer_atoms(schedule, L, rng):
    """Segment and atom indices for layers ``l = 0..L-1`` drawn from ``rho_{l/L}``."""
    seg_idx = schedule.segment_index(np.arange(L) / L)
    atom_idx = np.empty(L, dtype=int)
    for s in np.unique(seg_idx):
        mask = seg_idx == s
        atom_idx[mask] = sample_indices(schedule.segments[s].weights, int(mask.sum()), rng)
    return seg_idx, atom_idx


def _gather_layers(schedule, seg_idx, atom_idx):
    U = np.stack([schedule.segments[s].U[a] for s, a in zip(seg_idx, atom_idx)])
    W = np.stack([schedule.segments[s].W[a] for s, a in zip(seg_idx, atom_idx)])
    return U, W


def sample_resnet(fn, L, rng=None):
    """Depth-L network whose layer ``l`` is an atom drawn from ``rho_{l/L}``."""
    if L < 1:
        raise InvalidParameterError("L must be >= 1")
    seg_idx, atom_idx = sample_layer_atoms(fn.schedule, L, as_generator(rng))
    U, W = _gather_layers(fn.schedule, seg_idx, atom_idx)
    return ResidualNet(fn.d, fn.alpha, U, W, lift=fn.lift)


def batch_resnet_states(U, W, z0, activation=relu):
    """Forward many networks at once.

    ``U`` is ``(T, L, D, m)``, ``W`` is ``(T, L, m, D)``, ``z0`` is
    ``(n, D)``; returns terminal states of shape ``(T, n, D)``.
    """
    T, L = U.shape[:2]
    z = np.broadcast_to(z0, (T,) + z0.shape).copy()
    for l in range(L):
        act = activation(np.einsum("tnD,tmD->tnm", z, W[:, l]))
        z += np.einsum("tnm,tDm->tnD", act, U[:, l]) / L
    if not np.all(np.isfinite(z)):
        raise DivergenceError("residual recursion produced non-finite values")
    return z


def batch_path_norms(U, W, alpha):
    """Path norms of ``T`` stacked networks, shape ``(T,)``."""
    T, L = U.shape[:2]
    v = np.broadcast_to(np.abs(alpha), (T, alpha.shape[0])).copy()
    aU, aW = np.abs(U), np.abs(W)
    for l in range(L - 1, -1, -1):
        v += np.einsum("tm,tmD->tD", np.einsum("tD,tDm->tm", v, aU[:, l]), aW[:, l]) / L
    return v.sum(axis=1)


def schedule_from_resnet(net):
    """Piecewise-constant schedule with ``rho_t = delta(U_l, W_l)`` on ``[l/L, (l+1)/L)``."""
    L = net.L
    segs = tuple(Segment(l / L, (l + 1) / L if l + 1 < L else 1.0, [1.0], U[None], W[None])
                 for l, (U, W) in enumerate(net.layers))
    return CompositionalFunction(net.d, net.alpha, ResidualSchedule(net.D, net.m, segs), lift=net.lift)


def smoothed_relu(x, eps):
    """Gaussian-mollified ReLU and its first two derivatives.

    Closed form ``x Phi(x/eps) + eps phi(x/eps)``; derivatives
    ``Phi(x/eps)`` and ``phi(x/eps) / eps``.
    """
    if not eps > 0:
        raise InvalidParameterError("eps must be positive")
    x = np.asarray(x, dtype=float)
    u = x / eps
    cdf = ndtr(u)
    pdf = np.exp(-0.5 * u * u) / _SQRT_2PI
    return x * cdf + eps * pdf, cdf, pdf / eps


def smoothed_activation(eps):
    """Activation callable ``x -> smoothed_relu(x, eps)[0]`` for the flows."""
    if not eps > 0:
        raise InvalidParameterError("eps must be positive")
    return lambda x: smoothed_relu(x, eps)[0]


def canonicalize_layer_atoms(schedule):
    """Rescale layer atoms so every ``W`` has unit l1 norm.

    Per segment, atom ``(U, W)`` of weight ``w`` with ``P = ||U||W||_{1,1}``
    gets mass proportional to ``w P`` and becomes
    ``(S ||W||_1 / P * U, W / ||W||_1)`` with ``S = E P``.  Here ``||W||_1``
    is the induced 1-norm (max column sum).  ReLU homogeneity keeps the mean
    field unchanged; each output atom has ``||U||W||_{1,1} = S``.  Atoms with
    ``P = 0`` contribute nothing and are dropped.
    """
    out = []
    for seg in schedule.segments:
        P = seg.abs_products().sum(axis=(1, 2))
        nW = np.abs(seg.W).sum(axis=1).max(axis=1)
        keep = (P > 0) & (nW > 0)
        if not np.any(keep):
            out.append(Segment(seg.t0, seg.t1, [1.0], np.zeros_like(seg.U[:1]), np.zeros_like(seg.W[:1])))
            continue
        mass = seg.weights[keep] * P[keep]
        S = mass.sum()
        U = seg.U[keep] * (S * nW[keep] / P[keep])[:, None, None]
        W = seg.W[keep] / nW[keep][:, None, None]
        out.append(Segment(seg.t0, seg.t1, mass / S, U, W))
    return ResidualSchedule(schedule.D, schedule.m, tuple(out))


def random_schedule(rng, D, m, n_atoms=3, scale=0.5, n_segments=1, nonneg=False):
    """Random bounded schedule with ``n_segments`` equal-width pieces."""
    segs = []
    for i in range(n_segments):
        lo = 0.0 if nonneg else -scale
        U = rng.uniform(lo, scale, (n_atoms, D, m))
        W = rng.uniform(lo, scale, (n_atoms, m, D))
        w = rng.dirichlet(np.ones(n_atoms))
        t1 = 1.0 if i == n_segments - 1 else (i + 1) / n_segments
        segs.append(Segment(i / n_segments, t1, w / w.sum(), U, W))
    return ResidualSchedule(D, m, tuple(segs))


def inverse_dinf_bound(c0, D, m):
    """``2 exp(m (c0^2 + 1)) D^2 c0 / m`` for networks with entries bounded by ``c0``."""
    if c0 < 0 or D < 1 or m < 1:
        raise InvalidParameterError("need c0 >= 0, D >= 1, m >= 1")
    return 2.0 * math.exp(m * (c0 ** 2 + 1)) * D ** 2 * c0 / m
