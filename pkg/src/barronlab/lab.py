"""Rate and complexity studies with deterministic seeding.

A study sweeps a grid of problem sizes, runs independent trials at each
size and reports per-size statistics plus a least-squares fit of
``log(value)`` against ``log(size)``.  Trial ``j`` at grid position ``i``
draws from the substream ``(seed, i, j)``, so a report is reproducible bit
for bit (wall-clock aside) regardless of thread count.

Study kinds and their columns (``mean`` is what the rate fit uses unless
noted):

==========================  =============================  ==========================  ==========================
kind                        mean                           aux1                        aux2
==========================  =============================  ==========================  ==========================
two_layer_rate              squared L2 error               success fraction            mean path norm
lln                         mean ||z_LL - z(1)||^2         mean path norm              representation D1 norm
direct_comp_rate            squared L2 error               ||f - f^eps||^2             success fraction
path_norm_convergence       mean path norm                 relative gap (fitted)       representation D1 norm
rademacher_two_layer        empirical linear complexity    closed-form bound           violations
rademacher_comp             empirical family complexity    closed-form bound           violations
embedding_check             max |f_comp - f_2layer|        max norm-identity gap       mean tilde-D1 norm
composition_check           max |f_comp - h(g)|            max (dp - product bound)    mean dp
==========================  =============================  ==========================  ==========================
"""
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import serialize
from .complexity import (SampleSet, barron_rad_bound, comp_rad_bound, empirical_rad_linear,
                         rad_from_values)
from .deep import (CompositionalFunction, ResidualSchedule, batch_path_norms, batch_resnet_states,
                   comp_norms, compose_barron, embed_barron, flow_z, random_schedule,
                   sample_layer_atoms, smoothed_activation, _gather_layers)
from .errors import ConfigError, FitError, InvalidParameterError, StudyAborted
from .measures import TwoLayerMeasure, barron_norm, random_measure, symmetrize
from .rng import substream
from .shallow import QuadratureSpec, sample_indices

__all__ = ["KINDS", "StudyConfig", "StudyRow", "StudyReport", "run_study", "rate_fit"]

KINDS = (
    "two_layer_rate",
    "lln",
    "direct_comp_rate",
    "path_norm_convergence",
    "rademacher_two_layer",
    "rademacher_comp",
    "embedding_check",
    "composition_check",
)
CSV_COLUMNS = ("size", "mean", "stderr", "min", "max", "aux1", "aux2")
MAX_FAILURE_FRACTION = 0.01
# stream path reserved for generating default artifacts
_ARTIFACT_STREAM = 2 ** 31 - 1


@dataclass
class StudyConfig:
    kind: str
    grid: List[int]
    trials: int = 100
    seed: int = 0
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    artifact: Optional[dict] = None
    artifact_path: Optional[str] = None
    steps: int = 256
    delta: float = 0.1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown study kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        try:
            self.grid = [int(g) for g in self.grid]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid must be a list of integers: {exc}") from exc
        if not self.grid or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid must be nonempty and strictly increasing")
        if self.grid[0] < 1:
            raise ConfigError("grid sizes must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if isinstance(self.quadrature, dict):
            try:
                self.quadrature = QuadratureSpec(**self.quadrature)
            except (TypeError, InvalidParameterError) as exc:
                raise ConfigError(f"bad quadrature spec: {exc}") from exc

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown study fields: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        out = asdict(self)
        out["quadrature"] = asdict(self.quadrature)
        return out

    def load_artifact(self):
        if self.artifact is not None:
            return serialize.from_document(self.artifact)
        if self.artifact_path is not None:
            try:
                return serialize.load(self.artifact_path)
            except OSError as exc:
                raise ConfigError(f"cannot read artifact: {exc}") from exc
        return None


@dataclass
class StudyRow:
    size: int
    mean: float
    stderr: float
    min: float
    max: float
    aux1: float
    aux2: float
    failed: int = 0


@dataclass
class StudyReport:
    config: StudyConfig
    rows: List[StudyRow]
    slope: Optional[float]
    intercept: Optional[float]
    r2: Optional[float]
    fit_column: Optional[str]
    fit_note: str
    seconds: float
    info: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.size] + [repr(float(getattr(r, c))) for c in CSV_COLUMNS[1:]])
        return buf.getvalue()

    def sidecar(self):
        """Config echo and fit results; wall-clock time is left out so reruns match byte for byte."""
        return {"config": self.config.to_dict(), "slope": self.slope, "intercept": self.intercept,
                "r2": self.r2, "fit_column": self.fit_column, "fit_note": self.fit_note,
                "failed": [r.failed for r in self.rows], "info": self.info}

    def to_json(self):
        return json.dumps(self.sidecar(), indent=1, sort_keys=True)

    def write(self, csv_path):
        """Write the CSV and a ``.json`` sidecar next to it (atomically)."""
        serialize.atomic_write(csv_path, self.to_csv())
        serialize.atomic_write(os.path.splitext(csv_path)[0] + ".json", self.to_json() + "\n")


def rate_fit(sizes, values):
    """Least squares of ``log(values)`` on ``log(sizes)``: ``(slope, intercept, r2)``."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or len(x) < 3:
        raise FitError("rate fit needs at least three (size, value) pairs")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise FitError("rate fit needs positive finite values")
    y = np.log(y)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _row(size, values, aux1, aux2):
    values = np.asarray(values, dtype=float)
    ok = np.isfinite(values)
    v = values[ok]
    failed = int((~ok).sum())
    if v.size == 0:
        return StudyRow(size, math.nan, math.nan, math.nan, math.nan, aux1, aux2, failed)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return StudyRow(size, float(v.mean()), se, float(v.min()), float(v.max()),
                    float(aux1), float(aux2), failed)


def _param(config, name, default):
    return config.params.get(name, default)


def _artifact_rng(config):
    return substream(config.seed, _ARTIFACT_STREAM)


def _measure_artifact(config):
    art = config.load_artifact()
    if art is None:
        return random_measure(_artifact_rng(config), int(_param(config, "dim", 2)),
                              int(_param(config, "atoms", 16)))
    if not isinstance(art, TwoLayerMeasure):
        raise ConfigError(f"{config.kind} needs a two_layer_measure artifact")
    return art


def _comp_artifact(config):
    art = config.load_artifact()
    if art is None:
        D = int(_param(config, "D", 4))
        sched = random_schedule(_artifact_rng(config), D, int(_param(config, "m", 2)),
                                int(_param(config, "atoms", 3)), float(_param(config, "scale", 0.5)))
        return CompositionalFunction(int(_param(config, "d", 2)), np.ones(D), sched)
    if isinstance(art, ResidualSchedule):
        return CompositionalFunction(int(_param(config, "d", 2)),
                                     _param(config, "alpha", np.ones(art.D)), art)
    if not isinstance(art, CompositionalFunction):
        raise ConfigError(f"{config.kind} needs a schedule or compositional_function artifact")
    return art


def _sample_layers(config, fn, i, L):
    draws = [sample_layer_atoms(fn.schedule, L, substream(config.seed, i, j))
             for j in range(config.trials)]
    Us, Ws = zip(*(_gather_layers(fn.schedule, s, a) for s, a in draws))
    return np.stack(Us), np.stack(Ws)


def _safe_states(U, W, z0, activation=None):
    kwargs = {} if activation is None else {"activation": activation}
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            return batch_resnet_states(U, W, z0, **kwargs)
        except Exception:
            out = []
            for u, w in zip(U, W):
                try:
                    out.append(batch_resnet_states(u[None], w[None], z0, **kwargs)[0])
                except Exception:
                    out.append(np.full(z0.shape, np.nan))
            return np.stack(out)


# --- study kinds -----------------------------------------------------------

def _two_layer_rate(config):
    target = _measure_artifact(config)
    Q = barron_norm(target, 1)
    source = symmetrize(target) if _param(config, "symmetrize", True) else target
    nodes = config.quadrature.nodes(target.dim)
    f = target(nodes)
    phi = source.atom_values(nodes)
    scales = source.path_scales()

    def size(i, m):
        err = np.empty(config.trials)
        path = np.empty(config.trials)
        for j in range(config.trials):
            idx = sample_indices(source.weights, m, substream(config.seed, i, j))
            counts = np.bincount(idx, minlength=len(source)).astype(float)
            err[j] = np.mean((phi @ (counts / m) - f) ** 2)
            path[j] = scales @ counts / m
        ok = (err <= 3 * Q ** 2 / m) & (path <= 2 * Q)
        return _row(m, err, ok.mean(), path.mean())

    return size, {"Q": Q}


def _lln(config):
    fn = _comp_artifact(config)
    probes = QuadratureSpec("monte_carlo", int(_param(config, "probes", 10)),
                            config.quadrature.seed).nodes(fn.d)
    ref_steps = int(_param(config, "ref_steps", 2048))
    z_ref = flow_z(fn, probes, ref_steps).state
    z0 = fn.initial_state(probes)
    dp = comp_norms(fn, 1, config.steps)[0]

    def size(i, L):
        U, W = _sample_layers(config, fn, i, L)
        zL = _safe_states(U, W, z0)
        err = np.mean(np.sum((zL - z_ref) ** 2, axis=2), axis=1)
        return _row(L, err, batch_path_norms(U, W, fn.alpha).mean(), dp)

    return size, {"dp1": dp}


def _path_norm_convergence(config):
    fn = _comp_artifact(config)
    dp = comp_norms(fn, 1, max(config.steps, 1024))[0]

    def size(i, L):
        U, W = _sample_layers(config, fn, i, L)
        pn = batch_path_norms(U, W, fn.alpha)
        return _row(L, pn, abs(pn.mean() - dp) / dp, dp)

    return size, {"dp1": dp}


def _direct_comp_rate(config):
    fn = _comp_artifact(config)
    nodes = config.quadrature.nodes(fn.d)
    ref_steps = int(_param(config, "ref_steps", 1024))
    f = fn(nodes, steps=ref_steps)
    z0 = fn.initial_state(nodes)
    tilde = comp_norms(fn, 1, config.steps)[1]
    exponent = -0.5 + config.delta / 3

    def size(i, L):
        eps = L ** exponent
        f_eps = fn(nodes, steps=ref_steps, activation=smoothed_activation(eps))
        U, W = _sample_layers(config, fn, i, L)
        fL = _safe_states(U, W, z0) @ fn.alpha
        err = np.mean((fL - f) ** 2, axis=1)
        path = batch_path_norms(U, W, fn.alpha)
        ok = (err <= 3 * tilde ** 2 / L ** (1 - config.delta)) & (path <= 9 * tilde)
        return _row(L, err, np.mean((f_eps - f) ** 2), ok.mean())

    return size, {"tilde_d1": tilde}


def _rademacher_two_layer(config):
    d = int(_param(config, "d", 2))
    Q = float(_param(config, "Q", 1.0))

    def size(i, n):
        vals = np.array([empirical_rad_linear(SampleSet.uniform(n, d, substream(config.seed, i, j)), Q,
                                              rng=substream(config.seed, i, j, 1)).value
                         for j in range(config.trials)])
        bound = barron_rad_bound(Q, d, n)
        return _row(n, vals, bound, int(np.sum(vals > bound)))

    return size, {"Q": Q, "d": d}


def _rademacher_comp(config):
    fn = _comp_artifact(config)
    L = int(_param(config, "L", 16))
    family = int(_param(config, "family", 100))

    def size(i, n):
        vals, bounds = [], []
        for j in range(config.trials):
            S = SampleSet.uniform(n, fn.d, substream(config.seed, i, j))
            draws = [sample_layer_atoms(fn.schedule, L, substream(config.seed, i, j, k + 1))
                     for k in range(family)]
            U, W = map(np.stack, zip(*(_gather_layers(fn.schedule, s, a) for s, a in draws)))
            F = batch_resnet_states(U, W, fn.initial_state(S.points)) @ fn.alpha
            Q = float(batch_path_norms(U, W, fn.alpha).max())
            vals.append(rad_from_values(F, rng=substream(config.seed, i, j, 0)).value)
            bounds.append(comp_rad_bound(Q, fn.D, n))
        vals, bounds = np.array(vals), np.array(bounds)
        return _row(n, vals, bounds.mean(), int(np.sum(vals > bounds)))

    return size, {"L": L, "family": family}


def _embedding_check(config):
    d = int(_param(config, "d", 3))
    atoms = int(_param(config, "atoms", 8))
    n_points = int(_param(config, "points", 1000))

    def size(i, D):
        errs, gaps, tildes = [], [], []
        for j in range(config.trials):
            rng = substream(config.seed, i, j)
            mu = random_measure(rng, d, atoms, canonical=False)
            fn = embed_barron(mu, D)
            x = rng.random((n_points, d))
            errs.append(np.max(np.abs(fn(x, steps=config.steps) - mu(x))))
            tilde = comp_norms(fn, 1, config.steps)[1]
            gaps.append(abs(tilde - (2 * barron_norm(mu, 1) + 1)))
            tildes.append(tilde)
        return _row(D, errs, max(gaps), np.mean(tildes))

    return size, {"d": d}


def _composition_check(config):
    d = int(_param(config, "d", 2))
    n_points = int(_param(config, "points", 200))

    def size(i, steps):
        errs, margins, dps = [], [], []
        for j in range(config.trials):
            rng = substream(config.seed, i, j)
            g = random_measure(rng, d, int(_param(config, "g_atoms", 6)), positive=True)
            h = random_measure(rng, 1, int(_param(config, "h_atoms", 4)))
            fn = compose_barron(g, h)
            x = rng.random((n_points, d))
            errs.append(np.max(np.abs(fn(x, steps=steps) - h(g(x)[:, None]))))
            dp = comp_norms(fn, 1, steps)[0]
            margins.append(dp - (barron_norm(h, 1) + 1) * (barron_norm(g, 1) + 1))
            dps.append(dp)
        return _row(steps, errs, max(margins), np.mean(dps))

    return size, {"d": d}


_STUDIES = {
    "two_layer_rate": (_two_layer_rate, "mean"),
    "lln": (_lln, "mean"),
    "direct_comp_rate": (_direct_comp_rate, "mean"),
    "path_norm_convergence": (_path_norm_convergence, "aux1"),
    "rademacher_two_layer": (_rademacher_two_layer, "mean"),
    "rademacher_comp": (_rademacher_comp, "mean"),
    "embedding_check": (_embedding_check, None),
    "composition_check": (_composition_check, None),
}


def _workers():
    env = os.environ.get("BARRONLAB_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def run_study(config, workers=None):
    """Run a study and return its :class:`StudyReport`.

    Grid sizes run concurrently on up to ``workers`` threads (default from
    ``BARRONLAB_THREADS`` or the core count); rows are assembled in grid
    order.
    """
    if not isinstance(config, StudyConfig):
        config = StudyConfig.from_dict(config)
    start = time.perf_counter()
    build, fit_column = _STUDIES[config.kind]
    size_fn, info = build(config)
    workers = _workers() if workers is None else max(1, int(workers))
    jobs = list(enumerate(config.grid))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(min(workers, len(jobs))) as pool:
            rows = list(pool.map(lambda job: size_fn(*job), jobs))
    else:
        rows = [size_fn(i, s) for i, s in jobs]

    failed = sum(r.failed for r in rows)
    if failed > MAX_FAILURE_FRACTION * config.trials * len(rows):
        raise StudyAborted(f"{failed} of {config.trials * len(rows)} trials diverged")

    slope = intercept = r2 = None
    if fit_column is None:
        note = "not a rate study"
    else:
        values = np.array([getattr(r, fit_column) for r in rows])
        sizes = np.array(config.grid, dtype=float)
        keep = np.isfinite(values) & (values > 0)
        if keep.sum() < 3:
            note = "undefined: fewer than three positive values"
        else:
            slope, intercept, r2 = rate_fit(sizes[keep], values[keep])
            dropped = int(len(rows) - keep.sum())
            note = f"dropped {dropped} nonpositive rows" if dropped else ""
    return StudyReport(config, rows, slope, intercept, r2, fit_column, note,
                       time.perf_counter() - start, {k: float(v) for k, v in info.items()})
