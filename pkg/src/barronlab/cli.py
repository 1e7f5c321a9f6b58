"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 config or validation error,
3 numerical divergence.
"""
import argparse
import json
import sys

import numpy as np

from . import serialize
from .complexity import barron_rad_bound, comp_rad_bound
from .deep import (CompositionalFunction, ResidualNet, comp_norms, compose_barron, embed_barron,
                   flow_Np, flow_z, inverse_dinf_bound, resnet_path_norm, sample_resnet)
from .errors import (ConfigError, DivergenceError, InvalidParameterError, RangeError,
                     StudyAborted, UnsupportedTargetError)
from .lab import StudyConfig, run_study
from .measures import TwoLayerMeasure, TwoLayerNet, barron_norm
from .rng import substream
from .shallow import path_norm_two_layer, sample_network

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_DIVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _p(text):
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


def _point(text):
    return np.array([float(v) for v in text.split(",")])


def _load(path):
    try:
        return serialize.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _emit(obj, out):
    if out:
        serialize.save(obj, out)
    else:
        print(serialize.dumps(obj))


def cmd_norm(args):
    obj = _load(args.input)
    if isinstance(obj, TwoLayerMeasure):
        print(repr(barron_norm(obj, args.p)))
    elif isinstance(obj, TwoLayerNet):
        print(repr(path_norm_two_layer(obj)))
    elif isinstance(obj, ResidualNet):
        print(repr(resnet_path_norm(obj)))
    elif isinstance(obj, CompositionalFunction):
        dp, tilde = comp_norms(obj, args.p, args.steps)
        print(f"dp {dp!r}\ntilde_dp {tilde!r}")
    else:
        raise ConfigError(f"norm is not defined for a {type(obj).__name__}")


def cmd_sample(args):
    obj = _load(args.input)
    rng = substream(args.seed)
    if isinstance(obj, TwoLayerMeasure):
        if args.m is None:
            raise UsageError("sample: --m is required for a two-layer measure")
        _emit(sample_network(obj, args.m, rng), args.out)
    elif isinstance(obj, CompositionalFunction):
        if args.L is None:
            raise UsageError("sample: --L is required for a compositional function")
        _emit(sample_resnet(obj, args.L, rng), args.out)
    else:
        raise ConfigError(f"cannot sample from a {type(obj).__name__}")


def cmd_flow(args):
    fn = _load(args.input)
    if not isinstance(fn, CompositionalFunction):
        raise ConfigError("flow needs a compositional_function document")
    if args.np is not None:
        res = flow_Np(fn.schedule, args.np, args.steps)
        print(json.dumps({"N": res.state.tolist(), "steps": res.steps}))
        return
    if args.x is None:
        raise UsageError("flow: --x is required unless --np is given")
    res = flow_z(fn, _point(args.x), args.steps)
    print(json.dumps({"value": float(res.state @ fn.alpha), "state": res.state.tolist(),
                      "steps": res.steps}))


def cmd_embed(args):
    mu = _load(args.input)
    if not isinstance(mu, TwoLayerMeasure):
        raise ConfigError("embed needs a two_layer_measure document")
    _emit(embed_barron(mu, args.D, args.m), args.out)


def cmd_compose(args):
    g, h = _load(args.g), _load(args.h)
    if not (isinstance(g, TwoLayerMeasure) and isinstance(h, TwoLayerMeasure)):
        raise ConfigError("compose needs two two_layer_measure documents")
    _emit(compose_barron(g, h, args.D, args.m), args.out)


def _override(table, key, text):
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    *parents, leaf = key.split(".")
    for p in parents:
        table = table.setdefault(p, {})
    table[leaf] = value


def cmd_study(args):
    try:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {args.config}: {exc}") from exc
    if "study" not in data:
        raise ConfigError("config has no [study] table")
    table = data["study"]
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"study: override {item!r} is not key=value")
        _override(table, *item.split("=", 1))
    report = run_study(StudyConfig.from_dict(table), workers=args.workers)
    if args.out:
        report.write(args.out)
    else:
        sys.stdout.write(report.to_csv())
    slope = "undefined" if report.slope is None else repr(report.slope)
    print(f"slope {slope} ({report.fit_note or 'ok'}) in {report.seconds:.2f}s", file=sys.stderr)


def cmd_bound(args):
    if args.rad_barron:
        print(repr(barron_rad_bound(args.q, args.d, args.n)))
    elif args.rad_comp:
        print(repr(comp_rad_bound(args.q, args.D, args.n)))
    else:
        print(repr(inverse_dinf_bound(args.c0, args.D, args.m)))


def build_parser():
    parser = _Parser(prog="barronlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("norm", help="norm of a measure, network or compositional function")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--p", type=_p, default=1.0)
    p.add_argument("--steps", type=int, default=256)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("sample", help="draw a network from a measure or schedule")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("flow", help="integrate the state flow or the norm flow")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--x", help="comma-separated input point")
    p.add_argument("--np", type=_p, help="integrate N_p instead, for this p")
    p.add_argument("--steps", type=int, default=256)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("embed", help="embed a two-layer measure as a compositional function")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--D", type=int)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("compose", help="compositional representation of h(g(x))")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--D", type=int)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("study", help="run a study from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path; a .json sidecar is written next to it")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("bound", help="evaluate a closed-form complexity or norm bound")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rad-barron", action="store_true")
    g.add_argument("--rad-comp", action="store_true")
    g.add_argument("--inverse-dinf", action="store_true")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--c0", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)
    return parser


def run_cli(argv=None):
    """Parse ``argv``, run the command and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, StudyAborted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigError, InvalidParameterError, RangeError, UnsupportedTargetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main():
    sys.exit(run_cli())
