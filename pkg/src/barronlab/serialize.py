"""Versioned JSON documents for measures, networks and schedules.

Every document is a dict with a ``kind`` tag and ``version``.  Floats are
written with ``repr`` precision so a dump/load round trip is exact.
"""
import json
import os
import tempfile

import numpy as np

from .deep import CompositionalFunction, ResidualNet, ResidualSchedule, Segment
from .errors import ConfigError, InvalidParameterError
from .measures import TwoLayerMeasure, TwoLayerNet

__all__ = ["to_document", "from_document", "dumps", "loads", "load", "save", "atomic_write"]

VERSION = 1


def _measure_doc(mu):
    return {"kind": "two_layer_measure", "version": VERSION, "dim": mu.dim,
            "atoms": [{"w": float(w), "a": float(a), "b": b.tolist(), "c": float(c)}
                      for w, a, b, c in zip(mu.weights, mu.outer, mu.inner, mu.bias)]}


def _net_doc(net):
    return {"kind": "two_layer_net", "version": VERSION, "dim": net.dim,
            "neurons": [{"a": float(a), "b": b.tolist(), "c": float(c)}
                        for a, b, c in zip(net.outer, net.inner, net.bias)]}


def _resnet_doc(net):
    return {"kind": "resnet", "version": VERSION, "d": net.d, "D": net.D, "m": net.m,
            "L": net.L, "lift": net.lift, "alpha": net.alpha.tolist(),
            "layers": [{"U": U.tolist(), "W": W.tolist()} for U, W in net.layers]}


def _schedule_doc(s):
    return {"kind": "schedule", "version": VERSION, "D": s.D, "m": s.m,
            "segments": [{"t0": seg.t0, "t1": seg.t1,
                          "atoms": [{"w": float(w), "U": U.tolist(), "W": W.tolist()}
                                    for w, U, W in zip(seg.weights, seg.U, seg.W)]}
                         for seg in s.segments]}


def _comp_doc(fn):
    return {"kind": "compositional_function", "version": VERSION, "d": fn.d,
            "lift": fn.lift, "alpha": fn.alpha.tolist(), "schedule": _schedule_doc(fn.schedule)}


def to_document(obj):
    """JSON-ready dict for any serializable object."""
    for cls, fn in ((TwoLayerMeasure, _measure_doc), (TwoLayerNet, _net_doc),
                    (ResidualNet, _resnet_doc), (ResidualSchedule, _schedule_doc),
                    (CompositionalFunction, _comp_doc)):
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _schedule_from(doc):
    D, m = int(doc["D"]), int(doc["m"])
    segs = []
    for s in doc["segments"]:
        atoms = s["atoms"]
        segs.append(Segment(float(s["t0"]), float(s["t1"]), [a["w"] for a in atoms],
                            np.array([a["U"] for a in atoms], dtype=float).reshape(len(atoms), D, m),
                            np.array([a["W"] for a in atoms], dtype=float).reshape(len(atoms), m, D)))
    return ResidualSchedule(D, m, tuple(segs))


def from_document(doc):
    """Inverse of :func:`to_document`; raises :class:`ConfigError` on bad input."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("document has no 'kind' field")
    if doc.get("version", VERSION) != VERSION:
        raise ConfigError(f"unsupported document version {doc.get('version')!r}")
    kind = doc["kind"]
    try:
        if kind == "two_layer_measure":
            d = int(doc["dim"])
            atoms = doc["atoms"]
            return TwoLayerMeasure([a["w"] for a in atoms], [a["a"] for a in atoms],
                                   np.array([a["b"] for a in atoms], dtype=float).reshape(len(atoms), d),
                                   [a["c"] for a in atoms])
        if kind == "two_layer_net":
            d = int(doc["dim"])
            ns = doc["neurons"]
            return TwoLayerNet([n["a"] for n in ns],
                               np.array([n["b"] for n in ns], dtype=float).reshape(len(ns), d),
                               [n["c"] for n in ns])
        if kind == "resnet":
            D, m = int(doc["D"]), int(doc["m"])
            layers = doc["layers"]
            L = len(layers)
            if "L" in doc and int(doc["L"]) != L:
                raise ConfigError(f"L={doc['L']} but {L} layers given")
            return ResidualNet(int(doc["d"]), doc["alpha"],
                               np.array([l["U"] for l in layers], dtype=float).reshape(L, D, m),
                               np.array([l["W"] for l in layers], dtype=float).reshape(L, m, D),
                               lift=bool(doc.get("lift", False)))
        if kind == "schedule":
            return _schedule_from(doc)
        if kind == "compositional_function":
            return CompositionalFunction(int(doc["d"]), doc["alpha"], _schedule_from(doc["schedule"]),
                                         lift=bool(doc.get("lift", False)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, InvalidParameterError)):
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"malformed {kind} document: {exc!r}") from exc
    raise ConfigError(f"unknown document kind {kind!r}")


def dumps(obj):
    return json.dumps(to_document(obj), indent=1)


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return from_document(doc)


def load(path):
    with open(path) as fh:
        return loads(fh.read())


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(obj, path):
    atomic_write(path, dumps(obj) + "\n")
