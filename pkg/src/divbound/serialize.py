"""JSON readers and writers for the file formats the CLI speaks.

Space file:    {"labels": ["a", "b"], "metric": [[0, 1], [1, 0]]}
Measure file:  {"weights": [0.3, 0.7]}
Function file: {"values": [0.0, 1.0]}
Rate JSON:     {"kind": "quadratic", "c": 0.25}
             | {"kind": "power", "c": 1.0, "beta": 2.0}
             | {"kind": "tabulated", "grid": [...], "values": [...]}

All numbers are IEEE doubles; matrices are row-major nested lists.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .convex import ConvexRate, Power, Quadratic, Tabulated
from .spaces import DiscreteMeasure, FiniteMetricSpace, RealFunction


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_space(path) -> FiniteMetricSpace:
    data = _load_json(path)
    return FiniteMetricSpace(data["labels"], np.asarray(data["metric"], dtype=float))


def load_measure(path, space: FiniteMetricSpace, *, probability: bool = True) -> DiscreteMeasure:
    data = _load_json(path)
    return DiscreteMeasure(space, np.asarray(data["weights"], dtype=float),
                           probability=probability)


def load_function(path, space: FiniteMetricSpace) -> RealFunction:
    data = _load_json(path)
    return RealFunction(space, np.asarray(data["values"], dtype=float))


def dump_space(space: FiniteMetricSpace, path) -> None:
    payload = {"labels": list(space.labels), "metric": space.metric.tolist()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def dump_measure(mu: DiscreteMeasure, path) -> None:
    Path(path).write_text(json.dumps({"weights": mu.weights.tolist()}, indent=2),
                          encoding="utf-8")


def dump_function(f: RealFunction, path) -> None:
    Path(path).write_text(json.dumps({"values": f.values.tolist()}, indent=2),
                          encoding="utf-8")


def rate_from_dict(data: dict) -> ConvexRate:
    """Build a rate from its JSON record; 'c' may be the string 'auto'
    upstream, which callers must resolve before reaching this point."""
    kind = data.get("kind")
    if kind == "quadratic":
        return Quadratic(float(data["c"]))
    if kind == "power":
        return Power(float(data["c"]), float(data["beta"]))
    if kind == "tabulated":
        return Tabulated(np.asarray(data["grid"], dtype=float),
                         np.asarray(data["values"], dtype=float))
    raise ValueError(f"unknown rate kind {kind!r}")


def rate_to_dict(phi: ConvexRate) -> dict:
    return phi.describe()
