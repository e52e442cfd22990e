"""File formats: YAML experiment configs, CSV result/aggregate tables,
JSON dataset and parameter-vector documents, and sweep sidecar metadata."""

from __future__ import annotations

import dataclasses
import datetime
import json
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .scenario import Dataset, ScenarioParams, uniform_head_theta

__all__ = [
    "ConfigError",
    "fmt_float",
    "load_yaml_mapping",
    "write_csv",
    "write_sidecar",
    "save_dataset",
    "load_dataset",
    "save_theta",
    "load_theta",
    "scenario_params_from_mapping",
]


class ConfigError(ValueError):
    """A configuration or input document failed validation."""


def fmt_float(value) -> str:
    """Serialize one CSV cell; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt_float(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_yaml_mapping(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def check_keys(mapping: dict, allowed: set[str], context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")


def write_sidecar(path, config, extra: dict | None = None) -> None:
    """Write the metadata document accompanying a results file."""
    doc = {
        "artifact_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": dataclasses.asdict(config) if dataclasses.is_dataclass(config) else config,
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, default=str) + "\n", encoding="utf-8")


_SCENARIO_KEYS = {"k", "p", "n", "eps", "sigma", "theta_star_norm", "theta_star"}


def scenario_params_from_mapping(doc: dict, context: str = "scenario") -> ScenarioParams:
    """Build ScenarioParams from a config mapping.

    Either `theta_star` (full length-p list) or `theta_star_norm` (symmetric
    head construction) specifies the true parameter; the latter defaults to 1.
    """
    check_keys(doc, _SCENARIO_KEYS, context)
    missing = {"k", "p", "n", "eps", "sigma"} - set(doc)
    if missing:
        raise ConfigError(f"{context}: missing keys {sorted(missing)}")
    k, p, n = int(doc["k"]), int(doc["p"]), int(doc["n"])
    if "theta_star" in doc:
        theta = np.asarray(doc["theta_star"], dtype=np.float64)
    else:
        theta = uniform_head_theta(k, p, float(doc.get("theta_star_norm", 1.0)))
    try:
        return ScenarioParams(
            k=k, p=p, n=n, eps=float(doc["eps"]), sigma=float(doc["sigma"]), theta_star=theta
        )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from None


def save_dataset(path, dataset: Dataset) -> None:
    """Self-describing JSON dataset document with row-major payloads."""
    params = dataset.params
    doc = {
        "kind": "dataset",
        "k": params.k,
        "p": params.p,
        "n": params.n,
        "eps": params.eps,
        "sigma": params.sigma,
        "theta_star": params.theta_star.tolist(),
        "X": dataset.X.ravel(order="C").tolist(),
        "xi": dataset.xi.tolist(),
        "y": dataset.y.tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_dataset(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "dataset":
        raise ConfigError(f"{path}: not a dataset document")
    params = ScenarioParams(
        k=int(doc["k"]),
        p=int(doc["p"]),
        n=int(doc["n"]),
        eps=float(doc["eps"]),
        sigma=float(doc["sigma"]),
        theta_star=np.asarray(doc["theta_star"], dtype=np.float64),
    )
    X = np.asarray(doc["X"], dtype=np.float64).reshape(params.n, params.p)
    return Dataset(
        params=params,
        X=X,
        xi=np.asarray(doc["xi"], dtype=np.float64),
        y=np.asarray(doc["y"], dtype=np.float64),
    )


def save_theta(path, theta, method: str = "external") -> None:
    doc = {
        "kind": "theta",
        "p": int(np.size(theta)),
        "method": method,
        "theta": np.asarray(theta, dtype=np.float64).tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_theta(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "theta":
        raise ConfigError(f"{path}: not a theta document")
    theta = np.asarray(doc["theta"], dtype=np.float64)
    if theta.shape[0] != int(doc["p"]):
        raise ConfigError(f"{path}: payload length disagrees with declared p")
    return theta
