"""Shared JSON encodings.

Complex matrices serialize as nested arrays of [re, im] pairs, row-major;
every other object builds on that one encoding: channels as
{dim_in, dim_out, kraus}, observables as {dim, outcome_labels, elements},
broadcast models adding fragment_dims and labels, and solver verdicts as
{status, residual, iterations, witness?}.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .channels import BroadcastModel, QuantumChannel, channel
from .observables import DiscreteObservable, validate_povm
from .preservation import IntersectionResult, PreservationVerdict


def matrix_to_pairs(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_pairs(data: Any, where: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: not a nested array of [re, im] pairs ({exc})") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError(f"{where}: expected shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_dict(n: QuantumChannel) -> dict:
    return {
        "dim_in": n.dim_in,
        "dim_out": n.dim_out,
        "kraus": [matrix_to_pairs(e) for e in n.kraus],
    }


def channel_from_dict(data: dict, where: str = "channel") -> QuantumChannel:
    if not isinstance(data, dict) or "kraus" not in data:
        raise ValueError(f"{where}: expected an object with a 'kraus' list")
    ops = [matrix_from_pairs(e, where=f"{where}.kraus[{k}]") for k, e in enumerate(data["kraus"])]
    n = channel(ops)
    for key in ("dim_in", "dim_out"):
        if key in data and int(data[key]) != getattr(n, key):
            raise ValueError(f"{where}.{key}: declared {data[key]}, Kraus operators imply {getattr(n, key)}")
    return n


def observable_to_dict(x: DiscreteObservable) -> dict:
    return {
        "dim": x.dim,
        "outcome_labels": list(x.outcome_labels),
        "elements": [matrix_to_pairs(e) for e in x.elements],
    }


def observable_from_dict(data: dict, where: str = "observable") -> DiscreteObservable:
    if not isinstance(data, dict) or "elements" not in data:
        raise ValueError(f"{where}: expected an object with an 'elements' list")
    elements = [matrix_from_pairs(e, where=f"{where}.elements[{k}]") for k, e in enumerate(data["elements"])]
    labels = data.get("outcome_labels")
    try:
        obs = validate_povm(elements, labels)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from exc
    if "dim" in data and int(data["dim"]) != obs.dim:
        raise ValueError(f"{where}.dim: declared {data['dim']}, elements imply {obs.dim}")
    return obs


def broadcast_model_to_dict(model: BroadcastModel) -> dict:
    out = channel_to_dict(model.joint)
    out["fragment_dims"] = list(model.fragment_dims)
    out["labels"] = list(model.labels)
    return out


def broadcast_model_from_dict(data: dict, where: str = "model") -> BroadcastModel:
    joint = channel_from_dict(data, where=where)
    dims = tuple(int(d) for d in data.get("fragment_dims", ()))
    labels = tuple(str(s) for s in data.get("labels", ()))
    return BroadcastModel(joint=joint, fragment_dims=dims, labels=labels)


def verdict_to_dict(v: PreservationVerdict) -> dict:
    out: dict = {
        "status": v.status,
        "residual": float(v.residual),
        "iterations": int(v.iterations),
    }
    if v.witness is not None:
        out["witness"] = observable_to_dict(v.witness)
    return out


def intersection_to_dict(res: IntersectionResult, labels=None) -> dict:
    out: dict = {
        "in_intersection": res.in_intersection,
        "verdicts": [verdict_to_dict(v) for v in res.verdicts],
    }
    if labels is not None:
        out["fragments"] = list(labels)
    return out
