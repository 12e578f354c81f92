"""Flat JSON serialization of named parameter tensors."""

from __future__ import annotations

import json

import numpy as np

from .autodiff import Tensor

FORMAT = "temposcale-tensors"
VERSION = 1


def tensors_to_dict(named: dict[str, Tensor]) -> dict:
    """Version-tagged document of named tensors (shape + row-major data)."""
    return {
        "format": FORMAT,
        "version": VERSION,
        "tensors": {
            name: {
                "shape": list(t.data.shape),
                "data": [float(v) for v in t.data.reshape(-1)],
            }
            for name, t in named.items()
        },
    }


def dict_to_arrays(doc: dict) -> dict[str, np.ndarray]:
    """Inverse of :func:`tensors_to_dict`, returning plain arrays."""
    if doc.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported tensor format version {doc.get('version')!r}")
    out = {}
    for name, entry in doc["tensors"].items():
        arr = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        out[name] = arr
    return out


def dumps(named: dict[str, Tensor]) -> str:
    return json.dumps(tensors_to_dict(named), sort_keys=True)


def loads(text: str) -> dict[str, np.ndarray]:
    return dict_to_arrays(json.loads(text))
