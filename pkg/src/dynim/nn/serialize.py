"""Versioned JSON parameter files: metadata plus flat row-major arrays."""
from __future__ import annotations

import json

import numpy as np

FORMAT_VERSION = 1


def dump_params(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "meta": meta,
        "layers": [
            {"name": name, "shape": list(a.shape), "data": np.ascontiguousarray(a, dtype=np.float64).ravel().tolist()}
            for name, a in arrays.items()
        ],
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_params(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {doc.get('format_version')}")
    arrays = {
        layer["name"]: np.asarray(layer["data"], dtype=np.float64).reshape(layer["shape"]) for layer in doc["layers"]
    }
    return doc["meta"], arrays
