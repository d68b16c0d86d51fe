"""Writer for the engine's moveseq-tcn/1 weight file format."""

from __future__ import annotations

import json

import numpy as np

WEIGHTS_FORMAT = "moveseq-tcn/1"


def write_weights(config: dict, tensors: dict, path) -> None:
    """Canonical JSON: config then named layers, data row-major at 17 digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('{"format":"%s","config":%s,"layers":[' % (
            WEIGHTS_FORMAT, json.dumps(config, separators=(",", ":"))))
        for i, (name, tensor) in enumerate(tensors.items()):
            arr = np.asarray(tensor, dtype=np.float64)
            if not np.isfinite(arr).all():
                raise ValueError(f"layer {name} has non-finite values")
            if i:
                fh.write(",")
            shape = json.dumps(list(arr.shape), separators=(",", ":"))
            data = ",".join(format(v, ".17g") for v in arr.reshape(-1))
            fh.write('{"name":"%s","shape":%s,"data":[%s]}' % (name, shape, data))
        fh.write("]}\n")


def read_weights(path) -> tuple[dict, dict]:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("format") != WEIGHTS_FORMAT:
        raise ValueError(f"expected {WEIGHTS_FORMAT!r} file")
    tensors = {
        entry["name"]: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for entry in obj["layers"]
    }
    return obj["config"], tensors
