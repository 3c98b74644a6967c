"""Instance files: UTF-8 JSON, format tag ``mdap-instance-v1``.

{"format": "mdap-instance-v1", "d": 3, "n": 4, "seed": 12345, "costs": [...]}

``costs`` is the flat row-major tensor.  Floats are written with Python's
shortest round-tripping repr, so load(save(t)) reproduces every bit.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import InstanceFormatError, InstanceLengthError, InstanceVersionError
from .model import CostTensor

FORMAT_TAG = "mdap-instance-v1"


def instance_to_dict(tensor: CostTensor) -> dict:
    return {"format": FORMAT_TAG, "d": tensor.d, "n": tensor.n, "seed": tensor.seed,
            "costs": [float(v) for v in tensor.costs]}


def instance_from_dict(doc) -> CostTensor:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance must be a JSON object")
    if doc.get("format") != FORMAT_TAG:
        raise InstanceVersionError(f"unsupported format {doc.get('format')!r}, expected {FORMAT_TAG!r}")
    try:
        d, n, costs = int(doc["d"]), int(doc["n"]), doc["costs"]
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceFormatError(f"missing or invalid field: {e}") from None
    if d < 2 or n < 1:
        raise InstanceFormatError(f"need d >= 2 and n >= 1, got d={d}, n={n}")
    if not isinstance(costs, list):
        raise InstanceFormatError("costs must be a list")
    if len(costs) != n**d:
        raise InstanceLengthError(f"expected {n**d} costs for n={n}, d={d}, got {len(costs)}")
    vals = []
    for v in costs:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InstanceFormatError(f"cost {v!r} is not a number")
        v = float(v)
        if not math.isfinite(v) or v < 0:
            raise InstanceFormatError(f"cost {v!r} is not finite and nonnegative")
        vals.append(v)
    seed = doc.get("seed")
    return CostTensor(d=d, n=n, costs=vals, seed=None if seed is None else int(seed))


def save_instance(tensor: CostTensor, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(tensor)), encoding="utf-8")


def load_instance(path) -> CostTensor:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path}: not valid JSON ({e})") from None
    return instance_from_dict(doc)
