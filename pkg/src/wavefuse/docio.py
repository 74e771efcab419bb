"""Helpers for the JSON documents used for pyramids, models and reports.

Floats are written with ``repr`` precision (Python's json default), so a
load/save round trip reproduces every coefficient bit for bit.
"""

import json
import os

import numpy as np

from .errors import SchemaError


def matrix_to_doc(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return {"length": int(a.shape[0]), "data": [float(v) for v in a]}
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": [float(v) for v in a.reshape(-1)]}


def matrix_from_doc(doc, where="matrix"):
    try:
        data = np.asarray(doc["data"], dtype=np.float64)
        if "length" in doc:
            shape = (int(doc["length"]),)
        else:
            shape = (int(doc["rows"]), int(doc["cols"]))
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {where}: {exc}") from exc


def require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def dumps(doc):
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write_json(doc, path):
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
    os.replace(tmp, path)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not a JSON document ({exc})") from exc
