"""File formats for the core objects, and atomic writes.

Dyadic functions are stored as CSV (``index,value`` or ``index,v0,...``) or
as raw little-endian doubles, in both cases behind a one-line
``# hardylab-dyadic resolution=M components=K`` header.  Polynomials are CSV
rows ``j,re,im`` (or ``j,k,re,im`` on the torus); filtrations and trees are
JSON.  Every writer goes through :func:`atomic_write`, so a failed run never
leaves a partial file behind.
"""

import csv
import io
import json
import os
import re
import tempfile

import numpy as np

from .dyadic import DyadicFunction
from .extremal import FiniteFiltration
from .reports import NormReport
from .trees import ValuedTree
from .trig import TrigPoly, TrigPoly2D

__all__ = [
    "atomic_write",
    "write_dyadic",
    "read_dyadic",
    "write_trig",
    "read_trig",
    "write_report",
    "read_report",
    "write_filtration",
    "read_filtration",
    "write_tree",
    "read_tree",
]

_HEADER = re.compile(r"# hardylab-dyadic resolution=(\d+) components=(\d+) format=(csv|binary)")


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_dyadic(f, path, fmt="csv"):
    vals = f.values if f.values.ndim == 2 else f.values[:, None]
    header = f"# hardylab-dyadic resolution={f.resolution} components={vals.shape[1]} format={fmt}\n"
    if fmt == "binary":
        atomic_write(path, header.encode() + vals.astype("<f8").tobytes())
        return
    if fmt != "csv":
        raise ValueError(f"fmt must be 'csv' or 'binary', got {fmt!r}")
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["index"] + (["value"] if f.is_scalar else [f"v{k}" for k in range(vals.shape[1])]))
    for i, row in enumerate(vals):
        w.writerow([i] + [repr(float(x)) for x in row])
    atomic_write(path, buf.getvalue())


def read_dyadic(path):
    with open(path, "rb") as fh:
        first = fh.readline().decode().strip()
        match = _HEADER.fullmatch(first)
        if not match:
            raise ValueError(f"{path}: missing hardylab-dyadic header")
        m, k, fmt = int(match[1]), int(match[2]), match[3]
        if fmt == "binary":
            vals = np.frombuffer(fh.read(), dtype="<f8").astype(float)
            if vals.size != k * 2**m:
                raise ValueError(f"{path}: expected {k * 2**m} doubles, found {vals.size}")
            vals = vals.reshape(2**m, k)
        else:
            rows = list(csv.reader(io.StringIO(fh.read().decode())))[1:]
            if len(rows) != 2**m:
                raise ValueError(f"{path}: expected {2**m} rows, found {len(rows)}")
            vals = np.array([[float(x) for x in r[1:]] for r in rows])
    return DyadicFunction(vals[:, 0] if k == 1 else vals)


def write_trig(f, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    two_d = isinstance(f, TrigPoly2D)
    w.writerow(["j", "k", "re", "im"] if two_d else ["j", "re", "im"])
    for fr, a in zip(f.freqs, f.amps):
        idx = [int(x) for x in np.atleast_1d(fr)]
        w.writerow(idx + [repr(float(a.real)), repr(float(a.imag))])
    atomic_write(path, buf.getvalue())


def read_trig(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    amps = [complex(float(r[-2]), float(r[-1])) for r in body]
    if header == ["j", "k", "re", "im"]:
        freqs = np.array([[int(r[0]), int(r[1])] for r in body], dtype=np.int64).reshape(-1, 2)
        return TrigPoly2D(freqs, np.array(amps))
    if header == ["j", "re", "im"]:
        return TrigPoly(np.array([int(r[0]) for r in body], dtype=np.int64), np.array(amps))
    raise ValueError(f"{path}: unrecognised header {header}")


def write_report(report, path):
    atomic_write(path, report.to_json() + "\n")


def read_report(path):
    with open(path) as fh:
        return NormReport.from_json(fh.read())


def write_filtration(filt, path):
    data = {
        "weights": [float(w) for w in filt.weights],
        "partitions": [[int(x) for x in p] for p in filt.partitions],
    }
    atomic_write(path, json.dumps(data, sort_keys=True) + "\n")


def read_filtration(path):
    with open(path) as fh:
        data = json.load(fh)
    return FiniteFiltration(np.array(data["weights"]), tuple(np.array(p) for p in data["partitions"]))


def write_tree(tree, path):
    atomic_write(path, json.dumps(tree.to_json_dict(), sort_keys=True) + "\n")


def read_tree(path):
    with open(path) as fh:
        return ValuedTree.from_json_dict(json.load(fh))
