"""Curve exchange formats (JSON/CSV) and run manifests.

All numeric output uses 17 significant digits so that files round-trip
float64 exactly and reruns diff byte-identically.
"""

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .core import HorizontalCurve, PlanarCurve, StructureParams

TOOL_VERSION = "martinet-lab 0.1.0"


def fmt(x):
    """17-significant-digit decimal rendering of a float."""
    return format(float(x), ".17g")


def curve_to_json(params, curve, theta=None, lam=None):
    """Serialize a planar or horizontal curve (optionally with angles)."""
    has_x3 = isinstance(curve, HorizontalCurve)
    samples = []
    for i in range(len(curve.t)):
        rec = {"t": float(curve.t[i]), "x1": float(curve.x1[i]),
               "x2": float(curve.x2[i])}
        if has_x3:
            rec["x3"] = float(curve.x3[i])
        samples.append(rec)
    out = {"header": {"b": params.b,
                      "arc_length": bool(getattr(curve, "arc_length", False))},
           "samples": samples}
    if theta is not None:
        out["theta"] = [float(v) for v in theta]
    if lam is not None:
        out["lambda"] = float(lam)
    return json.dumps(out)


def curve_from_json(text):
    """Parse the JSON curve format; returns (StructureParams, curve)."""
    obj = json.loads(text)
    header = obj["header"]
    params = StructureParams(b=int(header["b"]))
    samples = obj["samples"]
    t = np.array([r["t"] for r in samples])
    x1 = np.array([r["x1"] for r in samples])
    x2 = np.array([r["x2"] for r in samples])
    if "x3" in samples[0]:
        curve = HorizontalCurve(t=t, x1=x1, x2=x2,
                                x3=np.array([r["x3"] for r in samples]))
    else:
        curve = PlanarCurve(t=t, x1=x1, x2=x2,
                            arc_length=bool(header.get("arc_length", False)),
                            tol_arc=1e-6)
    return params, curve


def curve_to_csv(curve, path):
    has_x3 = isinstance(curve, HorizontalCurve)
    cols = ["t", "x1", "x2"] + (["x3"] if has_x3 else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(len(curve.t)):
            row = [fmt(curve.t[i]), fmt(curve.x1[i]), fmt(curve.x2[i])]
            if has_x3:
                row.append(fmt(curve.x3[i]))
            w.writerow(row)


def curve_from_csv(path, b, arc_length=False):
    data = np.genfromtxt(path, delimiter=",", names=True)
    params = StructureParams(b=b)
    if "x3" in (data.dtype.names or ()):
        return params, HorizontalCurve(t=data["t"], x1=data["x1"],
                                       x2=data["x2"], x3=data["x3"])
    return params, PlanarCurve(t=data["t"], x1=data["x1"], x2=data["x2"],
                               arc_length=arc_length, tol_arc=1e-6)


def write_table_csv(rows, columns, path):
    """Write dict rows with a fixed column order, floats at 17 digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            out = []
            for c in columns:
                v = row.get(c, "")
                if isinstance(v, float):
                    out.append(fmt(v))
                else:
                    out.append(v)
            w.writerow(out)


@dataclass
class RunManifest:
    command: str
    params: dict
    rng_seed: int = 0
    tool_version: str = TOOL_VERSION
    timestamp: str = ""
    input_hashes: dict = field(default_factory=dict)
    output_files: list = field(default_factory=list)

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat()

    def add_input(self, path):
        with open(path, "rb") as fh:
            self.input_hashes[os.path.basename(path)] = \
                hashlib.sha256(fh.read()).hexdigest()

    def add_output(self, path):
        if path not in self.output_files:
            self.output_files.append(path)

    def write(self, out_dir):
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump({"command": self.command, "params": self.params,
                       "rng_seed": self.rng_seed,
                       "tool_version": self.tool_version,
                       "timestamp": self.timestamp,
                       "input_hashes": self.input_hashes,
                       "output_files": self.output_files}, fh, indent=2)
        return path
