"""Writers for the CSV and JSON outputs.

CSV files use ``,`` separators, ``.`` decimals, a header row and LF line
endings. Metadata that does not fit a table is written as leading ``#``
comment lines.
"""

import csv
from datetime import datetime, timezone
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__

GEOMETRIC_NOTE = "geometric rates; dimensional rates are kappa^-1 D/d^2 times these"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _num(v, digits=10):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def _comments(fh, meta):
    for k, v in meta.items():
        fh.write(f"# {k}: {v}\n")


def write_line(line, path):
    """One line class: metadata header, then one row per sample."""
    n = line.graph.n
    with open(path, "w", newline="") as fh:
        _comments(fh, {"id": line.id, "endpoints": " ".join(map(str, line.endpoints)),
                       "multiplicity": line.multiplicity, "zeta": _num(line.zeta),
                       "Q": _num(line.Q), "length": _num(line.length),
                       "bonds": str(line.graph)})
        w = _writer(fh)
        w.writerow(["s", "h", "I"] + [f"x{i}{c}" for i in range(n) for c in "xyz"])
        for s, h, I, x in zip(line.s, line.h, line.inertia, line.samples):
            w.writerow([_num(s), _num(h), _num(I)] + [_num(v, 15) for v in np.ravel(x)])


def write_face(face, directory):
    """Face header as JSON plus vertex and triangle tables."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"face_{face.id:03d}"
    mesh = face.mesh
    header = dict(id=face.id, corners=face.corner_modes, edges=face.edge_classes,
                  multiplicity=face.multiplicity, zeta=face.zeta, S=face.area,
                  h_mean=face.h_mean, inertia_mean=face.inertia_mean,
                  min_quality=face.min_quality, bonds=str(face.graph),
                  vertices=f"{stem}_vertices.csv", triangles=f"{stem}_triangles.csv")
    (d / f"{stem}.json").write_text(json.dumps(header, indent=1) + "\n")
    from . import geometry as geo
    h = geo.vibrational_factor_batch(mesh.points, face.graph.bonds)
    I = geo.rotational_factor_batch(mesh.points)
    n = face.graph.n
    with open(d / header["vertices"], "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["u", "v", "edge", "corner", "h", "I"]
                   + [f"x{i}{c}" for i in range(n) for c in "xyz"])
        for k in range(len(mesh.points)):
            w.writerow([_num(mesh.uv[k, 0]), _num(mesh.uv[k, 1]), int(mesh.kind[k]),
                        int(mesh.corner[k]), _num(h[k]), _num(I[k])]
                       + [_num(v, 15) for v in mesh.points[k].ravel()])
    with open(d / header["triangles"], "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["a", "b", "c"])
        w.writerows(mesh.triangles.tolist())


def _corners_field(corners):
    return " ".join(str(c) for c in corners)


def write_modes(summary, path):
    """Per-mode table: mode, dimension, bonds, mean h, mean I, size, n, z, corners."""
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["mode", "dim", "bonds", "h_mean", "I_mean", "S", "n_alpha", "z_alpha",
                    "corners"])
        for r in summary.rows:
            S = "" if r.dim == 0 else _num(r.size, 6)
            corners = _corners_field(r.corners) if r.dim == 2 else ""
            w.writerow([r.id, r.dim, r.m, _num(r.h_mean, 6), _num(r.inertia_mean, 6), S,
                        r.multiplicity, _num(r.z, 8), corners])


def write_totals(summary, path):
    n0, n1, n2 = summary.counts()
    Z0, Z1, Z2 = summary.Z
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["n", "count0", "count1", "count2", "Z0", "Z1", "Z2", "Z1_over_Z0",
                    "Z2_over_Z1"])
        w.writerow([summary.n, n0, n1, n2, _num(Z0, 8), _num(Z1, 8), _num(Z2, 8),
                    _num(Z1 / Z0, 6), _num(Z2 / Z1, 6) if Z1 else ""])


def write_rates(network, path, kappa=None, duration=None):
    """Rate matrix in long form with both conventions side by side."""
    kappa = network.kappa if kappa is None else kappa
    lead = network.matrix("leading")
    restr = lead if kappa is None else lead * network.restriction_factor(kappa)
    with open(path, "w", newline="") as fh:
        _comments(fh, {"units": GEOMETRIC_NOTE,
                       "kappa": "inf" if kappa is None else _num(kappa),
                       "Z0": _num(network.Z[0]), "Z1": _num(network.Z[1])})
        w = _writer(fh)
        head = ["a", "b", "rate_leading", "rate_restricted"]
        if duration is not None and kappa not in (None, np.inf):
            head += ["count_leading", "count_restricted"]
        w.writerow(head)
        for i, a in enumerate(network.modes):
            for j, b in enumerate(network.modes):
                row = [a, b, _num(lead[i, j]), _num(restr[i, j])]
                if len(head) > 4:
                    row += [_num(lead[i, j] * duration / kappa),
                            _num(restr[i, j] * duration / kappa)]
                w.writerow(row)


def read_rates(path):
    rows = []
    with open(path) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    for rec in csv.DictReader(lines):
        rows.append(rec)
    return rows


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(directory, command, params, inputs=(), seed=None):
    manifest = dict(command=command, params=params,
                    inputs={str(p): file_hash(p) for p in inputs},
                    version=__version__, seed=seed,
                    timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    path = Path(directory) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, default=str) + "\n")
    return path
