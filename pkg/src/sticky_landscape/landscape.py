"""Whole-landscape computation for one particle number, and its JSON form."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from types import SimpleNamespace
import json
import logging

import numpy as np

from . import faces as fc
from .clusters import ContactGraph, load_catalog
from .lines import DS as LINE_DS, trace_all
from .statmech import LandscapeSummary, ModeRow

log = logging.getLogger(__name__)


@dataclass
class Landscape:
    n: int
    catalog: object
    lines: object
    faces: object = None
    settings: dict = field(default_factory=dict)

    @property
    def offsets(self):
        """Global ids: rigid modes first, then lines, then faces."""
        r = len(self.catalog)
        return 0, r, r + len(self.lines)

    def global_id(self, dim, local_id):
        return self.offsets[dim] + local_id

    def rows(self):
        n = self.n
        rows = []
        for m in self.catalog.rigid:
            rows.append(ModeRow(m.id, 0, 3 * n - 6, m.multiplicity, m.h * m.inertia,
                                m.h, m.inertia))
        for line in self.lines.lines:
            rows.append(ModeRow(self.global_id(1, line.id), 1, 3 * n - 7, line.multiplicity,
                                line.zeta, line.h_mean, line.inertia_mean, line.length,
                                line.endpoints))
        for f in (self.faces.faces if self.faces else ()):
            rows.append(ModeRow(self.global_id(2, f.id), 2, 3 * n - 8, f.multiplicity,
                                f.zeta, f.h_mean, f.inertia_mean, f.area,
                                tuple(f.corner_modes)))
        return rows

    def summary(self):
        return LandscapeSummary(self.n, self.rows())


def _mesh_face(args):
    face, strict, corner_spacing, spring_metric = args
    return fc.compute_face(face, strict=strict, corner_spacing=corner_spacing,
                           spring_metric=spring_metric)


def compute_landscape(n=None, catalog=None, line_ds=LINE_DS, face_ds=fc.DS, strict=False,
                      jobs=1, corner_spacing="uniform", spring_metric="bond",
                      faces=True, mesh=True):
    """Rigid catalog, every line and every face (boundaries, and with
    ``mesh`` the interior integrals) for ``n`` particles."""
    if catalog is None:
        catalog = load_catalog(n=n)
    n = catalog.n
    lines = trace_all(catalog, ds=line_ds)
    log.info("n=%d: %d rigid modes, %d lines", n, len(catalog), len(lines))
    face_cat = None
    if faces:
        face_cat = fc.trace_all_boundaries(catalog, lines, ds=face_ds)
        log.info("n=%d: %d faces", n, len(face_cat))
        if mesh:
            work = [(f, strict, corner_spacing, spring_metric) for f in face_cat.faces]
            if jobs > 1:
                with ProcessPoolExecutor(jobs) as pool:
                    done = list(pool.map(_mesh_face, work))
            else:
                done = [_mesh_face(w) for w in work]
            face_cat.faces = done
    settings = dict(line_ds=line_ds, face_ds=face_ds, strict=strict,
                    corner_spacing=corner_spacing, spring_metric=spring_metric)
    return Landscape(n, catalog, lines, face_cat, settings)


# --------------------------------------------------------------------------
# JSON form: everything the rate and comparison steps need

def _row_dict(r):
    return dict(id=r.id, dim=r.dim, m=r.m, multiplicity=r.multiplicity, zeta=r.zeta,
                h_mean=r.h_mean, inertia_mean=r.inertia_mean, size=r.size,
                corners=list(r.corners))


def to_json(land):
    rigid = [dict(id=m.id, bonds=str(m.graph), multiplicity=m.multiplicity, h=m.h,
                  inertia=m.inertia, sigma=m.sigma, chiral=m.chiral,
                  representative=np.round(m.representative, 12).tolist())
             for m in land.catalog.rigid]
    lines = [dict(id=l.id, bonds=str(l.graph), endpoints=list(l.endpoints),
                  multiplicity=l.multiplicity, zeta=l.zeta, Q=l.Q, length=l.length)
             for l in land.lines.lines]
    faces = [dict(id=f.id, bonds=str(f.graph), corners=f.corner_modes,
                  edges=f.edge_classes, multiplicity=f.multiplicity, zeta=f.zeta,
                  area=f.area)
             for f in (land.faces.faces if land.faces else ())]
    summary = land.summary()
    return dict(
        n=land.n, settings=land.settings,
        rigid=rigid, lines=lines, faces=faces,
        nu_lines=[[a, k, v] for (a, k), v in sorted(land.lines.nu.items())],
        nu_faces=[[a, k, v] for (a, k), v in sorted(land.faces.nu.items())] if land.faces else [],
        rows=[_row_dict(r) for r in summary.rows],
        Z=list(summary.Z),
    )


def _graph(n, text):
    return ContactGraph(n, tuple(tuple(int(v) for v in e.split("-")) for e in text.split(",")))


def from_json(data):
    """Light-weight stand-ins for the catalogs, sufficient for rates,
    classification and summaries."""
    n = data["n"]
    rigid = [SimpleNamespace(id=r["id"], graph=_graph(n, r["bonds"]),
                             multiplicity=r["multiplicity"], h=r["h"], inertia=r["inertia"],
                             representative=np.array(r["representative"]))
             for r in data["rigid"]]
    catalog = SimpleNamespace(n=n, rigid=rigid)
    lines = [SimpleNamespace(id=l["id"], graph=_graph(n, l["bonds"]),
                             endpoints=tuple(l["endpoints"]), multiplicity=l["multiplicity"],
                             zeta=l["zeta"], Q=l["Q"], length=l["length"])
             for l in data["lines"]]
    line_cat = SimpleNamespace(lines=lines, nu={(a, k): v for a, k, v in data["nu_lines"]})
    faces = [SimpleNamespace(id=f["id"], graph=_graph(n, f["bonds"])) for f in data["faces"]]
    face_cat = SimpleNamespace(faces=faces)
    rows = [ModeRow(r["id"], r["dim"], r["m"], r["multiplicity"], r["zeta"], r["h_mean"],
                    r["inertia_mean"], r["size"], tuple(r["corners"])) for r in data["rows"]]
    summary = LandscapeSummary(n, rows, tuple(data["Z"]))
    return SimpleNamespace(n=n, catalog=catalog, lines=line_cat, faces=face_cat,
                           summary=summary)


def save_json(land, path):
    with open(path, "w") as fh:
        json.dump(to_json(land), fh, indent=1)


def load_json(path):
    with open(path) as fh:
        return from_json(json.load(fh))


def classifier_for(land):
    """Simulation classifier keyed by the global mode ids of ``land`` (a
    :class:`Landscape` or its JSON stand-in)."""
    from .bdsim import Classifier
    r, nl = len(land.catalog.rigid), len(land.lines.lines)
    faces = land.faces.faces if land.faces is not None else ()
    return Classifier(land.n,
                      [(m.id, m.graph) for m in land.catalog.rigid],
                      [(r + l.id, l.graph) for l in land.lines.lines],
                      [(r + nl + f.id, f.graph) for f in faces])
