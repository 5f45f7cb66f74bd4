"""Two-dimensional floppy manifolds: rigid clusters with two bonds broken.

A face is found by walking its boundary from a corner, filled with sample
points by straight walks inward from the boundary, mapped to the plane by
a convex-combination (Floater) parameterization, triangulated, relaxed with
springs and integrated with piecewise-linear elements in the quotient metric.
"""

from dataclasses import dataclass, field
from itertools import combinations
import logging
import warnings

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse.linalg import spsolve
from scipy.spatial import Delaunay, cKDTree

from . import geometry as geo
from .clusters import ContactGraph, isomorphism
from .lines import TraceError, arc_lengths, floppy_multiplicity, walk

log = logging.getLogger(__name__)

DS = 0.05
NEIGHBORS = 12
DT = 0.1
PRESSURE = 1.2


class TopologyError(RuntimeError):
    """The boundary walk did not close into a single loop."""


class ParameterizationError(RuntimeError):
    """The convex-combination system is singular."""


class QualityError(RuntimeError):
    """The relaxed mesh still contains inverted triangles."""


@dataclass
class Corner:
    mode: int
    graph: ContactGraph
    x: np.ndarray


@dataclass
class BoundaryEdge:
    pair: tuple            # contact kept along this edge
    released: tuple        # contact broken when leaving the starting corner
    samples: np.ndarray    # corner to corner, inclusive
    s: np.ndarray
    line_class: int = 0


@dataclass
class Mesh:
    points: np.ndarray          # (P, n, 3)
    kind: np.ndarray            # -1 interior, k >= 0 on boundary edge k
    corner: np.ndarray          # bool
    uv: np.ndarray              # planar parameter coordinates
    triangles: np.ndarray

    def edges(self):
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def euler_characteristic(self):
        return len(self.points) - len(self.edges()) + len(self.triangles)


@dataclass
class FaceManifold:
    graph: ContactGraph
    corners: list
    edges: list
    id: int = 0
    multiplicity: int = 0
    mesh: Mesh = None
    zeta: float = float("nan")
    area: float = float("nan")
    h_integral: float = float("nan")
    inertia_integral: float = float("nan")
    min_quality: float = float("nan")
    ds: float = DS
    extra: dict = field(default_factory=dict)

    @property
    def corner_modes(self):
        return [c.mode for c in self.corners]

    @property
    def edge_classes(self):
        return [e.line_class for e in self.edges]

    @property
    def h_mean(self):
        return self.h_integral / self.area

    @property
    def inertia_mean(self):
        return self.inertia_integral / self.area


# --------------------------------------------------------------------------
# boundary

def trace_boundary(mode, broken, catalog, line_catalog=None, ds=DS, max_edges=12):
    """Walk the boundary of the face obtained by breaking the two bonds in
    ``broken``, deleting one extra constraint at each corner in turn."""
    a, b = [(min(p), max(p)) for p in broken]
    g = mode.graph.without(a, b)
    if len(geo.internal_tangents(mode.representative, g.bonds)) != 2:
        raise TraceError("broken pair does not leave two internal motions")
    start = frozenset([a, b])
    x = mode.representative
    release, keep = a, b
    corners = [Corner(mode.id, mode.graph, geo.center(x))]
    edges = []
    for _ in range(max_edges):
        eg = g.with_edges(keep)
        grad = geo.constraint_jacobian(x, [release])[0]
        t = geo.internal_tangents(x, eg.bonds)
        if len(t) != 1:
            raise TraceError("boundary edge is not one-dimensional")
        v = t[0] if t[0] @ grad > 0 else -t[0]
        X, formed, tie = walk(x, eg, v, ds=ds)
        if tie:
            log.warning("simultaneous contacts on boundary of face from mode %d", mode.id)
        edge = BoundaryEdge(keep, release, X, arc_lengths(X, g.bonds))
        if line_catalog is not None:
            edge.line_class = line_catalog.classify(eg) or 0
        edges.append(edge)
        x = X[-1]
        if frozenset([keep, formed]) == start:
            return FaceManifold(g, corners, edges, ds=ds)
        cg = g.with_edges(keep, formed)
        hit = catalog.identify(cg)
        if hit is None:
            raise TraceError("face corner is not a catalogued rigid cluster")
        corners.append(Corner(hit[0], cg, x))
        release, keep = keep, formed
    raise TopologyError(f"boundary did not close after {max_edges} edges")


def boundary_points(face):
    """Boundary samples in loop order with their edge index, corner flag and
    the fraction of the way along their edge."""
    pts, kind, corner, frac = [], [], [], []
    for k, e in enumerate(face.edges):
        L = e.s[-1]
        for j in range(len(e.samples) - 1):
            pts.append(e.samples[j])
            kind.append(k)
            corner.append(j == 0)
            frac.append(e.s[j] / L)
    return np.array(pts), np.array(kind), np.array(corner), np.array(frac)


# --------------------------------------------------------------------------
# interior sampling

def _nonbonded(graph):
    p = geo.pair_index(graph.n)
    A = graph.adjacency
    return p[~A[p[:, 0], p[:, 1]]]


def sample_interior(face, ds=None, max_steps=2000):
    """Straight walks into the face from every non-corner boundary point;
    points closer than ``ds/2`` in bond-distance space to existing ones
    are dropped."""
    ds = face.ds if ds is None else ds
    g = face.graph
    bonds = g.bonds
    nb = _nonbonded(g)
    Xb, kind, corner, _ = boundary_points(face)
    emb = list(geo.bond_embedding_batch(Xb))
    store = _PointStore(np.array(emb), 0.5 * ds)
    interior = []
    for x0, k, c in zip(Xb, kind, corner):
        if c:
            continue
        e = face.edges[k].pair
        t = geo.internal_tangents(x0, bonds)
        grad = geo.constraint_jacobian(x0, [e])[0]
        d = t.T @ (t @ grad)
        if np.linalg.norm(d) < 1e-10:
            continue
        d /= np.linalg.norm(d)
        x = x0
        y_prev = geo.excesses(x, nb)
        for _ in range(max_steps):
            try:
                x_new = geo.newton_project(x.ravel() + ds * d, bonds)
            except geo.ProjectionError:
                break
            y = geo.excesses(x_new, nb)
            if np.any((y < 0) & (y_prev > 1e-9)) or np.any(y < -1e-9):
                break
            if store.try_add(geo.bond_embedding(x_new)):
                interior.append(x_new)
            t = geo.internal_tangents(x_new, bonds)
            d = t.T @ (t @ d)
            nd = np.linalg.norm(d)
            if nd < 1e-10:
                break
            d /= nd
            x, y_prev = x_new, y
    return np.array(interior).reshape(-1, g.n, 3)


class _PointStore:
    """Incremental nearest-neighbour rejection in bond-distance space."""

    def __init__(self, initial, radius):
        self.radius = radius
        self.frozen = initial
        self.tree = cKDTree(initial) if len(initial) else None
        self.recent = []

    def try_add(self, p):
        if self.tree is not None and self.tree.query(p, k=1)[0] < self.radius:
            return False
        if self.recent:
            r = np.linalg.norm(np.array(self.recent) - p, axis=1)
            if r.min() < self.radius:
                return False
        self.recent.append(p)
        if len(self.recent) >= 256:
            self.frozen = np.vstack([self.frozen, self.recent])
            self.tree = cKDTree(self.frozen)
            self.recent = []
        return True


# --------------------------------------------------------------------------
# parameterization and triangulation

def boundary_uv(face, kind, frac, corner_spacing="uniform"):
    """Corners on the unit circle; boundary points on the arcs between them
    at positions proportional to quotient arc length."""
    nc = len(face.edges)
    if corner_spacing == "uniform":
        theta = 2 * np.pi * np.arange(nc + 1) / nc
    elif corner_spacing == "length":
        L = np.array([e.s[-1] for e in face.edges])
        theta = 2 * np.pi * np.concatenate([[0.0], np.cumsum(L)]) / L.sum()
    else:
        raise ValueError(f"unknown corner spacing {corner_spacing!r}")
    ang = theta[kind] + frac * (theta[kind + 1] - theta[kind])
    return np.column_stack([np.cos(ang), np.sin(ang)])


def floater_parameterize(points, n_boundary, uv_boundary, k=NEIGHBORS):
    """Solve ``u_i = sum_j lam_ij u_j`` for the interior points, with
    ``lam_ij`` proportional to inverse bond-space distance over the ``k``
    nearest points. ``points`` lists boundary points first."""
    emb = geo.bond_embedding_batch(points)
    P = len(points)
    ni = P - n_boundary
    if ni == 0:
        return np.asarray(uv_boundary, float)
    kk = min(k + 1, P)
    dist, idx = cKDTree(emb).query(emb[n_boundary:], k=kk)
    dist, idx = dist[:, 1:], idx[:, 1:]
    w = 1.0 / np.maximum(dist, 1e-12)
    w /= w.sum(axis=1, keepdims=True)
    _check_reaches_boundary(idx, n_boundary, P)
    rows = np.repeat(np.arange(ni), kk - 1)
    cols = idx.ravel()
    vals = w.ravel()
    inner = cols >= n_boundary
    A = sparse.identity(ni, format="csr") - sparse.csr_matrix(
        (vals[inner], (rows[inner], cols[inner] - n_boundary)), shape=(ni, ni))
    Bmat = sparse.csr_matrix((vals[~inner], (rows[~inner], cols[~inner])),
                             shape=(ni, n_boundary))
    rhs = Bmat @ np.asarray(uv_boundary)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            u = spsolve(A.tocsc(), rhs)
        except Exception as exc:
            raise ParameterizationError(str(exc)) from exc
    u = np.asarray(u).reshape(ni, 2)
    if not np.all(np.isfinite(u)):
        raise ParameterizationError("non-finite parameter coordinates")
    return np.vstack([uv_boundary, u])


def _check_reaches_boundary(idx, n_boundary, P):
    # reversed neighbour graph: boundary must reach every interior point
    ni = len(idx)
    rows = np.repeat(np.arange(n_boundary, P), idx.shape[1])
    G = sparse.csr_matrix((np.ones(idx.size), (idx.ravel(), rows)), shape=(P + 1, P + 1))
    src = sparse.csr_matrix((np.ones(n_boundary), (np.full(n_boundary, P),
                                                   np.arange(n_boundary))),
                            shape=(P + 1, P + 1))
    order = breadth_first_order(G + src, P, directed=True, return_predecessors=False)
    if np.sum(order >= n_boundary) - 1 < ni:
        raise ParameterizationError("interior points not connected to the boundary")


def parameterize(points, n_boundary, uv_boundary, k=NEIGHBORS, k_max=30):
    while True:
        try:
            return floater_parameterize(points, n_boundary, uv_boundary, k), k
        except ParameterizationError:
            if k >= k_max:
                raise
            k += 3


def triangulate(uv):
    tri = Delaunay(uv)
    t = tri.simplices
    a, b, c = uv[t[:, 0]], uv[t[:, 1]], uv[t[:, 2]]
    area = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    keep = np.abs(area) > 1e-14
    t = t[keep]
    flip = area[keep] < 0
    t[flip] = t[flip][:, [0, 2, 1]]
    return t


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _angle(opp, s1, s2):
    c = (s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2)
    return np.arccos(np.clip(c, -1.0, 1.0))


def metric_flip(uv, triangles, length, max_passes=20):
    """Lawson flips toward a Delaunay mesh in the metric given by
    ``length(i, j)``. An edge is flipped when the two angles opposite it sum
    to more than pi and the quad is convex in ``uv``."""
    tri = [list(t) for t in triangles]
    cache = {}

    def L(i, j):
        k = (i, j) if i < j else (j, i)
        if k not in cache:
            cache[k] = length(*k)
        return cache[k]

    for _ in range(max_passes):
        owner = {}
        for t, (a, b, c) in enumerate(tri):
            for i, j, k in ((a, b, c), (b, c, a), (c, a, b)):
                owner.setdefault((min(i, j), max(i, j)), []).append((t, k))
        flipped = False
        touched = set()
        for (i, j), adj in owner.items():
            if len(adj) != 2:
                continue
            (t1, k), (t2, l) = adj
            if t1 in touched or t2 in touched:
                continue
            if set(tri[t1]) != {i, j, k} or set(tri[t2]) != {i, j, l}:
                continue
            ak = _angle(L(i, j), L(i, k), L(j, k))
            al = _angle(L(i, j), L(i, l), L(j, l))
            if ak + al <= np.pi + 1e-9:
                continue
            # the new diagonal k-l must separate i and j in the plane
            if _orient(uv[k], uv[l], uv[i]) * _orient(uv[k], uv[l], uv[j]) >= 0:
                continue
            if _orient(uv[i], uv[j], uv[k]) * _orient(uv[i], uv[j], uv[l]) >= 0:
                continue
            new1, new2 = [k, l, i], [l, k, j]
            if _orient(uv[new1[0]], uv[new1[1]], uv[new1[2]]) < 0:
                new1 = [l, k, i]
            if _orient(uv[new2[0]], uv[new2[1]], uv[new2[2]]) < 0:
                new2 = [k, l, j]
            tri[t1], tri[t2] = new1, new2
            touched.update((t1, t2))
            flipped = True
        if not flipped:
            break
    return np.array(tri, dtype=int)


# --------------------------------------------------------------------------
# metric quantities

def heron(a, b, c):
    s = 0.5 * (a + b + c)
    return np.sqrt(np.clip(s * (s - a) * (s - b) * (s - c), 0.0, None))


def triangle_quality(a, b, c):
    """``2 r_in / r_out`` from side lengths; 1 for an equilateral triangle.
    Side lengths that violate the triangle inequality count as degenerate."""
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (b + c - a) * (c + a - b) * (a + b - c) / (a * b * c)
    return np.clip(np.nan_to_num(q), 0.0, None)


def _quotient_pinv(X, bonds):
    T = geo.quotient_tangents_batch(X, bonds)
    return np.linalg.pinv(T)                      # (P, 2, nb)


def quotient_edge_lengths(X, edges, bonds, pinv=None):
    if pinv is None:
        pinv = _quotient_pinv(X, bonds)
    E = geo.bond_embedding_batch(X)
    v = E[edges[:, 1]] - E[edges[:, 0]]
    l0 = np.linalg.norm(np.einsum("ejb,eb->ej", pinv[edges[:, 0]], v), axis=1)
    l1 = np.linalg.norm(np.einsum("ejb,eb->ej", pinv[edges[:, 1]], v), axis=1)
    return 0.5 * (l0 + l1)


def _side_lengths(X, triangles, bonds, metric, pinv=None):
    t = triangles
    e = np.vstack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
    if metric == "quotient":
        L = quotient_edge_lengths(X, e, bonds, pinv)
    else:
        E = geo.bond_embedding_batch(X)
        L = np.linalg.norm(E[e[:, 1]] - E[e[:, 0]], axis=1)
    return L.reshape(3, len(t))


def fem_integrate(X, triangles, values, bonds, pinv=None):
    """Piecewise-linear integral of vertex ``values`` over the lifted mesh,
    with triangle areas from quotient-metric side lengths (Heron)."""
    a, b, c = _side_lengths(X, triangles, bonds, "quotient", pinv)
    area = heron(a, b, c)
    bad = area < 1e-14
    if bad.any():
        log.warning("%d degenerate triangles excluded", int(bad.sum()))
    values = np.asarray(values)
    mean = values[triangles].mean(axis=1)
    return float(np.sum(np.where(bad, 0.0, area * mean)))


# --------------------------------------------------------------------------
# spring relaxation

class _Relaxer:
    def __init__(self, face, points, kind, corner, frac, corner_spacing, spring_metric):
        self.face = face
        self.bonds = face.graph.bonds
        self.nb = _nonbonded(face.graph)
        self.X = np.array(points)
        self.kind = np.array(kind)
        self.corner = np.array(corner)
        self.frac = np.array(frac, float)
        self.corner_spacing = corner_spacing
        if spring_metric not in ("bond", "quotient"):
            raise ValueError(f"unknown spring metric {spring_metric!r}")
        self.spring_metric = spring_metric
        self.edge_of_pair = {}
        for k, e in enumerate(face.edges):
            self.edge_of_pair.setdefault(e.pair, k)
        self.edge_emb = [geo.bond_embedding_batch(e.samples) for e in face.edges]
        self.k = NEIGHBORS

    def order(self):
        """Boundary points first, sorted along the loop."""
        b = np.nonzero(self.kind >= 0)[0]
        b = b[np.lexsort((self.frac[b], self.kind[b]))]
        i = np.nonzero(self.kind < 0)[0]
        return np.concatenate([b, i]), len(b)

    def retriangulate(self):
        perm, nbnd = self.order()
        self.X, self.kind = self.X[perm], self.kind[perm]
        self.corner, self.frac = self.corner[perm], self.frac[perm]
        uvb = boundary_uv(self.face, self.kind[:nbnd], self.frac[:nbnd],
                          self.corner_spacing)
        self.uv, self.k = parameterize(self.X, nbnd, uvb, self.k)
        tri = triangulate(self.uv)
        E = geo.bond_embedding_batch(self.X)
        pinv = _quotient_pinv(self.X, self.bonds)

        def length(i, j):
            v = E[j] - E[i]
            return 0.5 * (np.linalg.norm(pinv[i] @ v) + np.linalg.norm(pinv[j] @ v))

        self.tri = metric_flip(self.uv, tri, length)
        return self.tri

    def bond_area(self):
        a, b, c = _side_lengths(self.X, self.tri, self.bonds, "bond")
        return float(heron(a, b, c).sum())

    def thin(self, pressure, min_quality):
        """Density control for the strict mode: drop one interior endpoint of
        every edge much shorter than the target length, and the interior
        vertex of every poorly shaped triangle (preferring the vertex
        opposite the longest side). Returns the number of points removed."""
        e, vec, L = self._edges()
        L0 = pressure * L.mean()
        drop = set()
        for i, j in e[L < 0.5 * L0]:
            if i in drop or j in drop:
                continue
            if self.kind[j] < 0:
                drop.add(j)
            elif self.kind[i] < 0:
                drop.add(i)
        a, b, c = _side_lengths(self.X, self.tri, self.bonds, "quotient")
        q = triangle_quality(a, b, c)
        sides = np.stack([a, b, c], axis=1)
        for t in np.nonzero(q < min_quality)[0]:
            verts = self.tri[t]
            if any(v in drop for v in verts):
                continue
            for v in verts[np.argsort(-sides[t])]:
                if self.kind[v] < 0:
                    drop.add(v)
                    break
        if drop:
            keep = np.setdiff1d(np.arange(len(self.X)), sorted(drop))
            self.X, self.kind = self.X[keep], self.kind[keep]
            self.corner, self.frac = self.corner[keep], self.frac[keep]
        return len(drop)

    def _edges(self):
        tri = self.tri
        e = np.unique(np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]],
                                         tri[:, [2, 0]]]), axis=1), axis=0)
        E = geo.bond_embedding_batch(self.X)
        vec = E[e[:, 1]] - E[e[:, 0]]
        if self.spring_metric == "quotient":
            L = quotient_edge_lengths(self.X, e, self.bonds)
        else:
            L = np.linalg.norm(vec, axis=1)
        return e, vec, L

    def step(self, dt, pressure):
        e, vec, L = self._edges()
        L0 = pressure * L.mean()
        f = np.maximum(L0 - L, 0.0)[:, None] * vec / np.maximum(L, 1e-12)[:, None]
        F = np.zeros((len(self.X), vec.shape[1]))
        np.add.at(F, e[:, 0], -f)
        np.add.at(F, e[:, 1], f)

        inner = np.nonzero(self.kind < 0)[0]
        if len(inner):
            self._move_interior(inner, F[inner], dt)
        side = np.nonzero((self.kind >= 0) & ~self.corner)[0]
        for k in np.unique(self.kind[side]):
            self._move_boundary(side[self.kind[side] == k], F, dt, k)

    def _move_interior(self, idx, F, dt):
        X = self.X[idx]
        t = geo.internal_tangents_batch(X, self.bonds)            # (P, 2, 3n)
        T = np.einsum("pbk,pjk->pbj", geo._batch_jacobian(X, geo.pair_index(X.shape[1])), t)
        c = np.einsum("pjb,pb->pj", np.linalg.pinv(T), F)
        dx = dt * np.einsum("pj,pjk->pk", c, t).reshape(X.shape)
        Xn, ok = geo.newton_project_batch(X + dx, self.bonds)
        y = geo.excesses_batch(Xn, self.nb)
        inside = ok & np.all(y >= 0, axis=1)
        self.X[idx[inside]] = Xn[inside]
        for j in np.nonzero(ok & ~inside)[0]:
            out = np.nonzero(y[j] < 0)[0]
            if len(out) != 1:
                continue
            pair = tuple(int(v) for v in self.nb[out[0]])
            k = self.edge_of_pair.get(pair)
            if k is None:
                continue
            try:
                xb = geo.newton_project(Xn[j], np.vstack([self.bonds, pair]))
            except geo.ProjectionError:
                continue
            others = np.delete(geo.excesses(xb, self.nb), out[0])
            if np.all(others >= 0):
                i = idx[j]
                self.X[i] = xb
                self.kind[i] = k
                self.frac[i] = self._edge_fraction(xb, k)

    def _move_boundary(self, idx, F, dt, k):
        pair = self.face.edges[k].pair
        bonds = np.vstack([self.bonds, pair])
        X = self.X[idx]
        t = geo.internal_tangents_batch(X, bonds)                 # (P, 1, 3n)
        T = np.einsum("pbk,pjk->pbj", geo._batch_jacobian(X, geo.pair_index(X.shape[1])), t)
        c = np.einsum("pjb,pb->pj", np.linalg.pinv(T), F[idx])
        dx = dt * np.einsum("pj,pjk->pk", c, t).reshape(X.shape)
        Xn, ok = geo.newton_project_batch(X + dx, bonds)
        keep = [q for q in range(len(self.nb)) if tuple(self.nb[q]) != tuple(pair)]
        y = geo.excesses_batch(Xn, self.nb[keep])
        good = ok & np.all(y >= 0, axis=1)
        for j in np.nonzero(good)[0]:
            f = self._edge_fraction(Xn[j], k)
            if 0.0 < f < 1.0:
                self.X[idx[j]] = Xn[j]
                self.frac[idx[j]] = f

    def _edge_fraction(self, x, k):
        """Arc fraction of ``x`` along boundary edge ``k`` by projection onto
        the polyline of its samples in bond-distance space."""
        P = self.edge_emb[k]
        s = self.face.edges[k].s
        p = geo.bond_embedding(x)
        a, b = P[:-1], P[1:]
        ab = b - a
        tt = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab), 0, 1)
        d = np.linalg.norm(a + tt[:, None] * ab - p, axis=1)
        j = int(np.argmin(d))
        return float((s[j] + tt[j] * (s[j + 1] - s[j])) / s[-1])


def triangulate_and_relax(face, interior, dt=DT, pressure=PRESSURE, strict=False,
                          corner_spacing="uniform", spring_metric="bond", max_rounds=40,
                          steps_per_round=3, min_quality=0.2):
    """Build the mesh of a face and improve it with spring relaxation."""
    Xb, kind, corner, frac = boundary_points(face)
    pts = np.concatenate([Xb, interior.reshape(-1, face.graph.n, 3)])
    kinds = np.concatenate([kind, -np.ones(len(interior), int)])
    corners = np.concatenate([corner, np.zeros(len(interior), bool)])
    fracs = np.concatenate([frac, np.zeros(len(interior))])
    R = _Relaxer(face, pts, kinds, corners, fracs, corner_spacing, spring_metric)
    R.retriangulate()
    history = [R.bond_area()]
    tol = face.ds / 20.0
    for _ in range(max_rounds):
        for _ in range(steps_per_round):
            R.step(dt, pressure)
        R.retriangulate()
        history.append(R.bond_area())
        settled = (len(history) >= 4
                   and max(abs(np.diff(history[-4:]))) < tol)
        if settled and not strict:
            break
        if settled and strict:
            if _min_quality(R, face) > min_quality:
                break
            if R.thin(pressure, min_quality):
                R.retriangulate()
    mesh = Mesh(R.X, R.kind, R.corner, R.uv, R.tri)
    if mesh.euler_characteristic() != 1:
        log.warning("face mesh has Euler characteristic %d", mesh.euler_characteristic())
    face.extra["area_history"] = history
    face.extra["neighbors"] = R.k
    return mesh


def _min_quality(R, face):
    a, b, c = _side_lengths(R.X, R.tri, face.graph.bonds, "quotient")
    return float(triangle_quality(a, b, c).min())


def integrate_face(face, mesh):
    bonds = face.graph.bonds
    X = mesh.points
    pinv = _quotient_pinv(X, bonds)
    h = geo.vibrational_factor_batch(X, bonds)
    inertia = geo.rotational_factor_batch(X)
    face.mesh = mesh
    face.area = fem_integrate(X, mesh.triangles, np.ones(len(X)), bonds, pinv)
    face.zeta = fem_integrate(X, mesh.triangles, h * inertia, bonds, pinv)
    face.h_integral = fem_integrate(X, mesh.triangles, h, bonds, pinv)
    face.inertia_integral = fem_integrate(X, mesh.triangles, inertia, bonds, pinv)
    a, b, c = _side_lengths(X, mesh.triangles, bonds, "quotient", pinv)
    face.min_quality = float(triangle_quality(a, b, c).min())
    return face


def compute_face(face, ds=None, strict=False, corner_spacing="uniform", **kw):
    """Sample, parameterize, triangulate, relax and integrate one face."""
    interior = sample_interior(face, ds)
    mesh = triangulate_and_relax(face, interior, strict=strict,
                                 corner_spacing=corner_spacing, **kw)
    return integrate_face(face, mesh)


# --------------------------------------------------------------------------
# catalog of faces

@dataclass
class FaceCatalog:
    n: int
    faces: list
    nu: dict = field(default_factory=dict)
    members: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.faces)

    def __getitem__(self, face_id):
        for f in self.faces:
            if f.id == face_id:
                return f
        raise KeyError(face_id)

    def classify(self, graph):
        for f in self.faces:
            if f.graph.invariant == graph.invariant and isomorphism(f.graph, graph):
                return f.id
        return None


def _cyclic_signature(face):
    seq = list(zip(face.corner_modes, face.edge_classes))
    n = len(seq)
    rots = [tuple(seq[i:] + seq[:i]) for i in range(n)]
    rev = list(reversed(face.corner_modes))
    rev_edges = list(reversed(face.edge_classes))
    rseq = list(zip(rev, rev_edges[1:] + rev_edges[:1]))
    rots += [tuple(rseq[i:] + rseq[:i]) for i in range(n)]
    return min(rots)


def _same_face(a, b):
    return (_cyclic_signature(a) == _cyclic_signature(b)
            and a.graph.invariant == b.graph.invariant
            and isomorphism(a.graph, b.graph) is not None)


def trace_all_boundaries(catalog, line_catalog, ds=DS):
    """Boundaries of every face reachable by breaking two bonds of a rigid
    mode, grouped into isomorphism classes with ``nu`` tallies."""
    classes, members, nu = [], [], {}
    for mode in catalog.rigid:
        for a, b in combinations(mode.graph.edges, 2):
            try:
                face = trace_boundary(mode, (a, b), catalog, line_catalog, ds=ds)
            except geo.SingularityError:
                log.warning("mode %d pair %s: singular", mode.id, (a, b))
                continue
            for k, rep in enumerate(classes):
                if _same_face(rep, face):
                    members[k].append(face)
                    break
            else:
                classes.append(face)
                members.append([face])
                k = len(classes) - 1
            nu[(mode.id, k)] = nu.get((mode.id, k), 0) + 1
    order = sorted(range(len(classes)), key=lambda k: (
        len(classes[k].corners), sorted(classes[k].corner_modes),
        sorted(classes[k].edge_classes), str(classes[k].graph)))
    mult = {m.id: m.multiplicity for m in catalog.rigid}
    faces, nu_out, member_map = [], {}, {}
    for i, k in enumerate(order, 1):
        f = classes[k]
        f.id = i
        nu_k = {mode: c for (mode, kk), c in nu.items() if kk == k}
        f.multiplicity = floppy_multiplicity(f.corner_modes, nu_k, mult)
        for mode, c in nu_k.items():
            nu_out[(mode, i)] = c
        member_map[i] = members[k]
        faces.append(f)
    return FaceCatalog(catalog.n, faces, nu_out, member_map)
