"""One-dimensional floppy manifolds: rigid clusters with a single bond broken."""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import geometry as geo
from .clusters import ContactGraph, isomorphism

log = logging.getLogger(__name__)

DS = 0.01
TIE_TOL = 1e-8


class TraceError(RuntimeError):
    """A walk along a manifold could not be completed."""


class ClosedLineError(TraceError):
    """The walk returned to its starting cluster without meeting a new one."""


@dataclass
class Endpoint:
    mode: int
    perm: tuple
    formed: tuple


@dataclass
class LineManifold:
    graph: ContactGraph
    samples: np.ndarray
    s: np.ndarray
    h: np.ndarray
    inertia: np.ndarray
    start: Endpoint
    end: Endpoint
    broken: tuple
    id: int = 0
    multiplicity: int = 0
    tie: bool = False

    @property
    def length(self):
        return float(self.s[-1])

    @property
    def zeta(self):
        return line_integrals(self)[0]

    @property
    def Q(self):
        return line_integrals(self)[1]

    @property
    def endpoints(self):
        return (self.start.mode, self.end.mode)

    @property
    def h_mean(self):
        return float(np.trapezoid(self.h, self.s) / self.length)

    @property
    def inertia_mean(self):
        return float(np.trapezoid(self.inertia, self.s) / self.length)


def line_integrals(line):
    """``(zeta, Q)``: trapezoid integrals of ``h I`` and ``1/(h I)`` over arc length."""
    w = np.asarray(line.h) * np.asarray(line.inertia)
    return float(np.trapezoid(w, line.s)), float(np.trapezoid(1.0 / w, line.s))


def arc_lengths(X, bonds):
    """Cumulative first-order quotient arc length along a chain of samples."""
    X = np.asarray(X)
    if len(X) < 2:
        return np.zeros(len(X))
    E = geo.bond_embedding_batch(X)
    pinv = [np.linalg.pinv(geo.quotient_tangents(x, bonds)) for x in X]
    steps = np.empty(len(X) - 1)
    for k in range(len(X) - 1):
        v = E[k + 1] - E[k]
        steps[k] = 0.5 * (np.linalg.norm(pinv[k] @ v) + np.linalg.norm(pinv[k + 1] @ v))
    return np.concatenate([[0.0], np.cumsum(steps)])


def _nonbonded(graph):
    p = geo.pair_index(graph.n)
    A = graph.adjacency
    return p[~A[p[:, 0], p[:, 1]]]


def _tangent(x, bonds, prev):
    t = geo.internal_tangents(x, bonds)
    if len(t) != 1:
        raise TraceError(f"expected a 1-dimensional tangent space, got {len(t)}")
    v = t[0]
    return v if v @ prev >= 0 else -v


def walk(x, graph, direction, ds=DS, max_steps=100000, start_graph=None):
    """Walk along the 1-D manifold of ``graph`` from ``x`` until a new
    contact forms. Returns ``(samples, formed_pair, tie)``.

    ``direction`` fixes the orientation of the first step; afterwards the
    tangent keeps a positive inner product with the previous one.
    """
    bonds = graph.bonds
    nb = _nonbonded(graph)
    x = geo.center(x)
    v = _tangent(x, bonds, direction)
    samples = [x]
    y_prev = geo.excesses(x, nb)
    x_start = geo.bond_embedding(x)
    for _ in range(max_steps):
        step = ds
        for _retry in range(6):
            try:
                x_new = geo.newton_project(x.ravel() + step * v.ravel(), bonds)
                break
            except geo.ProjectionError:
                step *= 0.5
        else:
            raise TraceError("projection failed after step halving")
        y_new = geo.excesses(x_new, nb)
        eligible = y_prev > 1e-9
        crossed = eligible & (y_new < 0)
        if crossed.any():
            x_end, k, tie = _bisect_contact(x, v, step, bonds, nb, eligible)
            if start_graph is not None and len(samples) > 2:
                g_end = graph.with_edges(tuple(nb[k]))
                if g_end == start_graph and np.linalg.norm(
                        geo.bond_embedding(x_end) - x_start) < 10 * ds:
                    raise ClosedLineError("walk returned to its starting cluster")
            if len(samples) >= 2 and geo.quotient_distance(samples[-1], x_end, bonds) < 0.5 * ds:
                samples.pop()
            samples.append(x_end)
            return np.array(samples), tuple(int(i) for i in nb[k]), tie
        x = x_new
        samples.append(x)
        y_prev = y_new
        v = _tangent(x, bonds, v)
    raise TraceError("no contact formed within max_steps")


def _bisect_contact(x, v, step, bonds, nb, eligible):
    def minimum(t):
        xt = geo.newton_project(x.ravel() + t * v.ravel(), bonds)
        y = np.where(eligible, geo.excesses(xt, nb), np.inf)
        return xt, y

    lo, hi = 0.0, step
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        xt, y = minimum(mid)
        ymin = y.min()
        if abs(ymin) < 1e-11:
            break
        if ymin < 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    k = int(np.argmin(y))
    order = np.sort(y)
    tie = len(order) > 1 and order[1] < TIE_TOL
    x_end = geo.newton_project(xt, np.vstack([bonds, nb[k]]))
    return x_end, k, bool(tie)


def trace_line(mode, broken, catalog, ds=DS):
    """Break ``broken`` in a rigid mode and follow the free degree of freedom
    until another contact forms."""
    broken = (min(broken), max(broken))
    g = mode.graph.without(broken)
    x0 = mode.representative
    if len(geo.internal_tangents(x0, g.bonds)) != 1:
        raise TraceError("broken bond does not leave a single internal motion")
    grad = geo.constraint_jacobian(x0, [broken])[0]
    v0 = geo.internal_tangents(x0, g.bonds)[0]
    v0 = v0 if v0 @ grad > 0 else -v0
    X, formed, tie = walk(x0, g, v0, ds=ds, start_graph=mode.graph)
    if tie:
        log.warning("two contacts formed together on line from mode %d, bond %s",
                    mode.id, broken)
    return _finish_line(g, X, catalog, Endpoint(mode.id, tuple(range(mode.n)), broken),
                        formed, tie)


def _finish_line(g, X, catalog, start, formed, tie):
    end_graph = g.with_edges(formed)
    if not _rigid(X[-1], end_graph):
        raise geo.SingularityError("contact graph at line end is not rigid")
    hit = catalog.identify(end_graph)
    if hit is None:
        raise TraceError("line ended at a rigid cluster missing from the catalog")
    end = Endpoint(hit[0], hit[1], formed)
    bonds = g.bonds
    s = arc_lengths(X, bonds)
    h = geo.vibrational_factor_batch(X, bonds)
    inertia = geo.rotational_factor_batch(X)
    return LineManifold(g, X, s, h, inertia, start, end, start.formed, tie=tie)


def _rigid(x, graph):
    try:
        return len(geo.internal_tangents(x, graph.bonds)) == 0
    except geo.SingularityError:
        return False


@dataclass
class LineCatalog:
    n: int
    lines: list
    nu: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.lines)

    def __getitem__(self, line_id):
        for line in self.lines:
            if line.id == line_id:
                return line
        raise KeyError(line_id)

    def classify(self, graph):
        """Class id of a line graph (3n-7 contacts) or ``None``."""
        for line in self.lines:
            if line.graph.invariant == graph.invariant and isomorphism(line.graph, graph):
                return line.id
        return None


def floppy_multiplicity(corner_types, nu, rigid_multiplicity):
    """``sum_i n_i nu_i / n_c`` over the distinct corner types of a manifold.

    ``corner_types`` lists the rigid mode of every corner (with repeats),
    ``nu`` maps a rigid mode to the number of isomorphic manifolds attached
    to one labeled copy of it.
    """
    total = sum(rigid_multiplicity[i] * nu[i] for i in set(corner_types))
    n_c = len(corner_types)
    if total % n_c:
        raise ValueError(f"non-integer multiplicity {total}/{n_c}")
    return total // n_c


def _same_class(a, b):
    return (sorted(a.endpoints) == sorted(b.endpoints)
            and a.graph.invariant == b.graph.invariant
            and isomorphism(a.graph, b.graph) is not None)


def dedupe_lines(traces, catalog):
    """Group traced lines into isomorphism classes and tally ``nu``."""
    classes = []
    members = []
    nu = {}
    for tr in traces:
        for k, rep in enumerate(classes):
            if _same_class(rep, tr):
                members[k].append(tr)
                break
        else:
            classes.append(tr)
            members.append([tr])
            k = len(classes) - 1
        key = (tr.start.mode, k)
        nu[key] = nu.get(key, 0) + 1
    order = sorted(range(len(classes)),
                   key=lambda k: (sorted(classes[k].endpoints), classes[k].length))
    renum = {k: i + 1 for i, k in enumerate(order)}
    mult = {m.id: m.multiplicity for m in catalog.rigid}
    lines, trace_map, nu_out = [], {}, {}
    for k in order:
        line = classes[k]
        line.id = renum[k]
        nu_k = {mode: c for (mode, kk), c in nu.items() if kk == k}
        line.multiplicity = floppy_multiplicity(list(line.endpoints), nu_k, mult)
        for mode, c in nu_k.items():
            nu_out[(mode, line.id)] = c
        for tr in members[k]:
            tr.id = line.id
            tr.multiplicity = line.multiplicity
        trace_map[line.id] = members[k]
        lines.append(line)
    return LineCatalog(catalog.n, lines, nu_out, trace_map)


def trace_all(catalog, ds=DS):
    traces = []
    for mode in catalog.rigid:
        for bond in mode.graph.edges:
            traces.append(trace_line(mode, bond, catalog, ds=ds))
    return dedupe_lines(traces, catalog)
