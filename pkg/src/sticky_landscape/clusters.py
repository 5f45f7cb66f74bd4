"""Rigid clusters: contact graphs, realization, isomorphism and symmetry."""

from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from itertools import combinations
from math import factorial
from pathlib import Path
import logging
import time

import numpy as np
from scipy.optimize import least_squares

from . import geometry as geo

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
CONTACT_GAP = 1e-6


class CatalogError(ValueError):
    """Malformed catalog file or failed enumeration."""


class UnrealizableError(RuntimeError):
    """No configuration realizes the contact graph."""


@dataclass(frozen=True)
class ContactGraph:
    n: int
    edges: tuple

    def __post_init__(self):
        e = sorted({(min(i, j), max(i, j)) for i, j in self.edges})
        for i, j in e:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad edge {(i, j)} for n={self.n}")
        object.__setattr__(self, "edges", tuple(e))

    @classmethod
    def from_adjacency(cls, A):
        A = np.asarray(A, bool)
        i, j = np.nonzero(np.triu(A, 1))
        return cls(len(A), tuple(zip(i.tolist(), j.tolist())))

    @classmethod
    def from_config(cls, x, cutoff=1.0 + 1e-7):
        x = geo.as_config(x)
        p = geo.pair_index(len(x))
        r = np.linalg.norm(x[p[:, 0]] - x[p[:, 1]], axis=1)
        return cls(len(x), tuple(map(tuple, p[r < cutoff].tolist())))

    @cached_property
    def adjacency(self):
        A = np.zeros((self.n, self.n), bool)
        for i, j in self.edges:
            A[i, j] = A[j, i] = True
        return A

    @property
    def bonds(self):
        return np.array(self.edges, dtype=np.intp).reshape(-1, 2)

    @property
    def m(self):
        return len(self.edges)

    @cached_property
    def degrees(self):
        return self.adjacency.sum(axis=1)

    @cached_property
    def invariant(self):
        """Relabeling-invariant signature used to bucket graphs before
        running the exact isomorphism test."""
        A = self.adjacency.astype(int)
        tri = np.diag(A @ A @ A) // 2
        per_vertex = sorted(
            (int(self.degrees[v]), int(tri[v]),
             tuple(sorted(int(self.degrees[u]) for u in np.nonzero(A[v])[0])))
            for v in range(self.n)
        )
        return (self.n, self.m, tuple(per_vertex))

    def without(self, *drop):
        drop = {(min(i, j), max(i, j)) for i, j in drop}
        return ContactGraph(self.n, tuple(e for e in self.edges if e not in drop))

    def with_edges(self, *add):
        return ContactGraph(self.n, self.edges + tuple(add))

    def permuted(self, perm):
        """Graph with vertex ``i`` renamed ``perm[i]``."""
        return ContactGraph(self.n, tuple((perm[i], perm[j]) for i, j in self.edges))

    def is_connected(self):
        seen, stack = {0}, [0]
        A = self.adjacency
        while stack:
            v = stack.pop()
            for u in np.nonzero(A[v])[0]:
                if u not in seen:
                    seen.add(int(u))
                    stack.append(int(u))
        return len(seen) == self.n

    def bitmask(self):
        key = 0
        for i, j in self.edges:
            key |= 1 << (i * self.n + j)
        return key

    def __str__(self):
        return ",".join(f"{i}-{j}" for i, j in self.edges)


def _isomorphisms(a, b, first_only):
    """Backtracking over vertex maps ``p`` with ``a.adj[i,j] == b.adj[p[i],p[j]]``,
    in lexicographic order of ``p``."""
    if a.n != b.n or a.m != b.m:
        return
    if sorted(a.degrees) != sorted(b.degrees):
        return
    A, B = a.adjacency, b.adjacency
    da, db = a.degrees, b.degrees
    n = a.n
    perm = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            yield tuple(perm)
            return
        for c in range(n):
            if used[c] or da[i] != db[c]:
                continue
            if any(A[i, k] != B[c, perm[k]] for k in range(i)):
                continue
            perm[i] = c
            used[c] = True
            yield from extend(i + 1)
            used[c] = False
        perm[i] = -1

    for p in extend(0):
        yield p
        if first_only:
            return


def isomorphism(a, b):
    """Lexicographically least vertex map from ``a`` onto ``b``, or ``None``."""
    if a.invariant != b.invariant:
        return None
    return next(_isomorphisms(a, b, True), None)


def automorphisms(g):
    return list(_isomorphisms(g, g, False))


def canonical_key(g):
    """Exact canonical form: the lexicographically smallest edge list over
    all relabelings reachable by isomorphism search (brute force, n <= 8)."""
    best = None
    for p in _relabelings(g):
        key = tuple(sorted((min(p[i], p[j]), max(p[i], p[j])) for i, j in g.edges))
        if best is None or key < best:
            best = key
    return (g.n, best)


def _relabelings(g):
    # order vertices by (degree, sorted neighbour degrees) and only
    # permute within classes of equal signature
    sig = [(int(g.degrees[v]),
            tuple(sorted(int(g.degrees[u]) for u in np.nonzero(g.adjacency[v])[0])))
           for v in range(g.n)]
    order = sorted(range(g.n), key=lambda v: sig[v])
    classes = []
    for v in order:
        if classes and sig[classes[-1][0]] == sig[v]:
            classes[-1].append(v)
        else:
            classes.append([v])
    from itertools import permutations, product
    slots = []
    start = 0
    for cls in classes:
        slots.append((cls, list(range(start, start + len(cls)))))
        start += len(cls)
    for choice in product(*[permutations(cls) for cls, _ in slots]):
        p = [0] * g.n
        for (cls, targets), arrangement in zip(slots, choice):
            for v, t in zip(arrangement, targets):
                p[v] = t
        yield p


class GraphIndex:
    """Lookup of graphs up to isomorphism, with a cache of labeled graphs."""

    def __init__(self):
        self._buckets = {}
        self._labeled = {}
        self.entries = []

    def add(self, graph, value):
        self._buckets.setdefault(graph.invariant, []).append(len(self.entries))
        self.entries.append((graph, value))

    def find(self, graph):
        """Return ``(value, permutation)`` or ``None``; the permutation maps
        the stored graph's labels onto ``graph``."""
        key = (graph.n, graph.bitmask())
        if key in self._labeled:
            return self._labeled[key]
        hit = None
        for k in self._buckets.get(graph.invariant, ()):
            g, value = self.entries[k]
            p = isomorphism(g, graph)
            if p is not None:
                hit = (value, p)
                break
        self._labeled[key] = hit
        return hit


@dataclass
class RigidMode:
    id: int
    graph: ContactGraph
    representative: np.ndarray
    sigma: int = 0
    chiral: bool = False
    full_group: int = 0
    multiplicity: int = 0
    h: float = 0.0
    inertia: float = 0.0

    @property
    def n(self):
        return self.graph.n


@dataclass
class ModeCatalog:
    n: int
    rigid: list
    source: str = "file"
    index: GraphIndex = field(default_factory=GraphIndex, repr=False)

    def __post_init__(self):
        for mode in self.rigid:
            self.index.add(mode.graph, mode.id)

    def __len__(self):
        return len(self.rigid)

    def __getitem__(self, mode_id):
        for mode in self.rigid:
            if mode.id == mode_id:
                return mode
        raise KeyError(mode_id)

    def identify(self, graph):
        return self.index.find(graph)


# --------------------------------------------------------------------------
# realization and rigidity

def _violations(x, graph):
    x = geo.as_config(x)
    p = geo.pair_index(graph.n)
    A = graph.adjacency
    nb = p[~A[p[:, 0], p[:, 1]]]
    bond_res = geo.excesses(x, graph.bonds) if graph.m else np.zeros(0)
    gap = geo.excesses(x, nb) if len(nb) else np.zeros(0)
    return bond_res, gap


def is_valid_packing(x, graph, residual=RESIDUAL_TOL, gap=CONTACT_GAP):
    bond_res, nb_gap = _violations(x, graph)
    return (np.all(np.abs(bond_res) < residual)
            and (len(nb_gap) == 0 or nb_gap.min() > gap))


def is_rigid(x, graph):
    try:
        t = geo.internal_tangents(x, graph.bonds)
    except geo.SingularityError:
        return False
    return len(t) == 0


def realize(graph, seed=0, max_restarts=200):
    """Find coordinates with every edge at unit length and every other pair
    further apart than one diameter."""
    n = graph.n
    if graph.m != 3 * n - 6:
        raise ValueError("realize expects a graph with 3n-6 edges")
    rng = np.random.default_rng(seed)
    p = geo.pair_index(n)
    A = graph.adjacency
    nb = p[~A[p[:, 0], p[:, 1]]]
    b = graph.bonds

    def resid(z):
        x = z.reshape(n, 3)
        rb = np.linalg.norm(x[b[:, 0]] - x[b[:, 1]], axis=1) - 1.0
        rn = np.linalg.norm(x[nb[:, 0]] - x[nb[:, 1]], axis=1) - 1.0
        return np.concatenate([rb, 3.0 * np.minimum(rn, 0.0)])

    for _ in range(max_restarts):
        z0 = rng.normal(scale=0.7, size=3 * n)
        sol = least_squares(resid, z0, xtol=1e-14, ftol=1e-14, gtol=1e-14,
                            max_nfev=2000)
        if sol.cost > 1e-10:
            continue
        try:
            x = geo.newton_project(sol.x, b)
        except geo.ProjectionError:
            continue
        if is_valid_packing(x, graph) and is_rigid(x, graph):
            return x
    raise UnrealizableError(f"no realization after {max_restarts} restarts")


# --------------------------------------------------------------------------
# symmetry

def superposition(x, y):
    """Best orthogonal ``R`` (det +-1) with ``R x_i ~ y_i`` and its RMSD."""
    xc, yc = geo.center(x), geo.center(y)
    u, _, vt = np.linalg.svd(xc.T @ yc)
    R = (u @ vt).T
    rmsd = np.sqrt(np.mean(np.sum((xc @ R.T - yc) ** 2, axis=1)))
    return R, rmsd


def symmetry_elements(x, graph, tol=1e-6):
    """Graph automorphisms realized as isometries, split by determinant."""
    proper, improper = [], []
    for p in automorphisms(graph):
        R, rmsd = superposition(x, np.asarray(x)[list(p)])
        if rmsd < tol:
            (proper if np.linalg.det(R) > 0 else improper).append(p)
    return proper, improper


def symmetry_number(mode):
    """``(sigma, chiral)``: count of permutations realizable as proper rotations,
    and whether no permutation is realizable as an improper isometry."""
    proper, improper = symmetry_elements(mode.representative, mode.graph)
    return len(proper), len(improper) == 0


def rigid_multiplicity(mode, convention="table"):
    """Number of labeled copies of a rigid mode.

    ``proper`` counts copies modulo proper rigid motions,
    ``C0 n!/sigma``; ``table`` counts copies modulo all isometries,
    ``n!/|G|``, and is exactly half of the former.
    """
    nfact = factorial(mode.n)
    if convention == "table":
        num, den = nfact, mode.full_group
    elif convention == "proper":
        num, den = (2 if mode.chiral else 1) * nfact, mode.sigma
    else:
        raise ValueError(f"unknown convention {convention!r}")
    if den <= 0 or num % den:
        raise CatalogError(f"non-integer multiplicity {num}/{den}: check sigma")
    return num // den


def characterize(mode_id, graph, x):
    x = geo.center(x)
    proper, improper = symmetry_elements(x, graph)
    mode = RigidMode(mode_id, graph, x, sigma=len(proper), chiral=not improper,
                     full_group=len(proper) + len(improper))
    mode.multiplicity = rigid_multiplicity(mode, "table")
    mode.h = geo.vibrational_factor(x, graph.bonds)
    mode.inertia = geo.rotational_factor(x)
    return mode


# --------------------------------------------------------------------------
# catalogs

def parse_catalog(text):
    graphs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for tok in line.split():
            if "=" not in tok:
                raise CatalogError(f"line {lineno}: bad token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        try:
            n, k = int(fields["n"]), int(fields["id"])
            edges = [tuple(int(t) for t in e.split("-")) for e in fields["bonds"].split(",")]
        except (KeyError, ValueError) as exc:
            raise CatalogError(f"line {lineno}: {exc}") from exc
        if any(len(e) != 2 for e in edges):
            raise CatalogError(f"line {lineno}: malformed bond")
        graphs.append((k, ContactGraph(n, tuple(edges))))
    return graphs


def format_catalog(catalog):
    return "".join(f"n={m.n} id={m.id} bonds={m.graph}\n" for m in catalog.rigid)


def _build(n, graphs, source, seed):
    modes = []
    for k, g in graphs:
        if g.n != n:
            raise CatalogError(f"mode {k} has n={g.n}, expected {n}")
        x = realize(g, seed=seed + k)
        modes.append(characterize(k, g, x))
    return ModeCatalog(n, modes, source)


def load_catalog(path=None, n=None, seed=0):
    """Rigid modes from an adjacency-list file, or the shipped file for ``n``."""
    if path is None:
        if n is None:
            raise ValueError("give a path or n")
        ref = resources.files(__package__) / "data" / f"rigid_n{n}.txt"
        if not ref.is_file():
            raise FileNotFoundError(f"no shipped catalog for n={n}")
        text = ref.read_text()
    else:
        text = Path(path).read_text()
    graphs = parse_catalog(text)
    if not graphs:
        raise CatalogError("empty catalog")
    n = graphs[0][1].n if n is None else n
    return _build(n, graphs, "file", seed)


def _order_modes(found):
    # deterministic ordering: decreasing table multiplicity, then edge list
    found.sort(key=lambda t: (-t[2].multiplicity, t[1].edges))
    return [(k + 1, g) for k, (_, g, _) in enumerate(found)]


def enumerate_catalog(n, seed=0, max_restarts=60, timeout=600.0):
    """Brute-force enumeration of rigid modes for ``n <= 6``: every graph with
    ``3n-6`` edges and minimum degree 3, up to isomorphism, is realized."""
    if n > 6:
        raise ValueError("brute-force enumeration is limited to n <= 6")
    start = time.monotonic()
    p = [tuple(e) for e in geo.pair_index(n).tolist()]
    missing = len(p) - (3 * n - 6)
    seen = set()
    found = []
    for drop in combinations(p, missing):
        if time.monotonic() - start > timeout:
            raise CatalogError("enumeration timeout")
        g = ContactGraph(n, tuple(e for e in p if e not in drop))
        if g.degrees.min() < 3 or not g.is_connected():
            continue
        key = canonical_key(g)
        if key in seen:
            continue
        seen.add(key)
        try:
            x = realize(g, seed=seed, max_restarts=max_restarts)
        except UnrealizableError:
            continue
        found.append((key, g, characterize(0, g, x)))
    graphs = _order_modes(found)
    cat = _build(n, graphs, "enumerated", seed)
    return cat


def discover_catalog(n, walks=2000, seed=0, step=0.02):
    """Search for rigid modes by random bond-forming walks.

    Each walk starts from a random sticky aggregate and moves along the
    internal degrees of freedom until a new contact forms, repeating until
    the cluster is rigid. Used to generate the shipped catalogs for n = 7, 8.
    """
    rng = np.random.default_rng(seed)
    seen = {}
    for _ in range(walks):
        try:
            x, g = _random_walk_to_rigid(n, rng, step)
        except (geo.GeometryError, geo.ProjectionError, RuntimeError):
            continue
        if g is None:
            continue
        key = canonical_key(g)
        if key not in seen:
            seen[key] = (g, x)
            log.info("n=%d: found rigid graph %d after walk", n, len(seen))
    found = [(key, g, characterize(0, g, x)) for key, (g, x) in seen.items()]
    return _order_modes(found)


def _random_aggregate(n, rng):
    x = [np.zeros(3)]
    while len(x) < n:
        anchor = x[rng.integers(len(x))]
        d = rng.normal(size=3)
        cand = anchor + d / np.linalg.norm(d)
        if all(np.linalg.norm(cand - y) > 1.0 + 1e-3 for y in x if y is not anchor):
            x.append(cand)
    return np.array(x)


def _random_walk_to_rigid(n, rng, step, max_steps=20000):
    x = geo.center(_random_aggregate(n, rng))
    g = ContactGraph.from_config(x, cutoff=1.0 + 1e-9)
    direction = None
    for _ in range(max_steps):
        t = geo.internal_tangents(x, g.bonds)
        if len(t) == 0:
            return x, (g if is_valid_packing(x, g, residual=1e-9) else None)
        if direction is None:
            direction = rng.normal(size=len(t)) @ t
        else:
            direction = t.T @ (t @ direction)
        nd = np.linalg.norm(direction)
        if nd < 1e-8:
            direction = None
            continue
        direction /= nd
        p = geo.pair_index(n)
        A = g.adjacency
        nb = p[~A[p[:, 0], p[:, 1]]]
        y_old = geo.excesses(x, nb)
        x_new = geo.newton_project(x.ravel() + step * direction, g.bonds)
        y_new = geo.excesses(x_new, nb)
        hit = y_new < 0
        if not hit.any():
            x = x_new
            continue
        lo, hi = 0.0, step
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            xm = geo.newton_project(x.ravel() + mid * direction, g.bonds)
            if np.any(geo.excesses(xm, nb) < 0):
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-13:
                break
        xm = geo.newton_project(x.ravel() + hi * direction, g.bonds)
        ym = geo.excesses(xm, nb)
        k = int(np.argmin(ym))
        if np.sum(np.abs(ym) < 1e-7) > 1:
            return x, None
        g = g.with_edges(tuple(nb[k]))
        x = geo.newton_project(xm, g.bonds)
        direction = None
        del y_old
    return x, None
