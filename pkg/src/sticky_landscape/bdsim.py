"""Overdamped Langevin simulation of sticky spheres with a short-ranged
Morse potential, with on-the-fly classification into landscape modes."""

from dataclasses import dataclass, asdict, field
import json
import logging
import math
import time

import numpy as np
from numba import njit
from scipy.stats import spearmanr

from . import geometry as geo
from .clusters import ContactGraph, GraphIndex
from .statmech import PotentialSpec, kappa_closed_form

log = logging.getLogger(__name__)

UNCLASSIFIED = -1


@dataclass
class SimParams:
    n: int = 6
    E: float = 8.5
    rho: float = 30.0
    m: float = 2.0
    dt: float = None
    total_time: float = 100.0
    seed: int = 0
    classify_interval: float = 1e-2
    initial_mode: int = 1
    rc: float = None
    dissociation_time: float = 1.0

    def __post_init__(self):
        bound = self.stability_bound
        if self.dt is None:
            self.dt = bound
        if self.dt > bound * (1 + 1e-12):
            raise ValueError(f"dt={self.dt:g} exceeds the stability limit {bound:g}")

    @property
    def potential(self):
        return PotentialSpec(self.E, self.rho, self.m, self.rc)

    @property
    def stability_bound(self):
        return (1.0 / 6.0) / (self.m ** 2 * 2.0 * self.E * self.rho ** 2)

    @property
    def bond_cutoff(self):
        return 1.0 + 2.0 / self.rho

    @property
    def kappa(self):
        return kappa_closed_form(self.potential).kappa


def parse_config(text):
    """``key = value`` lines; ``#`` starts a comment."""
    kinds = {"n": int, "seed": int, "initial_mode": int}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        k, v = (t.strip() for t in line.split("=", 1))
        if k not in SimParams.__dataclass_fields__:
            raise ValueError(f"line {lineno}: unknown key {k!r}")
        values[k] = kinds.get(k, float)(v)
    return SimParams(**values)


def format_config(params):
    return "".join(f"{k} = {v}\n" for k, v in asdict(params).items() if v is not None)


# --------------------------------------------------------------------------
# potential

def potential_eval(r, spec):
    """Pair energy and force magnitude ``-dU/dr`` of the truncated potential."""
    r = np.asarray(r, float)
    lin = spec.morse(spec.rc) + spec.morse_slope(spec.rc) * (r - spec.rc)
    outer = spec.morse(r) - lin
    inner = 0.5 * spec.m ** 2 * spec.curvature * (r - 1.0) ** 2 - spec.E - lin
    u = np.where(r < 1.0, inner, np.where(r < spec.rc, outer, 0.0))
    du_outer = spec.morse_slope(r) - spec.morse_slope(spec.rc)
    du_inner = spec.m ** 2 * spec.curvature * (r - 1.0) - spec.morse_slope(spec.rc)
    du = np.where(r < 1.0, du_inner, np.where(r < spec.rc, du_outer, 0.0))
    return u, -du


@njit(cache=True)
def _pair_slope(r, E, rho, core, rc, slope_c):
    if r >= rc:
        return 0.0
    if r < 1.0:
        return core * (r - 1.0) - slope_c
    e = math.exp(-rho * (r - 1.0))
    return 2.0 * E * rho * e * (1.0 - e) - slope_c


@njit(cache=True)
def _advance(x, kicks, dt, E, rho, core, rc, slope_c):
    n = x.shape[0]
    f = np.zeros_like(x)
    for step in range(kicks.shape[0]):
        f[:, :] = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                dx = x[j, 0] - x[i, 0]
                dy = x[j, 1] - x[i, 1]
                dz = x[j, 2] - x[i, 2]
                r = math.sqrt(dx * dx + dy * dy + dz * dz)
                if r >= rc:
                    continue
                g = _pair_slope(r, E, rho, core, rc, slope_c) / r
                f[i, 0] += g * dx
                f[i, 1] += g * dy
                f[i, 2] += g * dz
                f[j, 0] -= g * dx
                f[j, 1] -= g * dy
                f[j, 2] -= g * dz
        for i in range(n):
            for k in range(3):
                x[i, k] += f[i, k] * dt + kicks[step, i, k]
    return x


def _kernel_args(params):
    spec = params.potential
    return (params.dt, spec.E, spec.rho, spec.m ** 2 * spec.curvature, spec.rc,
            float(spec.morse_slope(spec.rc)))


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def step(x, params, rng, noise=True):
    """One forward-Euler step with ``D = beta = 1``."""
    x = np.array(x, float)
    if noise:
        kicks = math.sqrt(2 * params.dt) * rng.standard_normal((1,) + x.shape)
    else:
        kicks = np.zeros((1,) + x.shape)
    return _advance(x, kicks, *_kernel_args(params))


def advance(x, params, rng, nsteps):
    kicks = math.sqrt(2 * params.dt) * rng.standard_normal((nsteps,) + x.shape)
    return _advance(x, kicks, *_kernel_args(params))


# --------------------------------------------------------------------------
# classification

class Classifier:
    """Maps labeled contact graphs to ``(dim, id)`` by isomorphism with the
    rigid, line and face graphs of a landscape; lookups are cached by
    labeled graph."""

    def __init__(self, n, rigid=(), lines=(), faces=()):
        self.n = n
        self.index = {}
        for dim, entries in enumerate((rigid, lines, faces)):
            idx = GraphIndex()
            for mode_id, graph in entries:
                idx.add(graph, mode_id)
            self.index[3 * n - 6 - dim] = (dim, idx)
        self.cache = {}
        self.anomalies = 0

    def classify_graph(self, g):
        key = g.bitmask()
        if key in self.cache:
            return self.cache[key]
        hit = (None, UNCLASSIFIED)
        if g.m in self.index:
            dim, idx = self.index[g.m]
            found = idx.find(g)
            if found is not None:
                hit = (dim, found[0])
            else:
                self.anomalies += 1
                log.info("contact graph %s with %d bonds matches no catalog entry", g, g.m)
        self.cache[key] = hit
        return hit

    def classify(self, x, cutoff):
        g = ContactGraph.from_config(x, cutoff)
        return g, self.classify_graph(g)


# --------------------------------------------------------------------------
# runs

@dataclass
class SimTrace:
    params: SimParams
    occupancy: dict = field(default_factory=dict)           # (dim, id) -> time
    dimension_time: dict = field(default_factory=dict)      # dim or None -> time
    transitions: dict = field(default_factory=dict)         # (a, b) -> count
    events: list = field(default_factory=list)              # (time, dim, id)
    anomalies: int = 0
    restarts: int = 0
    wall_seconds: float = 0.0

    def transition_matrix(self, modes):
        C = np.zeros((len(modes), len(modes)), dtype=int)
        pos = {m: i for i, m in enumerate(modes)}
        for (a, b), c in self.transitions.items():
            C[pos[a], pos[b]] += c
        return C

    @property
    def elapsed(self):
        return sum(self.dimension_time.values())

    def ratios(self, kappa):
        """Estimates of ``Z_{p+1}/Z_p`` as ``kappa * t_{p+1} / t_p``."""
        t = [self.dimension_time.get(p, 0.0) for p in range(3)]
        return tuple(kappa * t[p + 1] / t[p] if t[p] > 0 else float("nan")
                     for p in range(2))

    def probabilities(self, dim):
        occ = {k[1]: v for k, v in self.occupancy.items() if k[0] == dim}
        total = sum(occ.values())
        return {k: v / total for k, v in occ.items()} if total else {}

    def merge(self, other):
        for attr in ("occupancy", "dimension_time", "transitions"):
            mine = getattr(self, attr)
            for k, v in getattr(other, attr).items():
                mine[k] = mine.get(k, 0) + v
        self.anomalies += other.anomalies
        self.restarts += other.restarts
        self.wall_seconds += other.wall_seconds
        return self


def run(params, classifier, x0, progress=None):
    """Simulate until ``params.total_time`` has been spent as one connected
    cluster, classifying every ``params.classify_interval``.

    A cluster that stays in pieces for longer than
    ``params.dissociation_time`` has dissociated; that excursion is dropped
    and the run resumes from the last rigid configuration it visited.
    """
    rng = make_rng(params.seed)
    if x0 is None:
        raise ValueError("an initial configuration is required")
    x = geo.center(x0).copy()
    nsteps = max(1, int(round(params.classify_interval / params.dt)))
    interval = nsteps * params.dt
    chunks = int(math.ceil(params.total_time / interval))
    cutoff = params.bond_cutoff
    trace = SimTrace(params)
    t0 = time.perf_counter()
    prev_rigid = None
    prev_state = None
    last_rigid_x = x.copy()
    apart = 0.0                 # length of the current disconnected stretch
    apart_events = 0
    c, restart_at, stuck = 0, -1, 0
    while c < chunks:
        x = advance(x, params, rng, nsteps)
        g, (dim, mid) = classifier.classify(x, cutoff)
        if dim is None and not g.is_connected():
            if apart == 0.0:
                apart_events = len(trace.events)
            apart += interval
            if apart > params.dissociation_time:
                c -= int(round(apart / interval)) - 1
                stuck = stuck + 1 if c == restart_at else 0
                if stuck >= 100:
                    raise RuntimeError("cluster falls apart straight after every restart")
                restart_at = c
                trace.dimension_time[None] = trace.dimension_time.get(None, 0.0) - (apart - interval)
                del trace.events[apart_events:]
                trace.restarts += 1
                x = last_rigid_x.copy()
                apart, prev_state = 0.0, None
                continue
        else:
            apart = 0.0
        c += 1
        key = (dim, mid)
        if mid != UNCLASSIFIED:
            trace.occupancy[key] = trace.occupancy.get(key, 0.0) + interval
        trace.dimension_time[dim] = trace.dimension_time.get(dim, 0.0) + interval
        if key != prev_state:
            trace.events.append((c * interval, dim, mid))
            prev_state = key
        if dim == 0:
            if prev_rigid is not None and g.edges != prev_rigid[0].edges:
                pair = (prev_rigid[1], mid)
                trace.transitions[pair] = trace.transitions.get(pair, 0) + 1
            prev_rigid = (g, mid)
            last_rigid_x = x.copy()
        if progress and c % 10000 == 0:
            progress(c / chunks)
        if c % 1000 == 0:
            x = geo.center(x)
    trace.anomalies = classifier.anomalies
    trace.wall_seconds = time.perf_counter() - t0
    return trace


def run_replicas(params, classifier, x0, replicas=1):
    """Independent runs with seeds ``seed, seed+1, ...`` merged by summation."""
    total = None
    for r in range(replicas):
        p = SimParams(**{**asdict(params), "seed": params.seed + r})
        tr = run(p, classifier, x0)
        total = tr if total is None else total.merge(tr)
    return total


def run_and_compare(trace, summary, network, kappa=None):
    """Compare a finished run with theory: probabilities, ratios, counts."""
    kappa = trace.params.kappa if kappa is None else kappa
    report = {"kappa": kappa, "seed": trace.params.seed, "elapsed": trace.elapsed}
    scatter = []
    for dim in range(3):
        theory = summary.probabilities(dim)
        sim = trace.probabilities(dim)
        for k, p in theory.items():
            scatter.append((dim, k, p, sim.get(k, 0.0)))
    report["scatter"] = scatter
    th = np.array([s[2] for s in scatter])
    sm = np.array([s[3] for s in scatter])
    report["rank_correlation"] = float(spearmanr(th, sm).statistic) if len(th) > 2 else float("nan")
    report["ratios_sim"] = trace.ratios(kappa)
    report["ratios_theory"] = summary.ratios
    C = trace.transition_matrix(network.modes)
    report["counts_sim"] = C.tolist()
    report["counts_theory"] = network.expected_counts(trace.elapsed, kappa=kappa).tolist()
    report["anomalies"] = trace.anomalies
    return report


def write_trace(trace, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("time,dim,mode\n")
        for t, dim, mid in trace.events:
            fh.write(f"{t:.6f},{'' if dim is None else dim},{mid}\n")


def trace_summary(trace, modes):
    kappa = trace.params.kappa
    dim_time = {("none" if k is None else str(k)): v for k, v in trace.dimension_time.items()}
    return {
        "params": asdict(trace.params),
        "kappa": kappa,
        "seed": trace.params.seed,
        "elapsed": trace.elapsed,
        "dimension_time": dim_time,
        "occupancy": [{"dim": k[0], "mode": k[1], "time": v}
                      for k, v in sorted(trace.occupancy.items())],
        "ratios": list(trace.ratios(kappa)),
        "modes": list(modes),
        "transitions": trace.transition_matrix(modes).tolist(),
        "anomalies": trace.anomalies,
        "restarts": trace.restarts,
        "wall_seconds": trace.wall_seconds,
    }


def write_summary(trace, modes, path):
    with open(path, "w") as fh:
        json.dump(trace_summary(trace, modes), fh, indent=2)
