"""Leading-order transition rates between rigid modes through the lines."""

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.cluster.hierarchy import DisjointSet

log = logging.getLogger(__name__)

GROUP_THRESHOLD = 0.08


class SingularLineError(ValueError):
    """``h I`` vanishes somewhere on a line."""


@dataclass
class CommittorProfile:
    line_id: int
    s: np.ndarray
    q: np.ndarray


def committor(line):
    """Probability of reaching the far endpoint first, as a function of arc
    length: the normalized running integral of ``1/(h I)``."""
    w = np.asarray(line.h) * np.asarray(line.inertia)
    if np.any(w <= 0):
        raise SingularLineError(f"line {line.id}: h*I vanishes")
    c = cumulative_trapezoid(1.0 / w, line.s, initial=0.0)
    q = c / c[-1]
    q[0], q[-1] = 0.0, 1.0
    return CommittorProfile(line.id, np.asarray(line.s), q)


@dataclass
class RateNetwork:
    modes: list
    R: np.ndarray                 # geometric rates, leading order
    Z: tuple
    convention: str = "leading"
    kappa: float = None

    def index(self, mode_id):
        return self.modes.index(mode_id)

    def rate(self, a, b):
        return float(self.R[self.index(a), self.index(b)])

    def restriction_factor(self, kappa=None):
        kappa = self.kappa if kappa is None else kappa
        if kappa is None or kappa == np.inf:
            return 1.0
        Z0, Z1 = self.Z[0], self.Z[1]
        return 1.0 / (1.0 + Z1 / (kappa * Z0))

    def matrix(self, convention=None):
        convention = convention or self.convention
        if convention == "leading":
            return self.R.copy()
        if convention == "restricted":
            return self.R * self.restriction_factor()
        raise ValueError(f"unknown convention {convention!r}")

    def expected_counts(self, duration, kappa=None, convention=None):
        """Mean number of transitions of each type in ``duration`` time units
        (units of d^2/D) at sticky parameter ``kappa``."""
        kappa = self.kappa if kappa is None else kappa
        net = RateNetwork(self.modes, self.R, self.Z, self.convention, kappa)
        return net.matrix(convention) * duration / kappa


def assemble_rates(line_catalog, catalog, Z0=None, kappa=None, convention="leading", Z=None):
    """Symmetric matrix of geometric rates ``Z0^-1 sum_k N_k / Q_k``.

    ``N_k`` is the number of labeled lines of class ``k`` joining the two
    modes, counted from the traced ``nu`` tallies; lines from a mode to
    itself count twice.
    """
    modes = [m.id for m in catalog.rigid]
    pos = {m: i for i, m in enumerate(modes)}
    mult = {m.id: m.multiplicity for m in catalog.rigid}
    if Z0 is None:
        Z0 = sum(m.multiplicity * m.h * m.inertia for m in catalog.rigid)
    R = np.zeros((len(modes), len(modes)))
    for line in line_catalog.lines:
        a, b = line.endpoints
        if a not in pos or b not in pos:
            log.warning("line %d has an unidentified endpoint; skipped", line.id)
            continue
        ends = [a, b]
        # labeled lines of this class: n_a nu_a / (endpoints of type a)
        nu_a = line_catalog.nu.get((a, line.id), 0)
        count = mult[a] * nu_a / ends.count(a)
        contrib = count / line.Q / Z0
        if a == b:
            R[pos[a], pos[a]] += 2.0 * contrib
        else:
            R[pos[a], pos[b]] += contrib
            R[pos[b], pos[a]] += contrib
    if Z is None:
        Z = (Z0, sum(l.multiplicity * l.zeta for l in line_catalog.lines), float("nan"))
    return RateNetwork(modes, R, tuple(Z), convention, kappa)


def equilibrium_probabilities(catalog):
    z = np.array([m.multiplicity * m.h * m.inertia for m in catalog.rigid])
    return dict(zip([m.id for m in catalog.rigid], z / z.sum()))


def outgoing_rate(network, a, b, pi):
    """Rate of leaving ``a`` for ``b`` per unit probability of being in ``a``."""
    return network.rate(a, b) / pi[a]


def mode_separations(catalog, line_catalog):
    """Quotient-space separation of every pair of rigid modes joined by a
    line: the length of the shortest connecting line."""
    sep = {}
    for line in line_catalog.lines:
        a, b = line.endpoints
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        sep[key] = min(sep.get(key, np.inf), line.length)
    return sep


@dataclass
class GroupedNetwork:
    groups: list                    # list of sorted tuples of mode ids
    R: np.ndarray
    members: dict = field(default_factory=dict)


def group_near_modes(network, separations, threshold=GROUP_THRESHOLD):
    """Merge modes closer than ``threshold``; rates out of a group are summed
    over its members and rates between different members are dropped.
    Self-lines of a member stay, as transitions between labeled copies."""
    ds = DisjointSet(network.modes)
    for (a, b), d in separations.items():
        if d < threshold:
            ds.merge(a, b)
    groups = sorted(tuple(sorted(s)) for s in ds.subsets())
    where = {m: gi for gi, g in enumerate(groups) for m in g}
    G = np.zeros((len(groups), len(groups)))
    for i, a in enumerate(network.modes):
        for j, b in enumerate(network.modes):
            gi, gj = where[a], where[b]
            if gi == gj and a != b:
                continue
            G[gi, gj] += network.R[i, j]
    return GroupedNetwork(groups, G, {g: list(g) for g in groups})
