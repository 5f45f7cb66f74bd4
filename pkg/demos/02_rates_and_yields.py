"""What the totals and the lines say about kinetics and temperature.

The rate between two rigid clusters is a sum over the lines joining them
of 1/Q, where Q integrates 1/(h I) along the line. At sticky parameter
kappa and in a run of length T, the expected number of hops is R T / kappa.
The script also prints the yield of 0-, 1- and 2-D modes against
temperature for a Laplace-limit potential, and the two temperatures where
neighbouring dimensions are equally likely.
"""

import numpy as np

from sticky_landscape import kinetics as kin
from sticky_landscape import statmech as sm
from sticky_landscape.landscape import compute_landscape

land = compute_landscape(n=6, faces=False)
Z0 = sum(m.multiplicity * m.h * m.inertia for m in land.catalog.rigid)
Z1 = sum(l.multiplicity * l.zeta for l in land.lines.lines)
Z = (Z0, Z1, 1137.6)          # Z2 from demos/01_six_spheres.py

net = kin.assemble_rates(land.lines, land.catalog, Z0=Z0, Z=Z)
print("geometric rates (poly, octa):")
print(np.array2string(net.R, precision=3))

kappa = float(sm.kappa_closed_form(sm.PotentialSpec(8.5, 30)))
print(f"\nkappa for E = 8.5, rho = 30: {kappa:.2f}")
C = net.expected_counts(2300, kappa=16)
print(f"expected hops in 2300 time units at kappa = 16: poly-poly {C[0, 0]:.0f}, "
      f"poly-octa {C[0, 1]:.0f}, octa-octa {C[1, 1]:.0f}")

pi = kin.equilibrium_probabilities(land.catalog)
print(f"polytetrahedron is {pi[1] / pi[2]:.1f} times as likely as the octahedron")

for line in land.lines.lines:
    q = kin.committor(line)
    mid = np.interp(line.length / 2, q.s, q.q)
    print(f"line {line.id}: length {line.length:.3f}, committor at midpoint {mid:.3f}")

T0 = sm.critical_temperature(Z, 0)
T1 = sm.critical_temperature(Z, 1)
print(f"\nkappa(T) Z_p = Z_(p+1) at T0 = {T0:.3f} and T1 = {T1:.3f}")
for T in np.linspace(0.8, 2.4, 9):
    y = sm.yields(Z, float(sm.kappa_from_constants(T)))
    print(f"T = {T:4.2f}   yields " + "  ".join(f"{v:5.3f}" for v in y))
