"""Rebuild the shipped rigid-cluster lists for seven and eight spheres.

Brute force over graphs is hopeless past six spheres, so these lists come
from random walks. Each walk drops the spheres into a random sticky
aggregate and drifts along its internal motions; whenever a new contact
forms it sticks, until no motion is left. The resulting rigid graph is
checked as a valid packing and kept up to isomorphism. Rare clusters need
many walks, so compare the count against the known totals (5 for seven
spheres, 13 for eight).

    python demos/04_regenerate_catalogs.py 7 800
"""

import sys

from sticky_landscape.clusters import discover_catalog

n = int(sys.argv[1]) if len(sys.argv) > 1 else 7
walks = int(sys.argv[2]) if len(sys.argv) > 2 else 800
found = discover_catalog(n, walks=walks, seed=n)
for k, g in found:
    print(f"n={n} id={k} bonds={g}")
