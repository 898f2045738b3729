"""Build a desk-scale Dirac-sea system and read off its causal structure.

The system lives on a flat spatial 3-torus: a finite set of negative-energy
plane waves, exponentially damped in momentum, evaluated at a handful of
space-time points.  Each point becomes a rank-4 self-adjoint operator; the
spectrum of pairwise products classifies pairs as spacelike, timelike, or
lightlike, and an antisymmetric trace functional orients timelike pairs.
"""

import numpy as np

from cfslab import (
    MinkowskiConfig,
    build_system,
    classify,
    time_direction,
    time_orientation,
    product_spectrum,
)
from cfslab.minkowski import minkowski_interval

# Points on and off the time axis.  Separations are chosen inside the window
# where the lattice resolves the light cone: well above the momentum-cutoff
# scale, below the Compton wavelength 1/m.
samples = (
    (0.00, 0.00, 0.0, 0.0),
    (0.50, 0.10, 0.0, 0.0),   # timelike future of the origin
    (-0.50, 0.12, 0.0, 0.0),  # timelike past
    (0.05, 0.55, 0.0, 0.0),   # spacelike
    (0.10, 0.40, 0.4, 0.0),   # spacelike, off-axis
)

config = MinkowskiConfig(
    mass=1.0, eps=1e-3, torus_radius=0.8, kmax=2, sample_points=samples, max_f=2048
)
system = build_system(config)
print(f"system: {len(system)} points, Hilbert dimension f = {system.f}, "
      f"spin dimension n = {system.n}, regular: {system.is_regular()}")

coords = system.metadata["coordinates"]
print("\npair analysis (vs the coordinate light cone):")
print(f"{'pair':16s} {'interval':>9s} {'class':>6s} {'orient':>6s} {'C(x,y)':>11s}")
origin = system.ids[0]
x = system.point(origin)
for pid in system.ids[1:]:
    y = system.point(pid)
    iv = minkowski_interval(coords[origin], coords[pid])
    cls = classify(x, y, system.tolerances, n=system.n)
    c = time_direction(x, y)
    o = time_orientation(x, y, system.tolerances)
    print(f"{origin}-{pid:9s} {iv:9.3f} {cls.symbol:>6s} {o:>6d} {c:11.3e}")

print("""
Notes: the coordinate-timelike pairs come out timelike (real product spectrum
with distinct moduli), the coordinate-spacelike ones spacelike (complex
conjugate pairs of equal modulus).  On this lattice the orientation
functional is exactly zero for purely time-separated pairs and its sign
anti-correlates with coordinate time order; the acceptance suite freezes
that measured behavior.""")

print("product spectrum of the first timelike pair:")
lam = product_spectrum(x, system.point(system.ids[1]), system.n)
for z in lam:
    print(f"  {z.real:+.6f} {z.imag:+.6f}j   |.| = {abs(z):.6f}")
