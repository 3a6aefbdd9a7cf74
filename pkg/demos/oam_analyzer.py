"""Separating positrons of opposite OAM in a quadrupole analyzer.

Positrons born in +1 T and -1 T source fields carry l = -+10^4.  The analyzer
pushes them apart in x while the common Lorentz deflection in y is identical.
"""

from twistbeam import POSITRON, magnetic_width
from twistbeam.experiment import (
    AnalyzerGeometry,
    effective_mass,
    positronium_threshold_from_excess,
    twisted_positron_scenario,
)

geo = AnalyzerGeometry()
out = twisted_positron_scenario(10_000, 1.0, 1e3, geo)
print(out.render())

wm = magnetic_width(1.0)
for n, ell in ((0, 0), (1, 100), (1, 10_000)):
    dm = effective_mass(POSITRON, n, ell, wm) - POSITRON.mass
    print(f"n={n} l={ell:>6}: M - m = {dm:.4e} eV")

for excess in (0.3, 6.8, 7.0):
    v = positronium_threshold_from_excess(excess)
    print(f"twisted positronium with M - m_Ps = {excess} eV: {'stable' if v.stable else 'unstable'} "
          f"(margin {v.margin:+.2f} eV)")
