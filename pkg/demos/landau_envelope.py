"""Width of a twisted electron beam injected into a 1 T solenoid.

A waist equal to the magnetic width stays put (Landau mode); a narrower waist
breathes.  The closed-form envelope is compared with a direct Crank-Nicolson
propagation of the radial wavefunction.
"""

import math

import numpy as np

from twistbeam import magnetic_width
from twistbeam.modes import field_envelope, magnetic_rayleigh_length
from twistbeam.paraxial_oracle import envelope_check

B, K = 1.0, 1e3  # T, eV
wm = magnetic_width(B)
zm = magnetic_rayleigh_length(B, K)
z = np.linspace(0.0, 2 * math.pi * zm, 9)

print(f"w_m = {wm:.4e} m, z_m = {zm:.4e} m")
for label, w0 in (("w0 = w_m", wm), ("w0 = w_m/sqrt2", wm / math.sqrt(2))):
    closed = field_envelope(0, 2, 0.5, w0, B, K, z).w
    run = envelope_check(0, 2, w0, B, K, z, s_z=0.5)
    print(f"\n{label}  (max relative difference {run.max_rel_err:.2e})")
    print("  z/z_m     w/w_m (closed)   w/w_m (numeric)")
    for zi, wa, wn in zip(z, closed, run.w_numeric):
        print(f"  {zi / zm:6.3f}   {wa / wm:14.6f}   {wn / wm:14.6f}")
