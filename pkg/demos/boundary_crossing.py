"""An off-axis electron crosses from a 1 T solenoid into a reversed one.

The predicted kick and whole-beam orbit are set against a classical
trajectory through smooth fringe fields.
"""

import numpy as np

from twistbeam import ELECTRON, Beamline, BeamQuantumState, FieldRegion
from twistbeam.dynamics import canonical_conservation, fit_circle, integrate_trajectory
from twistbeam.transitions import post_transition_state

P = 5e9  # eV, stiff enough that the fringe expansion holds at 0.1 mm
offset = (1e-4, 5e-5)
first = FieldRegion.solenoid(1.0, (-1.0, 0.0), fringe_length=1e-3, name="source")
second = FieldRegion.solenoid(-1.0, (0.0, 40.0), fringe_length=1e-3, name="reversed")
line = Beamline([first, second])

state = BeamQuantumState(ELECTRON, 0, 0, P, 1e-7, offset)

report = post_transition_state(state, first, second, r_probe=(0.0, 0.0))
print(report.render())

traj = integrate_trajectory(ELECTRON, (*offset, -0.01), (0.0, 0.0, P), line, 30.0, 1e-11)
inside = traj.position[:, 2] > 0.02
xc, yc, radius = fit_circle(traj.position[inside, 0], traj.position[inside, 1])
chk = canonical_conservation(traj, line, ELECTRON)
print(f"\ntrajectory orbit radius {radius:.6e} m (predicted {report.orbit_radius:.6e} m)")
print(f"trajectory orbit centre {np.array([xc, yc])} m (predicted {report.orbit_center} m)")
print(f"canonical angular momentum relative drift {chk.max_rel_drift:.2e}")
