"""Trajectory set-ups shared by the module tests and the acceptance gate.

The fringe expansion used by the field maps is valid for R << fringe length,
so crossings use stiff 5 GeV particles a few microns to 0.1 mm off axis.
"""

from __future__ import annotations

import numpy as np

from twistbeam import ELECTRON, Beamline, BeamQuantumState, FieldRegion
from twistbeam.dynamics import (
    canonical_conservation,
    extract_azimuthal_kick,
    fit_circle,
    integrate_trajectory,
)
from twistbeam.transitions import azimuthal_kick_intrinsic, post_transition_state

P_STIFF = 5e9  # eV
R_PROBE = 1e-5  # m


def crossing_line(B, B_tilde, lam):
    first = FieldRegion.solenoid(B, (-1.0, 0.0), fringe_length=lam, name="source")
    if B_tilde == 0:
        second = FieldRegion.vacuum((0.0, 1.0), name="target")
    else:
        second = FieldRegion.solenoid(B_tilde, (0.0, 1.0), fringe_length=lam, name="target")
    return Beamline([first, second])


def kick_case(B, B_tilde, lam, species=ELECTRON, tol=1e-11, R=R_PROBE):
    """Integrated and predicted azimuthal kicks plus the canonical drift check."""
    line = crossing_line(B, B_tilde, lam)
    traj = integrate_trajectory(species, (R, 0.0, -10 * lam), (0.0, 0.0, P_STIFF), line, 10 * lam, tol)
    measured = extract_azimuthal_kick(traj)
    predicted = azimuthal_kick_intrinsic(R, B, B_tilde, species)
    return measured, predicted, canonical_conservation(traj, line, species), traj


def orbit_case(B, B_tilde, species=ELECTRON, offset=(1e-4, 5e-5), lam=1e-3, tol=1e-11):
    """Fitted gyration circle in the second solenoid and the predicted report."""
    r1 = FieldRegion.solenoid(B, (-1.0, 0.0), fringe_length=lam, name="first")
    r2 = FieldRegion.solenoid(B_tilde, (0.0, 40.0), fringe_length=lam, name="second")
    line = Beamline([r1, r2])
    state = BeamQuantumState(species, 0, 0, P_STIFF, 1e-7, offset)
    report = post_transition_state(state, r1, r2, r_probe=(0.0, 0.0))
    traj = integrate_trajectory(species, (*offset, -0.01), (0.0, 0.0, P_STIFF), line, 30.0, tol)
    sel = traj.position[:, 2] > 0.02
    xc, yc, radius = fit_circle(traj.position[sel, 0], traj.position[sel, 1])
    return radius, np.array([xc, yc]), report, traj
