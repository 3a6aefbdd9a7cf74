"""Classical trajectory oracle and the rotation-phase spread diagnostic.

Trajectories are integrated in the path variable s = c t [m] with position in
metres and kinetic momentum in eV:

    dx/ds = pi / eps,        dpi/ds = q c (pi / eps) x B   [eV/m, B in T].

This is the positive-energy classical limit of the FW equation of motion
with the spin term dropped.  Magnetic forces do no work, so eps must stay
constant; the integrator's energy drift is recorded on every trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .beamstate import (
    UNITS,
    BeamQuantumState,
    DomainError,
    ParticleSpecies,
    coupling,
    landau_energy,
)
from .modes import radial_profile

FieldFunc = Callable[[np.ndarray, np.ndarray, np.ndarray], tuple]


class IntegrationError(RuntimeError):
    """The ODE solver failed or violated its energy budget."""


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray  # s
    position: np.ndarray  # (N, 3) m
    momentum: np.ndarray  # (N, 3) eV
    energy: np.ndarray  # (N,) eV
    steps: int
    rtol: float
    method: str

    @property
    def energy_drift(self) -> float:
        """max |eps - eps_0| / eps_0."""
        return float(np.max(np.abs(self.energy - self.energy[0])) / self.energy[0])

    CSV_COLUMNS = (("t", "s"), ("x", "m"), ("y", "m"), ("z", "m"),
                   ("pi_x", "eV"), ("pi_y", "eV"), ("pi_z", "eV"), ("eps", "eV"))

    def csv_rows(self):
        return np.column_stack([self.t, self.position, self.momentum, self.energy])


class UniformField:
    """Uniform B = B_z e_z [T]; has the same ``field`` signature as a Beamline."""

    def __init__(self, B_z: float):
        self.B_z = B_z

    def field(self, x, y, z):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x), np.zeros_like(x), np.full_like(x, self.B_z)


def _field_callable(fieldmap) -> FieldFunc:
    if callable(fieldmap):
        return fieldmap
    return fieldmap.field


def _rhs(species: ParticleSpecies, field: FieldFunc, extra_force=None):
    qc = species.charge * UNITS.c
    m2 = species.mass**2

    def rhs(s, y):
        pos, p = y[:3], y[3:]
        eps = math.sqrt(m2 + p @ p)
        v = p / eps
        bx, by, bz = field(pos[0], pos[1], pos[2])
        B = np.array([float(bx), float(by), float(bz)])
        dp = qc * np.cross(v, B)
        if extra_force is not None:
            dp = dp + extra_force(pos, p)
        return np.concatenate([v, dp])

    return rhs


def _boris(species, field, y0, z_final, ds, max_steps):
    qc = species.charge * UNITS.c
    m2 = species.mass**2
    x, p = y0[:3].copy(), y0[3:].copy()
    out_s, out = [0.0], [np.concatenate([x, p])]
    s = 0.0

    def push(x, p, h):
        eps = math.sqrt(m2 + p @ p)
        x_half = x + p / eps * h / 2
        B = np.array([float(c) for c in field(*x_half)])
        tvec = qc * B / eps * h / 2
        p_prime = p + np.cross(p, tvec)
        p = p + np.cross(p_prime, 2 * tvec / (1 + tvec @ tvec))
        eps = math.sqrt(m2 + p @ p)
        return x_half + p / eps * h / 2, p

    for _ in range(max_steps):
        x_new, p_new = push(x, p, ds)
        h = ds
        if x_new[2] > z_final:
            # shortened last step landing on the target plane (exact when v_z is constant)
            h = ds * (z_final - x[2]) / (x_new[2] - x[2])
            x_new, p_new = push(x, p, h)
        x, p = x_new, p_new
        s += h
        out_s.append(s)
        out.append(np.concatenate([x, p]))
        if x[2] >= z_final * (1 - 1e-15) or h < ds:
            break
    else:
        raise IntegrationError("Boris push did not reach z_final within max_steps")
    return np.array(out_s), np.array(out).T


def integrate_trajectory(
    species: ParticleSpecies,
    position,
    momentum,
    fieldmap,
    z_final: float,
    tol: float = 1e-11,
    *,
    method: str = "DOP853",
    max_step: float = np.inf,
    ds: float | None = None,
    extra_force=None,
    energy_budget: float | None = None,
) -> Trajectory:
    """Integrate a charged particle until it reaches ``z_final``.

    Parameters
    ----------
    position : (3,) m
    momentum : (3,) kinetic momentum [eV]
    fieldmap : Beamline, UniformField or callable ``(x, y, z) -> (Bx, By, Bz)``
    tol : float
        Relative tolerance of the adaptive scheme.  Absolute floors (1e-9 tol m
        and 1e-6 |pi| tol transversally; travel length and |pi| times tol
        longitudinally) only matter for components near zero.
    method : "DOP853" (default), any other ``solve_ivp`` method, or "boris"
        for the fixed-step volume-preserving push with step ``ds`` [m].
    extra_force : callable (pos, pi) -> dpi/ds [eV/m], optional
    energy_budget : float, optional
        Raise :class:`IntegrationError` if the relative energy drift exceeds it.
    """
    pos0 = np.asarray(position, dtype=float).reshape(3)
    p0 = np.asarray(momentum, dtype=float).reshape(3)
    pmag = float(np.linalg.norm(p0))
    if pmag == 0:
        raise DomainError("initial momentum must be nonzero")
    if p0[2] <= 0 and z_final > pos0[2]:
        raise DomainError("particle must move towards z_final")
    field = _field_callable(fieldmap)
    y0 = np.concatenate([pos0, p0])
    eps0 = math.sqrt(species.mass**2 + pmag**2)
    s_max = 4.0 * (z_final - pos0[2]) * eps0 / p0[2] + 1.0

    if method == "boris":
        if ds is None:
            raise DomainError("Boris push needs a step ds")
        s, Y = _boris(species, field, y0, z_final, ds, int(s_max / ds) + 10)
        steps = len(s) - 1
    else:
        def reach(s, y):
            return y[2] - z_final

        reach.terminal = True
        reach.direction = 1
        # absolute floors: transverse ones far below any physical scale so rtol
        # governs; z crosses zero, so its floor follows the travel length
        span = abs(z_final - pos0[2])
        atol = np.array([1e-9 * tol, 1e-9 * tol, span * tol, 1e-6 * pmag * tol, 1e-6 * pmag * tol, pmag * tol])
        sol = integrate.solve_ivp(
            _rhs(species, field, extra_force), (0.0, s_max), y0, method=method,
            rtol=tol, atol=atol, events=reach, max_step=max_step,
        )
        if sol.status < 0:
            raise IntegrationError(f"solver failed: {sol.message}")
        if sol.status != 1:
            raise IntegrationError(f"z_final={z_final} not reached (stopped at z={sol.y[2, -1]:.6g} m)")
        s = np.append(sol.t, sol.t_events[0][0])
        Y = np.column_stack([sol.y, sol.y_events[0][0]])
        steps = int(sol.nfev)
    pos, p = Y[:3].T, Y[3:].T
    eps = np.sqrt(species.mass**2 + np.sum(p * p, axis=1))
    traj = Trajectory(s / UNITS.c, pos, p, eps, steps, tol, method)
    if energy_budget is not None and traj.energy_drift > energy_budget:
        raise IntegrationError(f"energy drift {traj.energy_drift:.3e} exceeds budget {energy_budget:.3e}")
    return traj


def azimuthal_momentum(traj: Trajectory, axis=(0.0, 0.0), reference: int = 0):
    """pi_phi along the trajectory, projected on e_phi at sample ``reference``."""
    rel = traj.position[reference, :2] - np.asarray(axis, float)
    ephi = np.array([-rel[1], rel[0]]) / np.hypot(*rel)
    return traj.momentum[:, :2] @ ephi


def extract_azimuthal_kick(traj: Trajectory, axis=(0.0, 0.0)) -> float:
    """Change of pi_phi [eV] between the first and last sample, about ``axis``,
    using e_phi at the starting point."""
    pphi = azimuthal_momentum(traj, axis)
    return float(pphi[-1] - pphi[0])


def canonical_angular_momentum(traj: Trajectory, fieldmap, species: ParticleSpecies, axis=(0.0, 0.0)):
    """Canonical OAM R p_phi = (R x pi)_z + e R A_phi about ``axis`` [hbar]."""
    rel = traj.position[:, :2] - np.asarray(axis, float)
    R = np.hypot(rel[:, 0], rel[:, 1])
    kin = rel[:, 0] * traj.momentum[:, 1] - rel[:, 1] * traj.momentum[:, 0]  # eV m
    a_phi = fieldmap.vector_potential_phi(traj.position[:, 0], traj.position[:, 1], traj.position[:, 2], axis)
    pot = species.charge * UNITS.c * R * a_phi  # eV m (q c A [eV] times R)
    return (kin + pot) / UNITS.hbarc


@dataclass(frozen=True)
class ConservationCheck:
    max_abs_drift: float  # hbar
    scale: float  # hbar, largest |kinetic| or |potential| part along the path
    max_rel_drift: float


def canonical_conservation(traj: Trajectory, fieldmap, species: ParticleSpecies, gauge_axis=(0.0, 0.0)) -> ConservationCheck:
    """Drift of the canonical azimuthal momentum about ``gauge_axis``.

    Measured as the canonical angular momentum R p_phi, normalized by the
    largest kinetic or field term encountered; it is conserved only when the
    gauge axis is the solenoids' common symmetry axis.
    """
    L = canonical_angular_momentum(traj, fieldmap, species, gauge_axis)
    rel = traj.position[:, :2] - np.asarray(gauge_axis, float)
    kin = (rel[:, 0] * traj.momentum[:, 1] - rel[:, 1] * traj.momentum[:, 0]) / UNITS.hbarc
    scale = float(max(np.max(np.abs(kin)), np.max(np.abs(L - kin))))
    drift = float(np.max(np.abs(L - L[0])))
    return ConservationCheck(drift, scale, drift / scale if scale else 0.0)


def fit_circle(x, y):
    """Algebraic least-squares circle fit; returns (xc, yc, radius)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    A = np.column_stack([x, y, np.ones_like(x)])
    b = x**2 + y**2
    (c0, c1, c2), *_ = np.linalg.lstsq(A, b, rcond=None)
    xc, yc = c0 / 2, c1 / 2
    return xc, yc, math.sqrt(c2 + xc**2 + yc**2)


def gyration_frequency(traj: Trajectory) -> float:
    """Angular frequency [rad/s] of the rotation of pi_perp."""
    ang = np.unwrap(np.arctan2(traj.momentum[:, 1], traj.momentum[:, 0]))
    return float(abs(np.polyfit(traj.t, ang, 1)[0]))


# -- rotation-phase spread -------------------------------------------------

UNIFORM_PHASE_VARIANCE = (2 * np.pi) ** 2 / 12


@dataclass(frozen=True)
class PhaseSpreadReport:
    mean_omega: float  # rad/s
    var_omega: float  # rad^2/s^2
    z: np.ndarray  # m
    var_phi: np.ndarray  # rad^2
    p_z_spread: float  # eV
    threshold: float = UNIFORM_PHASE_VARIANCE

    @property
    def decoherence_length(self) -> float:
        """First sampled z where Var(phi) reaches the uniform-phase variance (inf if never)."""
        hit = np.nonzero(self.var_phi >= self.threshold)[0]
        return float(self.z[hit[0]]) if hit.size else math.inf


def _radial_moments(state: BeamQuantumState, B: float, r_min_fraction: float):
    """<Omega>, <Omega^2> with Omega(r) = l/r^2 - eB/2 over the mode density (eV^2 units)."""
    w = UNITS.length_to_natural(state.w0)
    eb = coupling(B, state.species)
    r_lo = r_min_fraction * w
    r_hi = w * (6.0 + math.sqrt(state.radial_order))

    def dens(r):
        # profile in natural units: w as length, amplitude^2 * 2 pi r
        return 2 * np.pi * r * radial_profile(state.n, state.ell, w, r) ** 2

    def omega(r):
        return state.ell / r**2 - eb / 2

    scale = abs(eb) / 2 + abs(state.ell) / w**2  # typical |Omega|, sets absolute floors
    opts = dict(limit=400, epsrel=1e-11, points=np.linspace(r_lo, r_hi, 9)[1:-1])
    norm = integrate.quad(dens, r_lo, r_hi, epsabs=0.0, **opts)[0]
    m1 = integrate.quad(lambda r: omega(r) * dens(r), r_lo, r_hi, epsabs=1e-13 * scale, **opts)[0] / norm
    m2 = integrate.quad(lambda r: omega(r) ** 2 * dens(r), r_lo, r_hi, epsabs=1e-13 * scale**2, **opts)[0] / norm
    return m1, m2


def phase_spread(
    state: BeamQuantumState,
    B: float,
    z,
    p_z_spread: float = 0.0,
    r_min_fraction: float = 1e-3,
    n_hermite: int = 40,
) -> PhaseSpreadReport:
    """Growth of the rotation-phase variance along a solenoid.

    Semiclassically omega(r) = (l/r^2 - eB/2)/eps with eps the (constant)
    state energy including the spin term.  For a single partial wave the
    phase after a length z is omega t with t = z eps / p_z; a Gaussian spread
    of p_z (std ``p_z_spread`` eV) adds the longitudinal contribution, which
    is averaged with Gauss-Hermite quadrature.  The radial integral starts at
    ``r_min_fraction * w0`` (the variance of l/r^2 diverges logarithmically
    for |l| = 1 without a cutoff).
    """
    if B == 0:
        raise DomainError("phase spread needs a nonzero field")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    eps = landau_energy(state, B)
    m1, m2 = _radial_moments(state, B, r_min_fraction)
    var_Omega = max(m2 - m1 * m1, 0.0)
    if state.ell == 0:
        var_Omega = 0.0  # Omega(r) is exactly constant
    z_nat = UNITS.length_to_natural(z)
    if p_z_spread > 0:
        x, wts = np.polynomial.hermite_e.hermegauss(n_hermite)
        wts = wts / wts.sum()
        pz = state.p_z + p_z_spread * x
        if np.any(pz <= 0):
            raise DomainError("p_z spread reaches non-positive momenta")
        inv1 = wts @ (1 / pz)
        inv2 = wts @ (1 / pz**2)
        var_phi = z_nat**2 * (m2 * inv2 - m1 * m1 * inv1 * inv1)
        if state.ell == 0:
            var_phi = z_nat**2 * m1 * m1 * (inv2 - inv1 * inv1)
    else:
        var_phi = var_Omega * (z_nat / state.p_z) ** 2
    return PhaseSpreadReport(
        UNITS.frequency_to_si(m1 / eps),
        UNITS.frequency_to_si(1.0) ** 2 * var_Omega / eps**2,
        z,
        var_phi,
        p_z_spread,
    )
