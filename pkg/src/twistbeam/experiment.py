"""Magnetic moments, the quadrupole OAM analyzer and twisted-positronium estimates.

The analyzer occupies z in [-L/2, L/2] (origin at its midplane) with

    B_x = kappa z,  B_y = 0,  B_z = B~ + kappa x,

followed by a field-free drift to the target plane.  The OAM force
mu * kappa acts on the beam centroid as an external body force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beamstate import (
    ELECTRON_MASS_EV,
    POSITRON,
    POSITRONIUM_BINDING_EV,
    UNITS,
    DomainError,
    ParticleSpecies,
    magnetic_width,
)
from .dynamics import Trajectory, integrate_trajectory
from .fields import quadrupole_field


def magnetic_moment(L_z: float, s_z: float, species: ParticleSpecies, gamma: float = 1.0) -> float:
    """mu = e (L_z + 2 s_z) hbar / (2 gamma m) in eV/T (signed with the charge)."""
    if gamma < 1:
        raise DomainError("gamma must be >= 1")
    # hbar e / (2 m) = hbar[eV s] c^2 / (2 m[eV]) in eV/T
    return species.charge * (L_z + 2 * s_z) * UNITS.hbar_ev_s * UNITS.c**2 / (2 * gamma * species.mass)


def sg_force(L_z: float, kappa: float, species: ParticleSpecies, gamma: float = 1.0, s_z: float = 0.0) -> float:
    """f_x = mu kappa [eV/m]; spin contributes only when ``s_z`` is given."""
    return magnetic_moment(L_z, s_z, species, gamma) * kappa


def moment_energy(L_z, s_z, species, gamma, B_tilde, kappa, x, z=0.0):
    """mu * B~_z(x) [eV] using the analyzer field map."""
    bz = quadrupole_field(B_tilde, kappa, x, z).b_z
    return magnetic_moment(L_z, s_z, species, gamma) * bz


@dataclass(frozen=True)
class AnalyzerGeometry:
    """Quadrupole analyzer followed by a drift.

    Defaults are illustrative, sized for a 1 keV/c electron or positron with
    l = 10^4: opposite-OAM beams land ~0.2 mm apart after a 1 m drift while
    B~_z stays positive along the path and the Lorentz y-excursion is paraxial.
    """

    B_tilde: float = 1e-7  # T
    kappa: float = 0.035  # T/m
    length: float = 1e-2  # m
    drift: float = 1.0  # m, analyzer exit to target
    outlet_diameter: float = 10e-6  # m
    aperture: float = math.inf  # m, half-width of the magnet bore

    def __post_init__(self):
        if self.B_tilde <= 0:
            raise DomainError("the uniform analyzer field must be positive")
        if self.length <= 0 or self.drift < 0:
            raise DomainError("analyzer length must be positive and drift non-negative")

    @property
    def z_entry(self) -> float:
        return -self.length / 2

    @property
    def z_exit(self) -> float:
        return self.length / 2

    @property
    def target_z(self) -> float:
        return self.z_exit + self.drift

    def field(self, x, y, z):
        s = quadrupole_field(self.B_tilde, self.kappa, x, z, y)
        return s.b_x, s.b_y, s.b_z


@dataclass(frozen=True)
class TwistedBeam:
    species: ParticleSpecies
    p_z: float  # eV
    L_z: float  # hbar
    s_z: float = 0.0
    x0: float = 0.0  # m
    y0: float = 0.0  # m
    label: str = ""

    @property
    def gamma(self) -> float:
        return math.hypot(self.species.mass, self.p_z) / self.species.mass


@dataclass(frozen=True)
class BeamHit:
    label: str
    L_z: float
    x: float  # m
    y: float  # m
    min_B_z: float  # T, smallest B~_z met inside the analyzer
    left_aperture: bool
    trajectory: Trajectory


@dataclass(frozen=True)
class DeflectionOutcome:
    hits: tuple[BeamHit, ...]
    geometry: AnalyzerGeometry
    flags: tuple[str, ...] = field(default=())

    @property
    def separation(self) -> float:
        """Spread of target x positions across the simulated beams [m]."""
        xs = [h.x for h in self.hits]
        return max(xs) - min(xs)

    @property
    def y_deflection(self) -> float:
        """Mean y displacement at the target [m]."""
        return float(np.mean([h.y for h in self.hits]))

    @property
    def y_spread(self) -> float:
        """max |y_i - y_j| / |mean y|: zero if the y-deflection is OAM-blind."""
        ys = np.array([h.y for h in self.hits])
        return float((ys.max() - ys.min()) / abs(ys.mean())) if ys.mean() else 0.0

    @property
    def margin(self) -> float:
        """separation - outlet diameter [m]; positive means resolvable."""
        return self.separation - self.geometry.outlet_diameter

    @property
    def resolvable(self) -> bool:
        return self.margin > 0

    CSV_COLUMNS = (("label", ""), ("L_z", "hbar"), ("x", "m"), ("y", "m"), ("min_B_z", "T"))

    def csv_rows(self):
        return [[h.label, h.L_z, h.x, h.y, h.min_B_z] for h in self.hits]

    def render(self) -> str:
        g = self.geometry
        lines = [
            f"analyzer: B~={g.B_tilde:.6g} T, kappa={g.kappa:.6g} T/m, length={g.length:.6g} m, "
            f"drift={g.drift:.6g} m, outlet={g.outlet_diameter:.6g} m",
        ]
        for h in self.hits:
            lines.append(f"  {h.label or 'beam'}: L_z={h.L_z:+.6g} hbar  x={h.x:+.9e} m  y={h.y:+.9e} m")
        lines.append(f"separation: {self.separation:.6e} m (margin {self.margin:+.6e} m)")
        lines.append(f"y-deflection: {self.y_deflection:.6e} m, relative spread {self.y_spread:.3e}")
        lines.extend(f"flag: {f}" for f in self.flags)
        return "\n".join(lines)


def _simulate(beam: TwistedBeam, geo: AnalyzerGeometry, tol: float) -> BeamHit:
    f_x = sg_force(beam.L_z, geo.kappa, beam.species, beam.gamma, beam.s_z)
    force = np.array([f_x, 0.0, 0.0])
    traj = integrate_trajectory(
        beam.species,
        (beam.x0, beam.y0, geo.z_entry),
        (0.0, 0.0, beam.p_z),
        geo.field,
        geo.z_exit,
        tol,
        max_step=geo.length / 20 * math.hypot(beam.species.mass, beam.p_z) / beam.p_z,
        extra_force=lambda pos, p: force,
    )
    x, p = traj.position[-1], traj.momentum[-1]
    # straight field-free drift to the target plane
    x_t = x[0] + p[0] / p[2] * geo.drift
    y_t = x[1] + p[1] / p[2] * geo.drift
    bz = geo.B_tilde + geo.kappa * traj.position[:, 0]
    out = np.any(np.abs(traj.position[:, :2]) > geo.aperture)
    return BeamHit(beam.label, beam.L_z, float(x_t), float(y_t), float(bz.min()), bool(out), traj)


def deflection_sim(beams, geometry: AnalyzerGeometry = AnalyzerGeometry(), tol: float = 1e-12) -> DeflectionOutcome:
    """Track each beam centroid through the analyzer and drift to the target."""
    if isinstance(beams, TwistedBeam):
        beams = (beams,)
    hits = tuple(_simulate(b, geometry, tol) for b in beams)
    flags = []
    for h in hits:
        if h.left_aperture:
            flags.append(f"{h.label or 'beam'} left the analyzer aperture")
        if h.min_B_z <= 0:
            flags.append(f"{h.label or 'beam'} met B~_z <= 0 inside the analyzer")
    out = DeflectionOutcome(hits, geometry, ())
    if len(hits) > 1 and not out.resolvable:
        flags.append("separation does not exceed the source outlet diameter")
    return DeflectionOutcome(hits, geometry, tuple(flags))


def opposite_oam_beams(species: ParticleSpecies, p_z: float, L_z: float, s_z: float = 0.0):
    return (
        TwistedBeam(species, p_z, abs(L_z), s_z, label="L+"),
        TwistedBeam(species, p_z, -abs(L_z), s_z, label="L-"),
    )


def mirror_residual(outcome: DeflectionOutcome, reference: DeflectionOutcome) -> float:
    """|(x+ - x0) + (x- - x0)| / |x+ - x-| for a two-beam outcome and an L=0 reference."""
    (a, b), x0 = outcome.hits, reference.hits[0].x
    return abs((a.x - x0) + (b.x - x0)) / abs(a.x - b.x)


def source_oam(species: ParticleSpecies, ell_magnitude: int, B_source: float) -> int:
    """Signed l of a basic state born in a source field B (sgn(e B) l <= 0)."""
    if B_source == 0:
        raise DomainError("source field must be nonzero")
    return -species.charge_sign * int(np.sign(B_source)) * abs(ell_magnitude)


def twisted_positron_scenario(
    ell_magnitude: int = 10_000,
    B_source: float = 1.0,
    p_z: float = 1e3,
    geometry: AnalyzerGeometry = AnalyzerGeometry(),
    retention: float = 1.0,
    tol: float = 1e-12,
) -> DeflectionOutcome:
    """Two positron beams produced with the source field along +z and -z
    (OAMs L1 and L2), analyzed by the quadrupole."""
    beams = []
    for label, b in (("L1", B_source), ("L2", -B_source)):
        L = oam_retention(source_oam(POSITRON, ell_magnitude, b), retention)
        beams.append(TwistedBeam(POSITRON, p_z, L, label=label))
    return deflection_sim(beams, geometry, tol)


def oam_retention(L_z: float, factor: float) -> float:
    """OAM surviving deceleration, modelled as a plain factor in [0, 1]."""
    if not 0 <= factor <= 1:
        raise DomainError("retention factor must lie in [0, 1]")
    return L_z * factor


# -- effective mass and positronium -----------------------------------------

def effective_mass(species: ParticleSpecies, n: int, ell: int, w0: float) -> float:
    """M = sqrt(m^2 + 2(2n+|l|+1)(hbar c / w0)^2) [eV]."""
    if not w0 > 0:
        raise DomainError("waist must be positive")
    if n < 0:
        raise DomainError("n must be non-negative")
    q = UNITS.hbarc / w0
    return math.sqrt(species.mass**2 + 2 * (2 * n + abs(ell) + 1) * q * q)


def excess_mass(species: ParticleSpecies, n: int, ell: int, w0: float) -> float:
    """M - m computed without cancellation [eV]."""
    t = 2 * (2 * n + abs(ell) + 1) * (UNITS.hbarc / w0) ** 2
    return t / (math.sqrt(species.mass**2 + t) + species.mass)


POSITRONIUM_MASS_EV = 2 * ELECTRON_MASS_EV - POSITRONIUM_BINDING_EV


@dataclass(frozen=True)
class ThresholdVerdict:
    stable: bool
    margin: float  # eV

    def __iter__(self):
        return iter((self.stable, self.margin))


def positronium_threshold(M: float, m_Ps: float = POSITRONIUM_MASS_EV) -> ThresholdVerdict:
    """Stable iff M - m_Ps < binding energy; margin = binding - (M - m_Ps)."""
    if M < m_Ps:
        raise DomainError("effective mass below the positronium rest mass")
    margin = POSITRONIUM_BINDING_EV - (M - m_Ps)
    return ThresholdVerdict(margin > 0, margin)


def positronium_threshold_from_excess(excess: float) -> ThresholdVerdict:
    """Same verdict from M - m_Ps directly (avoids cancellation)."""
    if excess < 0:
        raise DomainError("excess mass must be non-negative")
    margin = POSITRONIUM_BINDING_EV - excess
    return ThresholdVerdict(margin > 0, margin)


def invariant_mass(E: float, p) -> float:
    """sqrt(E^2 - |p|^2) [eV]."""
    p = np.asarray(p, dtype=float)
    m2 = E * E - p @ p
    if m2 < 0:
        raise DomainError("spacelike four-momentum")
    return math.sqrt(m2)


def zero_momentum_frame(E: float, p):
    """Boost velocity beta (3-vector) to the frame where the total momentum
    vanishes and the energy equals the invariant mass; the annihilation
    photons' momenta sum to zero there."""
    p = np.asarray(p, dtype=float)
    M = invariant_mass(E, p)
    return p / E, M


def source_state_width(B_source: float, species: ParticleSpecies = POSITRON) -> float:
    """Waist of a Landau-born beam leaving the source solenoid (w_m)."""
    return magnetic_width(B_source, species)
