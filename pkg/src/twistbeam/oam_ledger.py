"""Canonical and kinetic orbital angular momentum bookkeeping.

All OAM values are in units of hbar.  Relations that are integer statements
(Landau kinetic OAM, classical limit) return Python ints; the classical
expressions involving radii return floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .beamstate import (
    UNITS,
    BeamQuantumState,
    ParticleSpecies,
    StateClass,
    classify_state,
    coupling,
)


def _field_area_term(B_z: float, species: ParticleSpecies, r_sq):
    """(e B_z / 2) r^2 in hbar units for r^2 in m^2."""
    return coupling(B_z, species) * np.asarray(r_sq) / UNITS.hbarc**2 / 2


def kinetic_from_canonical(L_z, B_z: float, species: ParticleSpecies, r_sq):
    """Kinetic OAM L_z - (e B_z / 2) r^2 [hbar]."""
    if np.any(np.asarray(r_sq) < 0):
        raise ValueError("r^2 must be non-negative")
    return L_z - _field_area_term(B_z, species, r_sq)


class LandauKinetic(NamedTuple):
    kinetic: int
    minus_twice_canonical: int


def landau_kinetic(n: int, ell: int, species: ParticleSpecies) -> LandauKinetic:
    """<kinetic OAM> = l - sgn(e)(2n+|l|+1) of a Landau state, with the
    companion identity <kinetic> - 2 L_z = -sgn(e)[2n + |l| + sgn(e) l + 1]."""
    species.require_charged()
    sg = species.charge_sign
    kin = ell - sg * (2 * n + abs(ell) + 1)
    diff = -sg * (2 * n + abs(ell) + sg * ell + 1)
    return LandauKinetic(kin, diff)


def classical_limit_kinetic(L_z, species: ParticleSpecies):
    """L_z - sgn(e)|L_z|: 2 L_z for the natural rotation sense, else 0."""
    return L_z - species.charge_sign * abs(L_z)


def intrinsic_canonical(r: float, pi_phi: float, species: ParticleSpecies) -> float:
    """-sgn(e) r |pi_phi| / 2 [hbar] for r in metres and pi_phi in eV."""
    if r < 0:
        raise ValueError("r must be non-negative")
    return -species.charge_sign * UNITS.length_to_natural(r) * abs(pi_phi) / 2


def time_dependent_kinetic(L_z, B_z: float, species: ParticleSpecies, R0: float, r: float, phase):
    """Kinetic OAM about the solenoid axis of a particle orbiting an axis at R0.

    L_z - (e B_z / 2)[R0^2 + r^2 + 2 R0 r cos(phase)], extremal at phase 0 and pi.
    """
    if R0 < 0 or r < 0:
        raise ValueError("R0 and r must be non-negative")
    sq = R0**2 + r**2 + 2 * R0 * r * np.cos(phase)
    return L_z - _field_area_term(B_z, species, sq)


@dataclass(frozen=True)
class Contribution:
    source: str  # "mode", "extrinsic-orbit" or "transition-kick"
    component: str  # "intrinsic" or "extrinsic"
    canonical: float
    kinetic: float


@dataclass(frozen=True)
class OamLedger:
    """Snapshot of canonical/kinetic x intrinsic/extrinsic OAM [hbar].

    The per-source contributions are diagnostic; only the totals are
    physical once the beam is far from a boundary.
    """

    contributions: tuple[Contribution, ...]
    nonbasic: bool = False

    def _sum(self, component, attr):
        return sum(getattr(c, attr) for c in self.contributions if c.component == component)

    @property
    def canonical_intrinsic(self):
        return self._sum("intrinsic", "canonical")

    @property
    def canonical_extrinsic(self):
        return self._sum("extrinsic", "canonical")

    @property
    def kinetic_intrinsic(self):
        return self._sum("intrinsic", "kinetic")

    @property
    def kinetic_extrinsic(self):
        return self._sum("extrinsic", "kinetic")

    @property
    def canonical_total(self):
        return self.canonical_intrinsic + self.canonical_extrinsic

    @property
    def kinetic_total(self):
        return self.kinetic_intrinsic + self.kinetic_extrinsic

    def by_source(self, source: str) -> list[Contribution]:
        return [c for c in self.contributions if c.source == source]

    def rows(self):
        """Table rows (component, canonical, kinetic, source); totals last."""
        out = [(c.component, c.canonical, c.kinetic, c.source) for c in self.contributions]
        out.append(("total", self.canonical_total, self.kinetic_total, "physical"))
        return out

    def render(self) -> str:
        lines = [f"{'component':<10} {'canonical':>16} {'kinetic':>16}  source"]
        for comp, can, kin, src in self.rows():
            lines.append(f"{comp:<10} {float(can) + 0.0:>16.9g} {float(kin) + 0.0:>16.9g}  {src}")
        if self.nonbasic:
            lines.append("note: state is nonbasic in this field")
        return "\n".join(lines)


def ledger_for_state(state: BeamQuantumState, B_z: float) -> OamLedger:
    """Ledger of a Landau-type state resident in a uniform field B_z [T].

    Intrinsic: canonical l, kinetic l - (e B/2)<r^2> with <r^2> taken from the
    state's width.  Extrinsic: the centroid's (R0 x pi0)_z plus the gauge term
    (e B/2) R0^2 for the canonical part; (R0 x pi0)_z for the kinetic part.
    """
    sp = state.species
    r2 = state.mean_square_radius()
    intrinsic = Contribution("mode", "intrinsic", state.ell, float(kinetic_from_canonical(state.ell, B_z, sp, r2)))
    R0 = state.axis_offset
    pi0 = state.extrinsic_momentum
    orbital = float(UNITS.length_to_natural(R0[0] * pi0[1] - R0[1] * pi0[0]))
    gauge = float(_field_area_term(B_z, sp, R0 @ R0))
    extrinsic = Contribution("extrinsic-orbit", "extrinsic", orbital + gauge, orbital)
    field_sign = int(np.sign(B_z)) or 1
    nonbasic = classify_state(sp, state.ell, field_sign) is StateClass.NONBASIC if B_z else False
    return OamLedger((intrinsic, extrinsic), nonbasic)
