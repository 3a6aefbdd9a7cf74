"""Boundary crossings between solenoids and vacuum.

Kicks are computed from the endpoint fields only (sharp-boundary reference);
the fringe profile never enters.  Fields are signed B_z values in tesla,
positions are 2-vectors in metres and kinetic momenta are in eV.

The azimuthal kick of a particle at radius R crossing from B_z to B~_z is

    d(pi_phi) = e R (B_z - B~_z) / 2,

which is e R (B + |B~|)/2 for an antiparallel target, e R (B - |B~|)/2 for a
parallel one and e R B / 2 into vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beamstate import (
    UNITS,
    BeamQuantumState,
    DomainError,
    ParticleSpecies,
    StateClass,
    classify_state,
    coupling,
    magnetic_width,
)
from .fields import FieldRegion, RegionKind
from .modes import vacuum_width
from .oam_ledger import Contribution, OamLedger, kinetic_from_canonical


def _rot90(v):
    """e_z x v for 2-vectors (or (..., 2) arrays)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _ez_cross(B_z, species, v):
    """e B_z e_z x v / 2 in eV for v in metres."""
    return coupling(B_z, species) / 2 * UNITS.length_to_natural(_rot90(v))


def azimuthal_kick_intrinsic(r: float, B: float, B_tilde: float, species: ParticleSpecies) -> float:
    """Change of pi_phi [eV] at radius r from the state axis (antiparallel,
    parallel and vacuum targets are all covered by the signed B~)."""
    if r < 0:
        raise DomainError("radius must be non-negative")
    return coupling(B - B_tilde, species) * UNITS.length_to_natural(r) / 2


def azimuthal_kick_extrinsic(R0: float, B: float, B_tilde: float, species: ParticleSpecies) -> float:
    """Whole-beam azimuthal kick [eV] for a state axis at distance R0 from the solenoid axis."""
    if R0 < 0:
        raise DomainError("R0 must be non-negative")
    return coupling(B - B_tilde, species) * UNITS.length_to_natural(R0) / 2


def _as_bz(b, name):
    a = np.asarray(b, dtype=float)
    if a.ndim == 0:
        return float(a)
    if a.shape != (3,) or a[0] != 0 or a[1] != 0:
        raise DomainError(f"{name} must be parallel to z (got {b})")
    return float(a[2])


@dataclass(frozen=True)
class KickDecomposition:
    total: np.ndarray
    intrinsic: np.ndarray
    extrinsic: np.ndarray


def general_transition_kick(R0, r, d, B, B_tilde, B0=0.0, species: ParticleSpecies | None = None) -> KickDecomposition:
    """Transverse kinetic-momentum kicks [eV] for a crossing between shifted solenoids.

    total     = e (B - B~) x (R0 + r) / 2 + e (B~ - B0) x d / 2
    intrinsic = e (B - B~) x r / 2
    extrinsic = e (B - B~) x R0 / 2 + e (B~ - B0) x d / 2

    Fields may be signed scalars (B_z) or 3-vectors along z.
    """
    if species is None:
        raise DomainError("species is required")
    Bz, Btz, B0z = _as_bz(B, "B"), _as_bz(B_tilde, "B_tilde"), _as_bz(B0, "B0")
    R0, r, d = (np.asarray(v, dtype=float) for v in (R0, r, d))
    intrinsic = _ez_cross(Bz - Btz, species, r)
    extrinsic = _ez_cross(Bz - Btz, species, R0) + _ez_cross(Btz - B0z, species, d)
    total = _ez_cross(Bz - Btz, species, R0 + r) + _ez_cross(Btz - B0z, species, d)
    return KickDecomposition(total, intrinsic, extrinsic)


@dataclass(frozen=True)
class OrbitGeometry:
    """Circular whole-beam orbit in the target field.

    ``center_offset`` points from the beam's current axis to the orbit centre;
    ``radius_vector`` from the centre to the beam axis.  ``drifting`` is set in
    a field-free target, where the beam moves on a straight line.
    """

    radius: float
    center_offset: np.ndarray | None
    radius_vector: np.ndarray | None
    kinetic_oam: float
    drifting: bool = False


def orbit_radius(delta_pi0, B_tilde: float, species: ParticleSpecies) -> OrbitGeometry:
    """Orbit radius |d pi0| / |e B~| and its centre from the Lorentz-force sense."""
    dp = np.asarray(delta_pi0, dtype=float).reshape(2)
    if B_tilde == 0:
        return OrbitGeometry(math.inf, None, None, 0.0, drifting=True)
    eb = coupling(B_tilde, species)
    radius_vec_nat = _rot90(dp) / eb  # centre -> beam axis, natural units
    radius_vec = UNITS.length_to_si(radius_vec_nat)
    # (rho x pi)_z = -|pi|^2 / (e B~): opposite in sign to e B~
    kin = float(radius_vec_nat[0] * dp[1] - radius_vec_nat[1] * dp[0])
    return OrbitGeometry(float(np.hypot(*radius_vec)), -radius_vec, radius_vec, kin)


def round_half_toward_zero(x: float) -> int:
    return int(math.copysign(math.ceil(abs(x) - 0.5), x))


@dataclass(frozen=True)
class VacuumExit:
    """Free-space LG beam emitted at a solenoid exit."""

    state: BeamQuantumState
    waist: float
    rayleigh_length: float
    drift_slope: np.ndarray  # transverse velocity / v_z of the beam centroid
    ledger: OamLedger

    def width(self, z):
        """Beam width a distance z [m] downstream of the boundary."""
        return vacuum_width(self.waist, self.state.p_z, z)

    def centroid(self, z):
        return self.state.axis_offset + np.multiply.outer(np.asarray(z, float), self.drift_slope)


@dataclass(frozen=True)
class TransitionReport:
    """Everything produced by one boundary crossing.

    OAM values are in hbar, kicks in eV, lengths in metres.  The intrinsic kick
    is evaluated at ``r_probe`` (relative to the state axis).
    ``kinetic_intrinsic_total`` uses the full e B~ coupling on
    (orbit radius^2 + <r^2>); ``kinetic_intrinsic_half_coupling`` is the e B~ / 2
    variant, which is the one that matches the zero-orbit limit of
    ``kinetic_intrinsic_field``.
    """

    kick_total: np.ndarray
    kick_intrinsic: np.ndarray
    kick_extrinsic: np.ndarray
    r_probe: np.ndarray
    orbit_radius: float
    orbit_center: np.ndarray | None
    orbit_quantum: int
    delta_canonical_extrinsic: float
    delta_kinetic_extrinsic: float
    kinetic_intrinsic_field: float
    canonical_intrinsic_total: float
    kinetic_intrinsic_total: float
    kinetic_intrinsic_half_coupling: float
    envelope_oscillates: bool
    class_before: StateClass
    class_after: StateClass
    new_state: BeamQuantumState
    ledger_before: OamLedger
    ledger_after: OamLedger
    vacuum: VacuumExit | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    CSV_FIELDS = (
        ("kick_total_x", "eV"),
        ("kick_total_y", "eV"),
        ("kick_intrinsic_x", "eV"),
        ("kick_intrinsic_y", "eV"),
        ("kick_extrinsic_x", "eV"),
        ("kick_extrinsic_y", "eV"),
        ("orbit_radius", "m"),
        ("orbit_center_x", "m"),
        ("orbit_center_y", "m"),
        ("orbit_quantum", "hbar"),
        ("delta_kinetic_extrinsic", "hbar"),
        ("canonical_intrinsic_total", "hbar"),
        ("kinetic_intrinsic_total", "hbar"),
    )

    def csv_row(self) -> list:
        c = self.orbit_center if self.orbit_center is not None else (math.nan, math.nan)
        return [
            *self.kick_total,
            *self.kick_intrinsic,
            *self.kick_extrinsic,
            self.orbit_radius,
            c[0],
            c[1],
            self.orbit_quantum,
            self.delta_kinetic_extrinsic,
            self.canonical_intrinsic_total,
            self.kinetic_intrinsic_total,
        ]

    def render(self) -> str:
        f = lambda v: " ".join(f"{x:+.6e}" for x in np.atleast_1d(v))  # noqa: E731
        lines = [
            f"kick total      [eV]: {f(self.kick_total)}",
            f"kick intrinsic  [eV]: {f(self.kick_intrinsic)}  (at r = {f(self.r_probe)} m)",
            f"kick extrinsic  [eV]: {f(self.kick_extrinsic)}",
            f"orbit radius     [m]: {self.orbit_radius:.6e}",
            f"orbit centre     [m]: {f(self.orbit_center) if self.orbit_center is not None else 'none (drift)'}",
            f"orbit quantum l_orb : {self.orbit_quantum}",
            f"d<kinetic ext>  [hbar]: {self.delta_kinetic_extrinsic:.9g}",
            f"intrinsic canonical total [hbar]: {self.canonical_intrinsic_total:.9g}",
            f"intrinsic kinetic total   [hbar]: {self.kinetic_intrinsic_total:.9g}"
            f"  (half-coupling variant {self.kinetic_intrinsic_half_coupling:.9g})",
            f"envelope oscillates: {self.envelope_oscillates}",
            f"state class: {self.class_before.value} -> {self.class_after.value}",
            "ledger after:",
            self.ledger_after.render(),
        ]
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def vacuum_exit(state: BeamQuantumState, region1: FieldRegion) -> VacuumExit:
    """Emit a free LG beam at the exit of ``region1``.

    The boundary is the waist (width unchanged), quantum numbers are kept and
    the whole-beam kick becomes a straight-line drift of the centroid.
    Extrinsic OAM vanishes in vacuum; intrinsic canonical OAM is conserved.
    """
    sp = state.species
    B = region1.field_z
    kick = _ez_cross(B, sp, state.axis_offset)
    pi0 = state.extrinsic_momentum + kick
    new_state = state.replace(extrinsic_momentum=pi0)
    k_si = UNITS.length_to_natural(1.0) * state.p_z
    zr = k_si * state.w0**2 / 2
    contrib = (
        Contribution("mode", "intrinsic", state.ell, float(state.ell)),
        Contribution("extrinsic-orbit", "extrinsic", 0.0, 0.0),
    )
    return VacuumExit(new_state, state.w0, zr, pi0 / state.p_z, OamLedger(contrib))


def post_transition_state(
    state: BeamQuantumState,
    region1: FieldRegion,
    region2: FieldRegion,
    r_probe=None,
) -> TransitionReport:
    """Quantum state, OAM ledger and kicks after crossing from region1 into region2.

    ``state.axis_offset`` is measured from region1's axis; the returned state's
    offset is measured from region2's axis.  The gap field between the
    solenoids is ``region2.gap_field``.
    """
    from .oam_ledger import ledger_for_state

    sp = state.species
    B, Bt = region1.field_z, region2.field_z
    d = region2.axis_offset - region1.axis_offset
    r2 = state.mean_square_radius()
    if r_probe is None:
        r_probe = np.array([math.sqrt(r2), 0.0])
    r_probe = np.asarray(r_probe, dtype=float)
    kicks = general_transition_kick(state.axis_offset, r_probe, d, B, Bt, region2.gap_field, sp)
    before = ledger_for_state(state, B)
    field_sign_1 = int(np.sign(B)) or 1
    class_before = classify_state(sp, state.ell, field_sign_1)

    if region2.kind is RegionKind.VACUUM or Bt == 0:
        vac = vacuum_exit(state, region1)
        return TransitionReport(
            kicks.total, kicks.intrinsic, kicks.extrinsic, r_probe,
            math.inf, None, 0, 0.0, 0.0,
            float(state.ell), float(state.ell), float(state.ell), float(state.ell),
            False, class_before, class_before, vac.state, before, vac.ledger, vac,
            ("vacuum target: centroid drifts; extrinsic OAM is zero",),
        )

    pi0 = state.extrinsic_momentum + kicks.extrinsic
    orbit = orbit_radius(pi0, Bt, sp)
    R_sq = orbit.radius**2
    area = float(kinetic_from_canonical(0.0, Bt, sp, R_sq))  # -(e B~ / 2) R^2 in hbar
    l_orb = round_half_toward_zero(area)
    d_kin_ext = l_orb + area
    kin_field = float(kinetic_from_canonical(state.ell, Bt, sp, r2))
    canon_total = state.ell + l_orb
    kin_total = canon_total + 2 * float(kinetic_from_canonical(0.0, Bt, sp, R_sq + r2))
    kin_half = float(kinetic_from_canonical(canon_total, Bt, sp, R_sq + r2))

    offset2 = state.axis_offset - d
    center = offset2 + orbit.center_offset
    new_state = state.replace(axis_offset=offset2, extrinsic_momentum=pi0)

    gauge_c = float(kinetic_from_canonical(0.0, Bt, sp, center @ center))  # -(eB~/2)|C|^2
    after = OamLedger(
        (
            Contribution("mode", "intrinsic", state.ell, kin_field),
            Contribution("transition-kick", "intrinsic", l_orb, kin_total - kin_field),
            Contribution("extrinsic-orbit", "extrinsic", -gauge_c, 0.0),
        ),
        nonbasic=classify_state(sp, state.ell, int(np.sign(Bt))) is StateClass.NONBASIC,
    )
    wm2 = magnetic_width(Bt, sp)
    notes = []
    if R_sq == 0 and not math.isclose(kin_total, kin_field):
        notes.append(
            "zero orbit: full-coupling intrinsic kinetic total differs from the field-only value "
            f"({kin_total:.9g} vs {kin_field:.9g}); half-coupling variant agrees"
        )
    return TransitionReport(
        kicks.total, kicks.intrinsic, kicks.extrinsic, r_probe,
        orbit.radius, center, l_orb, float(l_orb), d_kin_ext,
        kin_field, float(canon_total), kin_total, kin_half,
        not math.isclose(state.w0, wm2, rel_tol=1e-12),
        class_before, classify_state(sp, state.ell, int(np.sign(Bt))),
        new_state, before, after, None, tuple(notes),
    )


def antiparallel_invariants(state: BeamQuantumState, B: float):
    """Changes of pi_perp^2 and p_z^2 [eV^2] on entering the reversed field -B.

    Returns (2 e B l, -2 e B l + 4 s_z |e| B), which is -2 e B (l + 2 s_z)
    for a negative charge.  The spin part keeps the charge-independent sign
    of :func:`landau_quantum_sum`, so the Landau energy is unchanged for
    either charge.  p_z stays r-independent only for an exactly reversed
    field.
    """
    sp = state.species
    eb = coupling(B, sp)
    spin = 4 * state.s_z * abs(sp.charge) * UNITS.field_to_natural(B)
    return 2 * eb * state.ell, -2 * eb * state.ell + spin
