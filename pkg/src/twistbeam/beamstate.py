"""Core domain types, constants and Landau-level scalars.

Internal unit system
--------------------
Natural units with hbar = c = 1: energies and momenta in eV, lengths and
times in 1/eV.  A magnetic field enters every formula only through the
product e*B with e the *signed* particle charge, so fields are carried
internally as ``e0*B`` in eV**2 (e0 = elementary charge) and multiplied by
the dimensionless charge number of the species.

Public functions take SI inputs (tesla, metre) and return SI lengths,
eV energies and hbar-unit angular momenta.  All conversions go through
:class:`UnitContext`.

Sign convention: charge and B_z are both signed.  The Landau quantum-number
sum for a negative charge in B_z > 0 is ``2n + 1 + |l| + l + 2 s_z``; the
positive-charge rule replaces l by -l, and reversing the field is the
reflection z -> -z, phi -> -phi (l -> -l, s_z -> -s_z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

# CODATA 2018 (exact where SI defines them)
C_LIGHT = 299_792_458.0  # m/s
HBAR_EV_S = 6.582_119_569e-16  # eV s
HBAR_J_S = 1.054_571_817e-34  # J s
E_CHARGE = 1.602_176_634e-19  # C
HBARC_EV_M = HBAR_EV_S * C_LIGHT  # 1.973269804e-7 eV m
ELECTRON_MASS_EV = 510_998.950_00  # eV
BOHR_MAGNETON_EV_T = 5.788_381_8060e-5  # eV/T
POSITRONIUM_BINDING_EV = 6.8  # eV, value used for the stability estimate


class DomainError(ValueError):
    """Raised when an input lies outside the physical domain of an operation."""


@dataclass(frozen=True)
class UnitContext:
    """Conversion constants between SI and the internal natural units.

    ``field_to_natural`` returns e0*B in eV**2 for a field in tesla, i.e. the
    coupling of a unit charge.
    """

    hbar_ev_s: float = HBAR_EV_S
    c: float = C_LIGHT

    @property
    def hbarc(self) -> float:
        return self.hbar_ev_s * self.c

    def length_to_natural(self, metres):
        return metres / self.hbarc

    def length_to_si(self, inv_ev):
        return inv_ev * self.hbarc

    def time_to_natural(self, seconds):
        return seconds / self.hbar_ev_s

    def time_to_si(self, inv_ev):
        return inv_ev * self.hbar_ev_s

    def field_to_natural(self, tesla):
        return tesla * self.c**2 * self.hbar_ev_s

    def field_to_si(self, ev2):
        return ev2 / (self.c**2 * self.hbar_ev_s)

    def frequency_to_si(self, ev):
        """Angular frequency: eV -> rad/s."""
        return ev / self.hbar_ev_s

    def frequency_to_natural(self, rad_per_s):
        return rad_per_s * self.hbar_ev_s


UNITS = UnitContext()


@dataclass(frozen=True)
class ParticleSpecies:
    """Signed charge (multiples of e0), rest mass in eV and spin projection."""

    name: str
    charge: float
    mass: float
    spin_projection: float = 0.5

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"{self.name}: mass must be positive, got {self.mass}")
        if abs(self.spin_projection) > 0.5:
            raise DomainError(f"{self.name}: |s_z| must not exceed 1/2")

    @property
    def charge_sign(self) -> int:
        return int(np.sign(self.charge))

    def require_charged(self) -> None:
        if self.charge == 0:
            raise DomainError(f"{self.name} is neutral; operation needs a charged species")

    def with_spin(self, s_z: float) -> "ParticleSpecies":
        return replace(self, spin_projection=s_z)


ELECTRON = ParticleSpecies("electron", -1.0, ELECTRON_MASS_EV, -0.5)
POSITRON = ParticleSpecies("positron", +1.0, ELECTRON_MASS_EV, -0.5)

SPECIES = {"electron": ELECTRON, "positron": POSITRON}


def _vec2(v) -> np.ndarray:
    a = np.zeros(2) if v is None else np.asarray(v, dtype=float).reshape(2)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BeamQuantumState:
    """A twisted-beam quantum state transported through field regions.

    Attributes
    ----------
    species : ParticleSpecies
    n, ell : int
        Radial and azimuthal (OAM, units of hbar) quantum numbers.
    p_z : float
        Longitudinal momentum [eV].
    w0 : float
        Current beam width [m] (the waist for a freshly prepared beam).
    axis_offset : (2,) array
        Vector from the local solenoid axis to the state's symmetry axis [m].
    extrinsic_momentum : (2,) array
        Transverse kinetic momentum of the beam as a whole [eV].
    """

    species: ParticleSpecies
    n: int
    ell: int
    p_z: float
    w0: float
    axis_offset: np.ndarray = field(default=None)
    extrinsic_momentum: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"radial quantum number must be a non-negative integer, got {self.n}")
        if int(self.ell) != self.ell:
            raise DomainError(f"OAM quantum number must be an integer, got {self.ell}")
        if not self.w0 > 0:
            raise DomainError(f"beam width must be positive, got {self.w0}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "axis_offset", _vec2(self.axis_offset))
        object.__setattr__(self, "extrinsic_momentum", _vec2(self.extrinsic_momentum))

    @property
    def s_z(self) -> float:
        return self.species.spin_projection

    @property
    def radial_order(self) -> int:
        """2n + |l| + 1, the factor shared by radii, Gouy phases and masses."""
        return 2 * self.n + abs(self.ell) + 1

    def mean_square_radius(self) -> float:
        """<r^2> [m^2] of the current transverse profile of width w0."""
        return self.radial_order * self.w0**2 / 2

    def replace(self, **changes) -> "BeamQuantumState":
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, BeamQuantumState):
            return NotImplemented
        return (
            self.species == other.species
            and (self.n, self.ell, self.p_z, self.w0) == (other.n, other.ell, other.p_z, other.w0)
            and np.array_equal(self.axis_offset, other.axis_offset)
            and np.array_equal(self.extrinsic_momentum, other.extrinsic_momentum)
        )

    __hash__ = None


def coupling(B: float, species: ParticleSpecies) -> float:
    """Signed e*B in eV**2 for a field B [T]."""
    return species.charge * UNITS.field_to_natural(B)


def magnetic_width(B: float, species: ParticleSpecies = ELECTRON) -> float:
    """Transverse magnetic width w_m = 2 sqrt(hbar / |e B|) in metres."""
    species.require_charged()
    if B == 0:
        raise DomainError("magnetic width is undefined for zero field")
    return UNITS.length_to_si(2.0 / math.sqrt(abs(coupling(B, species))))


def landau_quantum_sum(n: int, ell: int, s_z: float, charge_sign: int, field_sign: int = 1) -> float:
    """Quantum-number sum multiplying |e|B in the squared Landau energy.

    Exact for integer ``n, ell`` and half-integer ``s_z`` (the result is a
    small integer stored as float).
    """
    ell_f, s_f = field_sign * ell, field_sign * s_z
    return float(2 * n + 1 + abs(ell_f) - charge_sign * ell_f) + 2.0 * s_f


def landau_energy(state: BeamQuantumState, B: float) -> float:
    """Total Landau-level energy [eV] of ``state`` in a uniform field B [T]."""
    sp = state.species
    sp.require_charged()
    if B == 0:
        raise DomainError("Landau levels need a nonzero field")
    total = landau_quantum_sum(state.n, state.ell, state.s_z, sp.charge_sign, int(np.sign(B)))
    radicand = sp.mass**2 + state.p_z**2 + total * abs(coupling(B, sp))
    if radicand < 0:
        raise DomainError(f"negative squared energy for n={state.n}, l={state.ell}, s_z={state.s_z}")
    return math.sqrt(radicand)


def mean_square_radius(n: int, ell: int, B: float, species: ParticleSpecies = ELECTRON) -> float:
    """<r^2> = 2(2n+|l|+1)/|eB| of a Landau state, in m^2."""
    if n < 0:
        raise DomainError("n must be non-negative")
    width = magnetic_width(B, species)
    return (2 * n + abs(ell) + 1) * width**2 / 2


class StateClass(str, Enum):
    BASIC = "basic"
    NONBASIC = "nonbasic"


def classify_state(species: ParticleSpecies, ell: int, field_sign: int = 1) -> StateClass:
    """Basic iff sgn(e B_z) * l <= 0; ``field_sign`` is the sign of B_z."""
    species.require_charged()
    return StateClass.BASIC if species.charge_sign * field_sign * ell <= 0 else StateClass.NONBASIC
