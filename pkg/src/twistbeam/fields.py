"""Piecewise solenoid field maps.

A :class:`Beamline` is an ordered list of contiguous :class:`FieldRegion`
segments.  Each solenoid contributes its own axisymmetric field about its
own (possibly offset) axis; the on-axis profile of a segment is a product of
two tanh edges of scale ``fringe_length``::

    B(z) = B_axis * [S((z - z_start)/lam) - S((z - z_end)/lam)],
    S(u) = (1 + tanh u) / 2.

Two adjacent segments of equal fringe length therefore interpolate as
``B + (B~ - B) S((z - z_b)/lam)`` across their shared boundary.  Off axis the
field follows the paraxial expansion

    B_R = -(R/2) B'(z),   B_phi = 0,   B_z = B(z) - (R^2/4) B''(z).

With ``exact=True`` the cubic term ``(R^3/16) B'''`` is added to B_R, which
makes the map exactly divergence-free and the curl of
``A_phi = (R/2) B - (R^3/16) B''`` (used by the trajectory oracle).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .beamstate import DomainError


class RegionKind(str, Enum):
    SOLENOID = "solenoid"
    VACUUM = "vacuum"
    QUADRUPOLE = "quadrupole"


@dataclass(frozen=True)
class FieldRegion:
    """One segment of the beamline.

    Parameters
    ----------
    kind : RegionKind
    B_axis : float
        Signed on-axis B_z deep inside [T]; zero for vacuum.
    z_range : (float, float)
        Longitudinal extent [m].
    axis_offset : (2,) array
        Offset d of this segment's symmetry axis from the global axis [m].
    fringe_length : float
        tanh edge scale [m]; 0 gives sharp edges.
    gap_field : float
        Field B^(0) in the gap preceding this segment [T].
    gradient, B_tilde : float
        Quadrupole analyzer gradient kappa [T/m] and uniform part [T].
    bore_radius : float or None
        Solenoid radius; a warning is issued when R / bore > 0.1.
    """

    kind: RegionKind
    B_axis: float
    z_range: tuple
    axis_offset: np.ndarray = field(default=None)
    fringe_length: float = 0.0
    gap_field: float = 0.0
    gradient: float = 0.0
    B_tilde: float = 0.0
    bore_radius: float | None = None
    name: str = ""

    def __post_init__(self):
        kind = RegionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        z0, z1 = map(float, self.z_range)
        if not z1 > z0:
            raise DomainError(f"region {self.name!r}: degenerate z range ({z0}, {z1})")
        object.__setattr__(self, "z_range", (z0, z1))
        if self.fringe_length < 0:
            raise DomainError("fringe length must be non-negative")
        if kind is RegionKind.VACUUM and self.B_axis != 0:
            raise DomainError("vacuum region must have B_axis = 0")
        off = np.zeros(2) if self.axis_offset is None else np.asarray(self.axis_offset, float).reshape(2)
        off.setflags(write=False)
        object.__setattr__(self, "axis_offset", off)

    @property
    def field_z(self) -> float:
        """Signed interior B_z used by the transition formulas."""
        return self.B_tilde if self.kind is RegionKind.QUADRUPOLE else self.B_axis

    @classmethod
    def solenoid(cls, B, z_range, **kw):
        return cls(RegionKind.SOLENOID, B, z_range, **kw)

    @classmethod
    def vacuum(cls, z_range, **kw):
        return cls(RegionKind.VACUUM, 0.0, z_range, **kw)

    @classmethod
    def quadrupole(cls, B_tilde, gradient, z_range, **kw):
        return cls(RegionKind.QUADRUPOLE, 0.0, z_range, B_tilde=B_tilde, gradient=gradient, **kw)


def edge_derivatives(z, boundary: float, fringe_length: float):
    """S(u) and its first three z-derivatives for u = (z - boundary)/lam."""
    z = np.asarray(z, dtype=float)
    if fringe_length == 0:
        s = np.where(z > boundary, 1.0, np.where(z < boundary, 0.0, 0.5))
        zero = np.zeros_like(s)
        return s, zero, zero, zero
    lam = fringe_length
    t = np.tanh((z - boundary) / lam)
    sech2 = 1.0 - t * t
    return (
        (1.0 + t) / 2,
        sech2 / (2 * lam),
        -sech2 * t / lam**2,
        -sech2 * (1.0 - 3.0 * t * t) / lam**3,
    )


def step_profile(z, B_before: float, B_after: float, boundary: float, fringe_length: float):
    """(B, B', B'') across a single boundary between two field values."""
    s, d1, d2, _ = edge_derivatives(z, boundary, fringe_length)
    dB = B_after - B_before
    return B_before + dB * s, dB * d1, dB * d2


def _window(region: FieldRegion, z):
    z0, z1 = region.z_range
    a = edge_derivatives(z, z0, region.fringe_length)
    b = edge_derivatives(z, z1, region.fringe_length)
    return tuple(region.B_axis * (ai - bi) for ai, bi in zip(a, b))


def fringe_profile(region: FieldRegion, z):
    """On-axis (B_z, B_z', B_z'') of an isolated solenoid segment."""
    return _window(region, z)[:3]


@dataclass(frozen=True)
class FieldSample:
    """Field at a point: cylindrical (about the local axis) and Cartesian components [T]."""

    b_r: np.ndarray
    b_phi: np.ndarray
    b_z: np.ndarray
    b_x: np.ndarray
    b_y: np.ndarray
    a_phi: np.ndarray | None = None

    @property
    def cartesian(self):
        return np.stack(np.broadcast_arrays(self.b_x, self.b_y, self.b_z), axis=-1)


def _check_bore(region, R):
    if region.bore_radius and np.any(np.asarray(R) / region.bore_radius > 0.1):
        warnings.warn(
            f"R/bore > 0.1 in region {region.name!r}: paraxial fringe expansion is inaccurate",
            stacklevel=3,
        )


def solenoid_field(region: FieldRegion, R, phi, z, exact: bool = False) -> FieldSample:
    """Field of one solenoid segment at cylindrical (R, phi, z) about its own axis."""
    R = np.asarray(R, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_bore(region, R)
    b, b1, b2, b3 = _window(region, z)
    b_r = -R / 2 * b1
    if exact:
        b_r = b_r + R**3 / 16 * b3
    b_z = b - R**2 / 4 * b2
    a_phi = R / 2 * b - R**3 / 16 * b2
    c, s = np.cos(phi), np.sin(phi)
    return FieldSample(b_r, np.zeros_like(b_r), b_z, b_r * c, b_r * s, a_phi)


def quadrupole_field(B_tilde: float, kappa: float, x, z, y=0.0) -> FieldSample:
    """Analyzer field B_x = kappa z, B_y = 0, B_z = B~ + kappa x (curl-free)."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    bx = kappa * z
    bz = B_tilde + kappa * x
    phi = np.arctan2(y, x)
    c, s = np.cos(phi), np.sin(phi)
    return FieldSample(bx * c, -bx * s, bz, bx, np.zeros_like(bx))


def symmetric_gauge_potential(B_z: float, R0, r) -> np.ndarray:
    """A = A_0 + a with A_0 = B x R0 / 2 and a = B x r / 2, for B = B_z e_z [T m].

    ``B_z`` may also be a :class:`FieldRegion` (its interior field is used).
    ``R0`` and ``r`` are 2-vectors or (..., 2) arrays in metres.
    """
    if isinstance(B_z, FieldRegion):
        B_z = B_z.field_z
    pos = np.asarray(R0, dtype=float) + np.asarray(r, dtype=float)
    return B_z / 2 * np.stack([-pos[..., 1], pos[..., 0]], axis=-1)


def vector_potential_jump(R: float, B: float, B_tilde: float) -> float:
    """Azimuthal change of the symmetric-gauge potential across a boundary [T m]."""
    return (B_tilde - B) * R / 2


class Beamline:
    """Ordered, contiguous set of field regions evaluated as a superposition."""

    def __init__(self, regions: Sequence[FieldRegion]):
        regions = list(regions)
        if not regions:
            raise DomainError("beamline needs at least one region")
        for a, b in zip(regions, regions[1:]):
            if not np.isclose(a.z_range[1], b.z_range[0], rtol=0, atol=1e-12):
                raise DomainError(
                    f"regions {a.name or a.kind.value!r} and {b.name or b.kind.value!r} "
                    f"are not contiguous: {a.z_range[1]} != {b.z_range[0]}"
                )
        self.regions = regions

    @property
    def z_span(self):
        return self.regions[0].z_range[0], self.regions[-1].z_range[1]

    def on_axis(self, z, axis=None):
        """(B, B', B'') summed over solenoids sharing the given axis (default: all)."""
        z = np.asarray(z, dtype=float)
        out = [np.zeros_like(z) for _ in range(3)]
        for reg in self.regions:
            if reg.kind is not RegionKind.SOLENOID:
                continue
            if axis is not None and not np.allclose(reg.axis_offset, axis):
                continue
            for acc, part in zip(out, fringe_profile(reg, z)):
                acc += part
        return tuple(out)

    def region_at(self, z: float) -> FieldRegion:
        for reg in self.regions:
            if reg.z_range[0] <= z < reg.z_range[1]:
                return reg
        return self.regions[-1]

    def field(self, x, y, z, exact: bool = True):
        """Cartesian (B_x, B_y, B_z) [T] at global coordinates (m)."""
        x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
        bx, by, bz = np.zeros_like(x), np.zeros_like(x), np.zeros_like(x)
        for reg in self.regions:
            if reg.kind is RegionKind.SOLENOID:
                dx, dy = x - reg.axis_offset[0], y - reg.axis_offset[1]
                R = np.hypot(dx, dy)
                b, b1, b2, b3 = _window(reg, z)
                br = -R / 2 * b1 + (R**3 / 16 * b3 if exact else 0.0)
                with np.errstate(invalid="ignore", divide="ignore"):
                    ux = np.where(R > 0, dx / R, 0.0)
                    uy = np.where(R > 0, dy / R, 0.0)
                bx += br * ux
                by += br * uy
                bz += b - R**2 / 4 * b2
            elif reg.kind is RegionKind.QUADRUPOLE:
                z0, z1 = reg.z_range
                inside = (z >= z0) & (z <= z1)
                zc = z - (z0 + z1) / 2
                bx += np.where(inside, reg.gradient * zc, 0.0)
                bz += np.where(inside, reg.B_tilde + reg.gradient * (x - reg.axis_offset[0]), 0.0)
        return bx, by, bz

    def vector_potential_phi(self, x, y, z, axis=(0.0, 0.0)):
        """A_phi [T m] of the axisymmetric gauge about ``axis``.

        The summed on-axis profile is used as if every solenoid were centred
        on ``axis``; this is the exact potential of the map only when they are.
        """
        R = np.hypot(np.asarray(x) - axis[0], np.asarray(y) - axis[1])
        b, _, b2 = self.on_axis(z)
        return R / 2 * b - R**3 / 16 * b2


FIELD_MAP_COLUMNS = (("R", "m"), ("z", "m"), ("B_R", "T"), ("B_z", "T"))
FIELD_LINE_COLUMNS = (("z", "m"), ("x_exact", "m"), ("x_parabola", "m"))


def field_map_rows(beamline: Beamline, R, z):
    """Rows (R, z, B_R, B_z) on the grid R x z, sampled along phi = 0 of the global axis."""
    RR, ZZ = (a.ravel() for a in np.meshgrid(np.asarray(R, float), np.asarray(z, float), indexing="ij"))
    bx, _, bz = beamline.field(RR, np.zeros_like(RR), ZZ)
    return np.column_stack([RR, ZZ, bx, bz])


@dataclass(frozen=True)
class FieldLine:
    z: np.ndarray
    x_exact: np.ndarray
    x_parabola: np.ndarray

    def csv_rows(self):
        return np.column_stack([self.z, self.x_exact, self.x_parabola])


def field_line(B_tilde: float, kappa: float, x0: float, z_grid, z0: float = 0.0) -> FieldLine:
    """Analyzer field line through (x0, 0, z0).

    The implicit curve z^2 = (x + 2B~/k) x - (x0 + 2B~/k) x0 + z0^2 is solved in
    a cancellation-free form that reduces to x = x0 at kappa = 0.
    """
    z = np.asarray(z_grid, dtype=float)
    base = B_tilde + kappa * x0
    if base <= 0:
        raise DomainError("field line requires B~ + kappa x0 > 0")
    dz2 = z**2 - z0**2
    disc = base**2 + kappa**2 * dz2
    if np.any(disc < 0):
        raise DomainError("field line leaves the region where B~_z > 0")
    x = x0 + kappa * dz2 / (np.sqrt(disc) + base)
    x_par = x0 + kappa * dz2 / (2 * B_tilde) if B_tilde != 0 else np.full_like(z, np.nan)
    return FieldLine(z, x, x_par)
