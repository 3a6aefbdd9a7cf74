"""Brute-force radial paraxial propagation in a uniform magnetic field.

At fixed azimuthal number l the transverse problem is one-dimensional:

    i d(psi)/dz = H psi / (2k),
    H = -(1/r) d/dr (r d/dr) + l^2/r^2 - (eB) l + (eB)^2 r^2 / 4 + spin,

with eB the signed coupling in 1/m^2.  The sign of the (eB) l term is the
one for which an input of width w_m is stationary in its basic orientation.

The grid is cell-centred, r_j = (j + 1/2) h, and the radial Laplacian is a
finite-volume stencil with zero flux through r = 0 and psi = 0 beyond r_max.
H is then symmetric in the r-weighted inner product, so the Crank-Nicolson
step is exactly unitary in the discrete norm sum |psi_j|^2 r_j h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .beamstate import (
    E_CHARGE,
    ELECTRON,
    HBAR_J_S,
    UNITS,
    DomainError,
    ParticleSpecies,
    landau_quantum_sum,
    magnetic_width,
)
from .modes import field_envelope, radial_profile, vacuum_width


class ResolutionError(RuntimeError):
    """The radial grid or step does not resolve the propagated beam."""


@dataclass(frozen=True)
class RadialWavefunction:
    """Fixed-l radial wavefunction with norm integral |psi|^2 r dr = 1."""

    r: np.ndarray  # m, cell centres
    psi: np.ndarray
    ell: int
    k: float  # eV
    B: float  # T
    z: float = 0.0  # m

    @property
    def h(self) -> float:
        return float(self.r[1] - self.r[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2 * self.r) * self.h)

    def second_moment(self) -> float:
        """<r^2> [m^2]."""
        d = np.abs(self.psi) ** 2 * self.r
        return float(np.sum(d * self.r**2) / np.sum(d))


def radial_grid(r_max: float, n_points: int) -> np.ndarray:
    h = r_max / n_points
    return (np.arange(n_points) + 0.5) * h


def coupling_si(B: float, species: ParticleSpecies = ELECTRON) -> float:
    """Signed e B / hbar in 1/m^2."""
    return species.charge * B * E_CHARGE / HBAR_J_S


def default_r_max(w0: float, B: float, species: ParticleSpecies = ELECTRON, factor: float = 8.0) -> float:
    """factor * max(w0, w_m^2/w0) (the largest width reached in the field)."""
    if B == 0:
        return factor * w0
    wm = magnetic_width(B, species)
    return factor * max(w0, wm**2 / w0)


def lg_initial(
    n: int,
    ell: int,
    w0: float,
    k: float,
    B: float,
    r_max: float,
    n_points: int = 1500,
) -> RadialWavefunction:
    """LG waist profile (flat phase) sampled on the cell-centred grid and renormalized."""
    r = radial_grid(r_max, n_points)
    psi = math.sqrt(2 * np.pi) * radial_profile(n, ell, w0, r).astype(complex)
    wf = RadialWavefunction(r, psi, ell, k, B)
    return RadialWavefunction(r, psi / math.sqrt(wf.norm()), ell, k, B)


def transverse_operator(r: np.ndarray, ell: int, B: float, s_z: float = 0.0, species: ParticleSpecies = ELECTRON):
    """Sparse H [1/m^2] on the cell-centred grid (not symmetric as a matrix;
    symmetric after weighting rows by r_j)."""
    h = r[1] - r[0]
    n = r.size
    r_face = np.arange(n + 1) * h  # r_{j-1/2}, r_0 face = 0
    up = r_face[1:] / (r * h * h)  # coupling to j+1
    lo = r_face[:-1] / (r * h * h)  # coupling to j-1 (zero at j=0)
    eb = coupling_si(B, species)
    sign = int(np.sign(B)) or 1
    spin = 0.0
    if B != 0:
        # spin part of the Landau sum times |eB|, consistent with landau_quantum_sum
        spin = (landau_quantum_sum(0, 0, s_z, species.charge_sign, sign)
                - landau_quantum_sum(0, 0, 0.0, species.charge_sign, sign)) * abs(eb)
    V = ell**2 / r**2 - eb * ell + eb**2 * r**2 / 4 + spin
    diag = up + lo + V
    return sparse.diags([-lo[1:], diag, -up[:-1]], [-1, 0, 1], format="csc")


def propagate_radial(
    initial: RadialWavefunction,
    z_grid,
    B: float | None = None,
    *,
    dz_max: float | None = None,
    s_z: float = 0.0,
    species: ParticleSpecies = ELECTRON,
    norm_tol: float = 1e-10,
    edge_tol: float = 1e-6,
    min_points_per_width: float = 10.0,
    max_steps: int = 1_000_000,
) -> list[RadialWavefunction]:
    """Crank-Nicolson propagation, returning the state at each z in ``z_grid``.

    ``z_grid`` must be increasing and start at or after ``initial.z``.  Each
    interval is subdivided into equal steps no longer than ``dz_max``
    (default: 1/200 of the Rayleigh length of the narrowest waist reached).

    Raises
    ------
    ResolutionError
        If the per-step norm drift exceeds ``norm_tol``, if the probability
        beyond 90% of r_max exceeds ``edge_tol``, or if any width is sampled
        by fewer than ``min_points_per_width`` cells, or if the run needs
        more than ``max_steps`` steps.
    """
    B = initial.B if B is None else B
    z_grid = np.asarray(z_grid, dtype=float)
    if np.any(np.diff(z_grid) < 0) or z_grid[0] < initial.z:
        raise DomainError("z_grid must be increasing and start after the initial plane")
    r, h = initial.r, initial.h
    k_si = UNITS.length_to_natural(1.0) * initial.k
    if abs(initial.norm() - 1.0) > 1e-9:
        raise DomainError("initial wavefunction must be normalized")
    if dz_max is None:
        # LG-equivalent width of the input, then the narrowest waist it reaches
        w_now = math.sqrt(2 * initial.second_moment() / (abs(initial.ell) + 1))
        if B != 0:
            wm = magnetic_width(B, species)
            w_now = min(w_now, wm**2 / w_now)
        dz_max = k_si * w_now**2 / 2 / 200
    if (z_grid[-1] - initial.z) / dz_max > max_steps:
        raise ResolutionError(f"{(z_grid[-1] - initial.z) / dz_max:.3g} steps exceed max_steps={max_steps}")
    H = transverse_operator(r, initial.ell, B, s_z, species)
    eye = sparse.identity(r.size, format="csc")
    cache: dict[float, tuple] = {}
    edge = r > 0.9 * r[-1]

    def stepper(dz):
        key = round(dz, 18)
        if key not in cache:
            a = 1j * dz / (4 * k_si)
            cache[key] = (splu((eye + a * H).tocsc()), (eye - a * H).tocsr())
        return cache[key]

    psi, z = initial.psi.copy(), initial.z
    out = []
    for z_next in z_grid:
        span = z_next - z
        if span > 0:
            steps = max(1, math.ceil(span / dz_max - 1e-9))
            dz = span / steps
            lu, rhs = stepper(dz)
            for _ in range(steps):
                before = np.sum(np.abs(psi) ** 2 * r) * h
                psi = lu.solve(rhs @ psi)
                after = np.sum(np.abs(psi) ** 2 * r) * h
                if abs(after - before) > norm_tol:
                    raise ResolutionError(f"norm drift {abs(after - before):.3e} per step at z={z:.6g} m")
            z = z_next
        wf = RadialWavefunction(r, psi.copy(), initial.ell, initial.k, B, float(z))
        dens = np.abs(psi) ** 2 * r * h
        leak = float(np.sum(dens[edge]))
        if leak > edge_tol:
            raise ResolutionError(f"probability {leak:.3e} near r_max at z={z:.6g} m; enlarge r_max")
        if math.sqrt(wf.second_moment()) / h < min_points_per_width:
            raise ResolutionError(f"width sampled by fewer than {min_points_per_width} cells at z={z:.6g} m")
        out.append(wf)
    return out


def extract_width(psi: RadialWavefunction, n: int, ell: int) -> float:
    """Second-moment width sqrt(2<r^2>/(2n+|l|+1)); exact on LG profiles."""
    return math.sqrt(2 * psi.second_moment() / (2 * n + abs(ell) + 1))


def extract_gouy(states: list[RadialWavefunction], reference: RadialWavefunction) -> np.ndarray:
    """Unwrapped phase lag -arg<reference|psi(z)> along ``states`` [rad]."""
    r, h = reference.r, reference.h
    ov = np.array([np.sum(np.conj(reference.psi) * s.psi * r) * h for s in states])
    return -np.unwrap(np.angle(ov))


def compare_envelope(w_numeric, w_analytic) -> float:
    """max |w_num - w_ana| / w_ana."""
    w_numeric, w_analytic = np.asarray(w_numeric, float), np.asarray(w_analytic, float)
    if w_numeric.shape != w_analytic.shape:
        raise DomainError("width arrays must share the z grid")
    return float(np.max(np.abs(w_numeric - w_analytic) / w_analytic))


@dataclass(frozen=True)
class EnvelopeCheck:
    z: np.ndarray
    w_numeric: np.ndarray
    w_analytic: np.ndarray
    states: list

    @property
    def rel_err(self):
        return np.abs(self.w_numeric - self.w_analytic) / self.w_analytic

    @property
    def max_rel_err(self) -> float:
        return compare_envelope(self.w_numeric, self.w_analytic)

    CSV_COLUMNS = (("z", "m"), ("w_numeric", "m"), ("w_analytic", "m"), ("rel_err", "1"))

    def csv_rows(self):
        return np.column_stack([self.z, self.w_numeric, self.w_analytic, self.rel_err])


def envelope_check(
    n: int,
    ell: int,
    w0: float,
    B: float,
    k: float,
    z_grid,
    *,
    s_z: float = 0.0,
    species: ParticleSpecies = ELECTRON,
    n_points: int = 1500,
    r_max: float | None = None,
    dz_max: float | None = None,
    max_steps: int = 1_000_000,
) -> EnvelopeCheck:
    """Propagate an LG waist and compare its width with the analytic envelope
    (in-field law for B != 0, free-space law for B = 0)."""
    z_grid = np.asarray(z_grid, dtype=float)
    if r_max is None:
        r_max = default_r_max(w0, B, species)
        if B == 0:
            r_max = 8.0 * float(np.max(vacuum_width(w0, k, z_grid)))
    init = lg_initial(n, ell, w0, k, B, r_max, n_points)
    states = propagate_radial(init, z_grid, B, dz_max=dz_max, s_z=s_z, species=species, max_steps=max_steps)
    w_num = np.array([extract_width(s, n, ell) for s in states])
    if B == 0:
        w_ana = vacuum_width(w0, k, z_grid)
    else:
        w_ana = field_envelope(n, ell, s_z, w0, B, k, z_grid, species).w
    return EnvelopeCheck(z_grid, w_num, np.asarray(w_ana, float), states)
