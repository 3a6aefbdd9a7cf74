"""Laguerre-Gauss and Landau transverse modes.

All mode functions take SI lengths (m) and a wavenumber ``k`` given as a
momentum in eV; amplitudes are returned in 1/m so that
``integral |psi|^2 r dr dphi = 1`` with r in metres.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .beamstate import (
    ELECTRON,
    UNITS,
    DomainError,
    ParticleSpecies,
    landau_quantum_sum,
    magnetic_width,
)


def genlaguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^alpha(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def log_norm_constant(n: int, ell: int) -> float:
    """log C_nl with C_nl = sqrt(2 n! / (pi (n+|l|)!)), via log-Gamma."""
    return 0.5 * (np.log(2.0 / np.pi) + special.gammaln(n + 1) - special.gammaln(n + abs(ell) + 1))


def radial_profile(n: int, ell: int, w, r):
    """Real LG amplitude C/w (sqrt2 r/w)^|l| L_n^|l|(2r^2/w^2) exp(-r^2/w^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radial coordinate must be non-negative")
    a = abs(ell)
    s = np.sqrt(2.0) * r / w
    log_env = log_norm_constant(n, ell) - np.log(w) + special.xlogy(a, s) - (r / w) ** 2
    return np.exp(log_env) * genlaguerre(n, a, s**2)


def _k_si(k):
    if not k > 0:
        raise DomainError("wavenumber must be positive")
    return UNITS.length_to_natural(1.0) * k  # eV -> 1/m


@dataclass(frozen=True)
class ModeAmplitude:
    """Complex mode value with its amplitude/phase decomposition."""

    value: np.ndarray
    amplitude: np.ndarray
    n: int
    ell: int
    width: float
    azimuthal_phase: np.ndarray
    curvature_phase: np.ndarray
    gouy_phase: float

    @property
    def abs2(self):
        return np.abs(self.value) ** 2


def _assemble(n, ell, w, r, phi, k_si, inv_R, gouy):
    amp = radial_profile(n, ell, w, r)
    az = ell * np.asarray(phi, dtype=float)
    curv = k_si * np.asarray(r, dtype=float) ** 2 * inv_R / 2
    value = amp * np.exp(1j * (az + curv - gouy))
    return ModeAmplitude(value, amp, n, ell, float(w), az, curv, float(gouy))


def rayleigh_length(w0: float, k: float) -> float:
    """z_R = k w0^2 / 2 in metres (k as momentum in eV)."""
    return _k_si(k) * w0**2 / 2


def vacuum_width(w0: float, k: float, z):
    return w0 * np.sqrt(1.0 + (np.asarray(z, dtype=float) / rayleigh_length(w0, k)) ** 2)


def lg_vacuum_amplitude(n: int, ell: int, w0: float, k: float, r, phi, z: float = 0.0) -> ModeAmplitude:
    """Free-space paraxial Laguerre-Gauss mode with waist w0 at z = 0."""
    if not w0 > 0:
        raise DomainError("waist must be positive")
    k_si = _k_si(k)
    zr = k_si * w0**2 / 2
    w = w0 * np.sqrt(1.0 + (z / zr) ** 2)
    inv_R = z / (z**2 + zr**2)  # zero curvature at the waist
    gouy = (2 * n + abs(ell) + 1) * np.arctan(z / zr)
    return _assemble(n, ell, w, r, phi, k_si, inv_R, gouy)


def landau_mode(n: int, ell: int, B: float, species: ParticleSpecies, r, phi) -> ModeAmplitude:
    """Transverse Landau state of width w_m (no longitudinal factor)."""
    wm = magnetic_width(B, species)
    amp = radial_profile(n, ell, wm, r)
    az = ell * np.asarray(phi, dtype=float)
    zeros = np.zeros_like(amp)
    return ModeAmplitude(amp * np.exp(1j * az), amp, n, ell, wm, az, zeros, 0.0)


def magnetic_rayleigh_length(B: float, k: float, species: ParticleSpecies = ELECTRON) -> float:
    """z_m = k w_m^2 / 2 [m]."""
    return _k_si(k) * magnetic_width(B, species) ** 2 / 2


@dataclass(frozen=True)
class EnvelopeTrace:
    """Sampled in-field LG envelope.

    ``inv_curvature`` is 1/R(z) [1/m]; it vanishes at flat-wavefront points
    where R itself would be infinite (see :attr:`curvature_radius`).
    """

    z: np.ndarray
    w: np.ndarray
    inv_curvature: np.ndarray
    gouy: np.ndarray
    z_m: float
    w_m: float

    @property
    def curvature_radius(self):
        with np.errstate(divide="ignore"):
            return np.where(self.inv_curvature == 0, np.inf, 1.0 / self.inv_curvature)

    @property
    def period(self) -> float:
        return np.pi * self.z_m


def _secular_arctan(ratio, theta):
    """Continuous branch of arctan(ratio * tan(theta)); equals theta at ratio=1."""
    turns = np.floor(theta / np.pi + 0.5)
    return np.arctan(ratio * np.tan(theta - turns * np.pi)) + turns * np.pi


def field_envelope(
    n: int,
    ell: int,
    s_z: float,
    w0: float,
    B: float,
    k: float,
    z,
    species: ParticleSpecies = ELECTRON,
) -> EnvelopeTrace:
    """Width, inverse curvature and Gouy phase of an LG beam inside a uniform field.

    The waist w0 sits at z = 0.  The linear Gouy term uses the Landau
    quantum-number convention of :func:`landau_quantum_sum` so that positive
    charges and reversed fields follow the l -> -l rule.
    """
    if not w0 > 0:
        raise DomainError("waist must be positive")
    z = np.asarray(z, dtype=float)
    k_si = _k_si(k)
    wm = magnetic_width(B, species)
    zm = k_si * wm**2 / 2
    rho4 = (wm / w0) ** 4
    theta = z / zm
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    shape = c2 + rho4 * s2
    w = w0 * np.sqrt(shape)
    inv_R = (rho4 - 1.0) * np.sin(2 * theta) / (k_si * wm**2 * shape)
    # everything except the (2n+|l|+1) part of the Landau sum
    linear = landau_quantum_sum(n, ell, s_z, species.charge_sign, int(np.sign(B))) - (2 * n + abs(ell) + 1)
    gouy = (2 * n + abs(ell) + 1) * _secular_arctan((wm / w0) ** 2, theta) + linear * theta
    return EnvelopeTrace(z, w, inv_R, gouy, zm, wm)


def lg_field_amplitude(
    n: int,
    ell: int,
    s_z: float,
    w0: float,
    B: float,
    k: float,
    r,
    phi,
    z: float = 0.0,
    species: ParticleSpecies = ELECTRON,
) -> ModeAmplitude:
    """In-field LG mode evaluated with the envelope of :func:`field_envelope`."""
    env = field_envelope(n, ell, s_z, w0, B, k, z, species)
    return _assemble(n, ell, float(env.w), r, phi, _k_si(k), float(env.inv_curvature), float(env.gouy))


def paraxial_gouy(n: int, ell: int, s_z: float, z, z_m: float, charge_sign: int = -1, field_sign: int = 1):
    """Gouy phase of a Landau beam, (2n+1+|l|+l+2s_z) z / z_m for e < 0."""
    if not z_m > 0:
        raise DomainError("z_m must be positive")
    return landau_quantum_sum(n, ell, s_z, charge_sign, field_sign) * np.asarray(z, dtype=float) / z_m


def inner_product(psi1, psi2, r_max: float, n_phi: int = 64, rtol: float = 1e-12, atol: float = 1e-13) -> complex:
    """<psi1|psi2> = integral conj(psi1) psi2 r dr dphi.

    ``atol`` is the absolute floor, relevant for (near-)orthogonal pairs of
    normalized modes.

    ``psi1`` and ``psi2`` are callables ``f(r, phi)``.  The azimuthal integral
    uses the periodic trapezoid rule (exact for band-limited azimuthal
    dependence), the radial one adaptive Gauss-Kronrod quadrature.
    """
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)

    def ring(r):
        vals = np.conj(psi1(np.full_like(phis, r), phis)) * psi2(np.full_like(phis, r), phis)
        return vals.mean() * 2 * np.pi * r

    re = integrate.quad(lambda r: ring(r).real, 0.0, r_max, epsabs=atol, epsrel=rtol, limit=400)[0]
    im = integrate.quad(lambda r: ring(r).imag, 0.0, r_max, epsabs=atol, epsrel=rtol, limit=400)[0]
    return complex(re, im)


def quadrature_norm(psi, r_max: float, n_phi: int = 64) -> float:
    return inner_product(psi, psi, r_max, n_phi).real
