"""Scenario files and the ``twistbeam`` command line.

A scenario is a sectioned key/value file.  Every dimensioned value carries a
unit suffix::

    [scenario]
    analyses = envelope, transition
    seed = 7

    [state]
    species = electron
    n = 0
    ell = 2
    p_z = 1 keV/c
    w0 = w_m            # or e.g. 51.3 nm

    [region.source]
    kind = solenoid
    B = 1 T
    z_start = 0 m
    z_end = 10 cm

Regions are used in file order and must be contiguous in z.
"""

from __future__ import annotations

import argparse
import configparser
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beamstate import (
    SPECIES,
    BeamQuantumState,
    DomainError,
    classify_state,
    landau_energy,
    magnetic_width,
)
from .dynamics import (
    Trajectory,
    canonical_conservation,
    integrate_trajectory,
    phase_spread,
)
from .experiment import (
    AnalyzerGeometry,
    TwistedBeam,
    deflection_sim,
    excess_mass,
    mirror_residual,
    opposite_oam_beams,
    positronium_threshold_from_excess,
)
from .fields import FIELD_LINE_COLUMNS, FIELD_MAP_COLUMNS, Beamline, FieldRegion, RegionKind, field_line, field_map_rows
from .io import write_csv, write_text
from .modes import field_envelope, landau_mode, magnetic_rayleigh_length, quadrature_norm, radial_profile
from .oam_ledger import ledger_for_state
from .paraxial_oracle import envelope_check
from .transitions import TransitionReport, post_transition_state

ANALYSES = ("modes", "envelope", "transition", "trajectory", "oracle", "experiment", "phase-spread")

EXIT_OK, EXIT_TOLERANCE, EXIT_PARSE, EXIT_RUNTIME = 0, 1, 2, 3

_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "field": {"T": 1.0, "mT": 1e-3, "uT": 1e-6, "µT": 1e-6, "G": 1e-4},
    "gradient": {"T/m": 1.0, "mT/m": 1e-3, "G/cm": 1e-2},
    "momentum": {
        "eV": 1.0, "keV": 1e3, "MeV": 1e6, "GeV": 1e9,
        "eV/c": 1.0, "keV/c": 1e3, "MeV/c": 1e6, "GeV/c": 1e9,
    },
}
_SI_UNIT = {"length": "m", "field": "T", "gradient": "T/m", "momentum": "eV"}

_SCHEMA = {
    "scenario": {
        "analyses": "list", "seed": "int", "tolerance": "float", "samples": "int",
        "particles": "int", "z_max": "length",
    },
    "state": {
        "species": "str", "n": "int", "ell": "int", "s_z": "float", "p_z": "momentum",
        "w0": "length|w_m", "offset_x": "length", "offset_y": "length",
        "momentum_x": "momentum", "momentum_y": "momentum", "p_z_spread": "momentum",
    },
    "region": {
        "kind": "str", "B": "field", "z_start": "length", "z_end": "length", "fringe": "length",
        "offset_x": "length", "offset_y": "length", "gap_field": "field",
        "kappa": "gradient", "B_tilde": "field", "bore": "length",
    },
    "analyzer": {
        "B_tilde": "field", "kappa": "gradient", "length": "length", "drift": "length",
        "outlet": "length", "aperture": "length", "L_z": "float",
    },
}

DEFAULT_SCENARIO = """\
[scenario]
analyses = modes, envelope, transition, trajectory, oracle, experiment, phase-spread
seed = 0
tolerance = 0.01

[state]
species = electron
n = 0
ell = 2
p_z = 1 keV/c
w0 = w_m
offset_x = 0 m
offset_y = 0 m

[region.source]
kind = solenoid
B = 1 T
z_start = 0 m
z_end = 1 mm
fringe = 10 um

[region.reversed]
kind = solenoid
B = -1 T
z_start = 1 mm
z_end = 2 mm
fringe = 10 um

[analyzer]
B_tilde = 1e-7 T
kappa = 0.035 T/m
length = 1 cm
drift = 1 m
outlet = 10 um
L_z = 10000
"""


class ScenarioError(ValueError):
    """Malformed scenario; the message carries file, line and key."""


@dataclass
class Scenario:
    regions: list
    state: BeamQuantumState
    analyses: tuple
    out_dir: Path | None = None
    seed: int = 0
    tolerance: float = 1e-2
    samples: int = 201
    particles: int = 1
    z_max: float | None = None
    p_z_spread: float = 0.0
    analyzer: AnalyzerGeometry = field(default_factory=AnalyzerGeometry)
    analyzer_oam: float | None = None  # hbar; defaults to |l| of the state
    source: str = "<default>"

    @property
    def beamline(self) -> Beamline:
        return Beamline(self.regions)

    @property
    def source_field(self) -> float:
        return self.regions[0].field_z


# -- parsing -----------------------------------------------------------------

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def _line_index(text: str) -> dict:
    """(section, key) -> 1-based line number."""
    index, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            index[(section, None)] = i
        elif section is not None and ("=" in line or ":" in line):
            key = re.split(r"[=:]", line, 1)[0].strip()
            index[(section, key)] = i
    return index


def parse_quantity(text: str, dimension: str, where: str = "") -> float:
    """Convert ``'51 nm'`` to SI (metres, tesla, T/m) or eV; a unit is mandatory."""
    m = _NUMBER.match(text.split("#")[0])
    prefix = f"{where}: " if where else ""
    if not m:
        raise ScenarioError(f"{prefix}cannot read a number from {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        raise ScenarioError(f"{prefix}missing unit (expected one of {', '.join(_UNITS[dimension])})")
    try:
        return value * _UNITS[dimension][unit]
    except KeyError:
        raise ScenarioError(f"{prefix}unit {unit!r} is not a {dimension} unit") from None


class _Reader:
    def __init__(self, cp, index, source):
        self.cp, self.index, self.source = cp, index, source

    def where(self, section, key=None):
        line = self.index.get((section, key), self.index.get((section, None), "?"))
        return f"{self.source}:{line}: [{section}]" + (f" {key}" if key else "")

    def get(self, section, key, kind, default=None):
        if not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key).split("#")[0].strip()
        where = self.where(section, key)
        try:
            if kind == "str":
                return raw
            if kind == "int":
                return int(raw)
            if kind == "float":
                return float(raw)
            if kind == "list":
                return tuple(s.strip() for s in raw.split(",") if s.strip())
        except ValueError:
            raise ScenarioError(f"{where}: expected {kind}, got {raw!r}") from None
        if kind == "length|w_m":
            return "w_m" if raw == "w_m" else parse_quantity(raw, "length", where)
        return parse_quantity(raw, kind, where)


def _apply_override(cp, section, key, value, dimension):
    if isinstance(value, str):
        text = value
    else:
        text = repr(value)
    if dimension in _UNITS and _NUMBER.match(text) and not _NUMBER.match(text).group(2):
        text = f"{text} {_SI_UNIT[dimension]}"  # bare override numbers are SI
    if not cp.has_section(section):
        cp.add_section(section)
    cp.set(section, key, text)


def _region_sections(cp):
    return [s for s in cp.sections() if s.split(".", 1)[0] == "region"]


def apply_overrides(cp, overrides: dict) -> None:
    """Map CLI overrides onto config values (bare numbers are SI)."""
    for name, value in overrides.items():
        if value is None:
            continue
        if name == "B":
            solenoids = [s for s in _region_sections(cp) if cp.get(s, "kind", fallback="") == "solenoid"]
            if not solenoids:
                raise ScenarioError("--B given but the scenario has no solenoid region")
            _apply_override(cp, solenoids[0], "B", value, "field")
        elif name in ("w0", "p_z"):
            dim = "length" if name == "w0" else "momentum"
            if name == "w0" and str(value) == "w_m":
                cp.set("state", "w0", "w_m")
            else:
                _apply_override(cp, "state", name, value, dim)
        elif name in ("ell", "n"):
            _apply_override(cp, "state", name, str(int(value)), "int")
        elif name == "kappa":
            _apply_override(cp, "analyzer", "kappa", value, "gradient")
        else:
            raise ScenarioError(f"unknown override {name!r}")


def parse_scenario(path=None, overrides: dict | None = None, text: str | None = None) -> Scenario:
    """Read and validate a scenario file (or ``text``; default scenario if both are None)."""
    source = "<default>"
    if text is None:
        if path is None:
            text = DEFAULT_SCENARIO
        else:
            source = str(path)
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ScenarioError(f"{source}: {exc.strerror}") from None
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc.message.splitlines()[0] if hasattr(exc, 'message') else exc}") from None
    index = _line_index(text)
    rd = _Reader(cp, index, source)

    for sec in cp.sections():
        base = sec.split(".", 1)[0]
        if base not in _SCHEMA or (base == "region") != ("." in sec):
            raise ScenarioError(f"{rd.where(sec)}: unknown section")
        for key in cp.options(sec):
            if key not in _SCHEMA[base]:
                raise ScenarioError(f"{rd.where(sec, key)}: unknown key")
    if not cp.has_section("state"):
        raise ScenarioError(f"{source}: missing [state] section")
    apply_overrides(cp, overrides or {})

    regions = []
    for sec in _region_sections(cp):
        name = sec.split(".", 1)[1]
        kind = rd.get(sec, "kind", "str", "solenoid")
        try:
            RegionKind(kind)
        except ValueError:
            raise ScenarioError(f"{rd.where(sec, 'kind')}: unknown region kind {kind!r}") from None
        for req in ("z_start", "z_end"):
            if not cp.has_option(sec, req):
                raise ScenarioError(f"{rd.where(sec)}: missing key {req}")
        off = (rd.get(sec, "offset_x", "length", 0.0), rd.get(sec, "offset_y", "length", 0.0))
        kw = dict(
            axis_offset=off,
            fringe_length=rd.get(sec, "fringe", "length", 0.0),
            gap_field=rd.get(sec, "gap_field", "field", 0.0),
            bore_radius=rd.get(sec, "bore", "length", None),
            name=name,
        )
        z = (rd.get(sec, "z_start", "length"), rd.get(sec, "z_end", "length"))
        try:
            if kind == "quadrupole":
                reg = FieldRegion.quadrupole(rd.get(sec, "B_tilde", "field", 0.0), rd.get(sec, "kappa", "gradient", 0.0), z, **kw)
            else:
                reg = FieldRegion(RegionKind(kind), rd.get(sec, "B", "field", 0.0), z, **kw)
        except DomainError as exc:
            raise ScenarioError(f"{rd.where(sec)}: {exc}") from None
        regions.append(reg)
    if not regions:
        raise ScenarioError(f"{source}: at least one [region.NAME] section is required")
    for a, b, sec_b in zip(regions, regions[1:], _region_sections(cp)[1:]):
        if not math.isclose(a.z_range[1], b.z_range[0], rel_tol=0, abs_tol=1e-12):
            raise ScenarioError(
                f"{rd.where(sec_b, 'z_start')}: regions {a.name!r} and {b.name!r} are not contiguous "
                f"({a.name} ends at {a.z_range[1]:g} m, {b.name} starts at {b.z_range[0]:g} m)"
            )

    sp_name = rd.get("state", "species", "str", "electron")
    if sp_name not in SPECIES:
        raise ScenarioError(f"{rd.where('state', 'species')}: unknown species {sp_name!r}")
    species = SPECIES[sp_name]
    s_z = rd.get("state", "s_z", "float", None)
    if s_z is not None:
        species = species.with_spin(s_z)
    for req in ("p_z", "w0"):
        if not cp.has_option("state", req):
            raise ScenarioError(f"{rd.where('state')}: missing key {req}")
    w0 = rd.get("state", "w0", "length|w_m")
    if w0 == "w_m":
        if regions[0].field_z == 0:
            raise ScenarioError(f"{rd.where('state', 'w0')}: w0 = w_m needs a field in the first region")
        w0 = magnetic_width(regions[0].field_z, species)
    try:
        state = BeamQuantumState(
            species,
            rd.get("state", "n", "int", 0),
            rd.get("state", "ell", "int", 0),
            rd.get("state", "p_z", "momentum"),
            w0,
            (rd.get("state", "offset_x", "length", 0.0), rd.get("state", "offset_y", "length", 0.0)),
            (rd.get("state", "momentum_x", "momentum", 0.0), rd.get("state", "momentum_y", "momentum", 0.0)),
        )
    except (DomainError, ValueError) as exc:
        raise ScenarioError(f"{rd.where('state')}: {exc}") from None

    analyses = rd.get("scenario", "analyses", "list", ANALYSES) if cp.has_section("scenario") else ANALYSES
    for a in analyses:
        if a not in ANALYSES:
            raise ScenarioError(f"{rd.where('scenario', 'analyses')}: unknown analysis {a!r}")
    geo_kw = {}
    for key, attr in (("B_tilde", "B_tilde"), ("kappa", "kappa"), ("length", "length"), ("drift", "drift"),
                      ("outlet", "outlet_diameter"), ("aperture", "aperture")):
        dim = _SCHEMA["analyzer"][key]
        v = rd.get("analyzer", key, dim) if cp.has_section("analyzer") else None
        if v is not None:
            geo_kw[attr] = v
    try:
        analyzer = AnalyzerGeometry(**geo_kw)
    except DomainError as exc:
        raise ScenarioError(f"{rd.where('analyzer')}: {exc}") from None

    def sc(key, kind, default):
        return rd.get("scenario", key, kind, default) if cp.has_section("scenario") else default

    seed = sc("seed", "int", 0)
    if not 0 <= seed < 2**64:
        raise ScenarioError(f"{rd.where('scenario', 'seed')}: seed must be an unsigned 64-bit integer")
    return Scenario(
        regions, state, tuple(analyses),
        seed=seed,
        tolerance=sc("tolerance", "float", 1e-2),
        samples=sc("samples", "int", 201),
        particles=sc("particles", "int", 1),
        z_max=sc("z_max", "length", None),
        p_z_spread=rd.get("state", "p_z_spread", "momentum", 0.0),
        analyzer=analyzer,
        analyzer_oam=rd.get("analyzer", "L_z", "float", None) if cp.has_section("analyzer") else None,
        source=source,
    )


# -- analyses ----------------------------------------------------------------

@dataclass
class AnalysisResult:
    name: str
    ok: bool
    report: str
    files: list = field(default_factory=list)


def _require_field(sc: Scenario, what: str) -> float:
    B = sc.source_field
    if B == 0:
        raise DomainError(f"{what} needs a nonzero field in the first region")
    return B


def _run_modes(sc: Scenario, out: Path) -> AnalysisResult:
    st = sc.state
    B = _require_field(sc, "modes")
    wm = magnetic_width(B, st.species)
    r = np.linspace(0.0, wm * (5 + math.sqrt(st.radial_order)), sc.samples)
    phi = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    rr, pp = (a.ravel() for a in np.meshgrid(r, phi, indexing="ij"))
    mode = landau_mode(st.n, st.ell, B, st.species, rr, pp)
    f = write_csv(out / "modes.csv",
                  (("r", "m"), ("phi", "rad"), ("z", "m"), ("re", "1/m"), ("im", "1/m"), ("abs2", "1/m^2")),
                  zip(rr, pp, np.zeros_like(rr), mode.value.real, mode.value.imag, mode.abs2))
    norm = quadrature_norm(lambda rr, ph: landau_mode(st.n, st.ell, B, st.species, rr, ph).value,
                           wm * (8 + math.sqrt(st.radial_order)))
    ok = abs(norm - 1) <= sc.tolerance
    text = "\n".join([
        f"field B = {B:.9g} T, w_m = {wm:.9e} m",
        f"Landau energy = {landau_energy(st, B):.12e} eV",
        f"<r^2> = {st.radial_order * wm**2 / 2:.9e} m^2",
        f"class = {classify_state(st.species, st.ell, int(np.sign(B))).value}",
        f"quadrature norm = {norm:.12f}",
        "OAM ledger:",
        ledger_for_state(st.replace(w0=wm), B).render(),
    ])
    return AnalysisResult("modes", ok, text, [f])


def _z_grid(sc: Scenario, default_max: float) -> np.ndarray:
    return np.linspace(0.0, sc.z_max if sc.z_max else default_max, sc.samples)


def _run_envelope(sc: Scenario, out: Path) -> AnalysisResult:
    st = sc.state
    B = _require_field(sc, "envelope")
    zm = magnetic_rayleigh_length(B, st.p_z, st.species)
    z = _z_grid(sc, 3 * np.pi * zm)
    env = field_envelope(st.n, st.ell, st.s_z, st.w0, B, st.p_z, z, st.species)
    f = write_csv(out / "envelope.csv",
                  (("z", "m"), ("w", "m"), ("inv_curvature", "1/m"), ("gouy", "rad")),
                  zip(env.z, env.w, env.inv_curvature, env.gouy))
    text = (f"z_m = {zm:.9e} m, period = {env.period:.9e} m\n"
            f"w range = [{env.w.min():.9e}, {env.w.max():.9e}] m")
    return AnalysisResult("envelope", True, text, [f])


def _run_transition(sc: Scenario, out: Path) -> AnalysisResult:
    if len(sc.regions) < 2:
        raise DomainError("transition analysis needs at least two regions")
    state, rows, parts = sc.state, [], []
    for r1, r2 in zip(sc.regions, sc.regions[1:]):
        rep = post_transition_state(state, r1, r2)
        rows.append([r1.name, r2.name, *rep.csv_row()])
        parts.append(f"-- {r1.name} -> {r2.name}\n{rep.render()}")
        state = rep.new_state
    cols = (("from", ""), ("to", ""), *TransitionReport.CSV_FIELDS)
    f = write_csv(out / "transitions.csv", cols, rows)
    z0, z1 = sc.beamline.z_span
    R = np.linspace(0.0, 4 * sc.state.w0, 5)
    g = write_csv(out / "fieldmap.csv", FIELD_MAP_COLUMNS,
                  field_map_rows(sc.beamline, R, np.linspace(z0, z1, sc.samples)))
    return AnalysisResult("transition", True, "\n".join(parts), [f, g])


def _sample_radius(rng, n, ell, w0, size):
    grid = np.linspace(0.0, w0 * (6 + math.sqrt(2 * n + abs(ell) + 1)), 4001)
    dens = radial_profile(n, ell, w0, grid) ** 2 * grid
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2)])
    cdf /= cdf[-1]
    return np.interp(rng.random(size), cdf, grid)


def _run_trajectory(sc: Scenario, out: Path) -> AnalysisResult:
    st, line = sc.state, sc.beamline
    rng = np.random.default_rng(sc.seed)
    radii = _sample_radius(rng, st.n, st.ell, st.w0, sc.particles)
    phis = rng.uniform(0.0, 2 * np.pi, sc.particles)
    r0 = sc.regions[0]
    z_start = 0.5 * sum(r0.z_range)
    z_end = 0.5 * sum(sc.regions[-1].z_range)
    coaxial = all(np.allclose(r.axis_offset, r0.axis_offset) for r in sc.regions)
    rows, lines, ok = [], [], True
    for i, (rr, ph) in enumerate(zip(radii, phis)):
        xy = r0.axis_offset + st.axis_offset + rr * np.array([math.cos(ph), math.sin(ph)])
        p0 = (*st.extrinsic_momentum, st.p_z)
        traj: Trajectory = integrate_trajectory(st.species, (*xy, z_start), p0, line, z_end, 1e-11)
        rows.extend([i, *row] for row in traj.csv_rows())
        msg = f"particle {i}: R0 = {rr:.6e} m, energy drift = {traj.energy_drift:.3e}"
        ok &= traj.energy_drift < 1e-9
        if coaxial:
            chk = canonical_conservation(traj, line, st.species, r0.axis_offset)
            msg += f", canonical drift = {chk.max_abs_drift:.3e} hbar (rel {chk.max_rel_drift:.3e})"
            ok &= chk.max_rel_drift < 1e-6
        lines.append(msg)
    f = write_csv(out / "trajectories.csv", (("particle", ""), *Trajectory.CSV_COLUMNS), rows)
    return AnalysisResult("trajectory", ok, "\n".join(lines), [f])


def _run_oracle(sc: Scenario, out: Path) -> AnalysisResult:
    st = sc.state
    B = _require_field(sc, "oracle")
    zm = magnetic_rayleigh_length(B, st.p_z, st.species)
    z = np.linspace(0.0, sc.z_max if sc.z_max else 3 * np.pi * zm, min(sc.samples, 61))
    chk = envelope_check(st.n, st.ell, st.w0, B, st.p_z, z, s_z=st.s_z, species=st.species)
    f = write_csv(out / "oracle.csv", chk.CSV_COLUMNS, chk.csv_rows())
    ok = chk.max_rel_err <= sc.tolerance
    return AnalysisResult("oracle", ok, f"max relative width error = {chk.max_rel_err:.6e} (tolerance {sc.tolerance:g})", [f])


def _run_experiment(sc: Scenario, out: Path) -> AnalysisResult:
    st = sc.state
    L = abs(sc.analyzer_oam) if sc.analyzer_oam is not None else abs(st.ell)
    outcome = deflection_sim(opposite_oam_beams(st.species, st.p_z, L, 0.0), sc.analyzer)
    ref = deflection_sim(TwistedBeam(st.species, st.p_z, 0.0, label="L0"), sc.analyzer)
    rows = outcome.csv_rows() + ref.csv_rows()
    f = write_csv(out / "experiment.csv", outcome.CSV_COLUMNS, rows)
    geo = sc.analyzer
    zl = np.linspace(-geo.length / 2, geo.length / 2, sc.samples)
    x_half = min(geo.outlet_diameter, 0.5 * geo.B_tilde / geo.kappa) if geo.kappa else geo.outlet_diameter
    lines = [(x0, field_line(geo.B_tilde, geo.kappa, x0, zl)) for x0 in (-x_half, 0.0, x_half)]
    g = write_csv(out / "field_lines.csv", (("x0", "m"), *FIELD_LINE_COLUMNS),
                  [(x0, *row) for x0, fl in lines for row in fl.csv_rows()])
    dm = excess_mass(st.species, st.n, st.ell, st.w0)
    verdict = positronium_threshold_from_excess(dm)
    text = "\n".join([
        outcome.render(),
        f"mirror residual about L=0 = {mirror_residual(outcome, ref):.3e}",
        f"effective mass excess M - m = {dm:.9e} eV",
        f"positronium: {'stable' if verdict.stable else 'unstable'} (margin {verdict.margin:.6f} eV)",
    ])
    return AnalysisResult("experiment", not outcome.flags, text, [f, g])


def _run_phase_spread(sc: Scenario, out: Path) -> AnalysisResult:
    st = sc.state
    B = _require_field(sc, "phase-spread")
    z = _z_grid(sc, 1.0)
    rep = phase_spread(st, B, z, sc.p_z_spread)
    f = write_csv(out / "phase_spread.csv", (("z", "m"), ("var_phi", "rad^2")), zip(rep.z, rep.var_phi))
    text = (f"<omega> = {rep.mean_omega:.9e} rad/s, Var(omega) = {rep.var_omega:.9e} rad^2/s^2\n"
            f"decoherence length (Var(phi) >= {rep.threshold:.6f}) = {rep.decoherence_length:.6e} m")
    return AnalysisResult("phase-spread", True, text, [f])


_RUNNERS = {
    "modes": _run_modes,
    "envelope": _run_envelope,
    "transition": _run_transition,
    "trajectory": _run_trajectory,
    "oracle": _run_oracle,
    "experiment": _run_experiment,
    "phase-spread": _run_phase_spread,
}


class ScenarioRunError(RuntimeError):
    pass


def run_scenario(sc: Scenario, out_dir=None, analyses=None) -> tuple[int, list[AnalysisResult]]:
    """Run analyses in declaration order; write CSVs and ``report.txt``.

    Returns (exit code, results): 0 if every analysis met its tolerance, 1 otherwise.
    Module errors are re-raised as :class:`ScenarioRunError` naming the analysis.
    """
    out = Path(out_dir or sc.out_dir or "twistbeam-out")
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for name in analyses or sc.analyses:
        try:
            results.append(_RUNNERS[name](sc, out))
        except (DomainError, ValueError, RuntimeError) as exc:
            raise ScenarioRunError(f"{sc.source}: analysis {name!r} failed: {exc}") from exc
    st = sc.state
    head = [
        f"scenario: {sc.source}",
        f"seed: {sc.seed}",
        f"state: {st.species.name} n={st.n} l={st.ell} s_z={st.s_z:g} p_z={st.p_z:.9g} eV w0={st.w0:.9e} m",
        "regions: " + ", ".join(f"{r.name}[{r.kind.value} {r.field_z:g} T, z={r.z_range[0]:g}..{r.z_range[1]:g} m]"
                                for r in sc.regions),
        "initial OAM ledger:",
        ledger_for_state(st, sc.source_field).render(),
    ]
    body = [f"\n== {r.name}: {'ok' if r.ok else 'OUT OF TOLERANCE'}\n{r.report}" for r in results]
    write_text(out / "report.txt", "\n".join(head + body))
    code = EXIT_OK if all(r.ok for r in results) else EXIT_TOLERANCE
    return code, results


# -- command line ------------------------------------------------------------

def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file (default: built-in example)")
    common.add_argument("--out", type=Path, default=Path("twistbeam-out"), help="output directory")
    common.add_argument("--seed", type=_seed, help="random seed (overrides the scenario)")
    common.add_argument("--tolerance", type=float, help="tolerance for pass/fail checks")
    common.add_argument("--B", help="field of the first solenoid (e.g. '2 T'; bare numbers are tesla)")
    common.add_argument("--w0", help="beam waist (e.g. '40 nm', or 'w_m')")
    common.add_argument("--ell", type=int, help="azimuthal quantum number")
    common.add_argument("--n", type=int, help="radial quantum number")
    common.add_argument("--kappa", help="analyzer gradient (bare numbers are T/m)")
    common.add_argument("--p-z", dest="p_z", help="longitudinal momentum (bare numbers are eV)")
    p = argparse.ArgumentParser(prog="twistbeam", description="Twisted charged-particle beams in magnetic fields.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*ANALYSES, "all"):
        sub.add_parser(name, parents=[common], help=f"run the {name} analysis" if name != "all"
                       else "run every analysis declared in the scenario")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("B", "w0", "ell", "n", "kappa", "p_z")}
    try:
        sc = parse_scenario(args.config, overrides)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        sc.seed = args.seed
    if args.tolerance is not None:
        sc.tolerance = args.tolerance
    analyses = sc.analyses if args.command == "all" else (args.command,)
    try:
        code, results = run_scenario(sc, args.out, analyses)
    except ScenarioRunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for r in results:
        print(f"{r.name}: {'ok' if r.ok else 'OUT OF TOLERANCE'} -> {', '.join(str(f) for f in r.files)}")
    print(f"report: {Path(args.out) / 'report.txt'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
