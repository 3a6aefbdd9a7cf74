import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from twistbeam import ELECTRON, POSITRON, UNITS, BeamQuantumState, magnetic_width, mean_square_radius
from twistbeam.beamstate import coupling
from twistbeam.oam_ledger import (
    Contribution,
    OamLedger,
    classical_limit_kinetic,
    intrinsic_canonical,
    kinetic_from_canonical,
    landau_kinetic,
    ledger_for_state,
    time_dependent_kinetic,
)

SPECIES = [ELECTRON, POSITRON]


class TestKineticFromCanonical:
    def test_vacuum_identity(self):
        assert kinetic_from_canonical(5, 0.0, ELECTRON, 1e-12) == 5

    @pytest.mark.parametrize("B", [0.1, 1.0, 3.0])
    def test_classical_circle_doubles(self, B):
        pi_perp = 40.0  # eV
        r = UNITS.length_to_si(pi_perp / abs(coupling(B, ELECTRON)))
        L = UNITS.length_to_natural(r) * pi_perp / 2  # natural rotation sense for e < 0
        assert kinetic_from_canonical(L, B, ELECTRON, r**2) == pytest.approx(2 * L, rel=1e-12)

    def test_landau_substitution(self):
        r2 = mean_square_radius(0, 3, 1.0, ELECTRON)
        assert kinetic_from_canonical(3, 1.0, ELECTRON, r2) == pytest.approx(7, abs=1e-12)

    def test_negative_area_rejected(self):
        with pytest.raises(ValueError):
            kinetic_from_canonical(0, 1.0, ELECTRON, -1.0)


class TestLandauKinetic:
    def test_examples(self):
        assert landau_kinetic(0, 0, ELECTRON).kinetic == 1
        assert landau_kinetic(0, 5, ELECTRON).kinetic == 11
        assert landau_kinetic(0, -5, POSITRON).kinetic == -11

    @pytest.mark.parametrize("sp", SPECIES)
    def test_three_routes_agree(self, sp):
        for n in range(4):
            for ell in range(-6, 7):
                lk = landau_kinetic(n, ell, sp)
                via = kinetic_from_canonical(ell, 1.0, sp, mean_square_radius(n, ell, 1.0, sp))
                assert round(float(via)) == lk.kinetic
                assert float(via) == pytest.approx(lk.kinetic, abs=1e-10)
                assert lk.kinetic - 2 * ell == lk.minus_twice_canonical

    def test_integers(self):
        lk = landau_kinetic(2, -4, ELECTRON)
        assert isinstance(lk.kinetic, int) and isinstance(lk.minus_twice_canonical, int)

    @pytest.mark.parametrize("sp", SPECIES)
    def test_basic_states_keep_sign(self, sp):
        for ell in range(-6, 7):
            if ell == 0 or sp.charge_sign * ell > 0:
                continue
            for n in range(4):
                assert np.sign(landau_kinetic(n, ell, sp).kinetic) * np.sign(ell) >= 0

    @pytest.mark.parametrize("sp", SPECIES)
    def test_classical_limit_drops_zero_point(self, sp):
        for ell in [-6, -1, 1, 6]:
            assert classical_limit_kinetic(ell, sp) == ell - sp.charge_sign * abs(ell)
            assert classical_limit_kinetic(ell, sp) == landau_kinetic(0, ell, sp).kinetic + sp.charge_sign


class TestClassicalLimit:
    def test_examples(self):
        assert classical_limit_kinetic(4, ELECTRON) == 8
        assert classical_limit_kinetic(-4, ELECTRON) == 0
        assert classical_limit_kinetic(-4, POSITRON) == -8


class TestIntrinsicCanonical:
    def test_zero(self):
        assert intrinsic_canonical(1e-6, 0.0, ELECTRON) == 0

    def test_electron_value(self):
        v = intrinsic_canonical(1e-6, 150.0, ELECTRON)
        assert v > 0
        assert v == pytest.approx(oracles.INTRINSIC_CANONICAL_1UM_150EV, rel=1e-9)

    def test_oracle_reproduces_frozen(self):
        assert 1e-6 * 150.0 / (oracles.HBAR * oracles.CL / oracles.QE) / 2 == pytest.approx(
            oracles.INTRINSIC_CANONICAL_1UM_150EV, rel=1e-14)

    @given(st.floats(1e-9, 1e-5), st.floats(0.01, 10.0), st.sampled_from(SPECIES))
    def test_split_consistency(self, r, B, sp):
        # |pi_phi| = |e| B r for a particle carrying only the potential momentum
        pi_phi = abs(coupling(B, sp)) * UNITS.length_to_natural(r)
        expected = -coupling(B, sp) / 2 * UNITS.length_to_natural(r) ** 2
        assert intrinsic_canonical(r, pi_phi, sp) == pytest.approx(expected, rel=1e-12)
        assert intrinsic_canonical(r, pi_phi, sp) == pytest.approx(
            float(kinetic_from_canonical(0.0, B, sp, r * r)), rel=1e-12)


class TestTimeDependent:
    def test_centered_phase_independent(self):
        vals = time_dependent_kinetic(2.0, 1.0, ELECTRON, 0.0, 1e-7, np.linspace(0, 6, 7))
        np.testing.assert_allclose(vals, float(kinetic_from_canonical(2.0, 1.0, ELECTRON, 1e-14)), rtol=1e-14)

    def test_electron_form(self):
        B, R0, pi_perp = 1.0, 2e-7, 30.0
        eb = abs(coupling(B, ELECTRON))
        r = UNITS.length_to_si(pi_perp / eb)
        ph = np.linspace(0, 2 * np.pi, 9)
        R0n = UNITS.length_to_natural(R0)
        ref = 1.0 + eb / 2 * (R0n**2 + pi_perp**2 / eb**2 + 2 * R0n * pi_perp * np.cos(ph) / eb)
        np.testing.assert_allclose(time_dependent_kinetic(1.0, B, ELECTRON, R0, r, ph), ref, rtol=1e-12)

    def test_cancels_when_orbit_passes_axis(self):
        r = 3e-7
        assert time_dependent_kinetic(0.0, 1.0, ELECTRON, r, r, math.pi) == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(0, 1e-6), st.floats(0, 1e-6), st.floats(-5, 5), st.sampled_from(SPECIES))
    def test_phase_average(self, R0, r, B, sp):
        ph = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        avg = time_dependent_kinetic(1.0, B, sp, R0, r, ph).mean()
        assert avg == pytest.approx(float(kinetic_from_canonical(1.0, B, sp, R0**2 + r**2)), rel=1e-12, abs=1e-12)

    @given(st.floats(1e-8, 1e-6), st.floats(1e-8, 1e-6))
    def test_extrema(self, R0, r):
        ph = np.linspace(0, 2 * np.pi, 721)
        v = time_dependent_kinetic(0.0, 1.0, ELECTRON, R0, r, ph)
        assert np.argmax(v) in (0, 720) and np.argmin(v) == 360

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            time_dependent_kinetic(0, 1.0, ELECTRON, -1.0, 0.0, 0.0)


class TestLedger:
    def test_totals(self):
        led = OamLedger((Contribution("mode", "intrinsic", 2, 3.5), Contribution("extrinsic-orbit", "extrinsic", 1.0, -0.5)))
        assert led.canonical_total == led.canonical_intrinsic + led.canonical_extrinsic == 3.0
        assert led.kinetic_total == 3.0
        assert led.rows()[-1] == ("total", 3.0, 3.0, "physical")
        assert [c.source for c in led.by_source("mode")] == ["mode"]

    @pytest.mark.parametrize("sp", SPECIES)
    def test_state_ledger_reproduces_kinetic_relation(self, sp):
        wm = magnetic_width(1.0, sp)
        for ell in (-3, 0, 4):
            s = BeamQuantumState(sp, 1, ell, 1e3, wm)
            led = ledger_for_state(s, 1.0)
            assert led.kinetic_intrinsic == pytest.approx(landau_kinetic(1, ell, sp).kinetic, abs=1e-10)
            assert led.canonical_intrinsic == ell

    def test_extrinsic_gauge_part(self):
        R0 = np.array([1e-6, 0.0])
        pi0 = np.array([0.0, 20.0])
        s = BeamQuantumState(ELECTRON, 0, 0, 1e3, 1e-7, R0, pi0)
        led = ledger_for_state(s, 0.5)
        orbital = UNITS.length_to_natural(1e-6) * 20.0
        assert led.kinetic_extrinsic == pytest.approx(orbital, rel=1e-12)
        assert led.canonical_extrinsic - led.kinetic_extrinsic == pytest.approx(
            -float(kinetic_from_canonical(0.0, 0.5, ELECTRON, 1e-12)), rel=1e-12)

    def test_render(self):
        s = BeamQuantumState(ELECTRON, 0, -2, 1e3, 1e-7)
        text = ledger_for_state(s, 1.0).render()
        assert text.splitlines()[0].split() == ["component", "canonical", "kinetic", "source"]
        assert "nonbasic" in text
        assert " -0 " not in text

    def test_vacuum_ledger_not_flagged(self):
        s = BeamQuantumState(ELECTRON, 0, -2, 1e3, 1e-7)
        assert not ledger_for_state(s, 0.0).nonbasic
