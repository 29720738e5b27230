import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwlens import CarrierState, PhysicalContext, UnitScales
from mwlens.errors import ConfigError


class TestPhysicalContext:
    def test_electron_preset(self):
        ctx = PhysicalContext.electron()
        assert ctx.charge < 0
        assert ctx.unit_mode == "si"

    def test_zero_charge_rejected(self):
        with pytest.raises(ConfigError):
            PhysicalContext(hbar=1.0, mass=1.0, charge=0.0, c_light=1.0)

    @pytest.mark.parametrize("field,value", [
        ("mass", -1.0), ("mass", 0.0), ("hbar", 0.0), ("c_light", -3.0)])
    def test_nonpositive_constants_rejected(self, field, value):
        kwargs = dict(hbar=1.0, mass=1.0, charge=-1.0, c_light=10.0)
        kwargs[field] = value
        with pytest.raises(ConfigError):
            PhysicalContext(**kwargs)


class TestCarrierState:
    @given(k0=st.floats(min_value=1e3, max_value=1e12))
    @settings(max_examples=200, deadline=None)
    def test_dispersion_relations_si(self, k0):
        """omega0 = hbar k0^2/2m, v_g = hbar k0/m, v0 = hbar k0/2m; and the
        factor-of-two between group and carrier phase velocity."""
        ctx = PhysicalContext.electron()
        car = CarrierState.from_wavenumber(ctx, k0)
        assert math.isclose(car.omega0, ctx.hbar * k0**2 / (2 * ctx.mass),
                            rel_tol=1e-12)
        assert math.isclose(car.v_group, ctx.hbar * k0 / ctx.mass, rel_tol=1e-12)
        assert math.isclose(car.v_phase_carrier, ctx.hbar * k0 / (2 * ctx.mass),
                            rel_tol=1e-12)
        assert math.isclose(car.v_group / car.v_phase_carrier, 2.0,
                            rel_tol=1e-12)
        assert math.isclose(car.lambda0 * car.k0, 2 * math.pi, rel_tol=1e-12)

    def test_from_kinetic_energy_roundtrip(self):
        ctx = PhysicalContext.electron()
        energy = 2555.3 * 1.602176634e-19
        car = CarrierState.from_kinetic_energy(ctx, energy)
        assert math.isclose(0.5 * ctx.mass * car.v_group**2, energy,
                            rel_tol=1e-12)
        assert math.isclose(car.k0, ctx.mass * car.v_group / ctx.hbar,
                            rel_tol=1e-12)

    def test_nonpositive_k0_rejected(self, ctx):
        with pytest.raises(ValueError):
            CarrierState.from_wavenumber(ctx, 0.0)


class TestUnitScales:
    @given(length_scale=st.floats(min_value=1e-12, max_value=1e-3),
           value=st.floats(min_value=1e-20, max_value=1e20))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_identity(self, length_scale, value):
        sc = UnitScales(PhysicalContext.electron(), length_scale)
        for fwd, back in [(sc.length, sc.length_si), (sc.time, sc.time_si),
                          (sc.velocity, sc.velocity_si),
                          (sc.wavenumber, sc.wavenumber_si),
                          (sc.angular_frequency, sc.angular_frequency_si),
                          (sc.efield, sc.efield_si)]:
            assert math.isclose(back(fwd(value)), value, rel_tol=1e-12)

    def test_natural_context_is_natural(self):
        sc = UnitScales(PhysicalContext.electron(), 1e-6)
        nat = sc.natural_context()
        assert nat.hbar == 1.0 and nat.mass == 1.0 and nat.charge == -1.0
        assert nat.unit_mode == "natural"

    def test_gamma0_invariant_under_scaling(self):
        """|q| E0 L / (hbar w) is dimensionless and must survive conversion."""
        si = PhysicalContext.electron()
        sc = UnitScales(si, 2.5e-7)
        E0, L, omega = 1e5, 0.01, 2 * math.pi * 1e10
        gamma_si = abs(si.charge) * E0 * L / (si.hbar * omega)
        gamma_nat = (sc.efield(E0) * sc.length(L)) / sc.angular_frequency(omega)
        assert math.isclose(gamma_si, gamma_nat, rel_tol=1e-12)

    def test_requires_si_context(self):
        with pytest.raises(ConfigError):
            UnitScales(PhysicalContext.natural(), 1.0)
