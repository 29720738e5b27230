"""Physical contexts and SI <-> natural unit scaling.

Internally the simulator works in natural units (hbar = m = 1, lengths in
units of a reference width).  SI electron-scale magnitudes (hbar ~ 1e-34)
would otherwise wreck double precision in intermediate products, so SI
quantities are converted once at the boundary and converted back for
reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy import constants as _const

from .errors import ConfigError

SPEED_OF_LIGHT = _const.c
ELECTRON_MASS = _const.m_e
ELEMENTARY_CHARGE = _const.e
HBAR = _const.hbar
EV = _const.electron_volt

NATURAL = "natural"
SI = "si"


@dataclass(frozen=True)
class PhysicalContext:
    """Particle constants and the unit mode they are expressed in.

    Parameters
    ----------
    hbar : float
        Reduced Planck constant (J s, or 1 in natural mode).
    mass : float
        Particle mass (kg, or 1).
    charge : float
        Signed particle charge (C, or +-1).  Must be nonzero: the lens
        couples through the charge.
    c_light : float
        Speed of light in the same unit system.
    unit_mode : str
        ``"si"`` or ``"natural"``; bookkeeping only.
    """

    hbar: float
    mass: float
    charge: float
    c_light: float
    unit_mode: str = SI

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if self.hbar <= 0:
            raise ConfigError(f"hbar must be positive, got {self.hbar}")
        if self.c_light <= 0:
            raise ConfigError(f"c_light must be positive, got {self.c_light}")
        if self.charge == 0:
            raise ConfigError("charge must be nonzero (lens couples through it)")

    @classmethod
    def electron(cls) -> "PhysicalContext":
        """SI context for an electron (negative charge)."""
        return cls(hbar=HBAR, mass=ELECTRON_MASS, charge=-ELEMENTARY_CHARGE,
                   c_light=SPEED_OF_LIGHT, unit_mode=SI)

    @classmethod
    def natural(cls, charge_sign: float = -1.0, c_light: float = 137.0) -> "PhysicalContext":
        """Natural-unit context: hbar = m = 1, |q| = 1.

        ``c_light`` is free in natural units; it only has to exceed every
        velocity in the problem (slow-wave condition v_p < c).
        """
        if charge_sign not in (-1.0, 1.0, -1, 1):
            raise ConfigError("charge_sign must be +1 or -1")
        return cls(hbar=1.0, mass=1.0, charge=float(charge_sign),
                   c_light=c_light, unit_mode=NATURAL)


@dataclass(frozen=True)
class UnitScales:
    """Conversion factors between an SI context and its natural twin.

    The natural system fixes hbar = mass = |charge| = 1 and measures length
    in units of ``length_scale`` (a reference packet width).  The derived
    time scale follows from the free-particle dispersion: t0 = m l0^2 / hbar,
    so that the quadratic-phase coefficient hbar t / 2m is l0^2/2 per t0.
    """

    si: PhysicalContext
    length_scale: float

    def __post_init__(self):
        if self.si.unit_mode != SI:
            raise ConfigError("UnitScales expects an SI context")
        if self.length_scale <= 0:
            raise ConfigError("length_scale must be positive")

    @property
    def time_scale(self) -> float:
        return self.si.mass * self.length_scale**2 / self.si.hbar

    @property
    def velocity_scale(self) -> float:
        return self.length_scale / self.time_scale

    @property
    def efield_scale(self) -> float:
        # Fixed so that Gamma0 = |q| E0 L / (hbar omega_m) is invariant.
        return self.si.hbar / (abs(self.si.charge) * self.length_scale * self.time_scale)

    def natural_context(self) -> PhysicalContext:
        return PhysicalContext(
            hbar=1.0, mass=1.0, charge=math.copysign(1.0, self.si.charge),
            c_light=self.si.c_light / self.velocity_scale, unit_mode=NATURAL)

    # -- SI -> natural -------------------------------------------------
    def length(self, x: float) -> float:
        return x / self.length_scale

    def time(self, t: float) -> float:
        return t / self.time_scale

    def velocity(self, v: float) -> float:
        return v / self.velocity_scale

    def wavenumber(self, k: float) -> float:
        return k * self.length_scale

    def angular_frequency(self, w: float) -> float:
        return w * self.time_scale

    def efield(self, e: float) -> float:
        return e / self.efield_scale

    # -- natural -> SI -------------------------------------------------
    def length_si(self, x: float) -> float:
        return x * self.length_scale

    def time_si(self, t: float) -> float:
        return t * self.time_scale

    def velocity_si(self, v: float) -> float:
        return v * self.velocity_scale

    def wavenumber_si(self, k: float) -> float:
        return k / self.length_scale

    def angular_frequency_si(self, w: float) -> float:
        return w / self.time_scale

    def efield_si(self, e: float) -> float:
        return e * self.efield_scale


def with_unit_mode(ctx: PhysicalContext, mode: str) -> PhysicalContext:
    return replace(ctx, unit_mode=mode)
