"""Traveling-wave matter-wave lens: potentials, accumulated phase, focal
quantities, and application to sampled envelopes.

A slow-wave structure carries longitudinal potentials

    A_z = A0 exp(i(k_m z - w_m t)),   Phi = (k_m c^2 / w_m) A0 exp(...)

with A0 = E0 / (w_m (c^2/v_p^2 - 1)).  A charged particle co-propagating at
v_g accumulates the phase

    Gamma(xi) = -(q E0 L / hbar w_m) * [(c^2/(v_p v_g) - 1)/(c^2/v_p^2 - 1)]
                * sinc(dphi/2) * cos(k_m xi + dphi/2 + theta)

where dphi = w_m L (1/v_p - 1/v_g) is the walkoff phase slip.  Near an
extremum the cosine is quadratic in xi, which is lens action; expanding and
matching exp(-i k0 xi^2 / 2 f) gives the focal length f = k0/(Gamma0 k_m^2)
with Gamma0 = |q| E0 L / hbar w_m.

Nonrelativistic kinematics throughout (gamma ~ 1.005 at the keV scale of
interest; corrections are ignored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import CarrierState, SampledEnvelope, new_envelope
from .errors import SlowWaveError, UnderResolvedError
from .units import PhysicalContext

MIN_SAMPLES_PER_PERIOD = 16


def sinc(x):
    """sin(x)/x with the removable singularity at 0 handled explicitly."""
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class LensSpec:
    """A slow-wave structure paired with the particle it acts on.

    Derived fields satisfy v_p k_m = w_m, the Lorentz-gauge relation
    Phi0 = (k_m c^2 / w_m) A0, and Gamma0 = |q| E0 L / (hbar w_m) >= 0.
    ``theta`` is pi for positive charge and 0 for negative charge so that
    the accumulated phase is positive near xi = 0 (converging lens);
    building with ``diverging=True`` offsets theta by pi.
    """

    E0: float
    omega_m: float
    k_m: float
    v_p: float
    slow_factor_n: float
    length: float
    theta: float
    A0: float
    Phi0: float
    gamma0: float
    delta_phi: float
    lambda_m: float
    diverging: bool
    ctx: PhysicalContext
    carrier: CarrierState

    @property
    def focal_length(self) -> float:
        """f = k0 / (Gamma0 k_m^2); +inf with no field, negative if diverging."""
        if self.gamma0 == 0.0:
            return math.inf
        f = self.carrier.k0 / (self.gamma0 * self.k_m**2)
        return -f if self.diverging else f

    @property
    def f_number(self) -> float:
        """Focal length over the effective aperture 1/k_m."""
        return abs(self.focal_length) * self.k_m

    @property
    def aperture_width(self) -> float:
        """Effective aperture: one 1/2pi-th of the modulation period."""
        return 1.0 / self.k_m

    @property
    def resolution_input_scale(self) -> float:
        """Input-referred resolution estimate lambda0 * f#."""
        return self.carrier.lambda0 * self.f_number


def build_lens(E0: float, omega_m: float, length: float, ctx: PhysicalContext,
               carrier: CarrierState, v_p: float | None = None,
               slow_factor_n: float | None = None,
               diverging: bool = False) -> LensSpec:
    """Construct a LensSpec from structure parameters.

    Exactly one of ``v_p`` and ``slow_factor_n`` must be given (the other is
    derived from v_p = c/n).  E0 = 0 is the explicit "no lens" variant
    (Gamma0 = 0, infinite focal length).

    Raises
    ------
    SlowWaveError
        If v_p >= c: the structure would not be a slow wave, and the
        vector-potential relation A0 = E0 / (w_m (c^2/v_p^2 - 1)) would lose
        meaning (denominator <= 0).
    """
    if (v_p is None) == (slow_factor_n is None):
        raise ValueError("give exactly one of v_p and slow_factor_n")
    c = ctx.c_light
    if v_p is None:
        if slow_factor_n <= 1:
            raise SlowWaveError(f"slow factor n must exceed 1, got {slow_factor_n}")
        v_p = c / slow_factor_n
    else:
        slow_factor_n = c / v_p
    if not 0 < v_p < c:
        raise SlowWaveError(f"not a slow wave: v_p = {v_p} must be in (0, c = {c})")
    if E0 < 0:
        raise ValueError(f"E0 must be nonnegative, got {E0}")
    if omega_m <= 0:
        raise ValueError(f"omega_m must be positive, got {omega_m}")
    if length <= 0:
        raise ValueError(f"interaction length must be positive, got {length}")

    k_m = omega_m / v_p
    A0 = E0 / (omega_m * (c**2 / v_p**2 - 1))
    Phi0 = (k_m * c**2 / omega_m) * A0
    gamma0 = abs(ctx.charge) * E0 * length / (ctx.hbar * omega_m)
    delta_phi = omega_m * length * (1 / v_p - 1 / carrier.v_group)
    theta = math.pi if ctx.charge > 0 else 0.0
    if diverging:
        theta += math.pi
    return LensSpec(E0=E0, omega_m=omega_m, k_m=k_m, v_p=v_p,
                    slow_factor_n=slow_factor_n, length=length, theta=theta,
                    A0=A0, Phi0=Phi0, gamma0=gamma0, delta_phi=delta_phi,
                    lambda_m=2 * math.pi / k_m, diverging=diverging,
                    ctx=ctx, carrier=carrier)


@dataclass(frozen=True)
class LensDesign:
    """Focal quantities of a lens, collected for reporting.

    focal_length = k0/(Gamma0 k_m^2); f_number = focal_length * k_m;
    aperture * k_m = 1; resolution_input_scale = lambda0 * f_number.
    """

    focal_length: float
    f_number: float
    aperture: float
    resolution_input_scale: float


def lens_design(spec: LensSpec) -> LensDesign:
    """Collect the focal quantities of a lens spec."""
    return LensDesign(focal_length=spec.focal_length,
                      f_number=spec.f_number,
                      aperture=spec.aperture_width,
                      resolution_input_scale=spec.resolution_input_scale)


def matched_lens_for_focal_length(focal_length: float, k_m: float,
                                  length: float, ctx: PhysicalContext,
                                  carrier: CarrierState) -> LensSpec:
    """Velocity-matched lens (v_p = v_g) with a prescribed focal length.

    Inverts f = k0/(Gamma0 k_m^2) for the field amplitude; convenience for
    building imaging systems around a target geometry.
    """
    if focal_length <= 0 or not math.isfinite(focal_length):
        raise ValueError(f"focal_length must be positive and finite, "
                         f"got {focal_length}")
    v_p = carrier.v_group
    omega_m = v_p * k_m
    gamma0 = carrier.k0 / (focal_length * k_m**2)
    E0 = gamma0 * ctx.hbar * omega_m / (abs(ctx.charge) * length)
    return build_lens(E0, omega_m, length, ctx, carrier, v_p=v_p)


def f_number_kinematic(spec: LensSpec) -> float:
    """f# from particle kinematics: m v_g v_p / (|q| E0 L).

    Independent route to the same number as ``spec.f_number`` (which uses
    k0/(Gamma0 k_m)); under velocity matching v_g v_p = (c/n)^2 this is the
    rest-mass-energy over qE0L form.
    """
    ctx, car = spec.ctx, spec.carrier
    return ctx.mass * car.v_group * spec.v_p / (abs(ctx.charge) * spec.E0 * spec.length)


def accumulated_phase(spec: LensSpec, xi) -> np.ndarray | float:
    """Phase accumulated across the structure as a function of offset xi.

    Full closed form including walkoff; at exact velocity matching
    (delta_phi = 0) the dedicated branch returns
    -(q E0 L / hbar w_m) cos(k_m xi + theta) with no sinc evaluation.
    """
    ctx, car = spec.ctx, spec.carrier
    signed_peak = ctx.charge * spec.E0 * spec.length / (ctx.hbar * spec.omega_m)
    if spec.delta_phi == 0.0:
        return -signed_peak * np.cos(spec.k_m * np.asarray(xi) + spec.theta)
    c = ctx.c_light
    ratio = (c**2 / (spec.v_p * car.v_group) - 1) / (c**2 / spec.v_p**2 - 1)
    return (-signed_peak * ratio * sinc(spec.delta_phi / 2)
            * np.cos(spec.k_m * np.asarray(xi) + spec.delta_phi / 2 + spec.theta))


def phase_integral_oracle(spec: LensSpec, xi: float) -> float:
    """Accumulated phase by direct quadrature of the defining integral.

    Integrates (q A0 / hbar)(v_g - c^2/v_p) cos(k_m z - w_m t + theta) dt
    over the transit 0..L/v_g with z = xi + v_g t; independent of the closed
    form in ``accumulated_phase`` and used to validate it.
    """
    ctx, car = spec.ctx, spec.carrier
    v_g = car.v_group
    pref = (ctx.charge * spec.A0 / ctx.hbar) * (v_g - ctx.c_light**2 / spec.v_p)
    transit = spec.length / v_g

    def integrand(t):
        return math.cos(spec.k_m * (xi + v_g * t) - spec.omega_m * t + spec.theta)

    val, _ = quad(integrand, 0.0, transit, epsabs=1e-13, epsrel=1e-13, limit=400)
    return pref * val


def restoring_force(spec: LensSpec, xi, t: float = 0.0) -> np.ndarray | float:
    """Longitudinal force on the particle at offset xi from the synchronous
    point, in the traveling frame: F = q E0 sin(k_m xi + (k_m v_g - w_m) t + theta).

    With theta set by the charge sign, sign(F) * sign(xi) <= 0 for
    |k_m xi| < pi regardless of the charge sign: the field always pushes the
    particle back toward the potential extremum.
    """
    slip_rate = spec.k_m * spec.carrier.v_group - spec.omega_m
    return spec.ctx.charge * spec.E0 * np.sin(
        spec.k_m * np.asarray(xi) + slip_rate * t + spec.theta)


def hard_window(grid_xi: np.ndarray, xi_step: float, width: float) -> np.ndarray:
    """Discrete rect of the given full width: edge samples get the fractional
    area they overlap, so the effective width is exact on any grid."""
    return np.clip((width / 2 - np.abs(grid_xi)) / xi_step + 0.5, 0.0, 1.0)


def raised_cosine_window(grid_xi: np.ndarray, width: float) -> np.ndarray:
    """Raised-cosine (Hann) window of the given full width."""
    out = np.zeros_like(grid_xi)
    inside = np.abs(grid_xi) < width / 2
    out[inside] = np.cos(np.pi * grid_xi[inside] / width)**2
    return out


def apply_lens(env: SampledEnvelope, spec: LensSpec, mode: str = "quadratic",
               aperture: float | None = None, aperture_shape: str = "hard",
               tau_l: float = 0.0) -> SampledEnvelope:
    """Imprint the lens phase on an envelope.

    Parameters
    ----------
    mode : {"quadratic", "full-cosine"}
        "quadratic" multiplies by exp(-i k0 xi^2 / 2f) and moves the
        constant prefactor Gamma0 into ``global_phase``; "full-cosine"
        multiplies by exp(+i Gamma(xi)) with the complete accumulated phase
        (walkoff included).  The two agree to O((k_m xi)^4) near axis.
    aperture : float, optional
        Full width of a window applied at the lens plane, centered on
        xi = 0.  None disables the aperture; the physical default choice is
        one extremum region, width 1/k_m (``spec.aperture_width``).
    aperture_shape : {"hard", "raised-cosine"}
        Hard rect (edge samples area-weighted) or a raised-cosine taper.
    tau_l : float
        Transit time through the structure; contributes w0 tau_l to the
        global phase and advances elapsed_time.  Dispersion inside the
        structure is not modeled (fold it into the adjacent segments).

    Norm is preserved exactly when no aperture is given; an aperture removes
    the clipped tail mass.
    """
    grid = env.grid
    xi = grid.xi()
    phase_const = 0.0

    if mode == "quadratic":
        f = spec.focal_length
        if math.isinf(f):
            values = env.values.copy()
        else:
            values = env.values * np.exp(-1j * spec.carrier.k0 * xi**2 / (2 * f))
        phase_const = spec.gamma0
    elif mode == "full-cosine":
        if spec.lambda_m < MIN_SAMPLES_PER_PERIOD * grid.xi_step:
            raise UnderResolvedError(
                f"modulation under-resolved: lambda_m = {spec.lambda_m} spans "
                f"fewer than {MIN_SAMPLES_PER_PERIOD} grid steps")
        values = env.values * np.exp(1j * accumulated_phase(spec, xi))
    else:
        raise ValueError(f"unknown lens mode {mode!r}; use 'quadratic' or "
                         f"'full-cosine'")

    if aperture is not None:
        if aperture <= 0:
            raise ValueError(f"aperture width must be positive, got {aperture}")
        if aperture_shape == "hard":
            values = values * hard_window(xi, grid.xi_step, aperture)
        elif aperture_shape == "raised-cosine":
            values = values * raised_cosine_window(xi, aperture)
        else:
            raise ValueError(f"unknown aperture shape {aperture_shape!r}")

    return new_envelope(grid, values, env.carrier,
                        env.global_phase + phase_const
                        + env.carrier.omega0 * tau_l,
                        env.elapsed_time + tau_l)
