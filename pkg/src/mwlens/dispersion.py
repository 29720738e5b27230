"""Free-particle envelope propagation as a quadratic spectral phase filter.

In the co-moving frame the envelope evolves by multiplying its baseband
spectrum with exp(-i (hbar tau / 2m) k^2):

    psi(xi, tau) = IFT{ psi0(k) exp(-i hbar tau k^2 / 2m) }

The filter is phase-only (unitary) and forms a semigroup in tau.  The
analytic dispersing-Gaussian solution is provided as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (CarrierState, Grid, SampledEnvelope, new_envelope)
from .errors import (BackwardPropagationError, ContextMismatchError,
                     SupportError, UnderResolvedError)
from .units import PhysicalContext

# Spectrum samples below this fraction of the peak are treated as empty when
# locating the occupied band for the sampling criterion.
SPECTRAL_FLOOR = 1e-8


@dataclass(frozen=True)
class DispersionSegment:
    """A stretch of free propagation.

    ``coeff`` is the quadratic-phase coefficient hbar tau / 2m; ``length``
    is the lab-frame distance v_g tau covered while the envelope disperses.
    """

    tau: float
    coeff: float
    length: float

    @classmethod
    def for_time(cls, tau: float, ctx: PhysicalContext, carrier: CarrierState,
                 allow_backward: bool = False) -> "DispersionSegment":
        if tau < 0 and not allow_backward:
            raise BackwardPropagationError(
                f"tau = {tau} < 0; pass allow_backward=True for inverse checks")
        return cls(tau=tau, coeff=ctx.hbar * tau / (2 * ctx.mass),
                   length=carrier.v_group * tau)

    @classmethod
    def for_distance(cls, length: float, ctx: PhysicalContext,
                     carrier: CarrierState,
                     allow_backward: bool = False) -> "DispersionSegment":
        return cls.for_time(length / carrier.v_group, ctx, carrier,
                            allow_backward=allow_backward)


def compose(seg1: DispersionSegment, seg2: DispersionSegment) -> DispersionSegment:
    """Segment equivalent to traversing seg1 then seg2 (exponents add)."""
    return DispersionSegment(tau=seg1.tau + seg2.tau,
                             coeff=seg1.coeff + seg2.coeff,
                             length=seg1.length + seg2.length)


def occupied_band(values: np.ndarray, k: np.ndarray,
                  floor: float = SPECTRAL_FLOOR) -> float:
    """Largest |k| whose spectral amplitude is at least ``floor`` x peak."""
    mag = np.abs(np.fft.fft(values))
    peak = mag.max()
    if peak == 0:
        return 0.0
    return float(np.abs(k[mag >= floor * peak]).max())


def propagate(env: SampledEnvelope, seg: DispersionSegment,
              ctx: PhysicalContext) -> SampledEnvelope:
    """Apply the quadratic spectral phase filter of one dispersion segment.

    The spectrum is multiplied by exp(-i coeff k^2) on the baseband k grid;
    elapsed time advances by tau and the carrier phase w0 tau accumulates in
    ``global_phase``.  Norm is preserved to roundoff (phase-only filter).

    Raises
    ------
    ContextMismatchError
        If the segment was built for a different hbar/2m.
    UnderResolvedError
        If the spectral phase changes by more than pi between adjacent k
        samples anywhere in the envelope's occupied band ("dispersion
        under-resolved"): the displaced content would wrap the window.
    """
    expected = ctx.hbar * seg.tau / (2 * ctx.mass)
    if not math.isclose(seg.coeff, expected, rel_tol=1e-12, abs_tol=0.0):
        raise ContextMismatchError(
            f"segment coeff {seg.coeff} does not match hbar*tau/2m = {expected} "
            f"for this context")
    if seg.tau == 0.0:
        return env

    grid = env.grid
    k = grid.k()
    k_occ = occupied_band(env.values, k)
    # Phase increment between adjacent samples: d(coeff k^2)/dk * dk.
    if 2 * abs(seg.coeff) * k_occ * grid.k_step >= np.pi:
        raise UnderResolvedError(
            f"dispersion under-resolved: |2 coeff k| dk = "
            f"{2 * abs(seg.coeff) * k_occ * grid.k_step:.3f} >= pi at the "
            f"occupied band edge k = {k_occ:.3f}; enlarge the window or "
            f"split the segment")
    tilde = np.fft.fft(env.values)
    tilde *= np.exp(-1j * seg.coeff * k**2)
    values = np.fft.ifft(tilde)
    return new_envelope(grid, values, env.carrier,
                        env.global_phase + env.carrier.omega0 * seg.tau,
                        env.elapsed_time + seg.tau)


def analytic_gaussian(grid: Grid, carrier: CarrierState, tau: float,
                      sigma0: float, center: float,
                      ctx: PhysicalContext) -> SampledEnvelope:
    """Closed-form dispersed Gaussian; the test oracle for ``propagate``.

    Evaluates the complex-width solution

        psi(xi, tau) = (2 pi s0^2)^(-1/4) (1 + i a/s0^2)^(-1/2)
                       exp(-(xi-center)^2 / (4 (s0^2 + i a)))

    with a = hbar tau / 2m, whose density width is
    s(tau) = s0 sqrt(1 + (a/s0^2)^2).  Computed directly on the grid with no
    transforms, so it shares no code path with the spectral propagator.
    """
    a = ctx.hbar * tau / (2 * ctx.mass)
    sigma_tau = sigma0 * math.sqrt(1 + (a / sigma0**2)**2)
    if sigma0 <= 4 * grid.xi_step:
        raise UnderResolvedError(
            f"sigma0 = {sigma0} must exceed 4 grid steps (= {4 * grid.xi_step})")
    if abs(center) + 4 * sigma_tau >= grid.xi_span / 4:
        raise SupportError(
            f"dispersed support |center| + 4 sigma(tau) = "
            f"{abs(center) + 4 * sigma_tau} exceeds a quarter window "
            f"(= {grid.xi_span / 4})")
    u = grid.xi() - center
    w = sigma0**2 + 1j * a
    values = ((2 * np.pi * sigma0**2)**(-0.25)
              * (1 + 1j * a / sigma0**2)**(-0.5)
              * np.exp(-u**2 / (4 * w)))
    return new_envelope(grid, values, carrier,
                        global_phase=carrier.omega0 * tau, elapsed_time=tau)
