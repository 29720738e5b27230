"""Grids, carrier states, sampled envelopes and measurement primitives.

An envelope is the slowly varying complex amplitude psi(xi) riding on the
plane-wave carrier exp(i(k0 xi + w0 tau)) in the frame xi = z - v_g t that
co-moves with the packet.  Envelopes are stored at baseband: the spectrum is
centered on k = 0 and the carrier lives in metadata.  Constant phase factors
(carrier phase, lens prefactors) accumulate in a single scalar so the sampled
values never carry them.

All types are immutable; every operation returns a new envelope.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (AliasingWarning, GridMismatchError, SupportError,
                     UnderResolvedError)
from .units import PhysicalContext

# Mass fraction allowed outside the central half of the window before the
# periodic spectral method is considered at risk of wraparound.
TAIL_MASS_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid for xi, centered so index n/2 is xi = 0.

    Parameters
    ----------
    n_points : int
        Number of samples; must be a power of two.
    xi_span : float
        Total window width.  The usable region is the central half; outside
        it the periodic spectral method wraps silently.
    """

    n_points: int
    xi_span: float

    def __post_init__(self):
        n = self.n_points
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two, got {n}")
        if self.xi_span <= 0:
            raise ValueError(f"xi_span must be positive, got {self.xi_span}")

    @property
    def xi_step(self) -> float:
        return self.xi_span / self.n_points

    @property
    def k_step(self) -> float:
        return 2 * np.pi / self.xi_span

    def xi(self) -> np.ndarray:
        """Sample positions, index n/2 at xi = 0."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.xi_step

    def k(self) -> np.ndarray:
        """Baseband wavenumbers in FFT (unshifted) order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.xi_step)

    def k_centered(self) -> np.ndarray:
        """Baseband wavenumbers in ascending order."""
        return np.fft.fftshift(self.k())


@dataclass(frozen=True)
class CarrierState:
    """Carrier (plane-wave) parameters of a matter wave.

    For a free particle the dispersion relation w = hbar k^2 / 2m fixes
    every field from (m, k0):

        w0 = hbar k0^2 / 2m,  v_g = hbar k0 / m,  v0 = w0/k0 = v_g / 2.
    """

    k0: float
    omega0: float
    v_group: float
    v_phase_carrier: float
    lambda0: float

    @classmethod
    def from_wavenumber(cls, ctx: PhysicalContext, k0: float) -> "CarrierState":
        if k0 <= 0:
            raise ValueError(f"carrier wavenumber must be positive, got {k0}")
        hbar, m = ctx.hbar, ctx.mass
        return cls(k0=k0,
                   omega0=hbar * k0**2 / (2 * m),
                   v_group=hbar * k0 / m,
                   v_phase_carrier=hbar * k0 / (2 * m),
                   lambda0=2 * np.pi / k0)

    @classmethod
    def from_kinetic_energy(cls, ctx: PhysicalContext, energy: float) -> "CarrierState":
        """Carrier for a particle of nonrelativistic kinetic energy E = p^2/2m."""
        if energy <= 0:
            raise ValueError(f"kinetic energy must be positive, got {energy}")
        v_g = math.sqrt(2 * energy / ctx.mass)
        return cls.from_wavenumber(ctx, ctx.mass * v_g / ctx.hbar)


@dataclass(frozen=True)
class SampledEnvelope:
    """Complex baseband envelope on a grid, plus carrier bookkeeping.

    ``values`` carries units of 1/sqrt(length) so that sum |psi|^2 dxi = 1
    for a normalized state.  ``global_phase`` accumulates the constant phase
    factors exp(i w0 tau), exp(i Gamma0); it never multiplies the samples.
    """

    grid: Grid
    values: np.ndarray
    carrier: CarrierState
    global_phase: float = 0.0
    elapsed_time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"values shape {v.shape} does not match grid "
                             f"({self.grid.n_points},)")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def new_envelope(grid: Grid, values: np.ndarray, carrier: CarrierState,
                 global_phase: float = 0.0, elapsed_time: float = 0.0,
                 check_support: bool = True) -> SampledEnvelope:
    """Build an envelope, warning if mass has reached the outer half-window."""
    env = SampledEnvelope(grid, values, carrier, global_phase, elapsed_time)
    if check_support:
        tm = tail_mass(env)
        if tm > TAIL_MASS_THRESHOLD:
            warnings.warn(
                f"envelope support exceeds the central 50% of the window "
                f"(tail mass {tm:.3e} > {TAIL_MASS_THRESHOLD:.0e}); results may "
                f"be corrupted by periodic wraparound", AliasingWarning,
                stacklevel=3)
    return env


def tail_mass(env: SampledEnvelope) -> float:
    """Fraction of |psi|^2 outside the central half of the window."""
    xi = env.grid.xi()
    dens = np.abs(env.values)**2
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(dens[np.abs(xi) > env.grid.xi_span / 4].sum() / total)


def _require_finite(env: SampledEnvelope) -> None:
    if not np.all(np.isfinite(env.values.view(np.float64))):
        raise ValueError("envelope contains NaN or Inf samples")


# ---------------------------------------------------------------------------
# factories
# ---------------------------------------------------------------------------

def make_gaussian(grid: Grid, carrier: CarrierState, sigma: float,
                  center: float = 0.0, chirp: float = 0.0) -> SampledEnvelope:
    """Normalized (optionally chirped) Gaussian test packet.

        psi(xi) ~ exp(-(xi-center)^2 / 4 sigma^2 + i chirp (xi-center)^2)

    |psi|^2 then has standard deviation sigma.  The rms spatial-frequency
    content is sqrt(1/(4 sigma^2) + 4 chirp^2 sigma^2).

    Raises
    ------
    UnderResolvedError
        If sigma is not resolved by at least four grid steps.
    SupportError
        If the 4-sigma support leaves the central half-window.
    """
    if sigma <= 4 * grid.xi_step:
        raise UnderResolvedError(
            f"sigma = {sigma} must exceed 4 grid steps (= {4 * grid.xi_step})")
    if abs(center) + 4 * sigma >= grid.xi_span / 4:
        raise SupportError(
            f"|center| + 4 sigma = {abs(center) + 4 * sigma} must stay below "
            f"a quarter window (= {grid.xi_span / 4})")
    u = grid.xi() - center
    values = np.exp(-u**2 / (4 * sigma**2) + 1j * chirp * u**2)
    values /= math.sqrt(np.sum(np.abs(values)**2) * grid.xi_step)
    return new_envelope(grid, values, carrier)


def make_asymmetric_pair(grid: Grid, carrier: CarrierState, sep: float,
                         sigma: float, amp_ratio: float) -> SampledEnvelope:
    """Two Gaussian humps at -sep/2 (amplitude 1) and +sep/2 (amplitude
    amp_ratio), normalized.

    With amp_ratio < 1 the density is skewed: the minority hump on the
    positive side makes the third central moment positive.  amp_ratio = 1
    gives the symmetric control case.

    Raises
    ------
    SupportError
        If the humps overlap (sep <= 3 sigma) or leave the safe window.
    """
    if not 0 < amp_ratio <= 1:
        raise ValueError(f"amp_ratio must be in (0, 1], got {amp_ratio}")
    if sep <= 3 * sigma:
        raise SupportError(f"humps overlap: sep = {sep} must exceed 3 sigma "
                           f"(= {3 * sigma})")
    if sigma <= 4 * grid.xi_step:
        raise UnderResolvedError(
            f"sigma = {sigma} must exceed 4 grid steps (= {4 * grid.xi_step})")
    if sep / 2 + 4 * sigma >= grid.xi_span / 4:
        raise SupportError(
            f"sep/2 + 4 sigma = {sep / 2 + 4 * sigma} must stay below a "
            f"quarter window (= {grid.xi_span / 4})")
    xi = grid.xi()
    values = (np.exp(-(xi + sep / 2)**2 / (4 * sigma**2))
              + amp_ratio * np.exp(-(xi - sep / 2)**2 / (4 * sigma**2)))
    values = values.astype(np.complex128)
    values /= math.sqrt(np.sum(np.abs(values)**2) * grid.xi_step)
    return new_envelope(grid, values, carrier)


def normalize(env: SampledEnvelope) -> SampledEnvelope:
    """Rescale so that sum |psi|^2 dxi = 1."""
    n = norm(env)
    if n == 0:
        raise ValueError("cannot normalize a zero envelope")
    return replace(env, values=env.values / math.sqrt(n))


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def norm(env: SampledEnvelope) -> float:
    """Quadrature of |psi|^2 over the window."""
    _require_finite(env)
    return float(np.sum(np.abs(env.values)**2) * env.grid.xi_step)


def centroid(env: SampledEnvelope) -> float:
    """Mean position of the |psi|^2 density."""
    _require_finite(env)
    dens = np.abs(env.values)**2
    return float(np.sum(env.grid.xi() * dens) / dens.sum())


def central_moment(env: SampledEnvelope, order: int) -> float:
    """Central moment of the |psi|^2 density (normalized as a density)."""
    _require_finite(env)
    xi = env.grid.xi()
    dens = np.abs(env.values)**2
    dens = dens / dens.sum()
    mu = float(np.sum(xi * dens))
    return float(np.sum((xi - mu)**order * dens))


def skewness(env: SampledEnvelope) -> float:
    """Standardized skewness m3 / m2^(3/2) of the density."""
    m2 = central_moment(env, 2)
    m3 = central_moment(env, 3)
    return m3 / m2**1.5


def fidelity(a: SampledEnvelope, b: SampledEnvelope) -> float:
    """Overlap fidelity |<a|b>|^2 / (<a|a><b|b>), in [0, 1].

    Insensitive to normalization and to global phase of either argument
    (scalar ``global_phase`` bookkeeping never enters).
    """
    if a.grid != b.grid:
        raise GridMismatchError("fidelity requires envelopes on the same grid")
    _require_finite(a)
    _require_finite(b)
    dx = a.grid.xi_step
    num = abs(np.sum(np.conj(a.values) * b.values) * dx)**2
    den = (np.sum(np.abs(a.values)**2) * dx) * (np.sum(np.abs(b.values)**2) * dx)
    return float(num / den)


def spectrum(env: SampledEnvelope) -> tuple[np.ndarray, np.ndarray]:
    """Continuum-normalized baseband spectrum on the ascending k grid.

    Returns (k, psi_tilde) with psi_tilde(k) = sum_j psi_j exp(-i k xi_j) dxi,
    so that Parseval reads sum |psi|^2 dxi = sum |psi_tilde|^2 dk / (2 pi).
    """
    vals = np.fft.ifftshift(env.values)  # rotate xi = 0 to index 0
    tilde = np.fft.fftshift(np.fft.fft(vals)) * env.grid.xi_step
    return env.grid.k_centered(), tilde


def rms_bandwidth(env: SampledEnvelope) -> float:
    """Root-mean-square spread of |psi_tilde|^2 about k = 0."""
    k, tilde = spectrum(env)
    p = np.abs(tilde)**2
    return float(math.sqrt(np.sum(k**2 * p) / np.sum(p)))


def intensity_fwhm(env: SampledEnvelope) -> float:
    """Full width at half maximum of |psi|^2, by linear interpolation."""
    dens = np.abs(env.values)**2
    xi = env.grid.xi()
    imax = int(np.argmax(dens))
    half = dens[imax] / 2
    i = imax
    while i > 0 and dens[i] > half:
        i -= 1
    if dens[i] > half:
        raise ValueError("half-maximum crossing not found on the left")
    left = np.interp(half, [dens[i], dens[i + 1]], [xi[i], xi[i + 1]])
    i = imax
    n = len(dens)
    while i < n - 1 and dens[i] > half:
        i += 1
    if dens[i] > half:
        raise ValueError("half-maximum crossing not found on the right")
    right = np.interp(half, [dens[i], dens[i - 1]], [xi[i], xi[i - 1]])
    return float(right - left)


# ---------------------------------------------------------------------------
# rescaling
# ---------------------------------------------------------------------------

def rescale(env: SampledEnvelope, m: float) -> SampledEnvelope:
    """Coordinate rescaling psi(xi) -> psi(xi/m) / sqrt|m|.

    Negative m mirrors the envelope.  Interpolation is exact band-limited
    (trigonometric) evaluation of the sampled spectrum, i.e. the limit of
    Fourier zero-padding; points that map outside the window are zero, not
    periodic replicas.  The norm is preserved.

    Raises
    ------
    SupportError
        If the rescaled envelope does not fit in the safe window.
    """
    if m == 0:
        raise ValueError("magnification must be nonzero")
    _require_finite(env)
    if m == 1.0:
        return env
    grid = env.grid
    n = grid.n_points
    targets = grid.xi() / m
    spec_fft = np.fft.fft(np.fft.ifftshift(env.values))
    k = grid.k()
    out = np.zeros(n, dtype=np.complex128)
    inside = np.abs(targets) <= grid.xi_span / 2
    idx = np.flatnonzero(inside)
    chunk = max(1, (1 << 22) // n)  # cap the phase-matrix working set
    for i in range(0, len(idx), chunk):
        j = idx[i:i + chunk]
        out[j] = np.exp(1j * np.outer(targets[j], k)) @ spec_fft / n
    out /= math.sqrt(abs(m))

    result = SampledEnvelope(grid, out, env.carrier, env.global_phase,
                             env.elapsed_time)
    if tail_mass(result) > TAIL_MASS_THRESHOLD:
        raise SupportError(
            f"rescale by {m} pushes the envelope outside the central "
            f"half-window (tail mass {tail_mass(result):.3e})")
    return result
