"""mwlens: matter-wave space-time imaging.

1-D quantum wavepacket envelopes propagated through dispersion, a
traveling-wave lens phase, and dispersion again, with the design algebra
(imaging condition, magnification, f-number, resolution) and the metrics
to verify it.
"""

__version__ = "0.1.0"

from .core import (CarrierState, Grid, SampledEnvelope, central_moment,
                   centroid, fidelity, intensity_fwhm, make_asymmetric_pair,
                   make_gaussian, norm, normalize, rescale, rms_bandwidth,
                   skewness, spectrum, tail_mass)
from .dispersion import (DispersionSegment, analytic_gaussian, compose,
                         propagate)
from .errors import (AliasingWarning, BackwardPropagationError, ConfigError,
                     ContextMismatchError, FocalLengthMismatchError,
                     GridMismatchError, ImageAtInfinityError,
                     LensRequiredError, MwlensError, SlowWaveError,
                     SupportError, UnattainableWidthError,
                     UnderResolvedError)
from .imaging import (AberrationPoint, ImagingDesign, MagnificationEstimate,
                      ResolutionResult, aberration_sweep,
                      estimate_magnification, expected_image,
                      resolution_experiment, run_pipeline, solve_imaging)
from .lens import (LensDesign, LensSpec, accumulated_phase, apply_lens,
                   build_lens, f_number_kinematic, lens_design,
                   matched_lens_for_focal_length, phase_integral_oracle,
                   restoring_force)
from .units import PhysicalContext, UnitScales

__all__ = [
    "AberrationPoint", "AliasingWarning", "BackwardPropagationError",
    "CarrierState", "ConfigError", "ContextMismatchError",
    "DispersionSegment", "FocalLengthMismatchError", "Grid",
    "GridMismatchError", "ImageAtInfinityError", "ImagingDesign",
    "LensDesign", "LensRequiredError", "LensSpec", "MagnificationEstimate",
    "MwlensError", "PhysicalContext", "ResolutionResult", "SampledEnvelope",
    "SlowWaveError", "SupportError", "UnattainableWidthError",
    "UnderResolvedError", "UnitScales",
    "aberration_sweep", "accumulated_phase", "analytic_gaussian",
    "apply_lens", "build_lens", "central_moment", "centroid", "compose",
    "estimate_magnification", "expected_image", "f_number_kinematic",
    "fidelity", "intensity_fwhm", "lens_design",
    "make_asymmetric_pair", "make_gaussian", "matched_lens_for_focal_length",
    "norm", "normalize", "phase_integral_oracle", "propagate", "rescale",
    "resolution_experiment", "restoring_force", "rms_bandwidth",
    "run_pipeline", "skewness", "solve_imaging", "spectrum", "tail_mass",
]
