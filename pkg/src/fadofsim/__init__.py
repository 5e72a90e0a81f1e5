"""Simulation toolkit for an atomic Faraday filter applied to OPO photon pairs."""

__version__ = "0.1.0"

from .correlations import (
    DetectorConfig,
    Histogram,
    detected_histogram,
    g2_multi_comb,
    g2_multi_exact,
    g2_single,
    g2_single_fwhm,
)
from .cvnoise import (
    NoiseFit,
    NoiseModel,
    excess_noise,
    noise_vs_power_fit,
    photon_flux,
    power_for_flux,
    quadrature_variance_avg,
    squeezing_through_loss,
)
from .lines import AtomicLineTable, LineComponent, zeeman_components
from .opo import ModeComb, OpoConfig, mode_comb, output_spectrum
from .pairs import (
    PairTransmissionMap,
    optimize_filter,
    overall_degenerate_fraction,
    pair_transmission_map,
    resonant_degenerate_fraction,
    spectral_purity,
)
from .spectrum import BoundaryPeakError, FilterMetrics, Spectrum, filter_metrics, make_frequency_grid
from .susceptibility import complex_susceptibility, complex_voigt, vapor_density
from .vapor import (
    FilterConfig,
    HotCellConfig,
    fadof_transmission,
    hot_cell_transmission,
    optical_depth,
)

__all__ = [
    "AtomicLineTable",
    "LineComponent",
    "zeeman_components",
    "BoundaryPeakError",
    "FilterMetrics",
    "Spectrum",
    "filter_metrics",
    "make_frequency_grid",
    "complex_susceptibility",
    "complex_voigt",
    "vapor_density",
    "FilterConfig",
    "HotCellConfig",
    "fadof_transmission",
    "hot_cell_transmission",
    "optical_depth",
    "OpoConfig",
    "ModeComb",
    "mode_comb",
    "output_spectrum",
    "DetectorConfig",
    "Histogram",
    "detected_histogram",
    "g2_single",
    "g2_single_fwhm",
    "g2_multi_exact",
    "g2_multi_comb",
    "PairTransmissionMap",
    "pair_transmission_map",
    "resonant_degenerate_fraction",
    "spectral_purity",
    "overall_degenerate_fraction",
    "optimize_filter",
    "NoiseModel",
    "NoiseFit",
    "excess_noise",
    "quadrature_variance_avg",
    "noise_vs_power_fit",
    "squeezing_through_loss",
    "photon_flux",
    "power_for_flux",
]
