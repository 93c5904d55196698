"""Pseudospectral scattering diagnostics for Psi(-Delta) + V."""

from nlscatter.diagnostics import (
    BoundConstants,
    PowerFit,
    TimeSeries,
    cauchy_gap_series,
    cook_integrand_series,
    divergence_witness,
    fit_exponent,
    lemma2_upper_check,
    pairing_series,
    propagation_estimate_series,
)
from nlscatter.evolution import EvolutionParams, free_evolve, full_evolve, heisenberg_position
from nlscatter.kernels import BACKEND
from nlscatter.lattice import (
    GridSpec,
    WavePacket,
    cone_mass,
    from_fourier,
    inner_product,
    make_annulus_packet,
    position_weighted_norm,
    to_fourier,
)
from nlscatter.potentials import LongRange, ShortRange, decay_bound_check, sample_potential
from nlscatter.spectrum import detect_zero_set, flat_band_eigen_demo, spectral_interval
from nlscatter.symbols import (
    FlatBand,
    Fractional,
    Logarithmic,
    Relativistic,
    Tabulated,
    certify_classes,
    cone_threshold,
    eval_psi,
    eval_psi_prime,
    group_speed_envelope,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundConstants",
    "EvolutionParams",
    "FlatBand",
    "Fractional",
    "GridSpec",
    "Logarithmic",
    "LongRange",
    "PowerFit",
    "Relativistic",
    "ShortRange",
    "Tabulated",
    "TimeSeries",
    "WavePacket",
    "cauchy_gap_series",
    "certify_classes",
    "cone_mass",
    "cone_threshold",
    "cook_integrand_series",
    "decay_bound_check",
    "detect_zero_set",
    "divergence_witness",
    "eval_psi",
    "eval_psi_prime",
    "fit_exponent",
    "flat_band_eigen_demo",
    "free_evolve",
    "from_fourier",
    "full_evolve",
    "group_speed_envelope",
    "heisenberg_position",
    "inner_product",
    "lemma2_upper_check",
    "make_annulus_packet",
    "pairing_series",
    "position_weighted_norm",
    "propagation_estimate_series",
    "sample_potential",
    "spectral_interval",
    "to_fourier",
]
