"""Numerical laboratory for Poincaré, super-Poincaré, Orlicz and
measure-capacity inequalities of one-dimensional measures, with the
Gaussian and Hermite toolkit behind the dimension-free log-Sobolev chain."""

from . import capacity, gauss_lsi, hermite, measure, numerics, orlicz, spectrum, transfer
from .capacity import CapacityProfile, capacity_profile, interval_capacity, poincare_from_mc
from .errors import SpiLabError
from .measure import Measure1D, Potential, build_measure
from .orlicz import YoungFunction, YoungPair, power_pair
from .spectrum import low_spectrum, spectral_ospi, verify_spi
from .transfer import BetaFunction, OrliczSpi

__version__ = "0.1.0"

__all__ = [
    "BetaFunction",
    "CapacityProfile",
    "Measure1D",
    "OrliczSpi",
    "Potential",
    "SpiLabError",
    "YoungFunction",
    "YoungPair",
    "build_measure",
    "capacity",
    "capacity_profile",
    "gauss_lsi",
    "hermite",
    "interval_capacity",
    "low_spectrum",
    "measure",
    "numerics",
    "orlicz",
    "poincare_from_mc",
    "power_pair",
    "spectral_ospi",
    "spectrum",
    "transfer",
    "verify_spi",
]
