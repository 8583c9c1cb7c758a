"""Physical constants (CODATA 2018) and unit conversions."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    elementary_charge: float = 1.602176634e-19  # C
    hbar: float = 1.054571817e-34  # J s
    epsilon0: float = 8.8541878128e-12  # F/m
    light_speed: float = 2.99792458e8  # m/s
    ev: float = 1.602176634e-19  # J per eV


CODATA2018 = PhysicalConstants()
