#pragma once

// CODATA 2018, SI units.
namespace mtg::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double epsilon0 = 8.8541878128e-12;     // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double boltzmann = 1.380649e-23;        // J/K

inline constexpr double calcium40_mass_u = 39.9626;

inline constexpr double zeta3 = 1.2020569031595942854;
inline constexpr double sqrt_pi = 1.77245385090551602730;

}  // namespace mtg::constants
