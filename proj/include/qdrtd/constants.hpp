#ifndef QDRTD_CONSTANTS_HPP
#define QDRTD_CONSTANTS_HPP

namespace qdrtd::consts {

// CODATA 2018
inline constexpr double q_C        = 1.602176634e-19;   // elementary charge [C]
inline constexpr double m0_kg      = 9.1093837015e-31;  // free electron mass [kg]
inline constexpr double hbar_Js    = 1.054571817e-34;   // reduced Planck constant [J s]
inline constexpr double h_Js       = 6.62607015e-34;    // Planck constant [J s]
inline constexpr double kB_JK      = 1.380649e-23;      // Boltzmann constant [J/K]
inline constexpr double eps0_Fm    = 8.8541878128e-12;  // vacuum permittivity [F/m]

// kinetic prefactor hbar^2/(2 m0) in eV nm^2; energies in eV, lengths in nm,
// masses as fractions of m0 throughout the quantum solvers
inline constexpr double hbar2_over_2m0_eVnm2 = 0.03809982080;

inline constexpr double kB_eVK = kB_JK / q_C;  // Boltzmann constant [eV/K]

} // namespace qdrtd::consts

#endif
