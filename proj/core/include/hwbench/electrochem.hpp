#pragma once

/**
 * Closed-form relations of the ion-blocking microelectrode cell.
 *
 * SI units throughout: volts, amperes, metres, kelvin, S/m. Activities are
 * dimensionless (oxygen partial pressure referenced to 1 atm).
 */

namespace hwbench {

struct PhysicalConstants {
  double faraday = 96485.332;     // C/mol
  double gas_constant = 8.31446;  // J/(mol K)
  int z_electrons = 4;            // O2 + 4e- <-> 2 O2-
};

inline constexpr PhysicalConstants kConstants{};

struct CellGeometry {
  double contact_radius_m = 100e-6;
  double reversible_electrode_radius_m = 5e-3;
  double electrolyte_thickness_m = 2e-3;

  // Throws DomainError unless 0 < a <= thickness / 10 and the other lengths are positive.
  void validate() const;
};

struct ReferenceAtmosphere {
  double a_o2_reversible = 0.21;
  double temperature_k = 973.15;

  void validate() const;
};

// Largest |zEF/(RT)| accepted before the activity mapping is declared out of range.
inline constexpr double kMaxNernstExponent = 700.0;

/// Oxygen activity imposed at the micro contact by the applied voltage:
/// a1 = a2 * exp(z E F / (R T)). Throws RangeError when |zEF/RT| > 700.
double nernst_activity(double e_app_v, const ReferenceAtmosphere& ref,
                       const PhysicalConstants& consts = kConstants);

/// log10 of nernst_activity, same range policy.
double nernst_log10_activity(double e_app_v, const ReferenceAtmosphere& ref,
                             const PhysicalConstants& consts = kConstants);

/// Inverse mapping: (R T / (z F)) ln(a1 / a2). Throws DomainError for a1 <= 0.
double nernst_voltage(double a1, const ReferenceAtmosphere& ref,
                      const PhysicalConstants& consts = kConstants);

/// Spreading resistance of a hemispherical contact on a semi-infinite solid, 1 / (2 pi a sigma).
double spreading_resistance(const CellGeometry& geom, double sigma_s_per_m);

/// sigma_e = dI/dE / (2 pi a). Sign is preserved; negative values are repaired downstream.
double conductivity_from_derivative(double di_de_a_per_v, const CellGeometry& geom);

}  // namespace hwbench
