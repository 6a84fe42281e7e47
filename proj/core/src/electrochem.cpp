#include "hwbench/electrochem.hpp"

#include "hwbench/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace hwbench {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double nernst_exponent(double e_app_v, const ReferenceAtmosphere& ref,
                       const PhysicalConstants& consts) {
  ref.validate();
  const double x = consts.z_electrons * e_app_v * consts.faraday /
                   (consts.gas_constant * ref.temperature_k);
  if (!std::isfinite(x) || std::abs(x) > kMaxNernstExponent) {
    throw RangeError("nernst_activity: exponent out of range for E_app = " + num(e_app_v) + " V");
  }
  return x;
}

}  // namespace

void CellGeometry::validate() const {
  if (!(contact_radius_m > 0.0)) {
    throw DomainError("contact_radius_m must be positive");
  }
  if (!(electrolyte_thickness_m > 0.0) || !(reversible_electrode_radius_m > 0.0)) {
    throw DomainError("electrode radius and electrolyte thickness must be positive");
  }
  if (contact_radius_m > electrolyte_thickness_m / 10.0) {
    throw DomainError("contact_radius_m must not exceed electrolyte_thickness_m / 10");
  }
}

void ReferenceAtmosphere::validate() const {
  if (!(a_o2_reversible > 0.0) || !std::isfinite(a_o2_reversible)) {
    throw DomainError("a_o2_reversible must be positive");
  }
  if (!(temperature_k > 0.0) || !std::isfinite(temperature_k)) {
    throw DomainError("temperature_k must be positive");
  }
}

double nernst_activity(double e_app_v, const ReferenceAtmosphere& ref,
                       const PhysicalConstants& consts) {
  const double x = nernst_exponent(e_app_v, ref, consts);
  const double a1 = ref.a_o2_reversible * std::exp(x);
  if (!std::isfinite(a1) || a1 <= 0.0) {
    throw RangeError("nernst_activity: non-finite activity for E_app = " + num(e_app_v) + " V");
  }
  return a1;
}

double nernst_log10_activity(double e_app_v, const ReferenceAtmosphere& ref,
                             const PhysicalConstants& consts) {
  const double x = nernst_exponent(e_app_v, ref, consts);
  return std::log10(ref.a_o2_reversible) + x / std::numbers::ln10;
}

double nernst_voltage(double a1, const ReferenceAtmosphere& ref, const PhysicalConstants& consts) {
  if (!(a1 > 0.0)) {
    throw DomainError("nernst_voltage: activity must be positive, got " + num(a1));
  }
  ref.validate();
  return consts.gas_constant * ref.temperature_k / (consts.z_electrons * consts.faraday) *
         std::log(a1 / ref.a_o2_reversible);
}

double spreading_resistance(const CellGeometry& geom, double sigma_s_per_m) {
  geom.validate();
  if (!(sigma_s_per_m > 0.0)) {
    throw DomainError("spreading_resistance: conductivity must be positive, got " +
                      num(sigma_s_per_m));
  }
  return 1.0 / (2.0 * std::numbers::pi * geom.contact_radius_m * sigma_s_per_m);
}

double conductivity_from_derivative(double di_de_a_per_v, const CellGeometry& geom) {
  geom.validate();
  return di_de_a_per_v / (2.0 * std::numbers::pi * geom.contact_radius_m);
}

}  // namespace hwbench
