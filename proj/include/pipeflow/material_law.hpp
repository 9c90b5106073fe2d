#pragma once

#include <vector>

namespace pipeflow {

// Piecewise-linear, nonincreasing density over temperature with constant
// extension outside the breakpoint range, plus the scalar material constants.
// Defaults reproduce the normalized setting (all constants 1).
struct DensityLaw {
  std::vector<double> theta;  // strictly increasing breakpoint temperatures
  std::vector<double> rho;    // positive, nonincreasing densities
  double c_v = 1.0;           // specific heat, > 0
  double lambda = 1.0;        // heat conductivity, > 0
  double nu = 1.0;            // kinematic viscosity, > 0
  double alpha = 1.0;         // wall heat-exchange coefficient, >= 0
};

// Enthalpy transformation of a density law.  The enthalpy
//   E(theta) = integral_0^theta c_v * rho(s) ds
// is strictly increasing (rho > 0), so its inverse is well defined and
// Lipschitz with constant 1/(c_v * rho_min).  All evaluations are closed
// form: E is piecewise quadratic, the inverse solves one quadratic per
// segment.
class MaterialLaw {
 public:
  explicit MaterialLaw(DensityLaw law);

  double density(double theta) const;      // rho(theta)
  double enthalpy(double theta) const;     // E(theta)
  double temperature(double e) const;      // E^{-1}(e)
  double density_of_enthalpy(double e) const;
  double diffusivity(double e) const;      // lambda / (c_v * rho(E^{-1}(e)))
  double temperature_slope(double e) const;  // d/de E^{-1}, in (0, lipschitz_bound()]

  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }
  double kappa_min() const;  // lambda / (c_v * rho_max)
  double kappa_max() const;  // lambda / (c_v * rho_min)
  double lipschitz_bound() const;  // 1 / (c_v * rho_min)

  const DensityLaw& law() const { return law_; }

 private:
  DensityLaw law_;
  std::vector<double> ebp_;  // enthalpy at breakpoints
  double rho_min_ = 0.0, rho_max_ = 0.0;
};

}  // namespace pipeflow
