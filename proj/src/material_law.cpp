#include "pipeflow/material_law.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pipeflow {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

MaterialLaw::MaterialLaw(DensityLaw law) : law_(std::move(law)) {
  const auto& th = law_.theta;
  const auto& rh = law_.rho;
  if (th.empty() || th.size() != rh.size())
    throw std::invalid_argument("material law: need matching, nonempty breakpoint lists");
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (!finite(th[i]) || !finite(rh[i]))
      throw std::invalid_argument("material law: non-finite breakpoint");
    if (rh[i] <= 0.0) throw std::invalid_argument("material law: density must be positive");
    if (i > 0 && th[i] <= th[i - 1])
      throw std::invalid_argument("material law: temperatures must be strictly increasing");
    if (i > 0 && rh[i] > rh[i - 1])
      throw std::invalid_argument("material law: density must be nonincreasing");
  }
  if (!(law_.c_v > 0.0) || !(law_.lambda > 0.0) || !(law_.nu > 0.0))
    throw std::invalid_argument("material law: c_v, lambda, nu must be positive");
  if (!(law_.alpha >= 0.0)) throw std::invalid_argument("material law: alpha must be >= 0");

  rho_max_ = rh.front();
  rho_min_ = rh.back();

  // Enthalpy at the breakpoints, anchored so that E(0) = 0.
  ebp_.assign(th.size(), 0.0);
  for (std::size_t i = 1; i < th.size(); ++i) {
    const double dth = th[i] - th[i - 1];
    ebp_[i] = ebp_[i - 1] + law_.c_v * 0.5 * (rh[i] + rh[i - 1]) * dth;
  }
  double e_at_zero;
  if (0.0 <= th.front()) {
    e_at_zero = ebp_.front() + law_.c_v * rh.front() * (0.0 - th.front());
  } else if (0.0 >= th.back()) {
    e_at_zero = ebp_.back() + law_.c_v * rh.back() * (0.0 - th.back());
  } else {
    const auto it = std::upper_bound(th.begin(), th.end(), 0.0);
    const std::size_t k = static_cast<std::size_t>(it - th.begin()) - 1;
    const double s = (rh[k + 1] - rh[k]) / (th[k + 1] - th[k]);
    const double d = 0.0 - th[k];
    e_at_zero = ebp_[k] + law_.c_v * (rh[k] * d + 0.5 * s * d * d);
  }
  for (auto& e : ebp_) e -= e_at_zero;
}

double MaterialLaw::density(double theta) const {
  const auto& th = law_.theta;
  const auto& rh = law_.rho;
  if (theta <= th.front()) return rh.front();
  if (theta >= th.back()) return rh.back();
  const auto it = std::upper_bound(th.begin(), th.end(), theta);
  const std::size_t k = static_cast<std::size_t>(it - th.begin()) - 1;
  const double s = (rh[k + 1] - rh[k]) / (th[k + 1] - th[k]);
  return rh[k] + s * (theta - th[k]);
}

double MaterialLaw::enthalpy(double theta) const {
  // ebp_ already carries the E(0) = 0 anchor.
  const auto& th = law_.theta;
  const auto& rh = law_.rho;
  if (theta <= th.front()) return ebp_.front() + law_.c_v * rh.front() * (theta - th.front());
  if (theta >= th.back()) return ebp_.back() + law_.c_v * rh.back() * (theta - th.back());
  const auto it = std::upper_bound(th.begin(), th.end(), theta);
  const std::size_t k = static_cast<std::size_t>(it - th.begin()) - 1;
  const double s = (rh[k + 1] - rh[k]) / (th[k + 1] - th[k]);
  const double d = theta - th[k];
  return ebp_[k] + law_.c_v * (rh[k] * d + 0.5 * s * d * d);
}

double MaterialLaw::temperature(double e) const {
  const auto& th = law_.theta;
  const auto& rh = law_.rho;
  if (e <= ebp_.front()) return th.front() + (e - ebp_.front()) / (law_.c_v * rh.front());
  if (e >= ebp_.back()) return th.back() + (e - ebp_.back()) / (law_.c_v * rh.back());
  const auto it = std::upper_bound(ebp_.begin(), ebp_.end(), e);
  const std::size_t k = static_cast<std::size_t>(it - ebp_.begin()) - 1;
  const double s = (rh[k + 1] - rh[k]) / (th[k + 1] - th[k]);
  const double q = (e - ebp_[k]) / law_.c_v;  // rho_k*d + s*d^2/2 = q
  // Stable quadratic root: the discriminant stays >= rho_{k+1}^2 > 0 on the
  // segment because rho is nonincreasing.
  const double disc = rh[k] * rh[k] + 2.0 * s * q;
  const double d = 2.0 * q / (rh[k] + std::sqrt(std::max(disc, 0.0)));
  return th[k] + d;
}

double MaterialLaw::density_of_enthalpy(double e) const { return density(temperature(e)); }

double MaterialLaw::diffusivity(double e) const {
  return law_.lambda / (law_.c_v * density_of_enthalpy(e));
}

double MaterialLaw::temperature_slope(double e) const {
  return 1.0 / (law_.c_v * density_of_enthalpy(e));
}

double MaterialLaw::kappa_min() const { return law_.lambda / (law_.c_v * rho_max_); }
double MaterialLaw::kappa_max() const { return law_.lambda / (law_.c_v * rho_min_); }
double MaterialLaw::lipschitz_bound() const { return 1.0 / (law_.c_v * rho_min_); }

}  // namespace pipeflow
