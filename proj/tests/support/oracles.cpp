#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

double c1(double r0) { return (r0 * r0 - 1.0) / (4.0 * std::log(r0)); }

double phi(double r, double r0) { return (1.0 - r * r) / 4.0 + c1(r0) * std::log(r); }

double dphi(double r, double r0) { return -r / 2.0 + c1(r0) / r; }

double phi_argmax(double r0) { return std::sqrt(2.0 * c1(r0)); }

double grad_phi_sq(double r0) {
  const double c = c1(r0);
  return 2.0 * std::numbers::pi *
         ((1.0 - std::pow(r0, 4)) / 16.0 - c * (1.0 - r0 * r0) / 2.0 - c * c * std::log(r0));
}

double radial_integral(const std::function<double(double)>& g, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  const double v = gauss_kronrod<double, 61>::integrate([&](double r) { return g(r) * r; }, lo, hi,
                                                         15, 1e-15);
  return 2.0 * std::numbers::pi * v;
}

double grad_phi_sq_quadrature(double r0) {
  return radial_integral([r0](double r) { return dphi(r, r0) * dphi(r, r0); }, r0, 1.0);
}

double energy_xy(double r0) {
  const double num = 2.0 * std::numbers::pi * (1.0 - r0 * r0);
  return num / (2.0 * std::sqrt(grad_phi_sq(r0)));
}

double lambda_xy(double r0) {
  const double num = 2.0 * std::numbers::pi * (1.0 - r0 * r0);
  return -std::sqrt(num / (2.0 * grad_phi_sq(r0)));
}

}  // namespace oracle
