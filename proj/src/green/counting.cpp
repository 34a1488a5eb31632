#include "covsv/green/counting.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "covsv/core/error.hpp"

namespace covsv::green {
namespace {

void check_window(double E1, double E2, double eta) {
  if (!(E1 < E2)) throw DomainError("counting window needs E1 < E2");
  if (!(eta > 0.0)) throw DomainError("smoothing scale eta must be positive");
}

Eigen::Index zero_modes(const Eigen::VectorXd& lambdas, int N) {
  if (lambdas.size() > N) throw DomainError("more eigenvalues than N");
  return N - lambdas.size();
}

}  // namespace

double smoothed_counting(const Eigen::VectorXd& lambdas, int N, double E1, double E2, double eta) {
  check_window(E1, E2, eta);
  auto term = [&](double lambda) { return std::atan((E2 - lambda) / eta) - std::atan((E1 - lambda) / eta); };
  double acc = 0.0;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) acc += term(lambdas(j));
  acc += static_cast<double>(zero_modes(lambdas, N)) * term(0.0);
  return acc / std::numbers::pi;
}

double smoothed_counting_quadrature(const Eigen::VectorXd& lambdas, int N, double E1, double E2, double eta) {
  check_window(E1, E2, eta);
  const double zeros = static_cast<double>(zero_modes(lambdas, N));
  // N Im m2(w + i eta) = sum_j eta / ((lambda_j - w)^2 + eta^2)
  auto integrand = [&](double w) {
    double acc = zeros * eta / (w * w + eta * eta);
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
      const double d = lambdas(j) - w;
      acc += eta / (d * d + eta * eta);
    }
    return acc;
  };
  // Split at every eigenvalue inside the window so each panel sees at most
  // one Lorentzian peak at its end.
  std::vector<double> cuts{E1};
  std::vector<double> inside;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    if (lambdas(j) > E1 && lambdas(j) < E2) inside.push_back(lambdas(j));
  if (zeros > 0 && E1 < 0.0 && E2 > 0.0) inside.push_back(0.0);
  std::sort(inside.begin(), inside.end());
  cuts.insert(cuts.end(), inside.begin(), inside.end());
  cuts.push_back(E2);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    double error = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 30, 1e-9,
                                                                           &error);
  }
  return total / std::numbers::pi;
}

int sharp_counting(const Eigen::VectorXd& lambdas, int N, double E1, double E2) {
  if (!(E1 <= E2)) throw DomainError("counting window needs E1 <= E2");
  int count = 0;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    if (lambdas(j) >= E1 && lambdas(j) <= E2) ++count;
  if (E1 <= 0.0 && E2 >= 0.0) count += static_cast<int>(zero_modes(lambdas, N));
  return count;
}

}  // namespace covsv::green
