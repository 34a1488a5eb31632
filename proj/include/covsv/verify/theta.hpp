#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace covsv::verify {

// Test functions applied to scalar observables. Joint observables are
// compared through products of their coordinates.
enum class ThetaId {
  identity,      // x
  square,        // x^2
  clipped_cube,  // clamp(x, -c, c)^3
  bump,          // exp(-x^2 / 2)
};

inline constexpr double kThetaClip = 4.0;

std::string to_string(ThetaId id);
ThetaId parse_theta(std::string_view name);  // ConfigError on unknown names

std::vector<ThetaId> default_theta_battery();

double apply_theta(ThetaId id, double x);

// Product of the coordinates; the joint test function.
double coordinate_product(std::span<const double> x);

}  // namespace covsv::verify
