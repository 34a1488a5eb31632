#include "covsv/verify/theta.hpp"

#include <algorithm>
#include <cmath>

#include "covsv/core/error.hpp"

namespace covsv::verify {

std::string to_string(ThetaId id) {
  switch (id) {
    case ThetaId::identity: return "identity";
    case ThetaId::square: return "square";
    case ThetaId::clipped_cube: return "clipped_cube";
    case ThetaId::bump: return "bump";
  }
  return "?";
}

ThetaId parse_theta(std::string_view name) {
  for (auto id : {ThetaId::identity, ThetaId::square, ThetaId::clipped_cube, ThetaId::bump})
    if (name == to_string(id)) return id;
  throw ConfigError("unknown test function '" + std::string(name) + "'");
}

std::vector<ThetaId> default_theta_battery() {
  return {ThetaId::identity, ThetaId::square, ThetaId::clipped_cube, ThetaId::bump};
}

double apply_theta(ThetaId id, double x) {
  switch (id) {
    case ThetaId::identity: return x;
    case ThetaId::square: return x * x;
    case ThetaId::clipped_cube: {
      const double c = std::clamp(x, -kThetaClip, kThetaClip);
      return c * c * c;
    }
    case ThetaId::bump: return std::exp(-0.5 * x * x);
  }
  return x;
}

double coordinate_product(std::span<const double> x) {
  double p = 1.0;
  for (double v : x) p *= v;
  return p;
}

}  // namespace covsv::verify
