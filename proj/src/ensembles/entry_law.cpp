#include "covsv/ensembles/entry_law.hpp"

#include <cmath>

#include "covsv/core/error.hpp"

namespace covsv::ensembles {

EntryLaw EntryLaw::parse(std::string_view name) {
  if (name == "gaussian") return EntryLaw(EntryKind::gaussian);
  if (name == "two_moment") return EntryLaw(EntryKind::two_moment);
  if (name == "four_moment") return EntryLaw(EntryKind::four_moment);
  throw ConfigError("unknown entry law '" + std::string(name) + "' (expected gaussian, two_moment or four_moment)");
}

std::string EntryLaw::name() const {
  switch (kind_) {
    case EntryKind::gaussian:
      return "gaussian";
    case EntryKind::two_moment:
      return "two_moment";
    case EntryKind::four_moment:
      return "four_moment";
  }
  return "unknown";
}

std::array<double, 4> EntryLaw::moments() const {
  switch (kind_) {
    case EntryKind::gaussian:
      return {0.0, 1.0, 0.0, 3.0};
    case EntryKind::two_moment:
      return {0.0, 1.0, 0.0, 1.0};
    case EntryKind::four_moment:
      return {0.0, 1.0, 0.0, 3.0};  // 2 * (1/6) * 9
  }
  return {};
}

int EntryLaw::matched_order(const EntryLaw& other) const {
  const auto a = moments();
  const auto b = other.moments();
  int d = 0;
  while (d < 4 && a[static_cast<std::size_t>(d)] == b[static_cast<std::size_t>(d)]) ++d;
  return d;
}

double EntryLaw::draw(Rng& rng) const {
  switch (kind_) {
    case EntryKind::gaussian: {
      std::normal_distribution<double> normal;
      return normal(rng);
    }
    case EntryKind::two_moment:
      return (rng() >> 63) ? 1.0 : -1.0;
    case EntryKind::four_moment: {
      // One uniform integer in [0, 6): 0 -> -sqrt3, 1 -> +sqrt3, otherwise 0.
      std::uniform_int_distribution<int> die(0, 5);
      const int face = die(rng);
      if (face == 0) return -std::sqrt(3.0);
      if (face == 1) return std::sqrt(3.0);
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace covsv::ensembles
