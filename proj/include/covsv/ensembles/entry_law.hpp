#pragma once

#include <array>
#include <string>
#include <string_view>

#include "covsv/core/rng.hpp"

namespace covsv::ensembles {

enum class EntryKind {
  gaussian,     // N(0, 1)
  two_moment,   // Rademacher +-1
  four_moment,  // +-sqrt(3) w.p. 1/6 each, 0 w.p. 2/3
};

// Law of the unscaled entries q_ij; all kinds have mean 0 and variance 1.
class EntryLaw {
 public:
  constexpr EntryLaw() = default;
  constexpr explicit EntryLaw(EntryKind kind) : kind_(kind) {}

  // Accepts "gaussian", "two_moment", "four_moment". Throws ConfigError.
  static EntryLaw parse(std::string_view name);

  EntryKind kind() const noexcept { return kind_; }
  std::string name() const;

  // Raw moments E q, E q^2, E q^3, E q^4.
  std::array<double, 4> moments() const;

  // Largest d <= 4 such that the first d raw moments of both laws agree.
  int matched_order(const EntryLaw& other) const;

  double draw(Rng& rng) const;

  friend bool operator==(const EntryLaw&, const EntryLaw&) = default;

 private:
  EntryKind kind_ = EntryKind::gaussian;
};

}  // namespace covsv::ensembles
