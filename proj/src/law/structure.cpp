#include "covsv/law/structure.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "covsv/core/error.hpp"
#include "covsv/law/stieltjes.hpp"
#include "density_kernel.hpp"

namespace covsv::law {
namespace {

struct Interval {
  double lo;
  double hi;
  int index;
};

std::string describe(const Interval& iv) {
  std::ostringstream os;
  os << "I_" << iv.index << " = (" << iv.lo << ", " << iv.hi << ")";
  return os.str();
}

double refine_root(const PopulationSpectrum& spec, double a, double b, double fa, double fb, const Interval& iv) {
  auto fp = [&](double x) { return eval_f_prime(x, spec); };
  std::uintmax_t max_iter = 200;
  try {
    auto [l, r] = boost::math::tools::toms748_solve(fp, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50),
                                                    max_iter);
    return 0.5 * (l + r);
  } catch (const std::exception& e) {
    throw StructureError("root refinement failed on " + describe(iv) + ": " + e.what());
  }
}

// Roots of f' in a bounded interval between two poles (or a pole and 0).
std::vector<CriticalPoint> scan_interval(const PopulationSpectrum& spec, const Interval& iv,
                                         const StructureOptions& opt) {
  const int n = std::max(8, opt.probes);
  const double c = 0.5 * (iv.lo + iv.hi);
  const double h = 0.5 * (iv.hi - iv.lo);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) xs[static_cast<std::size_t>(j)] = c - h * std::cos(std::numbers::pi * (j + 0.5) / n);
  std::vector<double> fs(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) fs[j] = eval_f_prime(xs[j], spec);

  std::vector<double> roots;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
    if (fs[j] == 0.0) {
      roots.push_back(xs[j]);
    } else if ((fs[j] < 0.0) != (fs[j + 1] < 0.0) && fs[j + 1] != 0.0) {
      roots.push_back(refine_root(spec, xs[j], xs[j + 1], fs[j], fs[j + 1], iv));
    }
  }

  // A positive hump narrower than the probe spacing is invisible to the sign
  // scan; maximise f' around every local probe maximum to catch it.
  if (roots.empty() && iv.index >= 2) {
    double best_x = 0.0;
    double best_f = -std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 1; j + 1 < xs.size(); ++j) {
      if (fs[j] >= fs[j - 1] && fs[j] >= fs[j + 1]) {
        auto neg = [&](double x) { return -eval_f_prime(x, spec); };
        auto [x, v] = boost::math::tools::brent_find_minima(neg, xs[j - 1], xs[j + 1], 52);
        if (-v > best_f) {
          best_f = -v;
          best_x = x;
          best_j = j;
        }
      }
    }
    if (best_f > 0.0) {
      roots.push_back(refine_root(spec, xs[best_j - 1], best_x, fs[best_j - 1], best_f, iv));
      roots.push_back(refine_root(spec, best_x, xs[best_j + 1], best_f, fs[best_j + 1], iv));
    } else if (best_f == 0.0) {
      roots.push_back(best_x);
      roots.push_back(best_x);
    }
  }

  std::sort(roots.begin(), roots.end(), std::greater<>());
  std::vector<CriticalPoint> out;
  for (std::size_t j = 0; j < roots.size(); ++j) {
    if (j + 1 < roots.size() && roots[j] - roots[j + 1] < opt.degenerate_gap) {
      const double x = 0.5 * (roots[j] + roots[j + 1]);
      out.push_back({x, false, true, iv.index});
      out.push_back({x, false, true, iv.index});
      ++j;
    } else {
      out.push_back({roots[j], false, false, iv.index});
    }
  }
  return out;
}

// The I_0 critical point. In u = 1/x, x^2 f'(x) = 1 - (1/r) sum w/(1 + u/sigma)^2
// is strictly increasing on (-sigma_min, inf), so the root is unique and is
// bracketed by the sign of 1 - 1/r at u = 0 (x = infinity).
CriticalPoint outer_critical_point(const PopulationSpectrum& spec) {
  if (spec.N() == spec.M()) return {std::numeric_limits<double>::infinity(), true, false, 0};
  const double inv_r = 1.0 / spec.r();
  auto h = [&](double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double d = 1.0 + u / spec.sigma()[i];
      acc += spec.weights()[i] / (d * d);
    }
    return 1.0 - inv_r * acc;
  };
  double a;
  double b;
  const double smin = spec.sigma().back();
  if (spec.r() > 1.0) {
    b = 0.0;
    double t = 0.5;
    while (!(h(-smin * (1.0 - t)) < 0.0)) {
      t *= 0.5;
      if (t < 1e-300) throw StructureError("could not bracket the I_0 critical point");
    }
    a = -smin * (1.0 - t);
  } else {
    a = 0.0;
    b = 1.0;
    while (h(b) <= 0.0) b *= 2.0;
  }
  std::uintmax_t max_iter = 200;
  auto [l, r] = boost::math::tools::toms748_solve(h, a, b, boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double u = 0.5 * (l + r);
  return {1.0 / u, false, false, 0};
}

}  // namespace

int SpectrumStructure::offset(int k) const {
  int s = 0;
  for (int t = 1; t < k; ++t) s += bulk_count(t);
  return s;
}

int SpectrumStructure::bulk_of(double E) const {
  for (std::size_t k = 0; k < bulk_intervals.size(); ++k)
    if (E >= bulk_intervals[k].first && E <= bulk_intervals[k].second) return static_cast<int>(k) + 1;
  return 0;
}

SpectrumStructure find_spectrum_structure(const PopulationSpectrum& spec, const StructureOptions& opt) {
  SpectrumStructure s;
  s.N = spec.N();
  s.M = spec.M();
  const std::size_t n = spec.size();
  s.interval_counts.assign(n + 1, 0);

  std::vector<CriticalPoint> inner;
  for (std::size_t i = 1; i <= n; ++i) {
    const double lo = -1.0 / spec.sigma()[i - 1];
    const double hi = i == 1 ? 0.0 : -1.0 / spec.sigma()[i - 2];
    Interval iv{lo, hi, static_cast<int>(i)};
    auto pts = scan_interval(spec, iv, opt);
    s.interval_counts[i] = static_cast<int>(pts.size());
    if (i == 1 && pts.size() != 1)
      throw StructureError("expected exactly one critical point on " + describe(iv) + ", found " +
                           std::to_string(pts.size()));
    if (i >= 2 && pts.size() != 0 && pts.size() != 2)
      throw StructureError("expected 0 or 2 critical points on " + describe(iv) + ", found " +
                           std::to_string(pts.size()));
    inner.insert(inner.end(), pts.begin(), pts.end());
  }
  std::sort(inner.begin(), inner.end(), [](const auto& a, const auto& b) { return a.x > b.x; });
  s.critical_points = inner;
  s.critical_points.push_back(outer_critical_point(spec));
  s.interval_counts[0] = 1;

  for (const auto& cp : s.critical_points) {
    if (cp.at_infinity) {
      s.edges.push_back(0.0);
      s.curvatures.emplace_back(std::nullopt);
    } else {
      s.edges.push_back(eval_f(cp.x, spec));
      s.curvatures.emplace_back(std::cbrt(std::abs(eval_f_second(cp.x, spec)) / 2.0));
    }
  }
  for (std::size_t k = 1; k < s.edges.size(); ++k) {
    if (s.edges[k] > s.edges[k - 1] + 1e-9)
      throw StructureError("edges are not ordered: a_" + std::to_string(k) + " < a_" + std::to_string(k + 1));
  }
  // A hard edge at 0 may come out as -1e-17 from rounding.
  for (double& a : s.edges) a = std::max(a, 0.0);

  s.p = static_cast<int>(s.edges.size() / 2);
  s.zero_atom_mass = std::max(0.0, 1.0 - 1.0 / spec.r());
  for (int k = 1; k <= s.p; ++k) {
    const double hi = s.edges[static_cast<std::size_t>(2 * k - 2)];
    const double lo = s.edges[static_cast<std::size_t>(2 * k - 1)];
    s.bulk_intervals.emplace_back(lo, hi);
    const double mass = hi > lo ? detail::bulk_integral(spec, lo, hi, 0.0, std::numbers::pi, opt.mass_tolerance) : 0.0;
    s.bulk_masses.push_back(mass);
    s.bulk_counts.push_back(static_cast<int>(std::lround(spec.N() * mass)));
  }
  return s;
}

}  // namespace covsv::law
