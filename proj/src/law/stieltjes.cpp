#include "covsv/law/stieltjes.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "covsv/core/error.hpp"

namespace covsv::law {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_pole(double x, const PopulationSpectrum& spec) {
  if (x == 0.0) throw DomainError("f is singular at x = 0");
  for (double s : spec.sigma()) {
    const double pole = -1.0 / s;
    if (std::abs(x - pole) <= 4.0 * kEps * std::abs(pole)) {
      std::ostringstream os;
      os << "f is singular at x = -1/sigma = " << pole << " (sigma = " << s << ")";
      throw DomainError(os.str());
    }
  }
}

// Magnitude of the terms of f, used to express residual tolerances relative
// to the cancellation that happens when they are summed.
double term_scale(cplx m, const PopulationSpectrum& spec) {
  double s = 1.0 / std::abs(m);
  const double inv_r = 1.0 / spec.r();
  for (std::size_t i = 0; i < spec.size(); ++i) s += inv_r * spec.weights()[i] / std::abs(m + 1.0 / spec.sigma()[i]);
  return s;
}

// One fixed-point sweep of 1/m = -z + (1/r) sum w sigma / (1 + m sigma).
cplx fixed_point_map(cplx m, cplx z, const PopulationSpectrum& spec) {
  cplx acc = -z;
  const double inv_r = 1.0 / spec.r();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double s = spec.sigma()[i];
    acc += inv_r * spec.weights()[i] * s / (1.0 + m * s);
  }
  return 1.0 / acc;
}

struct NewtonOutcome {
  cplx m;
  double residual;
  bool converged;
};

NewtonOutcome newton(cplx z, cplx m, const PopulationSpectrum& spec, const SolverOptions& opt, bool keep_upper) {
  double res = std::abs(eval_f(m, spec) - z);
  for (int it = 0; it < opt.max_iterations; ++it) {
    // Stop at the rounding floor only; opt.tolerance is the acceptance level
    // once the iteration stalls. Near a double root a residual of 1e-13 can
    // still leave m off by sqrt(1e-13 / f''), so we keep iterating.
    if (res <= 16.0 * kEps * term_scale(m, spec)) return {m, res, true};
    const cplx F = eval_f(m, spec) - z;
    const cplx dF = eval_f_prime(m, spec);
    if (dF == cplx(0.0)) return {m, res, false};
    const cplx step = F / dF;
    double t = 1.0;
    bool accepted = false;
    for (int back = 0; back < 40; ++back, t *= 0.5) {
      const cplx trial = m - t * step;
      if (keep_upper && !(trial.imag() > 0.0)) continue;
      if (trial == cplx(0.0)) continue;
      const double trial_res = std::abs(eval_f(trial, spec) - z);
      if (trial_res < res || back == 39) {
        m = trial;
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) return {m, res, false};
    if (std::abs(t * step) <= 4.0 * kEps * std::abs(m)) {
      const double tol2 = std::max(opt.tolerance, 64.0 * kEps * term_scale(m, spec));
      return {m, res, res <= tol2};
    }
  }
  const double tol = std::max(opt.tolerance, 64.0 * kEps * term_scale(m, spec));
  return {m, res, res <= tol};
}

NewtonOutcome first_rung(cplx z, const PopulationSpectrum& spec, const SolverOptions& opt) {
  cplx m = -1.0 / z;
  for (int it = 0; it < opt.fixed_point_iterations; ++it) {
    const cplx next = (1.0 - opt.damping) * m + opt.damping * fixed_point_map(m, z, spec);
    const bool done = std::abs(next - m) <= 1e-10 * std::abs(m);
    m = next;
    if (done) break;
  }
  if (!(m.imag() > 0.0)) m = cplx(m.real(), std::abs(m.imag()) + 1e-12);
  return newton(z, m, spec, opt, true);
}

// Moves the solution from Im z = eta_from to eta_to along fixed Re z,
// subdividing the step when Newton fails to stay on the physical branch.
NewtonOutcome descend(double E, double eta_from, double eta_to, cplx m, const PopulationSpectrum& spec,
                      const SolverOptions& opt, int depth) {
  NewtonOutcome out = newton(cplx(E, eta_to), m, spec, opt, true);
  if (out.converged) return out;
  if (depth > 40) return out;
  const double mid = std::sqrt(eta_from * eta_to);
  NewtonOutcome half = descend(E, eta_from, mid, m, spec, opt, depth + 1);
  if (!half.converged) return half;
  return descend(E, mid, eta_to, half.m, spec, opt, depth + 1);
}

[[noreturn]] void fail(cplx z, double residual) {
  std::ostringstream os;
  os << "solve_m did not converge at z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag())
     << "i (last residual " << residual << ")";
  throw SolverError(os.str(), residual);
}

}  // namespace

double eval_f(double x, const PopulationSpectrum& spec) {
  check_pole(x, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) acc += spec.weights()[i] / (x + 1.0 / spec.sigma()[i]);
  return -1.0 / x + acc / spec.r();
}

double eval_f_prime(double x, const PopulationSpectrum& spec) {
  check_pole(x, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double d = x + 1.0 / spec.sigma()[i];
    acc += spec.weights()[i] / (d * d);
  }
  return 1.0 / (x * x) - acc / spec.r();
}

double eval_f_second(double x, const PopulationSpectrum& spec) {
  check_pole(x, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double d = x + 1.0 / spec.sigma()[i];
    acc += spec.weights()[i] / (d * d * d);
  }
  return -2.0 / (x * x * x) + 2.0 * acc / spec.r();
}

cplx eval_f(cplx m, const PopulationSpectrum& spec) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) acc += spec.weights()[i] / (m + 1.0 / spec.sigma()[i]);
  return -1.0 / m + acc / spec.r();
}

cplx eval_f_prime(cplx m, const PopulationSpectrum& spec) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const cplx d = m + 1.0 / spec.sigma()[i];
    acc += spec.weights()[i] / (d * d);
  }
  return 1.0 / (m * m) - acc / spec.r();
}

StieltjesValue solve_m(cplx z, const PopulationSpectrum& spec, const SolverOptions& opt) {
  if (z.imag() < 0.0) throw DomainError("solve_m requires Im z >= 0");
  const double E = z.real();
  const double target = z.imag() > 0.0 ? z.imag() : opt.real_axis_eta * std::max(1.0, std::abs(E));
  const double top = std::max(opt.ladder_start, target);

  NewtonOutcome cur = first_rung(cplx(E, top), spec, opt);
  if (!cur.converged) fail(cplx(E, top), cur.residual);
  double eta = top;
  while (eta > target) {
    const double next = std::max(target, eta * opt.ladder_factor);
    cur = descend(E, eta, next, cur.m, spec, opt, 0);
    if (!cur.converged) fail(cplx(E, next), cur.residual);
    eta = next;
  }

  StieltjesValue out{z, cur.m, cur.residual, false};
  if (z.imag() == 0.0) {
    NewtonOutcome polished = newton(z, cur.m, spec, opt, false);
    // Real z: roots come in conjugate pairs, so the upper one is conj of a
    // lower one Newton may have drifted to.
    cplx m = polished.m;
    if (m.imag() < 0.0) m = std::conj(m);
    out.m = m;
    out.residual = std::abs(eval_f(m, spec) - z);
    const double scale = term_scale(m, spec);
    out.precision_warning = std::abs(eval_f_prime(m, spec)) * std::abs(m) < 1e-6 * scale;
  }
  return out;
}

StieltjesValue polish_m(cplx z, cplx seed, const PopulationSpectrum& spec, const SolverOptions& opt) {
  NewtonOutcome r = newton(z, seed, spec, opt, z.imag() > 0.0);
  if (!r.converged) fail(z, r.residual);
  cplx m = r.m;
  if (m.imag() < 0.0) m = std::conj(m);
  return {z, m, r.residual, false};
}

}  // namespace covsv::law
