#pragma once

#include <complex>

#include "covsv/law/population_spectrum.hpp"

namespace covsv::law {

using cplx = std::complex<double>;

// f(x) = -1/x + (1/r) sum_i w_i / (x + 1/sigma_i). The Stieltjes transform m(z)
// of the deformed Marchenko-Pastur law is the solution of f(m) = z in the
// upper half plane. Throws DomainError at x = 0 or x = -1/sigma_i.
double eval_f(double x, const PopulationSpectrum& spec);
double eval_f_prime(double x, const PopulationSpectrum& spec);
double eval_f_second(double x, const PopulationSpectrum& spec);

cplx eval_f(cplx m, const PopulationSpectrum& spec);
cplx eval_f_prime(cplx m, const PopulationSpectrum& spec);

struct SolverOptions {
  double tolerance = 1e-13;     // residual |f(m) - z| accepted once Newton stalls
  int max_iterations = 100;     // Newton iterations per ladder rung
  int fixed_point_iterations = 400;
  double damping = 0.5;         // fixed-point relaxation
  double ladder_start = 1.0;    // eta at which the continuation begins
  double ladder_factor = 0.1;   // geometric eta step between rungs
  double real_axis_eta = 1e-10; // last rung before the eta = 0 polish
};

struct StieltjesValue {
  cplx z;
  cplx m;
  double residual = 0.0;
  // Set for real z where f'(m) is nearly zero, i.e. z sits on (or within
  // rounding of) a spectral edge and m is only determined to sqrt(eps).
  bool precision_warning = false;
};

// Solves 1/m = -z + (1/r) int x/(1+mx) pi(dx) with Im m >= 0.
//
// Im z > 0: continuation in eta from ladder_start down to Im z, seeding each
// rung with the previous solution (damped fixed point on the first rung,
// Newton on the rest). Real z: the ladder is carried to real_axis_eta and the
// result polished at eta = 0; callers are responsible for z not lying on an
// edge (otherwise precision_warning is raised).
// Throws SolverError if a rung fails after repeated refinement.
StieltjesValue solve_m(cplx z, const PopulationSpectrum& spec, const SolverOptions& options = {});

// Newton polish of f(m) = z from `seed` without continuation. Used when a
// nearby solution is already known (e.g. sweeping E along a grid).
StieltjesValue polish_m(cplx z, cplx seed, const PopulationSpectrum& spec, const SolverOptions& options = {});

}  // namespace covsv::law
