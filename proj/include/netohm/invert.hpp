#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "netohm/problem.hpp"

namespace netohm {

// ---------------------------------------------------------------------------
// Real unknown vector
//
// x packs the parameter block(s) followed by the per-experiment states, in
// the same order as the real-form Jacobian columns:
//   real conductivity:   [sigma | u(1) | ... | u(N)]
//   two-freq cond.:      [sigma' | sigma'' | u0(1) Re u1(1) Im u1(1) | ...]
//   real Schrodinger:    [q | u(1) | ... | u(N)]
//   two-freq Schrod.:    [q' | q'' | u0(1) Re u1(1) Im u1(1) | ...]

int unknown_count(const ProblemSpec& spec);
Eigen::VectorXd pack_unknowns(const ProblemSpec& spec, const States& states);
// Returns a copy of spec with parameter blocks taken from x; fills states.
ProblemSpec unpack_unknowns(const ProblemSpec& spec, const Eigen::VectorXd& x, States* states);

// Zero-filled data with the shape forward_dataset would produce for spec.
PowerData zero_data(const ProblemSpec& spec);

// Stacked residual (model - data): per experiment the functional rows, then
// the boundary rows, then the interior balance rows (per frequency for the
// two-frequency variants).  Its Jacobian is the assembled real form.
Eigen::VectorXd residual(const ProblemSpec& spec, const Eigen::VectorXd& x,
                         const PowerData& data);

// ---------------------------------------------------------------------------
// Damped Gauss-Newton with Armijo backtracking

struct GNConfig {
  // Damping for the normal equations; negative means 1e-2 * sigma_max(DR0).
  double alpha = 1e-8;
  int max_iterations = 100;
  // Stop when ||DR^T R|| <= gradient_tol_rel * (1 + ||R0||).
  double gradient_tol_rel = 1e-9;
  double armijo_c = 1e-4;
  double armijo_rho = 0.5;
  int max_backtracks = 30;
  // Optimize log(sigma) instead of sigma (real conductivity only); keeps
  // iterates positive but is not part of the reference formulation.
  bool log_conductivity = false;

  void validate() const;
};

enum class GNStop { gradient_tol, max_iterations, line_search_failure };
std::string to_string(GNStop s);

struct GNIteration {
  double merit = 0;      // 1/2 ||R||^2 after the step
  double grad_norm = 0;  // ||DR^T R|| after the step
  double step_norm = 0;
  int backtracks = 0;
};

struct GNResult {
  Eigen::VectorXd gamma;  // recovered parameter block(s), concatenated
  States states;
  std::vector<GNIteration> history;
  GNStop stop = GNStop::max_iterations;
  int iterations = 0;
  double initial_merit = 0;
  double final_merit = 0;
  double final_grad_norm = 0;
  double rel_param_error = -1;  // vs truth when provided, else -1
};

struct ArmijoResult {
  bool accepted = false;
  double t = 0;
  int backtracks = 0;
  double merit = 0;
};

// Largest t in {1, rho, rho^2, ...} with
//   merit(t) <= merit(0) - c * t * |directional_derivative|,
// requiring directional_derivative < 0 (descent).  merit_along(t) evaluates
// the merit at x + t * step.
ArmijoResult armijo_search(const std::function<double(double)>& merit_along, double merit0,
                           double directional_derivative, const GNConfig& cfg);

// spec provides the network, boundary conditions and (Schrodinger) the known
// conductivity; its parameter block is ignored in favor of the initial-guess
// policy (gamma0 = 1 for conductivity, mid-range for potentials, states from
// forward solves at gamma0).  truth_gamma, when given, is only used to fill
// rel_param_error.
GNResult gauss_newton(const ProblemSpec& spec, const PowerData& data, const GNConfig& cfg,
                      const Eigen::VectorXd* truth_gamma = nullptr);

// H + level * max|H| * Z with Z i.i.d. standard normal; the maximum is taken
// over all blocks and experiments.
PowerData add_noise(const PowerData& data, double level, std::uint64_t seed);

// Parameter block(s) of spec as one vector (sigma, [sigma;sigma_im], q, ...).
Eigen::VectorXd gamma_of(const ProblemSpec& spec);

}  // namespace netohm
