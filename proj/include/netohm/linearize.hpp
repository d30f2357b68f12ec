#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netohm/problem.hpp"

namespace netohm {

// ---------------------------------------------------------------------------
// Rank / condition diagnostics

struct RankInfo {
  int rank = 0;
  double cond = 0.0;  // sigma_max / sigma_min over all min(m,n) singular values
  Eigen::VectorXd singular_values;
};

// Numerical rank with threshold tau_rank * max(rows,cols) * eps * sigma_max.
// The condition number uses the full singular spectrum, so rank-deficient
// matrices report huge values rather than being truncated.
RankInfo rank_and_cond(const Eigen::MatrixXd& m, double tau_rank = 1.0);
RankInfo rank_and_cond(const Eigen::MatrixXcd& m, double tau_rank = 1.0);

// ---------------------------------------------------------------------------
// Linearized system assembly

struct BlockInfo {
  std::string name;
  int offset = 0;
  int size = 0;
};

struct JacobianLayout {
  std::vector<BlockInfo> rows, cols;
  int rows_total = 0, cols_total = 0;
  const BlockInfo& row(const std::string& name) const;
  const BlockInfo& col(const std::string& name) const;
};

// Unknown parameterization of the linearized system.  The real form packs
// (d_gamma, d_u0, Re d_u1, Im d_u1) as real unknowns and is what the
// Gauss-Newton solver differentiates.  The complex-pair form treats the
// omega1 state and its conjugate as independent complex unknowns
// (d_gamma', d_gamma'', d_u0, d_u1, d_u1_conj) and is only defined for the
// two-frequency variants; its rank is computed over the complex field.
enum class JacobianForm { real, complex_pair };

struct AssembledJacobian {
  JacobianForm form = JacobianForm::real;
  Eigen::MatrixXd real_matrix;
  Eigen::MatrixXcd complex_matrix;
  JacobianLayout layout;
  int rows() const { return layout.rows_total; }
  int cols() const { return layout.cols_total; }
};

struct JacobianReport {
  Variant variant = Variant::real_conductivity;
  JacobianForm form = JacobianForm::real;
  int rows = 0, cols = 0;
  Eigen::VectorXd singular_values;
  int rank = 0;
  double cond = 0.0;
  JacobianLayout layout;
  // Residual sign convention: rows are (model - data), so the right-hand
  // side of the linearized system is the measured perturbation.
};

JacobianLayout jacobian_layout(const ProblemSpec& spec, JacobianForm form);
AssembledJacobian assemble_jacobian(const ProblemSpec& spec, const States& states,
                                    JacobianForm form);
JacobianReport jacobian_report(const ProblemSpec& spec, const AssembledJacobian& jac,
                               double tau_rank = 1.0);

// Central-difference Jacobian of the stacked residual with respect to the
// real unknown vector; oracle for the assembled real form.
Eigen::MatrixXd fd_jacobian(const ProblemSpec& spec, const States& states, double h);

// ---------------------------------------------------------------------------
// Local-uniqueness certificates

// +1 / -1 valued field, -1 exactly on the numerical support of the
// reference state: grad u0 per edge (conductivity variants) or u0 on the
// interior nodes (Schrodinger variants).
Eigen::VectorXd sign_field(const Network& net, Variant variant, const ExperimentState& state,
                           double tol = kSupportTol);

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  // Quantitative margin: smallest relevant singular value (invertibility and
  // rank checks); unused for support-cover checks.
  double margin = 0.0;
  std::vector<double> per_experiment;  // per-j margins where applicable
  std::vector<int> uncovered;          // indices missed by a support cover
  int required_rank = -1;
  int achieved_rank = -1;
};

struct Certificate {
  Variant variant = Variant::real_conductivity;
  bool pass = false;
  std::vector<AssumptionCheck> assumptions;
};

// The know-the-answer matrices whose stacked real part must have full rank
// for the two-frequency certificates.  Size |E| x |E| (conductivity) or
// |I| x |I| (Schrodinger), one per experiment.  Every conductivity matrix A
// annihilates the complex admittance: A (sigma + j*omega1*sigma_im) = 0.
std::vector<Eigen::MatrixXcd> build_A_matrices(const ProblemSpec& spec, const States& states);
std::vector<Eigen::MatrixXcd> build_B_matrices(const ProblemSpec& spec, const States& states);

Certificate certify_real_conductivity(const ProblemSpec& spec, const States& states);
Certificate certify_two_freq_conductivity(const ProblemSpec& spec, const States& states);
Certificate certify_real_schrodinger(const ProblemSpec& spec, const States& states);
Certificate certify_two_freq_schrodinger(const ProblemSpec& spec, const States& states);

// Dispatch on spec.variant.
Certificate certify(const ProblemSpec& spec, const States& states);

}  // namespace netohm
