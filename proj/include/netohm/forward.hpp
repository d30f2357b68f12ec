#pragma once

#include <Eigen/Dense>

#include "netohm/problem.hpp"

namespace netohm {

// Per-edge dissipated power sigma_re .* |grad u|^2 (always real).
Eigen::VectorXd power_conductivity(const Network& net, const Eigen::VectorXd& sigma_re,
                                   const Eigen::VectorXd& u);
Eigen::VectorXd power_conductivity(const Network& net, const Eigen::VectorXd& sigma_re,
                                   const Eigen::VectorXcd& u);

// Per-interior-node dissipated power q_re .* |u_I|^2.  Negative q_re entries
// simply produce negative entries.
Eigen::VectorXd power_schrodinger(const Network& net, const Eigen::VectorXd& q_re,
                                  const Eigen::VectorXd& u);
Eigen::VectorXd power_schrodinger(const Network& net, const Eigen::VectorXd& q_re,
                                  const Eigen::VectorXcd& u);

// Solve every experiment's state equation(s) and evaluate the variant's
// internal functional.  States are returned alongside the data; downstream
// linearization must reuse them rather than re-solving.
ForwardResult forward_dataset(const ProblemSpec& spec);

}  // namespace netohm
