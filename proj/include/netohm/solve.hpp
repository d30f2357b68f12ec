#pragma once

#include <Eigen/Dense>
#include <complex>

#include "netohm/network.hpp"

namespace netohm {

// Solve A x = b by partial-pivoting LU.  When a pivot is suspiciously small
// the smallest singular value is computed and a SingularOperatorError with
// that value is thrown if the matrix is numerically rank deficient.
Eigen::VectorXd solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const char* what);
Eigen::VectorXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                               const char* what);
Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const char* what);
Eigen::MatrixXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                               const char* what);

// Voltage u with u = f on the boundary and zero net current at every
// interior node, for edge weights w.  f follows boundary_nodes() order.
Eigen::VectorXd dirichlet_solve(const Network& net, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& f);
Eigen::VectorXcd dirichlet_solve(const Network& net, const Eigen::VectorXcd& w,
                                 const Eigen::VectorXcd& f);

// Same with an extra diagonal potential q on the interior nodes:
// (L_sigma u)_I + q .* u_I = 0, u_B = f.  q follows interior_nodes() order.
Eigen::VectorXd schrodinger_solve(const Network& net, const Eigen::VectorXd& sigma,
                                  const Eigen::VectorXd& q, const Eigen::VectorXd& f);
Eigen::VectorXcd schrodinger_solve(const Network& net, const Eigen::VectorXd& sigma,
                                   const Eigen::VectorXcd& q, const Eigen::VectorXcd& f);

}  // namespace netohm
