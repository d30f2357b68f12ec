#include "netohm/solve.hpp"

#include <Eigen/SVD>
#include <limits>
#include <string>

namespace netohm {

namespace {

template <typename Scalar, typename Rhs>
Rhs solve_checked_impl(const Eigen::MatrixX<Scalar>& a, const Rhs& b, const char* what) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw ValidationError(std::string(what) + ": shape mismatch in linear solve");

  Eigen::PartialPivLU<Eigen::MatrixX<Scalar>> lu(a);
  const auto diag = lu.matrixLU().diagonal().cwiseAbs().eval();
  const double dmax = diag.maxCoeff();
  const double dmin = diag.minCoeff();

  // Cheap pivot screen; fall back to an SVD verdict only when it trips.
  if (dmax == 0.0 || dmin <= 1e-10 * dmax) {
    Eigen::JacobiSVD<Eigen::MatrixX<Scalar>> svd(a);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double tol = 10.0 * a.rows() * std::numeric_limits<double>::epsilon() * smax;
    if (smax == 0.0 || smin <= tol)
      throw SingularOperatorError(std::string(what) + ": singular operator (smallest singular value " +
                                      std::to_string(smin) + ")",
                                  smin);
  }
  return lu.solve(b);
}

template <typename WScalar, typename FScalar>
auto dirichlet_impl(const Network& net, const Eigen::VectorX<WScalar>& w,
                    const Eigen::VectorX<FScalar>& f) {
  using Scalar = decltype(WScalar() * FScalar());
  if (f.size() != net.boundary_count())
    throw ValidationError("dirichlet_solve: boundary data has wrong length");

  const Eigen::MatrixX<WScalar> lap = laplacian<WScalar>(net, w);
  const auto& bi = net.boundary_nodes();
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixX<Scalar> lii = lap(ii, ii).template cast<Scalar>();
  const Eigen::MatrixX<Scalar> lib = lap(ii, bi).template cast<Scalar>();

  const Eigen::VectorX<Scalar> rhs = -(lib * f.template cast<Scalar>());
  const Eigen::VectorX<Scalar> ui = solve_checked(lii, rhs, "dirichlet_solve");

  Eigen::VectorX<Scalar> u(net.vertex_count());
  for (int k = 0; k < net.boundary_count(); ++k) u[bi[k]] = f[k];
  for (int k = 0; k < net.interior_count(); ++k) u[ii[k]] = ui[k];
  return u;
}

template <typename QScalar>
auto schrodinger_impl(const Network& net, const Eigen::VectorXd& sigma,
                      const Eigen::VectorX<QScalar>& q, const Eigen::VectorX<QScalar>& f) {
  if (f.size() != net.boundary_count())
    throw ValidationError("schrodinger_solve: boundary data has wrong length");
  if (q.size() != net.interior_count())
    throw ValidationError("schrodinger_solve: potential has wrong length");

  const Eigen::MatrixXd lap = laplacian<double>(net, sigma);
  const auto& bi = net.boundary_nodes();
  const auto& ii = net.interior_nodes();
  Eigen::MatrixX<QScalar> op = lap(ii, ii).template cast<QScalar>();
  op += q.asDiagonal();
  const Eigen::VectorX<QScalar> rhs = -(lap(ii, bi).template cast<QScalar>() * f);
  const Eigen::VectorX<QScalar> ui = solve_checked(op, rhs, "schrodinger_solve");

  Eigen::VectorX<QScalar> u(net.vertex_count());
  for (int k = 0; k < net.boundary_count(); ++k) u[bi[k]] = f[k];
  for (int k = 0; k < net.interior_count(); ++k) u[ii[k]] = ui[k];
  return u;
}

}  // namespace

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const char* what) {
  return solve_checked_impl<double>(a, b, what);
}

Eigen::VectorXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                               const char* what) {
  return solve_checked_impl<std::complex<double>>(a, b, what);
}

Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const char* what) {
  return solve_checked_impl<double>(a, b, what);
}

Eigen::MatrixXcd solve_checked(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                               const char* what) {
  return solve_checked_impl<std::complex<double>>(a, b, what);
}

Eigen::VectorXd dirichlet_solve(const Network& net, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& f) {
  return dirichlet_impl(net, w, f);
}

Eigen::VectorXcd dirichlet_solve(const Network& net, const Eigen::VectorXcd& w,
                                 const Eigen::VectorXcd& f) {
  return dirichlet_impl(net, w, f);
}

Eigen::VectorXd schrodinger_solve(const Network& net, const Eigen::VectorXd& sigma,
                                  const Eigen::VectorXd& q, const Eigen::VectorXd& f) {
  return schrodinger_impl(net, sigma, q, f);
}

Eigen::VectorXcd schrodinger_solve(const Network& net, const Eigen::VectorXd& sigma,
                                   const Eigen::VectorXcd& q, const Eigen::VectorXcd& f) {
  return schrodinger_impl(net, sigma, q, f);
}

}  // namespace netohm
