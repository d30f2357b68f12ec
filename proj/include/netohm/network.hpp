#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "netohm/errors.hpp"

namespace netohm {

// Relative threshold below which a field entry counts as zero (support,
// pseudoinverse, sign fields).
inline constexpr double kSupportTol = 1e-12;

struct Edge {
  int tail = 0;
  int head = 0;
};

// An undirected graph with a fixed orientation per edge and a partition of
// the vertices into boundary nodes (voltages imposed) and interior nodes
// (net current vanishes).  Immutable after construction; all accessors are
// const and the object is safe to share across threads.
//
// Vertices are indexed 0..vertex_count()-1 internally.  External ids (used
// by the JSON format and reports) default to 1..n.
class Network {
 public:
  Network(int vertex_count, std::vector<bool> boundary_flags, std::vector<Edge> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int boundary_count() const { return static_cast<int>(boundary_.size()); }
  int interior_count() const { return static_cast<int>(interior_.size()); }

  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool is_boundary(int v) const { return boundary_flag_[v]; }

  // Sorted internal indices.  Boundary data vectors follow the order of
  // boundary_nodes(); interior data vectors the order of interior_nodes().
  const std::vector<int>& boundary_nodes() const { return boundary_; }
  const std::vector<int>& interior_nodes() const { return interior_; }

  // Signed incidence matrix D, |E| x |V|: D(e, tail) = +1, D(e, head) = -1.
  // The discrete gradient is u -> D u.
  const Eigen::MatrixXd& incidence() const { return incidence_; }

  // True when an edge has both endpoints interior.
  bool edge_is_interior(int e) const {
    return !boundary_flag_[edges_[e].tail] && !boundary_flag_[edges_[e].head];
  }

  bool has_coords() const { return !coord_x_.empty(); }
  double x(int v) const { return coord_x_[v]; }
  double y(int v) const { return coord_y_[v]; }
  void set_coords(std::vector<double> x, std::vector<double> y);

  const std::vector<std::int64_t>& node_ids() const { return node_ids_; }
  void set_node_ids(std::vector<std::int64_t> ids);

  // Restriction of a full vertex vector to the boundary / interior order.
  template <typename Derived>
  auto boundary_values(const Eigen::MatrixBase<Derived>& u) const {
    return u(boundary_, Eigen::all).eval();
  }
  template <typename Derived>
  auto interior_values(const Eigen::MatrixBase<Derived>& u) const {
    return u(interior_, Eigen::all).eval();
  }

 private:
  int vertex_count_ = 0;
  std::vector<bool> boundary_flag_;
  std::vector<Edge> edges_;
  std::vector<int> boundary_, interior_;
  Eigen::MatrixXd incidence_;
  std::vector<double> coord_x_, coord_y_;
  std::vector<std::int64_t> node_ids_;
};

// Discrete gradient: (grad u)(e) = u(tail) - u(head).
template <typename Scalar>
Eigen::VectorX<Scalar> gradient(const Network& net, const Eigen::VectorX<Scalar>& u) {
  if (u.size() != net.vertex_count())
    throw ValidationError("gradient: vertex field has wrong length");
  Eigen::VectorX<Scalar> g(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e)
    g[e] = u[net.edge(e).tail] - u[net.edge(e).head];
  return g;
}

// Adjoint of the gradient: (div j)(v) = sum of +-j(e) over incident edges.
template <typename Scalar>
Eigen::VectorX<Scalar> divergence(const Network& net, const Eigen::VectorX<Scalar>& j) {
  if (j.size() != net.edge_count())
    throw ValidationError("divergence: edge field has wrong length");
  Eigen::VectorX<Scalar> d = Eigen::VectorX<Scalar>::Zero(net.vertex_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    d[net.edge(e).tail] += j[e];
    d[net.edge(e).head] -= j[e];
  }
  return d;
}

// Weighted graph Laplacian D^T diag(w) D as a dense symmetric matrix.
// Weights may be negative or complex; the result is symmetric (not
// conjugate-symmetric) in all cases.
template <typename Scalar>
Eigen::MatrixX<Scalar> laplacian(const Network& net, const Eigen::VectorX<Scalar>& w) {
  if (w.size() != net.edge_count())
    throw ValidationError("laplacian: edge weight field has wrong length");
  const int n = net.vertex_count();
  Eigen::MatrixX<Scalar> m = Eigen::MatrixX<Scalar>::Zero(n, n);
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto [a, b] = net.edge(e);
    m(a, a) += w[e];
    m(b, b) += w[e];
    m(a, b) -= w[e];
    m(b, a) -= w[e];
  }
  return m;
}

// Indices where |f| exceeds tol * max|f|.  Empty for the zero field.
template <typename Scalar>
std::vector<int> support(const Eigen::VectorX<Scalar>& f, double tol = kSupportTol) {
  std::vector<int> idx;
  const double m = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return idx;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (std::abs(f[i]) > tol * m) idx.push_back(static_cast<int>(i));
  return idx;
}

// Entrywise reciprocal on the numerical support, zero off it.
template <typename Scalar>
Eigen::VectorX<Scalar> field_pseudoinverse(const Eigen::VectorX<Scalar>& f,
                                           double tol = kSupportTol) {
  if (tol < 0) throw ValidationError("field_pseudoinverse: tolerance must be >= 0");
  Eigen::VectorX<Scalar> r = Eigen::VectorX<Scalar>::Zero(f.size());
  const double m = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return r;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (std::abs(f[i]) > tol * m) r[i] = Scalar(1) / f[i];
  return r;
}

}  // namespace netohm
