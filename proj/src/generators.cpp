#include "netohm/generators.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace netohm {

namespace {

Network make_net(int n, const std::vector<int>& boundary_ids, std::vector<Edge> edges,
                 std::vector<double> x, std::vector<double> y) {
  std::vector<bool> flags(n, false);
  for (int id : boundary_ids) flags[id - 1] = true;
  Network net(n, std::move(flags), std::move(edges));
  net.set_coords(std::move(x), std::move(y));
  return net;
}

}  // namespace

ExampleNetwork example_g1() {
  // ids: boundary 1,2,3; interior 4; edges 1-4, 2-4, 3-4
  Network net = make_net(4, {1, 2, 3}, {{0, 3}, {1, 3}, {2, 3}},
                         {0.0, 0.0, 1.0, 0.5}, {1.0, 0.0, 0.5, 0.5});
  ExampleNetwork ex{std::move(net), Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(3), {}};
  Eigen::VectorXd f(3);
  f << 1, 0, 0;
  ex.bc.push_back(f);
  return ex;
}

ExampleNetwork example_g2(double mu) {
  if (!(mu > 0)) throw ValidationError("example_g2: mu must be positive");
  // ids: top row 1,2,3; middle 4,9,5; bottom 6,7,8; center 9 interior.
  // Edges 0..5 horizontal, 6..11 vertical.
  std::vector<Edge> edges = {
      {0, 1}, {1, 2}, {3, 8}, {8, 4}, {5, 6}, {6, 7},   // horizontal
      {0, 3}, {1, 8}, {2, 4}, {3, 5}, {8, 6}, {4, 7}};  // vertical
  Network net = make_net(9, {1, 2, 3, 4, 5, 6, 7, 8}, std::move(edges),
                         {0.0, 0.5, 1.0, 0.0, 1.0, 0.0, 0.5, 1.0, 0.5},
                         {1.0, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.5});
  Eigen::VectorXd sigma(12);
  sigma << mu, mu, mu, mu, mu, mu, 1, 1, 1, 1, 1, 1;

  Eigen::VectorXd f1(8), f2(8);
  f1 << 1, 1, 1, 0.5, 0.5, 0, 0, 0;      // top-to-bottom gradient
  f2 << 1, 0.5, 0, 1, 0, 1, 0.5, 0;      // left-to-right gradient
  return ExampleNetwork{std::move(net), std::move(sigma), Eigen::VectorXd::Zero(12), {f1, f2}};
}

ExampleNetwork example_g3() {
  std::vector<Edge> edges = {{0, 4}, {1, 4}, {2, 5}, {3, 5}, {4, 5}};
  Network net = make_net(6, {1, 2, 3, 4}, std::move(edges),
                         {0.0, 0.0, 1.0, 1.0, 1.0 / 3.0, 2.0 / 3.0},
                         {1.0, 0.0, 1.0, 0.0, 0.5, 0.5});
  Eigen::VectorXd sr(5), si(5);
  sr << 2, 1, 1, 3, 1;
  si << 2, 1, 1, 2, 3;
  return ExampleNetwork{std::move(net), std::move(sr), std::move(si), {}};
}

ExampleNetwork example_g3_eps(double eps) {
  if (!(std::abs(eps) < 1)) throw ValidationError("example_g3_eps: |eps| must be < 1");
  std::vector<Edge> edges = {{0, 4}, {2, 4}, {1, 5}, {3, 5}, {4, 5}};
  Network net = make_net(6, {1, 2, 3, 4}, std::move(edges),
                         {0.0, 0.0, 1.0, 1.0, 1.0 / 3.0, 2.0 / 3.0},
                         {1.0, 0.0, 1.0, 0.0, 0.5, 0.5});
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(5);
  sigma[0] = 1.0 + eps;
  Eigen::VectorXd f(4);
  f << 1, 1, 0, 0;
  return ExampleNetwork{std::move(net), std::move(sigma), Eigen::VectorXd::Zero(5), {f}};
}

ExampleNetwork grid_network(int n) {
  if (n < 3) throw ValidationError("grid_network: n must be >= 3");
  const int nv = n * n;
  std::vector<bool> flags(nv, false);
  std::vector<double> x(nv), y(nv);
  // id = r*n + c + 1, row 0 on top (y = 1)
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int v = r * n + c;
      x[v] = static_cast<double>(c) / (n - 1);
      y[v] = 1.0 - static_cast<double>(r) / (n - 1);
      if (r == 0 || r == n - 1 || c == 0 || c == n - 1) flags[v] = true;
    }
  std::vector<Edge> edges;
  edges.reserve(2 * n * (n - 1));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int v = r * n + c;
      if (c + 1 < n) edges.push_back({v, v + 1});
      if (r + 1 < n) edges.push_back({v, v + n});
    }
  Network net(nv, std::move(flags), std::move(edges));
  net.set_coords(std::move(x), std::move(y));

  const auto& bn = net.boundary_nodes();
  Eigen::VectorXd f1(bn.size()), f2(bn.size());
  for (size_t k = 0; k < bn.size(); ++k) {
    f1[k] = net.x(bn[k]) + net.y(bn[k]);
    f2[k] = net.x(bn[k]) - net.y(bn[k]);
  }
  const int ne = net.edge_count();
  return ExampleNetwork{std::move(net), Eigen::VectorXd::Ones(ne), Eigen::VectorXd::Zero(ne),
                        {f1, f2}};
}

ExampleNetwork thermal_demo_grid() {
  ExampleNetwork ex = grid_network(4);
  const auto& bn = ex.net.boundary_nodes();
  Eigen::VectorXd f(bn.size());
  for (size_t k = 0; k < bn.size(); ++k) {
    const bool top = ex.net.y(bn[k]) == 1.0;
    const bool right = ex.net.x(bn[k]) == 1.0;
    f[k] = (top || right) ? 1.0 : 0.0;
  }
  ex.bc = {f};
  return ex;
}

Eigen::VectorXd delta_bc(const Network& net, int boundary_pos) {
  if (boundary_pos < 0 || boundary_pos >= net.boundary_count())
    throw ValidationError("delta_bc: boundary position out of range");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(net.boundary_count());
  f[boundary_pos] = 1.0;
  return f;
}

Eigen::VectorXd smooth_conductivity(const Network& net) {
  if (!net.has_coords())
    throw ValidationError("smooth_conductivity: network has no coordinates");
  Eigen::VectorXd s(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto [a, b] = net.edge(e);
    const double xm = 0.5 * (net.x(a) + net.x(b));
    const double ym = 0.5 * (net.y(a) + net.y(b));
    s[e] = 1.0 + 0.5 * std::sin(std::numbers::pi * xm) * std::sin(std::numbers::pi * ym);
  }
  return s;
}

int find_edge(const Network& net, std::int64_t id_a, std::int64_t id_b) {
  int va = -1, vb = -1;
  for (int v = 0; v < net.vertex_count(); ++v) {
    if (net.node_ids()[v] == id_a) va = v;
    if (net.node_ids()[v] == id_b) vb = v;
  }
  if (va < 0 || vb < 0) return -1;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto [t, h] = net.edge(e);
    if ((t == va && h == vb) || (t == vb && h == va)) return e;
  }
  return -1;
}

ExampleNetwork example_by_name(const std::string& name, double mu, double eps, int n) {
  if (name == "g1") return example_g1();
  if (name == "g2") return example_g2(mu);
  if (name == "g3") return example_g3();
  if (name == "g3eps") return example_g3_eps(eps);
  if (name == "grid") return grid_network(n);
  if (name == "thermal") return thermal_demo_grid();
  throw ValidationError("unknown example network '" + name + "'");
}

}  // namespace netohm
