#include "netohm/network.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace netohm {

Network::Network(int vertex_count, std::vector<bool> boundary_flags, std::vector<Edge> edges)
    : vertex_count_(vertex_count),
      boundary_flag_(std::move(boundary_flags)),
      edges_(std::move(edges)) {
  if (vertex_count_ <= 0) throw ValidationError("network: vertex count must be positive");
  if (static_cast<int>(boundary_flag_.size()) != vertex_count_)
    throw ValidationError("network: boundary flag required for every vertex");

  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.tail < 0 || e.tail >= vertex_count_ || e.head < 0 || e.head >= vertex_count_)
      throw ValidationError("network: edge endpoint out of range (" +
                            std::to_string(e.tail) + "," + std::to_string(e.head) + ")");
    if (e.tail == e.head)
      throw ValidationError("network: loop edge at vertex " + std::to_string(e.tail));
    auto key = std::minmax(e.tail, e.head);
    if (!seen.insert(key).second)
      throw ValidationError("network: duplicate edge (" + std::to_string(e.tail) + "," +
                            std::to_string(e.head) + ")");
  }

  for (int v = 0; v < vertex_count_; ++v)
    (boundary_flag_[v] ? boundary_ : interior_).push_back(v);
  if (boundary_.empty()) throw ValidationError("network: boundary set is empty");
  if (interior_.empty()) throw ValidationError("network: interior set is empty");

  incidence_ = Eigen::MatrixXd::Zero(edge_count(), vertex_count_);
  for (int e = 0; e < edge_count(); ++e) {
    incidence_(e, edges_[e].tail) = 1.0;
    incidence_(e, edges_[e].head) = -1.0;
  }

  node_ids_.resize(vertex_count_);
  for (int v = 0; v < vertex_count_; ++v) node_ids_[v] = v + 1;
}

void Network::set_coords(std::vector<double> x, std::vector<double> y) {
  if (static_cast<int>(x.size()) != vertex_count_ || static_cast<int>(y.size()) != vertex_count_)
    throw ValidationError("network: coordinate list has wrong length");
  coord_x_ = std::move(x);
  coord_y_ = std::move(y);
}

void Network::set_node_ids(std::vector<std::int64_t> ids) {
  if (static_cast<int>(ids.size()) != vertex_count_)
    throw ValidationError("network: id list has wrong length");
  std::set<std::int64_t> uniq(ids.begin(), ids.end());
  if (static_cast<int>(uniq.size()) != vertex_count_)
    throw ValidationError("network: node ids must be distinct");
  node_ids_ = std::move(ids);
}

}  // namespace netohm
