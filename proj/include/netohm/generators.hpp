#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netohm/network.hpp"

namespace netohm {

// A canned network together with its edge admittance and, when one exists,
// the boundary conditions published for it.
struct ExampleNetwork {
  Network net;
  Eigen::VectorXd sigma;             // conductivity (real part)
  Eigen::VectorXd sigma_im;          // susceptance coefficient, zero when unused
  std::vector<Eigen::VectorXd> bc;   // canonical boundary conditions
};

// Star: boundary 1,2,3 around a single interior node 4, unit conductivity.
ExampleNetwork example_g1();

// 3x3 grid with a single interior node (center).  Vertical edges have unit
// conductivity, horizontal edges conductivity mu > 0.  Ships the two
// boundary conditions that drive purely vertical / purely horizontal flow.
ExampleNetwork example_g2(double mu);

// Two interior nodes 5,6 with boundary 1..4; complex admittance per edge.
ExampleNetwork example_g3();

// Variant of the two-interior-node network where one boundary edge carries
// conductivity 1+eps (|eps| < 1); the interior edge current is O(eps), which
// makes the linearized problem ill-conditioned as eps -> 0.
ExampleNetwork example_g3_eps(double eps);

// n x n grid on the unit square, perimeter nodes boundary, unit
// conductivity; ships the f = x+y and f = x-y boundary conditions.
ExampleNetwork grid_network(int n);

// 4x4 grid used by the thermal-noise demo: top and right sides held at 1 V,
// bottom and left at 0 V (corners: top/right assignment wins).
ExampleNetwork thermal_demo_grid();

// Indicator of the j-th boundary node (position in boundary_nodes() order).
Eigen::VectorXd delta_bc(const Network& net, int boundary_pos);

// Smooth positive conductivity profile evaluated at edge midpoints
// (requires coordinates); used as ground truth in reconstruction demos.
Eigen::VectorXd smooth_conductivity(const Network& net);

// Edge index joining the two external node ids, in either orientation; -1
// if absent.
int find_edge(const Network& net, std::int64_t id_a, std::int64_t id_b);

ExampleNetwork example_by_name(const std::string& name, double mu, double eps, int n);

}  // namespace netohm
