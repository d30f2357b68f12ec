#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netohm/network.hpp"

namespace netohm {

// The four inverse problems: recover a real edge conductivity, a complex
// edge admittance from data at two frequencies, a real interior potential,
// or a complex interior potential from data at two frequencies.
enum class Variant {
  real_conductivity,
  two_freq_conductivity,
  real_schrodinger,
  two_freq_schrodinger,
};

bool is_two_freq(Variant v);
bool is_schrodinger(Variant v);
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// A fully specified forward problem: network, constitutive parameter,
// frequency and boundary conditions for each experiment.
//
// Conductivity variants: sigma (> 0) is the unknown-to-recover reference,
// sigma_im its susceptance coefficient (two-frequency only).  Schrodinger
// variants: sigma is the known, fixed conductivity and q / q_im the
// interior potential (interior_nodes() order).
struct ProblemSpec {
  Variant variant = Variant::real_conductivity;
  Network net;
  Eigen::VectorXd sigma;
  Eigen::VectorXd sigma_im;
  Eigen::VectorXd q;
  Eigen::VectorXd q_im;
  double omega1 = 0.0;
  std::vector<Eigen::VectorXd> f0;   // per-experiment boundary data (static)
  std::vector<Eigen::VectorXcd> f1;  // per-experiment boundary data at omega1

  int experiments() const { return static_cast<int>(f0.size()); }
  Eigen::VectorXcd admittance() const;          // sigma + j*omega1*sigma_im
  Eigen::VectorXcd potential_omega1() const;    // q + j*omega1*q_im
  void validate() const;                        // throws ValidationError
};

// Per-experiment internal-functional data.  h0 holds the static block (the
// only block for the real variants); h1 the omega1 block.
struct PowerData {
  Variant variant = Variant::real_conductivity;
  std::vector<Eigen::VectorXd> h0;
  std::vector<Eigen::VectorXd> h1;

  int experiments() const { return static_cast<int>(h0.size()); }
};

// Reference states cached with a dataset; every linearization reuses them.
struct ExperimentState {
  Eigen::VectorXd u0;   // static solve
  Eigen::VectorXcd u1;  // omega1 solve (two-frequency variants)
};
using States = std::vector<ExperimentState>;

struct ForwardResult {
  PowerData data;
  States states;
};

}  // namespace netohm
