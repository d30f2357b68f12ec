#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netohm/network.hpp"

namespace netohm {

struct ThermalConfig {
  double t0 = 1.0;      // background temperature [K]
  double dt = 100.0;    // per-edge heating increment [K]
  double kappa = M_PI;  // Boltzmann-constant stand-in; kappa/pi = 1 by default
  int realizations = 10000;
  std::uint64_t seed = 0;
  int threads = 0;  // worker threads for the Monte Carlo runs; 0 = hardware

  void validate() const;  // throws ValidationError
};

// Baseline covariance plus one covariance per heated edge.  All matrices are
// |B| x |B|.
struct CovarianceSet {
  Eigen::MatrixXd baseline;
  std::vector<Eigen::MatrixXd> heated;
  bool empirical = false;
  int realizations = 0;
  std::uint64_t seed = 0;
};

// One realization of thermally induced edge currents: independent zero-mean
// Gaussians with variance (kappa/pi) * T(e) * sigma(e).
Eigen::VectorXd sample_noise_currents(const Network& net, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& temperature, double kappa,
                                      std::uint64_t seed);

// Linear map from edge noise currents to boundary net currents of the
// grounded network, as a |B| x |E| matrix.
Eigen::MatrixXd boundary_response_map(const Network& net, const Eigen::VectorXd& sigma);
Eigen::VectorXd boundary_response(const Network& net, const Eigen::VectorXd& sigma,
                                  const Eigen::VectorXd& j_noise);

// Exact covariance of the boundary currents for temperature field T.
Eigen::MatrixXd covariance_analytic(const Network& net, const Eigen::VectorXd& sigma,
                                    const Eigen::VectorXd& temperature, double kappa);

CovarianceSet covariance_set_analytic(const Network& net, const Eigen::VectorXd& sigma,
                                      const ThermalConfig& cfg);
CovarianceSet covariance_set_empirical(const Network& net, const Eigen::VectorXd& sigma,
                                       const ThermalConfig& cfg);

// Empirical covariance sets snapshot at each realization count in
// `checkpoints` (strictly increasing); all share the same master-seeded
// stream, so checkpoint k is a prefix of checkpoint k+1.
std::vector<CovarianceSet> covariance_set_empirical_checkpoints(
    const Network& net, const Eigen::VectorXd& sigma, const ThermalConfig& cfg,
    const std::vector<int>& checkpoints);

// Differential estimate f^T (C_e - C_0) f / ((kappa/pi) dt) per edge.  With
// exact covariances this equals sigma .* |grad of the boundary-zeroed
// voltage|^2: the dissipated power on interior-interior edges, zero on
// boundary-boundary edges.
Eigen::VectorXd power_from_thermal(const CovarianceSet& covs, const Eigen::VectorXd& f,
                                   double dt, double kappa);

// sigma .* |grad(u with boundary values zeroed)|^2 -- the quantity the
// thermal estimate converges to.
Eigen::VectorXd interior_masked_power(const Network& net, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& u);

struct ThermalReport {
  CovarianceSet covariances;
  Eigen::VectorXd estimate;    // per edge
  Eigen::VectorXd reference;   // interior_masked_power at the Dirichlet solution
  Eigen::VectorXd true_power;  // sigma .* |grad u|^2
  double rel_error_all = 0;       // vs reference over all edges
  double rel_error_interior = 0;  // vs reference over interior-interior edges
};

// Baseline + per-edge heated experiments followed by the differential
// estimate; deterministic given cfg.seed.
ThermalReport run_thermal_experiment(const Network& net, const Eigen::VectorXd& sigma,
                                     const Eigen::VectorXd& f, const ThermalConfig& cfg,
                                     bool empirical);

}  // namespace netohm
