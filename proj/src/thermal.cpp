#include "netohm/thermal.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "netohm/forward.hpp"
#include "netohm/rng.hpp"
#include "netohm/solve.hpp"

namespace netohm {

namespace {

constexpr int kBatch = 512;
// Substream index space: experiment e owns batch streams e * kStreamStride + b.
constexpr std::uint64_t kStreamStride = 1u << 20;

Eigen::VectorXd noise_std(const Eigen::VectorXd& sigma, const Eigen::VectorXd& temperature,
                          double kappa) {
  return ((kappa / M_PI) * temperature.array() * sigma.array()).sqrt();
}

}  // namespace

void ThermalConfig::validate() const {
  if (!(t0 > 0)) throw ValidationError("thermal: background temperature must be positive");
  if (dt == 0) throw ValidationError("thermal: heating increment must be nonzero");
  if (!(t0 + dt > 0)) throw ValidationError("thermal: heated temperature must stay positive");
  if (!(kappa > 0)) throw ValidationError("thermal: kappa must be positive");
  if (realizations < 1) throw ValidationError("thermal: at least one realization required");
}

Eigen::VectorXd sample_noise_currents(const Network& net, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& temperature, double kappa,
                                      std::uint64_t seed) {
  if (sigma.size() != net.edge_count() || temperature.size() != net.edge_count())
    throw ValidationError("sample_noise_currents: edge field has wrong length");
  if ((sigma.array() <= 0).any() || (temperature.array() <= 0).any())
    throw ValidationError("sample_noise_currents: sigma and T must be positive");
  GaussianSampler g(seed);
  Eigen::VectorXd j(net.edge_count());
  g.fill(j);
  return j.cwiseProduct(noise_std(sigma, temperature, kappa));
}

Eigen::MatrixXd boundary_response_map(const Network& net, const Eigen::VectorXd& sigma) {
  const Eigen::MatrixXd lap = laplacian<double>(net, sigma);
  const auto& bi = net.boundary_nodes();
  const auto& ii = net.interior_nodes();
  // interior voltages from net interior currents, then boundary net currents
  const Eigen::MatrixXd div_i = net.incidence()(Eigen::all, ii).transpose();  // |I| x |E|
  const Eigen::MatrixXd x = solve_checked(lap(ii, ii).eval(), div_i, "boundary_response");
  return lap(bi, ii) * x;
}

Eigen::VectorXd boundary_response(const Network& net, const Eigen::VectorXd& sigma,
                                  const Eigen::VectorXd& j_noise) {
  if (j_noise.size() != net.edge_count())
    throw ValidationError("boundary_response: edge field has wrong length");
  return boundary_response_map(net, sigma) * j_noise;
}

Eigen::MatrixXd covariance_analytic(const Network& net, const Eigen::VectorXd& sigma,
                                    const Eigen::VectorXd& temperature, double kappa) {
  if (temperature.size() != net.edge_count())
    throw ValidationError("covariance_analytic: temperature field has wrong length");
  const Eigen::MatrixXd resp = boundary_response_map(net, sigma);
  const Eigen::VectorXd w = (kappa / M_PI) * temperature.cwiseProduct(sigma);
  const Eigen::MatrixXd c = resp * w.asDiagonal() * resp.transpose();
  return 0.5 * (c + c.transpose());
}

CovarianceSet covariance_set_analytic(const Network& net, const Eigen::VectorXd& sigma,
                                      const ThermalConfig& cfg) {
  cfg.validate();
  CovarianceSet out;
  const Eigen::MatrixXd resp = boundary_response_map(net, sigma);
  auto cov_for = [&](const Eigen::VectorXd& temperature) {
    const Eigen::VectorXd w = (cfg.kappa / M_PI) * temperature.cwiseProduct(sigma);
    const Eigen::MatrixXd c = resp * w.asDiagonal() * resp.transpose();
    return (0.5 * (c + c.transpose())).eval();
  };
  const Eigen::VectorXd t0 = Eigen::VectorXd::Constant(net.edge_count(), cfg.t0);
  out.baseline = cov_for(t0);
  for (int e = 0; e < net.edge_count(); ++e) {
    Eigen::VectorXd t = t0;
    t[e] += cfg.dt;
    out.heated.push_back(cov_for(t));
  }
  return out;
}

std::vector<CovarianceSet> covariance_set_empirical_checkpoints(
    const Network& net, const Eigen::VectorXd& sigma, const ThermalConfig& cfg,
    const std::vector<int>& checkpoints) {
  cfg.validate();
  if (checkpoints.empty()) throw ValidationError("thermal: no checkpoints given");
  for (size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 1 || (k > 0 && checkpoints[k] <= checkpoints[k - 1]))
      throw ValidationError("thermal: checkpoints must be positive and increasing");
  }
  if ((sigma.array() <= 0).any())
    throw ValidationError("thermal: sigma must be positive");

  const int ne = net.edge_count();
  const int nb = net.boundary_count();
  const int total = checkpoints.back();
  const Eigen::MatrixXd resp = boundary_response_map(net, sigma);
  const Eigen::VectorXd t_base = Eigen::VectorXd::Constant(ne, cfg.t0);

  std::vector<CovarianceSet> out(checkpoints.size());
  for (size_t k = 0; k < checkpoints.size(); ++k) {
    out[k].empirical = true;
    out[k].realizations = checkpoints[k];
    out[k].seed = cfg.seed;
    out[k].heated.resize(ne);
  }

  // Experiment 0 heats nothing; experiment 1+e heats edge e.  Each
  // experiment consumes its own substream sequence, so the accumulation is
  // independent of how experiments are distributed over threads.
  auto run_experiment = [&](int exp) {
    Eigen::VectorXd temp = t_base;
    if (exp > 0) temp[exp - 1] += cfg.dt;
    const Eigen::VectorXd std_dev = noise_std(sigma, temp, cfg.kappa);

    Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd j(ne, kBatch);
    Eigen::MatrixXd g;
    int done = 0;
    size_t next_checkpoint = 0;
    std::uint64_t batch_index = 0;
    while (done < total) {
      const int m = std::min(kBatch, total - done);
      GaussianSampler sampler(
          substream_seed(cfg.seed, static_cast<std::uint64_t>(exp) * kStreamStride + batch_index));
      ++batch_index;
      for (int c = 0; c < m; ++c) {
        sampler.fill(j.col(c));
        j.col(c).array() *= std_dev.array();
      }
      g.noalias() = resp * j.leftCols(m);
      accum.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
      done += m;
      while (next_checkpoint < checkpoints.size() && done == checkpoints[next_checkpoint]) {
        Eigen::MatrixXd cov = accum.selfadjointView<Eigen::Lower>();
        cov /= static_cast<double>(done);
        if (exp == 0)
          out[next_checkpoint].baseline = cov;
        else
          out[next_checkpoint].heated[exp - 1] = cov;
        ++next_checkpoint;
      }
    }
  };

  const int n_threads =
      std::max(1, cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency()));
  if (n_threads == 1) {
    for (int exp = 0; exp <= ne; ++exp) run_experiment(exp);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(n_threads, ne + 1); ++t)
      pool.emplace_back([&] {
        for (int exp = next.fetch_add(1); exp <= ne; exp = next.fetch_add(1)) run_experiment(exp);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

CovarianceSet covariance_set_empirical(const Network& net, const Eigen::VectorXd& sigma,
                                       const ThermalConfig& cfg) {
  return covariance_set_empirical_checkpoints(net, sigma, cfg, {cfg.realizations}).front();
}

Eigen::VectorXd power_from_thermal(const CovarianceSet& covs, const Eigen::VectorXd& f,
                                   double dt, double kappa) {
  if (dt == 0) throw ValidationError("power_from_thermal: dt must be nonzero");
  if (covs.baseline.rows() != f.size() || covs.baseline.cols() != f.size())
    throw ValidationError("power_from_thermal: baseline covariance has wrong shape");
  if (covs.heated.empty()) throw ValidationError("power_from_thermal: no heated covariances");
  Eigen::VectorXd est(covs.heated.size());
  const double base = f.dot(covs.baseline * f);
  for (size_t e = 0; e < covs.heated.size(); ++e) {
    if (covs.heated[e].rows() != f.size() || covs.heated[e].cols() != f.size())
      throw ValidationError("power_from_thermal: missing or misshapen heated covariance");
    est[e] = (f.dot(covs.heated[e] * f) - base) / ((kappa / M_PI) * dt);
  }
  return est;
}

Eigen::VectorXd interior_masked_power(const Network& net, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& u) {
  if (u.size() != net.vertex_count())
    throw ValidationError("interior_masked_power: vertex field has wrong length");
  Eigen::VectorXd masked = u;
  for (int v : net.boundary_nodes()) masked[v] = 0.0;
  return power_conductivity(net, sigma, masked);
}

ThermalReport run_thermal_experiment(const Network& net, const Eigen::VectorXd& sigma,
                                     const Eigen::VectorXd& f, const ThermalConfig& cfg,
                                     bool empirical) {
  cfg.validate();
  ThermalReport rep;
  rep.covariances = empirical ? covariance_set_empirical(net, sigma, cfg)
                              : covariance_set_analytic(net, sigma, cfg);
  rep.estimate = power_from_thermal(rep.covariances, f, cfg.dt, cfg.kappa);

  const Eigen::VectorXd u = dirichlet_solve(net, sigma, f);
  rep.reference = interior_masked_power(net, sigma, u);
  rep.true_power = power_conductivity(net, sigma, u);

  rep.rel_error_all = (rep.estimate - rep.reference).norm() / rep.reference.norm();
  double num = 0, den = 0;
  for (int e = 0; e < net.edge_count(); ++e) {
    if (!net.edge_is_interior(e)) continue;
    num += std::pow(rep.estimate[e] - rep.reference[e], 2);
    den += std::pow(rep.reference[e], 2);
  }
  rep.rel_error_interior = den > 0 ? std::sqrt(num / den) : 0.0;
  return rep;
}

}  // namespace netohm
