#include "netohm/invert.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "netohm/forward.hpp"
#include "netohm/linearize.hpp"
#include "netohm/rng.hpp"
#include "netohm/solve.hpp"

namespace netohm {

namespace {

int parameter_count(const ProblemSpec& spec) {
  const int np = is_schrodinger(spec.variant) ? spec.net.interior_count() : spec.net.edge_count();
  return is_two_freq(spec.variant) ? 2 * np : np;
}

int states_per_experiment(const ProblemSpec& spec) {
  return is_two_freq(spec.variant) ? 3 : 1;
}

}  // namespace

int unknown_count(const ProblemSpec& spec) {
  return parameter_count(spec) +
         states_per_experiment(spec) * spec.net.vertex_count() * spec.experiments();
}

Eigen::VectorXd gamma_of(const ProblemSpec& spec) {
  Eigen::VectorXd g(parameter_count(spec));
  switch (spec.variant) {
    case Variant::real_conductivity: g = spec.sigma; break;
    case Variant::real_schrodinger: g = spec.q; break;
    case Variant::two_freq_conductivity: g << spec.sigma, spec.sigma_im; break;
    case Variant::two_freq_schrodinger: g << spec.q, spec.q_im; break;
  }
  return g;
}

Eigen::VectorXd pack_unknowns(const ProblemSpec& spec, const States& states) {
  if (static_cast<int>(states.size()) != spec.experiments())
    throw ValidationError("pack_unknowns: wrong number of states");
  const int nv = spec.net.vertex_count();
  Eigen::VectorXd x(unknown_count(spec));
  x.head(parameter_count(spec)) = gamma_of(spec);
  int off = parameter_count(spec);
  for (const auto& st : states) {
    x.segment(off, nv) = st.u0;
    off += nv;
    if (is_two_freq(spec.variant)) {
      x.segment(off, nv) = st.u1.real();
      off += nv;
      x.segment(off, nv) = st.u1.imag();
      off += nv;
    }
  }
  return x;
}

ProblemSpec unpack_unknowns(const ProblemSpec& spec, const Eigen::VectorXd& x, States* states) {
  if (x.size() != unknown_count(spec))
    throw ValidationError("unpack_unknowns: unknown vector has wrong length");
  ProblemSpec out = spec;
  const int np = is_schrodinger(spec.variant) ? spec.net.interior_count() : spec.net.edge_count();
  switch (spec.variant) {
    case Variant::real_conductivity: out.sigma = x.head(np); break;
    case Variant::real_schrodinger: out.q = x.head(np); break;
    case Variant::two_freq_conductivity:
      out.sigma = x.head(np);
      out.sigma_im = x.segment(np, np);
      break;
    case Variant::two_freq_schrodinger:
      out.q = x.head(np);
      out.q_im = x.segment(np, np);
      break;
  }
  if (states) {
    const int nv = spec.net.vertex_count();
    states->clear();
    int off = parameter_count(spec);
    for (int j = 0; j < spec.experiments(); ++j) {
      ExperimentState st;
      st.u0 = x.segment(off, nv);
      off += nv;
      if (is_two_freq(spec.variant)) {
        st.u1 = x.segment(off, nv) + std::complex<double>(0, 1) * x.segment(off + nv, nv);
        off += 2 * nv;
      }
      states->push_back(std::move(st));
    }
  }
  return out;
}

PowerData zero_data(const ProblemSpec& spec) {
  PowerData d;
  d.variant = spec.variant;
  const int nf = is_schrodinger(spec.variant) ? spec.net.interior_count() : spec.net.edge_count();
  for (int j = 0; j < spec.experiments(); ++j) {
    d.h0.push_back(Eigen::VectorXd::Zero(nf));
    if (is_two_freq(spec.variant)) d.h1.push_back(Eigen::VectorXd::Zero(nf));
  }
  return d;
}

Eigen::VectorXd residual(const ProblemSpec& spec, const Eigen::VectorXd& x,
                         const PowerData& data) {
  if (data.variant != spec.variant || data.experiments() != spec.experiments())
    throw ValidationError("residual: data does not match the spec");
  States states;
  const ProblemSpec cur = unpack_unknowns(spec, x, &states);
  const Network& net = spec.net;
  const auto& bi = net.boundary_nodes();
  const auto& ii = net.interior_nodes();
  const int nf = is_schrodinger(spec.variant) ? net.interior_count() : net.edge_count();
  const int per =
      is_two_freq(spec.variant)
          ? 2 * nf + 3 * net.boundary_count() + 3 * net.interior_count()
          : nf + net.boundary_count() + net.interior_count();
  Eigen::VectorXd r(per * spec.experiments());

  const Eigen::MatrixXd lap_re = laplacian<double>(net, cur.sigma);
  Eigen::MatrixXd lap_im;
  if (spec.variant == Variant::two_freq_conductivity)
    lap_im = laplacian<double>(net, cur.sigma_im);

  int off = 0;
  auto emit = [&r, &off](const Eigen::VectorXd& v) {
    r.segment(off, v.size()) = v;
    off += static_cast<int>(v.size());
  };

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd& u0 = states[j].u0;
    if (!is_two_freq(spec.variant)) {
      if (is_schrodinger(spec.variant)) {
        emit(power_schrodinger(net, cur.q, u0) - data.h0[j]);
        emit(u0(bi) - spec.f0[j]);
        emit((lap_re * u0)(ii) + (cur.q.array() * u0(ii).array()).matrix());
      } else {
        emit(power_conductivity(net, cur.sigma, u0) - data.h0[j]);
        emit(u0(bi) - spec.f0[j]);
        emit((lap_re * u0)(ii));
      }
      continue;
    }

    const Eigen::VectorXd a = states[j].u1.real();
    const Eigen::VectorXd b = states[j].u1.imag();
    if (spec.variant == Variant::two_freq_conductivity) {
      emit(power_conductivity(net, cur.sigma, u0) - data.h0[j]);
      emit(power_conductivity(net, cur.sigma, states[j].u1) - data.h1[j]);
      emit(u0(bi) - spec.f0[j]);
      emit(a(bi) - spec.f1[j].real());
      emit(b(bi) - spec.f1[j].imag());
      emit((lap_re * u0)(ii));
      emit((lap_re * a - spec.omega1 * lap_im * b)(ii));
      emit((lap_re * b + spec.omega1 * lap_im * a)(ii));
    } else {
      emit(power_schrodinger(net, cur.q, u0) - data.h0[j]);
      emit(power_schrodinger(net, cur.q, states[j].u1) - data.h1[j]);
      emit(u0(bi) - spec.f0[j]);
      emit(a(bi) - spec.f1[j].real());
      emit(b(bi) - spec.f1[j].imag());
      emit((lap_re * u0)(ii) + (cur.q.array() * u0(ii).array()).matrix());
      emit((lap_re * a)(ii) +
           (cur.q.array() * a(ii).array() - spec.omega1 * cur.q_im.array() * b(ii).array())
               .matrix());
      emit((lap_re * b)(ii) +
           (cur.q.array() * b(ii).array() + spec.omega1 * cur.q_im.array() * a(ii).array())
               .matrix());
    }
  }
  return r;
}

void GNConfig::validate() const {
  if (max_iterations < 0) throw ValidationError("gn: max_iterations must be >= 0");
  if (!(armijo_rho > 0 && armijo_rho < 1)) throw ValidationError("gn: rho must be in (0,1)");
  if (!(armijo_c > 0 && armijo_c < 1)) throw ValidationError("gn: c must be in (0,1)");
  if (max_backtracks < 0) throw ValidationError("gn: max_backtracks must be >= 0");
}

std::string to_string(GNStop s) {
  switch (s) {
    case GNStop::gradient_tol: return "gradient_tol";
    case GNStop::max_iterations: return "max_iterations";
    case GNStop::line_search_failure: return "line_search_failure";
  }
  return "?";
}

ArmijoResult armijo_search(const std::function<double(double)>& merit_along, double merit0,
                           double directional_derivative, const GNConfig& cfg) {
  cfg.validate();
  ArmijoResult res;
  if (!std::isfinite(merit0)) throw ValidationError("armijo: non-finite merit");
  if (directional_derivative >= 0) return res;  // not a descent direction

  double t = 1.0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    const double m = merit_along(t);
    if (!std::isfinite(m)) throw ValidationError("armijo: non-finite merit along the step");
    if (m <= merit0 - cfg.armijo_c * t * std::abs(directional_derivative)) {
      res.accepted = true;
      res.t = t;
      res.backtracks = k;
      res.merit = m;
      return res;
    }
    t *= cfg.armijo_rho;
  }
  res.backtracks = cfg.max_backtracks + 1;
  return res;
}

GNResult gauss_newton(const ProblemSpec& spec, const PowerData& data, const GNConfig& cfg,
                      const Eigen::VectorXd* truth_gamma) {
  cfg.validate();
  spec.validate();
  if (cfg.log_conductivity && spec.variant != Variant::real_conductivity)
    throw ValidationError("gn: log parameterization is only supported for real conductivity");

  // Initial guess: flat conductivity / mid-range potential, states from
  // forward solves there so the state equations start satisfied.
  ProblemSpec start = spec;
  const int ne = spec.net.edge_count();
  const int ni = spec.net.interior_count();
  switch (spec.variant) {
    case Variant::real_conductivity: start.sigma = Eigen::VectorXd::Ones(ne); break;
    case Variant::two_freq_conductivity:
      start.sigma = Eigen::VectorXd::Ones(ne);
      start.sigma_im = Eigen::VectorXd::Ones(ne);
      break;
    case Variant::real_schrodinger:
      start.q = Eigen::VectorXd::Constant(ni, 0.5 * (spec.q.minCoeff() + spec.q.maxCoeff()));
      break;
    case Variant::two_freq_schrodinger:
      start.q = Eigen::VectorXd::Constant(ni, 0.5 * (spec.q.minCoeff() + spec.q.maxCoeff()));
      start.q_im =
          Eigen::VectorXd::Constant(ni, 0.5 * (spec.q_im.minCoeff() + spec.q_im.maxCoeff()));
      break;
  }
  const ForwardResult init = forward_dataset(start);
  Eigen::VectorXd x = pack_unknowns(start, init.states);

  const int np = parameter_count(start);
  // In log mode the first block of x holds log(sigma).
  auto to_model = [&](const Eigen::VectorXd& z) {
    if (!cfg.log_conductivity) return z;
    Eigen::VectorXd m = z;
    m.head(np) = z.head(np).array().exp();
    return m;
  };
  if (cfg.log_conductivity) x.head(np) = x.head(np).array().log();

  auto merit_of = [&](const Eigen::VectorXd& z) {
    return 0.5 * residual(spec, to_model(z), data).squaredNorm();
  };
  auto linearize_at = [&](const Eigen::VectorXd& z) {
    States st;
    const ProblemSpec cur = unpack_unknowns(spec, to_model(z), &st);
    Eigen::MatrixXd dr = assemble_jacobian(cur, st, JacobianForm::real).real_matrix;
    if (cfg.log_conductivity)
      dr.leftCols(np) = dr.leftCols(np) * to_model(z).head(np).asDiagonal();
    return dr;
  };

  GNResult result;
  Eigen::VectorXd r = residual(spec, to_model(x), data);
  result.initial_merit = 0.5 * r.squaredNorm();
  const double grad_tol = cfg.gradient_tol_rel * (1.0 + r.norm());

  double alpha = cfg.alpha;
  double merit = result.initial_merit;
  Eigen::MatrixXd dr = linearize_at(x);
  Eigen::VectorXd grad = dr.transpose() * r;
  double grad_norm = grad.norm();
  result.stop = GNStop::max_iterations;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (grad_norm <= grad_tol) {
      result.stop = GNStop::gradient_tol;
      break;
    }

    if (alpha < 0) {
      // Scale-aware default damping for noisy data.
      Eigen::BDCSVD<Eigen::MatrixXd> svd(dr);
      alpha = 1e-2 * svd.singularValues()(0);
    }

    Eigen::MatrixXd normal = dr.transpose() * dr;
    normal.diagonal().array() += alpha * alpha;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd step = -ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      // Only possible with alpha ~ 0 and a rank-deficient Jacobian.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
      throw SingularOperatorError(
          "gn: singular damped normal matrix at iteration " + std::to_string(it),
          svd.singularValues()(svd.singularValues().size() - 1));
    }

    const double dderiv = grad.dot(step);
    const ArmijoResult ls = armijo_search(
        [&](double t) { return merit_of(x + t * step); }, merit, dderiv, cfg);
    if (!ls.accepted) {
      result.stop = GNStop::line_search_failure;
      break;
    }

    x += ls.t * step;
    r = residual(spec, to_model(x), data);
    merit = 0.5 * r.squaredNorm();
    dr = linearize_at(x);
    grad = dr.transpose() * r;
    grad_norm = grad.norm();
    result.history.push_back({merit, grad_norm, ls.t * step.norm(), ls.backtracks});
    ++result.iterations;
  }
  if (result.stop == GNStop::max_iterations && grad_norm <= grad_tol)
    result.stop = GNStop::gradient_tol;

  States final_states;
  const ProblemSpec fin = unpack_unknowns(spec, to_model(x), &final_states);
  result.gamma = gamma_of(fin);
  result.states = std::move(final_states);
  result.final_merit = merit;
  result.final_grad_norm = grad_norm;
  if (truth_gamma) {
    if (truth_gamma->size() != result.gamma.size())
      throw ValidationError("gn: truth parameter has wrong length");
    result.rel_param_error = (result.gamma - *truth_gamma).norm() / truth_gamma->norm();
  }
  return result;
}

PowerData add_noise(const PowerData& data, double level, std::uint64_t seed) {
  if (level < 0) throw ValidationError("add_noise: level must be >= 0");
  PowerData out = data;
  if (level == 0) return out;
  double hmax = 0;
  for (const auto& h : data.h0) hmax = std::max(hmax, h.cwiseAbs().maxCoeff());
  for (const auto& h : data.h1) hmax = std::max(hmax, h.cwiseAbs().maxCoeff());
  GaussianSampler g(substream_seed(seed, 0));
  const double s = level * hmax;
  for (auto& h : out.h0)
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] += s * g.next();
  for (auto& h : out.h1)
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] += s * g.next();
  return out;
}

}  // namespace netohm
