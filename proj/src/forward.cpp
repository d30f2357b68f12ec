#include "netohm/forward.hpp"

#include <string>

#include "netohm/solve.hpp"

namespace netohm {

bool is_two_freq(Variant v) {
  return v == Variant::two_freq_conductivity || v == Variant::two_freq_schrodinger;
}

bool is_schrodinger(Variant v) {
  return v == Variant::real_schrodinger || v == Variant::two_freq_schrodinger;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::real_conductivity: return "real_conductivity";
    case Variant::two_freq_conductivity: return "two_freq_conductivity";
    case Variant::real_schrodinger: return "real_schrodinger";
    case Variant::two_freq_schrodinger: return "two_freq_schrodinger";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "real_conductivity") return Variant::real_conductivity;
  if (s == "two_freq_conductivity") return Variant::two_freq_conductivity;
  if (s == "real_schrodinger") return Variant::real_schrodinger;
  if (s == "two_freq_schrodinger") return Variant::two_freq_schrodinger;
  throw ValidationError("unknown variant '" + s + "'");
}

Eigen::VectorXcd ProblemSpec::admittance() const {
  using namespace std::complex_literals;
  return sigma + 1i * omega1 * sigma_im;
}

Eigen::VectorXcd ProblemSpec::potential_omega1() const {
  using namespace std::complex_literals;
  return q.cast<std::complex<double>>() + 1i * omega1 * q_im;
}

void ProblemSpec::validate() const {
  const int ne = net.edge_count();
  const int ni = net.interior_count();
  const int nb = net.boundary_count();
  if (f0.empty()) throw ValidationError("spec: at least one experiment required");
  for (const auto& f : f0)
    if (f.size() != nb) throw ValidationError("spec: boundary condition has wrong length");
  if (sigma.size() != ne) throw ValidationError("spec: sigma has wrong length");
  if (!is_schrodinger(variant) && (sigma.array() <= 0).any())
    throw ValidationError("spec: sigma must be positive");
  if (is_schrodinger(variant)) {
    if ((sigma.array() <= 0).any())
      throw ValidationError("spec: known conductivity must be positive");
    if (q.size() != ni) throw ValidationError("spec: potential has wrong length");
  }
  if (is_two_freq(variant)) {
    if (f1.size() != f0.size())
      throw ValidationError("spec: every experiment needs boundary data at both frequencies");
    for (const auto& f : f1)
      if (f.size() != nb) throw ValidationError("spec: boundary condition has wrong length");
    if (variant == Variant::two_freq_conductivity && sigma_im.size() != ne)
      throw ValidationError("spec: sigma_im has wrong length");
    if (variant == Variant::two_freq_schrodinger && q_im.size() != ni)
      throw ValidationError("spec: q_im has wrong length");
  }
}

namespace {

template <typename Scalar>
Eigen::VectorXd conductivity_power_impl(const Network& net, const Eigen::VectorXd& sigma_re,
                                        const Eigen::VectorX<Scalar>& u) {
  if (sigma_re.size() != net.edge_count())
    throw ValidationError("power_conductivity: sigma has wrong length");
  const Eigen::VectorX<Scalar> g = gradient<Scalar>(net, u);
  return sigma_re.array() * g.array().abs2();
}

template <typename Scalar>
Eigen::VectorXd schrodinger_power_impl(const Network& net, const Eigen::VectorXd& q_re,
                                       const Eigen::VectorX<Scalar>& u) {
  if (q_re.size() != net.interior_count())
    throw ValidationError("power_schrodinger: potential has wrong length");
  if (u.size() != net.vertex_count())
    throw ValidationError("power_schrodinger: vertex field has wrong length");
  const Eigen::VectorX<Scalar> ui = u(net.interior_nodes());
  return q_re.array() * ui.array().abs2();
}

}  // namespace

Eigen::VectorXd power_conductivity(const Network& net, const Eigen::VectorXd& sigma_re,
                                   const Eigen::VectorXd& u) {
  return conductivity_power_impl<double>(net, sigma_re, u);
}

Eigen::VectorXd power_conductivity(const Network& net, const Eigen::VectorXd& sigma_re,
                                   const Eigen::VectorXcd& u) {
  return conductivity_power_impl<std::complex<double>>(net, sigma_re, u);
}

Eigen::VectorXd power_schrodinger(const Network& net, const Eigen::VectorXd& q_re,
                                  const Eigen::VectorXd& u) {
  return schrodinger_power_impl<double>(net, q_re, u);
}

Eigen::VectorXd power_schrodinger(const Network& net, const Eigen::VectorXd& q_re,
                                  const Eigen::VectorXcd& u) {
  return schrodinger_power_impl<std::complex<double>>(net, q_re, u);
}

ForwardResult forward_dataset(const ProblemSpec& spec) {
  spec.validate();
  ForwardResult out;
  out.data.variant = spec.variant;
  const bool two_freq = is_two_freq(spec.variant);
  const bool schrod = is_schrodinger(spec.variant);

  for (int j = 0; j < spec.experiments(); ++j) {
    ExperimentState st;
    try {
      if (schrod)
        st.u0 = schrodinger_solve(spec.net, spec.sigma, spec.q, spec.f0[j]);
      else
        st.u0 = dirichlet_solve(spec.net, spec.sigma, spec.f0[j]);
      if (two_freq) {
        if (spec.variant == Variant::two_freq_conductivity)
          st.u1 = dirichlet_solve(spec.net, spec.admittance().eval(), spec.f1[j]);
        else
          st.u1 = schrodinger_solve(spec.net, spec.sigma, spec.potential_omega1().eval(),
                                    spec.f1[j]);
      }
    } catch (const SingularOperatorError& e) {
      throw SingularOperatorError("experiment " + std::to_string(j + 1) + ": " + e.what(),
                                  e.smallest_singular_value());
    }

    if (schrod) {
      out.data.h0.push_back(power_schrodinger(spec.net, spec.q, st.u0));
      if (two_freq) out.data.h1.push_back(power_schrodinger(spec.net, spec.q, st.u1));
    } else {
      out.data.h0.push_back(power_conductivity(spec.net, spec.sigma, st.u0));
      if (two_freq) out.data.h1.push_back(power_conductivity(spec.net, spec.sigma, st.u1));
    }
    out.states.push_back(std::move(st));
  }
  return out;
}

}  // namespace netohm
