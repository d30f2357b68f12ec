#include "netohm/linearize.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <complex>
#include <limits>

#include "netohm/invert.hpp"
#include "netohm/solve.hpp"

namespace netohm {

using std::complex_literals::operator""i;
using Cd = std::complex<double>;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::VectorXd singular_values_of(const Eigen::MatrixXd& m) {
  if (std::min(m.rows(), m.cols()) > 32) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

Eigen::VectorXd singular_values_of(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues();
}

RankInfo rank_from_singular_values(Eigen::VectorXd sv, Eigen::Index rows, Eigen::Index cols,
                                   double tau_rank) {
  RankInfo info;
  info.singular_values = std::move(sv);
  const double smax = info.singular_values.size() ? info.singular_values(0) : 0.0;
  const double thresh = tau_rank * static_cast<double>(std::max(rows, cols)) * kEps * smax;
  for (Eigen::Index k = 0; k < info.singular_values.size(); ++k)
    if (info.singular_values(k) > thresh) ++info.rank;
  const double smin = info.singular_values(info.singular_values.size() - 1);
  info.cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  return info;
}

// Pass/fail invertibility with the smallest singular value as margin.
struct SmallestSV {
  bool invertible = false;
  double smin = 0.0;
};

template <typename Mat>
SmallestSV smallest_singular_value(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  SmallestSV out;
  out.smin = sv(sv.size() - 1);
  const double smax = sv(0);
  out.invertible = smax > 0 && out.smin > static_cast<double>(m.rows()) * kEps * smax;
  return out;
}

std::string blk(const char* base, int j) { return std::string(base) + "[" + std::to_string(j + 1) + "]"; }

const BlockInfo& find_block(const std::vector<BlockInfo>& blocks, const std::string& name,
                            const char* kind) {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw ValidationError(std::string("layout: no ") + kind + " block named '" + name + "'");
}

// Writes per-experiment derivative blocks through named layout lookups.
template <typename Scalar>
class BlockWriter {
 public:
  BlockWriter(Eigen::MatrixX<Scalar>& m, const JacobianLayout& layout)
      : m_(m), layout_(layout) {}

  template <typename Derived>
  void put(const std::string& row, const std::string& col, const Eigen::MatrixBase<Derived>& b) {
    const BlockInfo& r = layout_.row(row);
    const BlockInfo& c = layout_.col(col);
    if (b.rows() != r.size || b.cols() != c.size)
      throw ValidationError("layout: block shape mismatch for (" + row + "," + col + ")");
    m_.block(r.offset, c.offset, r.size, c.size) = b.template cast<Scalar>();
  }

  // Rows selecting given vertex columns of a state block (boundary rows).
  void put_selection(const std::string& row, const std::string& col,
                     const std::vector<int>& verts) {
    const BlockInfo& r = layout_.row(row);
    const BlockInfo& c = layout_.col(col);
    for (size_t k = 0; k < verts.size(); ++k)
      m_(r.offset + static_cast<int>(k), c.offset + verts[k]) = Scalar(1);
  }

  // Adds diag(v) into a row block at the listed columns of a state block.
  template <typename Vec>
  void add_diagonal_at(const std::string& row, const std::string& col,
                       const std::vector<int>& verts, const Vec& v) {
    const BlockInfo& r = layout_.row(row);
    const BlockInfo& c = layout_.col(col);
    for (size_t k = 0; k < verts.size(); ++k)
      m_(r.offset + static_cast<int>(k), c.offset + verts[k]) += Scalar(v[k]);
  }

 private:
  Eigen::MatrixX<Scalar>& m_;
  const JacobianLayout& layout_;
};

}  // namespace

RankInfo rank_and_cond(const Eigen::MatrixXd& m, double tau_rank) {
  if (m.size() == 0) throw ValidationError("rank_and_cond: empty matrix");
  return rank_from_singular_values(singular_values_of(m), m.rows(), m.cols(), tau_rank);
}

RankInfo rank_and_cond(const Eigen::MatrixXcd& m, double tau_rank) {
  if (m.size() == 0) throw ValidationError("rank_and_cond: empty matrix");
  return rank_from_singular_values(singular_values_of(m), m.rows(), m.cols(), tau_rank);
}

const BlockInfo& JacobianLayout::row(const std::string& name) const {
  return find_block(rows, name, "row");
}
const BlockInfo& JacobianLayout::col(const std::string& name) const {
  return find_block(cols, name, "col");
}

JacobianLayout jacobian_layout(const ProblemSpec& spec, JacobianForm form) {
  if (form == JacobianForm::complex_pair && !is_two_freq(spec.variant))
    throw ValidationError("complex-pair form is only defined for two-frequency variants");

  const int ne = spec.net.edge_count();
  const int nv = spec.net.vertex_count();
  const int nb = spec.net.boundary_count();
  const int ni = spec.net.interior_count();
  const int nf = is_schrodinger(spec.variant) ? ni : ne;  // functional rows per block
  const int np = is_schrodinger(spec.variant) ? ni : ne;  // parameter block size

  JacobianLayout layout;
  auto add_row = [&layout](const std::string& name, int size) {
    layout.rows.push_back({name, layout.rows_total, size});
    layout.rows_total += size;
  };
  auto add_col = [&layout](const std::string& name, int size) {
    layout.cols.push_back({name, layout.cols_total, size});
    layout.cols_total += size;
  };

  if (is_two_freq(spec.variant)) {
    add_col(is_schrodinger(spec.variant) ? "q_re" : "sigma_re", np);
    add_col(is_schrodinger(spec.variant) ? "q_im" : "sigma_im", np);
  } else {
    add_col(is_schrodinger(spec.variant) ? "q" : "sigma", np);
  }

  for (int j = 0; j < spec.experiments(); ++j) {
    if (!is_two_freq(spec.variant)) {
      add_col(blk("u", j), nv);
    } else if (form == JacobianForm::complex_pair) {
      add_col(blk("u0", j), nv);
      add_col(blk("u1", j), nv);
      add_col(blk("u1c", j), nv);
    } else {
      add_col(blk("u0", j), nv);
      add_col(blk("u1_re", j), nv);
      add_col(blk("u1_im", j), nv);
    }
  }

  for (int j = 0; j < spec.experiments(); ++j) {
    if (!is_two_freq(spec.variant)) {
      add_row(blk("H", j), nf);
      add_row(blk("bdry", j), nb);
      add_row(blk("balance", j), ni);
    } else if (form == JacobianForm::complex_pair) {
      add_row(blk("H0", j), nf);
      add_row(blk("H1", j), nf);
      add_row(blk("bdry0", j), nb);
      add_row(blk("bdry1", j), nb);
      add_row(blk("bdry1c", j), nb);
      add_row(blk("balance0", j), ni);
      add_row(blk("balance1", j), ni);
      add_row(blk("balance1c", j), ni);
    } else {
      add_row(blk("H0", j), nf);
      add_row(blk("H1", j), nf);
      add_row(blk("bdry0", j), nb);
      add_row(blk("bdry1_re", j), nb);
      add_row(blk("bdry1_im", j), nb);
      add_row(blk("balance0", j), ni);
      add_row(blk("balance1_re", j), ni);
      add_row(blk("balance1_im", j), ni);
    }
  }
  return layout;
}

namespace {

void check_states(const ProblemSpec& spec, const States& states) {
  if (static_cast<int>(states.size()) != spec.experiments())
    throw ValidationError("assemble_jacobian: states do not match the spec's experiments");
  for (const auto& st : states) {
    if (st.u0.size() != spec.net.vertex_count())
      throw ValidationError("assemble_jacobian: reference state has wrong length");
    if (is_two_freq(spec.variant) && st.u1.size() != spec.net.vertex_count())
      throw ValidationError("assemble_jacobian: omega1 reference state has wrong length");
  }
}

void assemble_real_conductivity(const ProblemSpec& spec, const States& states,
                                BlockWriter<double>& w) {
  const Network& net = spec.net;
  const Eigen::MatrixXd& d = net.incidence();
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap = laplacian<double>(net, spec.sigma);

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd g = d * states[j].u0;
    w.put(blk("H", j), "sigma", Eigen::MatrixXd(g.array().square().matrix().asDiagonal()));
    w.put(blk("H", j), blk("u", j), (2.0 * (spec.sigma.array() * g.array()).matrix().asDiagonal() * d).eval());
    w.put_selection(blk("bdry", j), blk("u", j), net.boundary_nodes());
    w.put(blk("balance", j), "sigma", (d.transpose() * g.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance", j), blk("u", j), lap(ii, Eigen::all).eval());
  }
}

void assemble_real_schrodinger(const ProblemSpec& spec, const States& states,
                               BlockWriter<double>& w) {
  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap = laplacian<double>(net, spec.sigma);

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd ui = states[j].u0(ii);
    w.put(blk("H", j), "q", Eigen::MatrixXd(ui.array().square().matrix().asDiagonal()));
    w.add_diagonal_at(blk("H", j), blk("u", j), ii, (2.0 * spec.q.array() * ui.array()).eval());
    w.put_selection(blk("bdry", j), blk("u", j), net.boundary_nodes());
    w.put(blk("balance", j), "q", Eigen::MatrixXd(ui.asDiagonal()));
    w.put(blk("balance", j), blk("u", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance", j), blk("u", j), ii, spec.q);
  }
}

void assemble_two_freq_conductivity_real(const ProblemSpec& spec, const States& states,
                                         BlockWriter<double>& w) {
  const Network& net = spec.net;
  const Eigen::MatrixXd& d = net.incidence();
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap_re = laplacian<double>(net, spec.sigma);
  const Eigen::MatrixXd lap_im = laplacian<double>(net, spec.sigma_im);
  const double om = spec.omega1;

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd g0 = d * states[j].u0;
    const Eigen::VectorXd ga = d * states[j].u1.real().matrix();
    const Eigen::VectorXd gb = d * states[j].u1.imag().matrix();

    w.put(blk("H0", j), "sigma_re", Eigen::MatrixXd(g0.array().square().matrix().asDiagonal()));
    w.put(blk("H0", j), blk("u0", j),
          (2.0 * (spec.sigma.array() * g0.array()).matrix().asDiagonal() * d).eval());

    w.put(blk("H1", j), "sigma_re",
          Eigen::MatrixXd((ga.array().square() + gb.array().square()).matrix().asDiagonal()));
    w.put(blk("H1", j), blk("u1_re", j),
          (2.0 * (spec.sigma.array() * ga.array()).matrix().asDiagonal() * d).eval());
    w.put(blk("H1", j), blk("u1_im", j),
          (2.0 * (spec.sigma.array() * gb.array()).matrix().asDiagonal() * d).eval());

    w.put_selection(blk("bdry0", j), blk("u0", j), net.boundary_nodes());
    w.put_selection(blk("bdry1_re", j), blk("u1_re", j), net.boundary_nodes());
    w.put_selection(blk("bdry1_im", j), blk("u1_im", j), net.boundary_nodes());

    w.put(blk("balance0", j), "sigma_re", (d.transpose() * g0.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance0", j), blk("u0", j), lap_re(ii, Eigen::all).eval());

    w.put(blk("balance1_re", j), "sigma_re",
          (d.transpose() * ga.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance1_re", j), "sigma_im",
          (-om * d.transpose() * gb.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance1_re", j), blk("u1_re", j), lap_re(ii, Eigen::all).eval());
    w.put(blk("balance1_re", j), blk("u1_im", j), (-om * lap_im)(ii, Eigen::all).eval());

    w.put(blk("balance1_im", j), "sigma_re",
          (d.transpose() * gb.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance1_im", j), "sigma_im",
          (om * d.transpose() * ga.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance1_im", j), blk("u1_re", j), (om * lap_im)(ii, Eigen::all).eval());
    w.put(blk("balance1_im", j), blk("u1_im", j), lap_re(ii, Eigen::all).eval());
  }
}

void assemble_two_freq_conductivity_complex(const ProblemSpec& spec, const States& states,
                                            BlockWriter<Cd>& w) {
  const Network& net = spec.net;
  const Eigen::MatrixXcd d = net.incidence().cast<Cd>();
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap_re = laplacian<double>(net, spec.sigma);
  const Eigen::MatrixXcd lap_c = laplacian<Cd>(net, spec.admittance().eval());
  const Eigen::MatrixXcd lap_cc = lap_c.conjugate();
  const Cd jom = 1i * spec.omega1;

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd g0 = net.incidence() * states[j].u0;
    const Eigen::VectorXcd g1 = net.incidence() * states[j].u1;
    const Eigen::VectorXcd g1c = g1.conjugate();
    const Eigen::VectorXcd sr = spec.sigma.cast<Cd>();

    w.put(blk("H0", j), "sigma_re", Eigen::MatrixXd(g0.array().square().matrix().asDiagonal()));
    w.put(blk("H0", j), blk("u0", j),
          (2.0 * (spec.sigma.array() * g0.array()).matrix().asDiagonal() * net.incidence()).eval());

    w.put(blk("H1", j), "sigma_re", Eigen::MatrixXcd((g1.array() * g1c.array()).matrix().asDiagonal()));
    w.put(blk("H1", j), blk("u1", j), ((sr.array() * g1c.array()).matrix().asDiagonal() * d).eval());
    w.put(blk("H1", j), blk("u1c", j), ((sr.array() * g1.array()).matrix().asDiagonal() * d).eval());

    w.put_selection(blk("bdry0", j), blk("u0", j), net.boundary_nodes());
    w.put_selection(blk("bdry1", j), blk("u1", j), net.boundary_nodes());
    w.put_selection(blk("bdry1c", j), blk("u1c", j), net.boundary_nodes());

    w.put(blk("balance0", j), "sigma_re",
          (net.incidence().transpose() * g0.asDiagonal())(ii, Eigen::all).eval());
    w.put(blk("balance0", j), blk("u0", j), lap_re(ii, Eigen::all).eval());

    const Eigen::MatrixXcd dtg1 = (d.transpose() * g1.asDiagonal())(ii, Eigen::all);
    w.put(blk("balance1", j), "sigma_re", dtg1);
    w.put(blk("balance1", j), "sigma_im", (jom * dtg1).eval());
    w.put(blk("balance1", j), blk("u1", j), lap_c(ii, Eigen::all).eval());

    const Eigen::MatrixXcd dtg1c = (d.transpose() * g1c.asDiagonal())(ii, Eigen::all);
    w.put(blk("balance1c", j), "sigma_re", dtg1c);
    w.put(blk("balance1c", j), "sigma_im", (-jom * dtg1c).eval());
    w.put(blk("balance1c", j), blk("u1c", j), lap_cc(ii, Eigen::all).eval());
  }
}

void assemble_two_freq_schrodinger_real(const ProblemSpec& spec, const States& states,
                                        BlockWriter<double>& w) {
  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap = laplacian<double>(net, spec.sigma);
  const double om = spec.omega1;

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd u0i = states[j].u0(ii);
    const Eigen::VectorXd ai = states[j].u1.real()(ii);
    const Eigen::VectorXd bi = states[j].u1.imag()(ii);

    w.put(blk("H0", j), "q_re", Eigen::MatrixXd(u0i.array().square().matrix().asDiagonal()));
    w.add_diagonal_at(blk("H0", j), blk("u0", j), ii, (2.0 * spec.q.array() * u0i.array()).eval());

    w.put(blk("H1", j), "q_re",
          Eigen::MatrixXd((ai.array().square() + bi.array().square()).matrix().asDiagonal()));
    w.add_diagonal_at(blk("H1", j), blk("u1_re", j), ii, (2.0 * spec.q.array() * ai.array()).eval());
    w.add_diagonal_at(blk("H1", j), blk("u1_im", j), ii, (2.0 * spec.q.array() * bi.array()).eval());

    w.put_selection(blk("bdry0", j), blk("u0", j), net.boundary_nodes());
    w.put_selection(blk("bdry1_re", j), blk("u1_re", j), net.boundary_nodes());
    w.put_selection(blk("bdry1_im", j), blk("u1_im", j), net.boundary_nodes());

    w.put(blk("balance0", j), "q_re", Eigen::MatrixXd(u0i.asDiagonal()));
    w.put(blk("balance0", j), blk("u0", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance0", j), blk("u0", j), ii, spec.q);

    w.put(blk("balance1_re", j), "q_re", Eigen::MatrixXd(ai.asDiagonal()));
    w.put(blk("balance1_re", j), "q_im", Eigen::MatrixXd((-om * bi).asDiagonal()));
    w.put(blk("balance1_re", j), blk("u1_re", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance1_re", j), blk("u1_re", j), ii, spec.q);
    w.add_diagonal_at(blk("balance1_re", j), blk("u1_im", j), ii, (-om * spec.q_im).eval());

    w.put(blk("balance1_im", j), "q_re", Eigen::MatrixXd(bi.asDiagonal()));
    w.put(blk("balance1_im", j), "q_im", Eigen::MatrixXd((om * ai).asDiagonal()));
    w.add_diagonal_at(blk("balance1_im", j), blk("u1_re", j), ii, (om * spec.q_im).eval());
    w.put(blk("balance1_im", j), blk("u1_im", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance1_im", j), blk("u1_im", j), ii, spec.q);
  }
}

void assemble_two_freq_schrodinger_complex(const ProblemSpec& spec, const States& states,
                                           BlockWriter<Cd>& w) {
  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lap = laplacian<double>(net, spec.sigma);
  const Eigen::VectorXcd q1 = spec.potential_omega1();
  const Cd jom = 1i * spec.omega1;

  for (int j = 0; j < spec.experiments(); ++j) {
    const Eigen::VectorXd u0i = states[j].u0(ii);
    const Eigen::VectorXcd u1i = states[j].u1(ii);
    const Eigen::VectorXcd u1ci = u1i.conjugate();

    w.put(blk("H0", j), "q_re", Eigen::MatrixXd(u0i.array().square().matrix().asDiagonal()));
    w.add_diagonal_at(blk("H0", j), blk("u0", j), ii, (2.0 * spec.q.array() * u0i.array()).eval());

    w.put(blk("H1", j), "q_re", Eigen::MatrixXcd((u1i.array() * u1ci.array()).matrix().asDiagonal()));
    w.add_diagonal_at(blk("H1", j), blk("u1", j), ii, (spec.q.cast<Cd>().array() * u1ci.array()).eval());
    w.add_diagonal_at(blk("H1", j), blk("u1c", j), ii, (spec.q.cast<Cd>().array() * u1i.array()).eval());

    w.put_selection(blk("bdry0", j), blk("u0", j), net.boundary_nodes());
    w.put_selection(blk("bdry1", j), blk("u1", j), net.boundary_nodes());
    w.put_selection(blk("bdry1c", j), blk("u1c", j), net.boundary_nodes());

    w.put(blk("balance0", j), "q_re", Eigen::MatrixXd(u0i.asDiagonal()));
    w.put(blk("balance0", j), blk("u0", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance0", j), blk("u0", j), ii, spec.q);

    w.put(blk("balance1", j), "q_re", Eigen::MatrixXcd(u1i.asDiagonal()));
    w.put(blk("balance1", j), "q_im", Eigen::MatrixXcd((jom * u1i).asDiagonal()));
    w.put(blk("balance1", j), blk("u1", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance1", j), blk("u1", j), ii, q1);

    w.put(blk("balance1c", j), "q_re", Eigen::MatrixXcd(u1ci.asDiagonal()));
    w.put(blk("balance1c", j), "q_im", Eigen::MatrixXcd((-jom * u1ci).asDiagonal()));
    w.put(blk("balance1c", j), blk("u1c", j), lap(ii, Eigen::all).eval());
    w.add_diagonal_at(blk("balance1c", j), blk("u1c", j), ii, q1.conjugate().eval());
  }
}

}  // namespace

AssembledJacobian assemble_jacobian(const ProblemSpec& spec, const States& states,
                                    JacobianForm form) {
  spec.validate();
  check_states(spec, states);

  AssembledJacobian jac;
  jac.form = form;
  jac.layout = jacobian_layout(spec, form);

  if (form == JacobianForm::complex_pair) {
    jac.complex_matrix = Eigen::MatrixXcd::Zero(jac.layout.rows_total, jac.layout.cols_total);
    BlockWriter<Cd> w(jac.complex_matrix, jac.layout);
    if (spec.variant == Variant::two_freq_conductivity)
      assemble_two_freq_conductivity_complex(spec, states, w);
    else
      assemble_two_freq_schrodinger_complex(spec, states, w);
    return jac;
  }

  jac.real_matrix = Eigen::MatrixXd::Zero(jac.layout.rows_total, jac.layout.cols_total);
  BlockWriter<double> w(jac.real_matrix, jac.layout);
  switch (spec.variant) {
    case Variant::real_conductivity: assemble_real_conductivity(spec, states, w); break;
    case Variant::real_schrodinger: assemble_real_schrodinger(spec, states, w); break;
    case Variant::two_freq_conductivity: assemble_two_freq_conductivity_real(spec, states, w); break;
    case Variant::two_freq_schrodinger: assemble_two_freq_schrodinger_real(spec, states, w); break;
  }
  return jac;
}

JacobianReport jacobian_report(const ProblemSpec& spec, const AssembledJacobian& jac,
                               double tau_rank) {
  JacobianReport rep;
  rep.variant = spec.variant;
  rep.form = jac.form;
  rep.rows = jac.rows();
  rep.cols = jac.cols();
  rep.layout = jac.layout;
  const RankInfo info = jac.form == JacobianForm::complex_pair
                            ? rank_and_cond(jac.complex_matrix, tau_rank)
                            : rank_and_cond(jac.real_matrix, tau_rank);
  rep.singular_values = info.singular_values;
  rep.rank = info.rank;
  rep.cond = info.cond;
  return rep;
}

Eigen::MatrixXd fd_jacobian(const ProblemSpec& spec, const States& states, double h) {
  if (!(h > 0)) throw ValidationError("fd_jacobian: step must be positive");
  const Eigen::VectorXd x0 = pack_unknowns(spec, states);
  const PowerData data = zero_data(spec);
  const int n = static_cast<int>(x0.size());
  const int m = static_cast<int>(residual(spec, x0, data).size());
  Eigen::MatrixXd jac(m, n);
  Eigen::VectorXd xp = x0, xm = x0;
  for (int k = 0; k < n; ++k) {
    xp[k] = x0[k] + h;
    xm[k] = x0[k] - h;
    jac.col(k) = (residual(spec, xp, data) - residual(spec, xm, data)) / (2.0 * h);
    xp[k] = x0[k];
    xm[k] = x0[k];
  }
  return jac;
}

Eigen::VectorXd sign_field(const Network& net, Variant variant, const ExperimentState& state,
                           double tol) {
  if (is_schrodinger(variant)) {
    const Eigen::VectorXd ui = state.u0(net.interior_nodes());
    Eigen::VectorXd s = Eigen::VectorXd::Ones(net.interior_count());
    for (int k : support<double>(ui, tol)) s[k] = -1.0;
    return s;
  }
  const Eigen::VectorXd g = gradient<double>(net, state.u0);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(net.edge_count());
  for (int k : support<double>(g, tol)) s[k] = -1.0;
  return s;
}

std::vector<Eigen::MatrixXcd> build_A_matrices(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::two_freq_conductivity)
    throw ValidationError("build_A_matrices: requires the two-frequency conductivity variant");
  check_states(spec, states);

  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXcd lap_c = laplacian<Cd>(net, spec.admittance().eval());
  const Eigen::MatrixXcd lii = lap_c(ii, ii);
  // grad restricted to interior columns: |E| x |I|
  const Eigen::MatrixXcd ki = net.incidence()(Eigen::all, ii).cast<Cd>();

  std::vector<Eigen::MatrixXcd> out;
  for (const auto& st : states) {
    const Eigen::VectorXcd g1 = net.incidence() * st.u1;
    const Eigen::MatrixXcd rhs = ki.transpose() * g1.asDiagonal().toDenseMatrix();
    const Eigen::MatrixXcd sol = solve_checked(lii, rhs, "build_A_matrices");
    out.push_back(-1i * g1.conjugate().asDiagonal().toDenseMatrix() * ki * sol);
  }
  return out;
}

std::vector<Eigen::MatrixXcd> build_B_matrices(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::two_freq_schrodinger)
    throw ValidationError("build_B_matrices: requires the two-frequency Schrodinger variant");
  check_states(spec, states);

  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  Eigen::MatrixXcd op = laplacian<double>(net, spec.sigma)(ii, ii).cast<Cd>();
  op += spec.potential_omega1().eval().asDiagonal();

  std::vector<Eigen::MatrixXcd> out;
  for (const auto& st : states) {
    const Eigen::VectorXcd u1i = st.u1(ii);
    const Eigen::MatrixXcd sol =
        solve_checked(op, u1i.asDiagonal().toDenseMatrix(), "build_B_matrices");
    out.push_back(-1i * u1i.conjugate().asDiagonal().toDenseMatrix() * sol);
  }
  return out;
}

namespace {

// Assumptions (i)-(iii) shared by the two real theorems.  cover_dim is |E|
// or |I|; base_op the operator whose invertibility makes the forward problem
// well posed; sign_op(j) the sign-weighted operator for experiment j.
template <typename CoverSupport, typename SignOp>
Certificate real_certificate(Variant variant, int n_experiments, int cover_dim,
                             const Eigen::MatrixXd& base_op, CoverSupport cover_support,
                             SignOp sign_op) {
  Certificate cert;
  cert.variant = variant;

  AssumptionCheck cover;
  cover.name = "support_cover";
  std::vector<bool> covered(cover_dim, false);
  for (int j = 0; j < n_experiments; ++j)
    for (int k : cover_support(j)) covered[k] = true;
  for (int k = 0; k < cover_dim; ++k)
    if (!covered[k]) cover.uncovered.push_back(k);
  cover.pass = cover.uncovered.empty();
  cert.assumptions.push_back(cover);

  AssumptionCheck base;
  base.name = "base_operator_invertible";
  const SmallestSV b = smallest_singular_value<Eigen::MatrixXd>(base_op);
  base.pass = b.invertible;
  base.margin = b.smin;
  cert.assumptions.push_back(base);

  AssumptionCheck sign;
  sign.name = "sign_operators_invertible";
  sign.pass = true;
  sign.margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_experiments; ++j) {
    const SmallestSV s = smallest_singular_value<Eigen::MatrixXd>(sign_op(j));
    sign.per_experiment.push_back(s.smin);
    sign.pass = sign.pass && s.invertible;
    sign.margin = std::min(sign.margin, s.smin);
  }
  cert.assumptions.push_back(sign);

  cert.pass = cover.pass && base.pass && sign.pass;
  return cert;
}

AssumptionCheck stack_rank_check(const char* name, const Eigen::MatrixXd& stack, int required) {
  AssumptionCheck chk;
  chk.name = name;
  const RankInfo info = rank_and_cond(stack);
  chk.required_rank = required;
  chk.achieved_rank = info.rank;
  chk.pass = info.rank >= required;
  chk.margin = static_cast<int>(info.singular_values.size()) >= required && required >= 1
                   ? info.singular_values(required - 1)
                   : 0.0;
  return chk;
}

}  // namespace

Certificate certify_real_conductivity(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::real_conductivity && spec.variant != Variant::two_freq_conductivity)
    throw ValidationError("certify_real_conductivity: conductivity variant required");
  check_states(spec, states);
  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd base = laplacian<double>(net, spec.sigma)(ii, ii);

  return real_certificate(
      Variant::real_conductivity, spec.experiments(), net.edge_count(), base,
      [&](int j) { return support<double>(gradient<double>(net, states[j].u0)); },
      [&](int j) {
        const Eigen::VectorXd s = sign_field(net, Variant::real_conductivity, states[j]);
        const Eigen::VectorXd w = s.array() * spec.sigma.array();
        return laplacian<double>(net, w)(ii, ii).eval();
      });
}

Certificate certify_real_schrodinger(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::real_schrodinger && spec.variant != Variant::two_freq_schrodinger)
    throw ValidationError("certify_real_schrodinger: Schrodinger variant required");
  check_states(spec, states);
  const Network& net = spec.net;
  const auto& ii = net.interior_nodes();
  const Eigen::MatrixXd lii = laplacian<double>(net, spec.sigma)(ii, ii);
  Eigen::MatrixXd base = lii;
  base += spec.q.asDiagonal();

  return real_certificate(
      Variant::real_schrodinger, spec.experiments(), net.interior_count(), base,
      [&](int j) { return support<double>(states[j].u0(ii).eval()); },
      [&](int j) {
        const Eigen::VectorXd s = sign_field(net, Variant::real_schrodinger, states[j]);
        Eigen::MatrixXd op = lii;
        op += (s.array() * spec.q.array()).matrix().asDiagonal();
        return op;
      });
}

Certificate certify_two_freq_conductivity(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::two_freq_conductivity)
    throw ValidationError("certify_two_freq_conductivity: wrong variant");
  check_states(spec, states);

  Certificate cert = certify_real_conductivity(spec, states);
  cert.variant = Variant::two_freq_conductivity;

  const auto& ii = spec.net.interior_nodes();
  AssumptionCheck wp;
  wp.name = "omega1_operator_invertible";
  const SmallestSV sv = smallest_singular_value<Eigen::MatrixXcd>(
      laplacian<Cd>(spec.net, spec.admittance().eval())(ii, ii).eval());
  wp.pass = sv.invertible;
  wp.margin = sv.smin;
  cert.assumptions.push_back(wp);

  const int ne = spec.net.edge_count();
  if (wp.pass) {
    const auto as = build_A_matrices(spec, states);
    Eigen::MatrixXd stack(ne * spec.experiments(), ne);
    for (int j = 0; j < spec.experiments(); ++j) stack.middleRows(j * ne, ne) = as[j].real();
    cert.assumptions.push_back(stack_rank_check("stack_real_rank", stack, ne));
  } else {
    AssumptionCheck chk;
    chk.name = "stack_real_rank";
    chk.required_rank = ne;
    chk.pass = false;
    cert.assumptions.push_back(chk);
  }

  cert.pass = true;
  for (const auto& a : cert.assumptions) cert.pass = cert.pass && a.pass;
  return cert;
}

Certificate certify_two_freq_schrodinger(const ProblemSpec& spec, const States& states) {
  if (spec.variant != Variant::two_freq_schrodinger)
    throw ValidationError("certify_two_freq_schrodinger: wrong variant");
  check_states(spec, states);

  Certificate cert = certify_real_schrodinger(spec, states);
  cert.variant = Variant::two_freq_schrodinger;
  const int ni = spec.net.interior_count();
  const auto& ii = spec.net.interior_nodes();

  AssumptionCheck nonvanishing;
  nonvanishing.name = "q_re_nonvanishing";
  const double qmax = spec.q.cwiseAbs().maxCoeff();
  for (int k = 0; k < ni; ++k)
    if (std::abs(spec.q[k]) <= kSupportTol * qmax) nonvanishing.uncovered.push_back(k);
  nonvanishing.pass = nonvanishing.uncovered.empty() && qmax > 0;
  nonvanishing.margin = spec.q.cwiseAbs().minCoeff();
  cert.assumptions.push_back(nonvanishing);

  AssumptionCheck wp;
  wp.name = "omega1_operator_invertible";
  Eigen::MatrixXcd op = laplacian<double>(spec.net, spec.sigma)(ii, ii).cast<Cd>();
  op += spec.potential_omega1().eval().asDiagonal();
  const SmallestSV sv = smallest_singular_value<Eigen::MatrixXcd>(op);
  wp.pass = sv.invertible;
  wp.margin = sv.smin;
  cert.assumptions.push_back(wp);

  if (wp.pass) {
    const auto bs = build_B_matrices(spec, states);
    Eigen::MatrixXd stack(ni * spec.experiments(), ni);
    for (int j = 0; j < spec.experiments(); ++j) stack.middleRows(j * ni, ni) = bs[j].real();
    cert.assumptions.push_back(stack_rank_check("stack_real_rank", stack, ni));
  } else {
    AssumptionCheck chk;
    chk.name = "stack_real_rank";
    chk.required_rank = ni;
    chk.pass = false;
    cert.assumptions.push_back(chk);
  }

  cert.pass = true;
  for (const auto& a : cert.assumptions) cert.pass = cert.pass && a.pass;
  return cert;
}

Certificate certify(const ProblemSpec& spec, const States& states) {
  switch (spec.variant) {
    case Variant::real_conductivity: return certify_real_conductivity(spec, states);
    case Variant::two_freq_conductivity: return certify_two_freq_conductivity(spec, states);
    case Variant::real_schrodinger: return certify_real_schrodinger(spec, states);
    case Variant::two_freq_schrodinger: return certify_two_freq_schrodinger(spec, states);
  }
  throw ValidationError("certify: unknown variant");
}

}  // namespace netohm
