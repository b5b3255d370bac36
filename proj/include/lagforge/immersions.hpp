#pragma once

// Chart builders: combine a profile trajectory with a certified seed map to
// produce the explicit Lagrangian immersions — into flat C^n (c = 0), as a
// horizontal lift into S^(2n+1) (c = +1), or as a horizontal lift into
// H^(2n+1)_1(-1) (c = -1, three branches selected by the sign of q_factor).
// Charts evaluate L(t, u_2, ..., u_n) with finite-difference jet access and
// export/import a sampled grid format for out-of-process verification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "lagforge/format.hpp"
#include "lagforge/grid_interp.hpp"
#include "lagforge/jets.hpp"
#include "lagforge/linalg.hpp"
#include "lagforge/profile.hpp"
#include "lagforge/rational.hpp"
#include "lagforge/seeds.hpp"

namespace lagforge {

/// A chart (t, u_2, ..., u_n) -> ambient complex coordinates. Built charts
/// are smooth (jets by finite differences on the evaluator); charts read back
/// from sample files are interpolants and only support first-order checks.
struct ImmersionChart {
  AmbientSpace ambient;
  int chart_dim = 2;  // n: one t-direction plus n-1 seed directions
  std::function<CVec(const RVec&)> eval;

  std::string builder;  // flat | cpn_lift | chn_lift | sampled | synthetic
  Rational d{1, 4};
  int curvature_c = 0;
  int branch = 0;  // 1|2|3 for c = -1 lifts, else 0
  std::string seed_id;

  bool smooth = true;
  bool domain_truncated = false;
  double t_lo = 0.0;
  double t_hi = 0.0;
  RVec u_lo;
  RVec u_hi;

  std::shared_ptr<const Trajectory> profile;  // null for sampled/synthetic
  std::shared_ptr<const SeedMap> seed;
  std::shared_ptr<const WPotential> w_potential;                // branch 3 only
  std::function<Jet2(const RVec&)> jets_override;               // sampled charts
  std::shared_ptr<const detail::TensorGrid> samples;            // sampled charts

  [[nodiscard]] CVec operator()(const RVec& x) const { return eval(x); }

  [[nodiscard]] Jet2 jets(const RVec& x, double step = 1e-4) const {
    if (jets_override) return jets_override(x);
    return jet2(eval, x, step);
  }

  void validate() const {
    ambient.validate();
    if (chart_dim < 2) throw std::invalid_argument("ImmersionChart: chart_dim must be >= 2");
    if (!eval) throw std::invalid_argument("ImmersionChart: missing evaluator");
    if (u_lo.size() != chart_dim - 1 || u_hi.size() != chart_dim - 1)
      throw std::invalid_argument("ImmersionChart: u-box must have chart_dim - 1 axes");
  }
};

namespace detail {

inline void require_certified(const SeedMap& seed, const char* builder) {
  seed.validate();
  if (!seed.certified)
    throw std::invalid_argument(std::string(builder) +
                                ": seed must be certified (run certify_seed first)");
}

inline void require_curvature(const Trajectory& traj, int c, const char* builder) {
  if (traj.params().curvature_c != c)
    throw std::invalid_argument(std::string(builder) + ": trajectory curvature must be " +
                                std::to_string(c) + " (got " +
                                std::to_string(traj.params().curvature_c) + ")");
}

}  // namespace detail

/// L(t, u) = e^{i theta} / (mu + i d lambda) * phi(u), an exact Lagrangian
/// immersion into flat C^n. The t-lines satisfy dL/dt = e^{i theta} phi.
[[nodiscard]] inline ImmersionChart build_flat(Trajectory traj, SeedMap seed) {
  detail::require_certified(seed, "build_flat");
  detail::require_curvature(traj, 0, "build_flat");
  if (seed.target != SeedTarget::sphere)
    throw std::invalid_argument("build_flat: seed must target the unit sphere");
  if (seed.ambient_complex_dim != seed.domain_dim + 1)
    throw std::invalid_argument("build_flat: sphere seed must have complex dimension n");
  const int n = seed.domain_dim + 1;
  const double dval = traj.params().d_value();

  ImmersionChart chart;
  chart.ambient = AmbientSpace::flat(n);
  chart.chart_dim = n;
  chart.builder = "flat";
  chart.d = traj.params().d;
  chart.curvature_c = 0;
  chart.seed_id = seed.id;
  chart.t_lo = traj.t_min();
  chart.t_hi = traj.t_max();
  chart.u_lo = seed.box_lo;
  chart.u_hi = seed.box_hi;
  auto traj_ptr = std::make_shared<const Trajectory>(std::move(traj));
  auto seed_ptr = std::make_shared<const SeedMap>(std::move(seed));
  chart.profile = traj_ptr;
  chart.seed = seed_ptr;
  chart.eval = [traj_ptr, seed_ptr, dval, n](const RVec& x) {
    const ProfileState s = traj_ptr->at(x[0]);
    const Complex denom(s.mu, dval * s.lambda);
    if (std::abs(denom) < 1e-12)
      throw std::domain_error("flat chart: mu + i d lambda vanished at t = " + fmt17(x[0]));
    const CVec phi = seed_ptr->value(x.tail(n - 1));
    return CVec(std::exp(Complex(0.0, s.theta)) / denom * phi);
  };
  chart.validate();
  return chart;
}

/// L = (e^{i d theta} phi, e^{i (1-d) theta} (i d lambda - mu)) normalized by
/// sqrt(1 + mu^2 + d^2 lambda^2): the horizontal Legendrian lift into
/// S^(2n+1) of the immersion into CP^n(4).
[[nodiscard]] inline ImmersionChart build_cpn_lift(Trajectory traj, SeedMap seed) {
  detail::require_certified(seed, "build_cpn_lift");
  detail::require_curvature(traj, 1, "build_cpn_lift");
  if (seed.target != SeedTarget::sphere)
    throw std::invalid_argument("build_cpn_lift: seed must target the unit sphere");
  if (seed.ambient_complex_dim != seed.domain_dim + 1)
    throw std::invalid_argument("build_cpn_lift: sphere seed must have complex dimension n");
  const int n = seed.domain_dim + 1;
  const double dval = traj.params().d_value();

  ImmersionChart chart;
  chart.ambient = AmbientSpace::sphere_lift(n);
  chart.chart_dim = n;
  chart.builder = "cpn_lift";
  chart.d = traj.params().d;
  chart.curvature_c = 1;
  chart.seed_id = seed.id;
  chart.t_lo = traj.t_min();
  chart.t_hi = traj.t_max();
  chart.u_lo = seed.box_lo;
  chart.u_hi = seed.box_hi;
  auto traj_ptr = std::make_shared<const Trajectory>(std::move(traj));
  auto seed_ptr = std::make_shared<const SeedMap>(std::move(seed));
  chart.profile = traj_ptr;
  chart.seed = seed_ptr;
  chart.eval = [traj_ptr, seed_ptr, dval, n](const RVec& x) {
    const ProfileState s = traj_ptr->at(x[0]);
    const double norm = std::sqrt(1.0 + s.mu * s.mu + dval * dval * s.lambda * s.lambda);
    const CVec phi = seed_ptr->value(x.tail(n - 1));
    CVec lift(n + 1);
    lift.head(n) = std::exp(Complex(0.0, dval * s.theta)) / norm * phi;
    lift[n] = std::exp(Complex(0.0, (1.0 - dval) * s.theta)) *
              Complex(-s.mu, dval * s.lambda) / norm;
    return lift;
  };
  chart.validate();
  return chart;
}

namespace detail {

/// Auxiliary scalar integrals for the third c = -1 branch, as states of the
/// extended system A' = mu, M' = (d lambda - i mu) e^{-2A}; A is the log of
/// |P| and M the accumulated null-direction coefficient. Node values are
/// cached on the trajectory grid at construction; per-cell sub-stepping is
/// doubled until two refinements agree within 1e-12. Nodes where the
/// integrand magnitude e^{-2A} exceeds the cap truncate the chart domain.
struct Branch3Aux {
  std::vector<Eigen::Vector3d> states;  // (A, Re M, Im M) per usable node
  bool truncated = false;

  [[nodiscard]] static Eigen::Vector3d rhs(const Trajectory& traj, double dval, double t,
                                           const Eigen::Vector3d& y) {
    const ProfileState s = traj.at(t);
    const double decay = std::exp(-2.0 * y[0]);
    return {s.mu, decay * dval * s.lambda, -decay * s.mu};
  }

  [[nodiscard]] static Eigen::Vector3d rk4_step(const Trajectory& traj, double dval, double t,
                                                const Eigen::Vector3d& y, double h) {
    const Eigen::Vector3d k1 = rhs(traj, dval, t, y);
    const Eigen::Vector3d k2 = rhs(traj, dval, t + h / 2.0, y + (h / 2.0) * k1);
    const Eigen::Vector3d k3 = rhs(traj, dval, t + h / 2.0, y + (h / 2.0) * k2);
    const Eigen::Vector3d k4 = rhs(traj, dval, t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  [[nodiscard]] static Eigen::Vector3d advance(const Trajectory& traj, double dval,
                                               double t_from, Eigen::Vector3d y, double t_to,
                                               int substeps) {
    const double h = (t_to - t_from) / substeps;
    for (int i = 0; i < substeps; ++i) y = rk4_step(traj, dval, t_from + i * h, y, h);
    return y;
  }

  [[nodiscard]] static Branch3Aux build(const Trajectory& traj, double cap) {
    const double dval = traj.params().d_value();
    Branch3Aux aux;
    aux.states.push_back(Eigen::Vector3d::Zero());
    const auto& nodes = traj.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double t0 = nodes[i].y.t, t1 = nodes[i + 1].y.t;
      Eigen::Vector3d coarse = advance(traj, dval, t0, aux.states.back(), t1, 1);
      int substeps = 2;
      for (;; substeps *= 2) {
        const Eigen::Vector3d fine = advance(traj, dval, t0, aux.states.back(), t1, substeps);
        const double err = (fine - coarse).lpNorm<Eigen::Infinity>();
        coarse = fine;
        if (err <= 1e-12 * (1.0 + fine.lpNorm<Eigen::Infinity>())) break;
        if (substeps >= 256)
          throw std::runtime_error(
              "build_chn_lift: branch-3 auxiliary integral failed to converge on [" +
              fmt17(t0) + ", " + fmt17(t1) + "]");
      }
      if (std::exp(-2.0 * coarse[0]) > cap) {
        aux.truncated = true;
        break;
      }
      aux.states.push_back(coarse);
    }
    return aux;
  }

  /// Aux state at arbitrary t: advance from the cached node of t's cell.
  [[nodiscard]] Eigen::Vector3d at(const Trajectory& traj, double t) const {
    if (states.size() == 1)
      return advance(traj, traj.params().d_value(), traj.t_start(), states.front(), t, 4);
    const double h = traj.step();
    auto cell = static_cast<std::ptrdiff_t>(std::floor((t - traj.t_start()) / h));
    const auto last = static_cast<std::ptrdiff_t>(states.size()) - 2;
    if (cell < 0) cell = 0;
    if (cell > last) cell = last;
    const double t_node = traj.nodes()[static_cast<std::size_t>(cell)].y.t;
    return advance(traj, traj.params().d_value(), t_node,
                   states[static_cast<std::size_t>(cell)], t, 4);
  }
};

}  // namespace detail

struct ChnLiftOptions {
  int branch = 0;               // 0 = auto-select from q_factor at the initial state
  double integrand_cap = 1e12;  // branch 3: |M'| above this truncates the domain
  double branch3_q_tolerance = 1e-10;
};

/// The c = -1 horizontal lift into H^(2n+1)_1(-1) (timelike slot first).
/// Branch 1 (q_factor > 0) takes an anti-de-Sitter seed, branch 2
/// (q_factor < 0) a sphere seed, branch 3 (q_factor = 0) a flat seed with its
/// w-potential.
[[nodiscard]] inline ImmersionChart build_chn_lift(Trajectory traj, SeedMap seed,
                                                   ChnLiftOptions opts = {},
                                                   std::shared_ptr<const WPotential> w = nullptr) {
  detail::require_certified(seed, "build_chn_lift");
  detail::require_curvature(traj, -1, "build_chn_lift");
  const ProfileParams& params = traj.params();
  const double q0 = q_factor(params, traj.nodes().front().y);

  int branch = opts.branch;
  if (branch == 0) branch = std::abs(q0) <= opts.branch3_q_tolerance ? 3 : (q0 > 0.0 ? 1 : 2);
  if (branch < 1 || branch > 3)
    throw std::invalid_argument("build_chn_lift: branch must be 1, 2, 3, or 0 for auto");

  if (branch == 1 || branch == 2) {
    const double sign = branch == 1 ? 1.0 : -1.0;
    for (const auto& node : traj.nodes()) {
      const double q = q_factor(params, node.y);
      if (!(sign * q > 0.0))
        throw std::runtime_error("build_chn_lift: branch " + std::to_string(branch) +
                                 " requires q_factor " + (branch == 1 ? "> 0" : "< 0") +
                                 " along the trajectory, but q_factor = " + fmt17(q) +
                                 " at t = " + fmt17(node.y.t));
    }
    const SeedTarget want = branch == 1 ? SeedTarget::ads : SeedTarget::sphere;
    if (seed.target != want)
      throw std::invalid_argument(
          std::string("build_chn_lift: branch ") + std::to_string(branch) + " requires " +
          (branch == 1 ? "an anti-de-Sitter (ads) seed" : "a sphere seed") + ", got a " +
          to_string(seed.target) + " seed");
    if (seed.ambient_complex_dim != seed.domain_dim + 1)
      throw std::invalid_argument("build_chn_lift: lift seed must have complex dimension n");
  } else {
    if (std::abs(q0) > opts.branch3_q_tolerance)
      throw std::runtime_error("build_chn_lift: branch 3 requires |q_factor| <= " +
                               fmt17(opts.branch3_q_tolerance) +
                               " at the initial state; got q_factor = " + fmt17(q0));
    if (seed.target != SeedTarget::flat)
      throw std::invalid_argument("build_chn_lift: branch 3 requires a flat seed");
    if (seed.ambient_complex_dim != seed.domain_dim)
      throw std::invalid_argument("build_chn_lift: flat seed must have complex dimension n-1");
    if (!w)
      throw std::invalid_argument("build_chn_lift: branch 3 requires the seed's WPotential");
  }

  const int n = seed.domain_dim + 1;
  const double dval = params.d_value();

  ImmersionChart chart;
  chart.ambient = AmbientSpace::ads_lift(n);
  chart.chart_dim = n;
  chart.builder = "chn_lift";
  chart.d = params.d;
  chart.curvature_c = -1;
  chart.branch = branch;
  chart.seed_id = seed.id;
  chart.u_lo = seed.box_lo;
  chart.u_hi = seed.box_hi;

  auto traj_ptr = std::make_shared<const Trajectory>(std::move(traj));
  auto seed_ptr = std::make_shared<const SeedMap>(std::move(seed));
  chart.profile = traj_ptr;
  chart.seed = seed_ptr;
  chart.t_lo = traj_ptr->t_min();
  chart.t_hi = traj_ptr->t_max();

  if (branch == 1 || branch == 2) {
    const bool first = branch == 1;
    chart.eval = [traj_ptr, seed_ptr, dval, n, first](const RVec& x) {
      const ProfileState s = traj_ptr->at(x[0]);
      const double core = s.mu * s.mu + dval * dval * s.lambda * s.lambda;
      const double q = 1.0 - core;
      if ((first && q <= 0.0) || (!first && q >= 0.0))
        throw std::domain_error("chn chart: q_factor changed sign at t = " + fmt17(x[0]) +
                                " (q = " + fmt17(q) + ")");
      const double norm = std::sqrt(std::abs(q));
      const CVec phi = seed_ptr->value(x.tail(n - 1));
      const Complex scalar =
          std::exp(Complex(0.0, (1.0 - dval) * s.theta)) * Complex(-s.mu, dval * s.lambda) / norm;
      CVec lift(n + 1);
      if (first) {
        lift.head(n) = std::exp(Complex(0.0, dval * s.theta)) / norm * phi;
        lift[n] = scalar;
      } else {
        lift[0] = scalar;
        lift.tail(n) = std::exp(Complex(0.0, dval * s.theta)) / norm * phi;
      }
      return lift;
    };
    chart.validate();
    return chart;
  }

  // Branch 3: L = P(t) (B0(u) + M(t) v) with P = e^{A + i d (theta-theta0)},
  // B0 = (W + i, phi, W), W = w + (i/2)|phi|^2, v = (1, 0, ..., 0, 1), and
  // (A, M) the cached auxiliary integrals. <L, L> = -1 propagates exactly
  // from q_factor = 0.
  auto aux = std::make_shared<const detail::Branch3Aux>(
      detail::Branch3Aux::build(*traj_ptr, opts.integrand_cap));
  chart.domain_truncated = aux->truncated;
  chart.w_potential = w;
  {
    const auto& nodes = traj_ptr->nodes();
    const double t_first = nodes.front().y.t;
    const double t_last = nodes[aux->states.size() - 1].y.t;
    chart.t_lo = std::min(t_first, t_last);
    chart.t_hi = std::max(t_first, t_last);
  }
  const double theta0 = traj_ptr->nodes().front().y.theta;
  const double t_lo = chart.t_lo, t_hi = chart.t_hi;
  const bool truncated = chart.domain_truncated;
  chart.eval = [traj_ptr, seed_ptr, w, aux, dval, n, theta0, t_lo, t_hi,
                truncated](const RVec& x) {
    const double t = x[0];
    const double tol = 1e-9 * (1.0 + std::abs(traj_ptr->step()));
    if (t < t_lo - tol || t > t_hi + tol)
      throw std::domain_error(std::string("chn branch-3 chart: t = ") + fmt17(t) +
                              " outside the valid interval [" + fmt17(t_lo) + ", " +
                              fmt17(t_hi) + "]" +
                              (truncated ? " (domain truncated by the integrand cap)" : ""));
    const ProfileState s = traj_ptr->at(t);
    const Eigen::Vector3d a = aux->at(*traj_ptr, t);
    const Complex big_p = std::exp(Complex(a[0], dval * (s.theta - theta0)));
    const Complex m_val(a[1], a[2]);
    const RVec u = x.tail(n - 1);
    const CVec phi = seed_ptr->value(u);
    const double wval = w->value(u);
    const Complex w_slot(wval, 0.5 * phi.squaredNorm());
    CVec lift(n + 1);
    lift[0] = w_slot + Complex(0.0, 1.0) + m_val;
    lift.segment(1, n - 1) = phi;
    lift[n] = w_slot + m_val;
    return CVec(big_p * lift);
  };
  chart.validate();
  return chart;
}

/// Phase-normalized fiber representative: multiplies by the unit phase that
/// makes the first slot of modulus > 1e-8 real positive. Two points on the
/// same Hopf fiber map to the same representative.
[[nodiscard]] inline CVec hopf_project(const CVec& z, const AmbientSpace& ambient) {
  ambient.validate();
  if (!ambient.is_lift())
    throw std::invalid_argument("hopf_project: ambient must be a lift target");
  const double constraint = real_inner(z, z, ambient.form);
  if (std::abs(constraint - ambient.constraint_value()) > 1e-8)
    throw std::invalid_argument("hopf_project: point violates the lift constraint (<z,z> = " +
                                fmt17(constraint) + ")");
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (std::abs(z[k]) > 1e-8) return CVec(z * (std::abs(z[k]) / z[k]));
  }
  throw std::invalid_argument("hopf_project: all slots below the 1e-8 modulus threshold");
}

// ---------------------------------------------------------------------------
// Chart sample files
//
// Line 1: a JSON object {builder, d, c, branch, seed, n, m} describing the
// chart; then one row per grid node, `t u2 ... un re(z1) im(z1) ...`,
// whitespace-separated on a rectangular grid.

inline void write_chart_samples(std::ostream& out, const ImmersionChart& chart,
                                const std::vector<std::vector<double>>& axes) {
  chart.validate();
  if (static_cast<int>(axes.size()) != chart.chart_dim)
    throw std::invalid_argument("write_chart_samples: one axis per chart dimension required");
  for (const auto& axis : axes)
    if (axis.size() < 2)
      throw std::invalid_argument("write_chart_samples: each axis needs >= 2 nodes");
  const int slots = chart.ambient.form.dim();
  nlohmann::json meta{{"builder", chart.builder}, {"d", to_string(chart.d)},
                      {"c", chart.curvature_c},  {"branch", chart.branch},
                      {"seed", chart.seed_id},   {"n", chart.chart_dim},
                      {"m", slots}};
  out << meta.dump() << "\n";
  const auto dims = axes.size();
  std::vector<std::size_t> idx(dims, 0);
  bool more = true;
  while (more) {
    RVec x(chart.chart_dim);
    for (std::size_t a = 0; a < dims; ++a) x[static_cast<Eigen::Index>(a)] = axes[a][idx[a]];
    const CVec z = chart.eval(x);
    for (int a = 0; a < chart.chart_dim; ++a) out << fmt17(x[a]) << ' ';
    for (int j = 0; j < slots; ++j) {
      out << fmt17(z[j].real()) << ' ' << fmt17(z[j].imag());
      out << (j + 1 == slots ? '\n' : ' ');
    }
    more = false;
    for (std::size_t a = dims; a-- > 0;) {
      if (++idx[a] < axes[a].size()) {
        more = true;
        break;
      }
      idx[a] = 0;
    }
  }
}

/// Uniform sampling axes covering the chart's valid box.
[[nodiscard]] inline std::vector<std::vector<double>> chart_axes(const ImmersionChart& chart,
                                                                 int t_count, int u_count) {
  if (t_count < 2 || u_count < 2)
    throw std::invalid_argument("chart_axes: need at least 2 samples per axis");
  std::vector<std::vector<double>> axes;
  std::vector<double> t_axis;
  for (int i = 0; i < t_count; ++i)
    t_axis.push_back(chart.t_lo + (chart.t_hi - chart.t_lo) * i / (t_count - 1));
  axes.push_back(std::move(t_axis));
  for (int a = 0; a + 1 < chart.chart_dim; ++a) {
    std::vector<double> u_axis;
    for (int i = 0; i < u_count; ++i)
      u_axis.push_back(chart.u_lo[a] + (chart.u_hi[a] - chart.u_lo[a]) * i / (u_count - 1));
    axes.push_back(std::move(u_axis));
  }
  return axes;
}

/// Reads a sampled chart. The result interpolates between samples (jets from
/// the interpolant) and is marked non-smooth: verification is restricted to
/// first-order checks at the stored nodes.
[[nodiscard]] inline ImmersionChart read_chart_samples(std::istream& in) {
  std::string line;
  auto next_content_line = [&](std::string& dst) {
    while (std::getline(in, dst)) {
      const auto pos = dst.find_first_not_of(" \t\r");
      if (pos == std::string::npos || dst[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_content_line(line)) throw std::runtime_error("chart file: missing JSON header");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("chart file: malformed JSON header: ") + e.what());
  }
  for (const char* key : {"builder", "d", "c", "branch", "seed", "n", "m"})
    if (!meta.contains(key))
      throw std::runtime_error(std::string("chart file: header missing key '") + key + "'");
  const int n = meta["n"].get<int>();
  const int m = meta["m"].get<int>();
  const int c = meta["c"].get<int>();
  if (n < 2 || m < n) throw std::runtime_error("chart file: header needs n >= 2 and m >= n");

  struct Row {
    RVec x;
    CVec z;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (next_content_line(line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != n + 2 * m)
      throw std::runtime_error("chart file: line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(n + 2 * m));
    Row row{RVec(n), CVec(m)};
    try {
      for (int a = 0; a < n; ++a) row.x[a] = parse_double(fields[static_cast<std::size_t>(a)]);
      for (int j = 0; j < m; ++j)
        row.z[j] = Complex(parse_double(fields[static_cast<std::size_t>(n + 2 * j)]),
                           parse_double(fields[static_cast<std::size_t>(n + 2 * j + 1)]));
    } catch (const std::exception& e) {
      throw std::runtime_error("chart file: line " + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("chart file: no data rows");

  auto grid = std::make_shared<detail::TensorGrid>();
  grid->value_dim = m;
  grid->axes.assign(static_cast<std::size_t>(n), {});
  for (int a = 0; a < n; ++a) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (const Row& row : rows) vals.push_back(row.x[a]);
    grid->axes[static_cast<std::size_t>(a)] = detail::TensorGrid::collect_axis(std::move(vals));
    if (grid->axes[static_cast<std::size_t>(a)].size() < 2)
      throw std::runtime_error("chart file: axis " + std::to_string(a) +
                               " needs at least 2 distinct values");
  }
  if (grid->node_count() != rows.size())
    throw std::runtime_error("chart file: " + std::to_string(rows.size()) +
                             " rows do not fill a rectangular grid of " +
                             std::to_string(grid->node_count()) + " nodes");
  grid->values.assign(grid->node_count(), CVec());
  for (const Row& row : rows) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) idx[static_cast<std::size_t>(a)] = grid->locate(a, row.x[a]);
    auto& slot = grid->values[grid->flat_index(idx)];
    if (slot.size() != 0) throw std::runtime_error("chart file: duplicate grid node");
    slot = row.z;
  }
  grid->validate();

  ImmersionChart chart;
  if (c == 0)
    chart.ambient = AmbientSpace::flat(m);
  else if (c == 1)
    chart.ambient = AmbientSpace::sphere_lift(m - 1);
  else if (c == -1)
    chart.ambient = AmbientSpace::ads_lift(m - 1);
  else
    throw std::runtime_error("chart file: c must be -1, 0, or +1");
  chart.chart_dim = n;
  chart.builder = "sampled:" + meta["builder"].get<std::string>();
  chart.d = parse_rational(meta["d"].get<std::string>());
  chart.curvature_c = c;
  chart.branch = meta["branch"].get<int>();
  chart.seed_id = meta["seed"].get<std::string>();
  chart.smooth = false;
  chart.t_lo = grid->axes[0].front();
  chart.t_hi = grid->axes[0].back();
  chart.u_lo = RVec(n - 1);
  chart.u_hi = RVec(n - 1);
  for (int a = 1; a < n; ++a) {
    chart.u_lo[a - 1] = grid->axes[static_cast<std::size_t>(a)].front();
    chart.u_hi[a - 1] = grid->axes[static_cast<std::size_t>(a)].back();
  }
  chart.samples = grid;
  chart.eval = [grid](const RVec& x) { return grid->jet(x).value; };
  chart.jets_override = [grid](const RVec& x) { return grid->jet(x); };
  chart.validate();
  return chart;
}

}  // namespace lagforge
