#pragma once

// Seed maps: the inner immersions phi consumed by the chart builders.
//
// Three target types: the unit sphere S^(2m-1) in C^m, the anti-de-Sitter
// quadric H^(2m-1)_1(-1) in C^m with one timelike slot, and flat C^m. Sphere
// and anti-de-Sitter seeds must be minimal Legendrian; flat seeds must be
// minimal Lagrangian and carry a potential w with dw/du_a = <i phi_a, phi>.
// certify_seed measures all of these on a grid; builders require it to pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lagforge/format.hpp"
#include "lagforge/grid_interp.hpp"
#include "lagforge/jets.hpp"
#include "lagforge/linalg.hpp"
#include "lagforge/parallel.hpp"

namespace lagforge {

enum class SeedTarget { sphere, ads, flat };

[[nodiscard]] constexpr const char* to_string(SeedTarget t) {
  switch (t) {
    case SeedTarget::sphere: return "sphere";
    case SeedTarget::ads: return "ads";
    case SeedTarget::flat: return "flat";
  }
  return "unknown";
}

[[nodiscard]] inline SeedTarget parse_seed_target(const std::string& s) {
  if (s == "sphere") return SeedTarget::sphere;
  if (s == "ads") return SeedTarget::ads;
  if (s == "flat") return SeedTarget::flat;
  throw std::invalid_argument("unknown seed target '" + s + "' (expected sphere|ads|flat)");
}

/// An immersion phi from a (domain_dim)-dimensional chart into its target,
/// with second-order jet access. box_lo/box_hi bound the default
/// certification grid; id names the seed in chart metadata.
struct SeedMap {
  std::string id;
  SeedTarget target = SeedTarget::sphere;
  int domain_dim = 1;
  int ambient_complex_dim = 1;
  std::function<Jet2(const RVec&)> jets;
  RVec box_lo;
  RVec box_hi;
  bool certified = false;

  [[nodiscard]] HermitianForm form() const {
    return target == SeedTarget::ads ? HermitianForm::lorentzian(ambient_complex_dim, 0)
                                     : HermitianForm::all_plus(ambient_complex_dim);
  }

  [[nodiscard]] CVec value(const RVec& u) const { return jets(u).value; }

  void validate() const {
    if (domain_dim < 1) throw std::invalid_argument("SeedMap: domain_dim must be >= 1");
    if (ambient_complex_dim < 1)
      throw std::invalid_argument("SeedMap: ambient_complex_dim must be >= 1");
    if (!jets) throw std::invalid_argument("SeedMap: missing jet evaluator");
    if (box_lo.size() != domain_dim || box_hi.size() != domain_dim)
      throw std::invalid_argument("SeedMap: sample box must match domain_dim");
  }
};

/// Uniform inclusive grid over the seed's sample box, per_axis points per axis.
[[nodiscard]] inline std::vector<RVec> uniform_grid(const RVec& lo, const RVec& hi,
                                                    int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("uniform_grid: per_axis must be >= 1");
  if (lo.size() != hi.size()) throw std::invalid_argument("uniform_grid: box size mismatch");
  const auto p = static_cast<int>(lo.size());
  std::size_t total = 1;
  for (int a = 0; a < p; ++a) total *= static_cast<std::size_t>(per_axis);
  std::vector<RVec> grid(total, RVec::Zero(p));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int a = p - 1; a >= 0; --a) {
      const auto j = static_cast<int>(rem % static_cast<std::size_t>(per_axis));
      rem /= static_cast<std::size_t>(per_axis);
      grid[idx][a] = per_axis == 1
                         ? lo[a]
                         : lo[a] + (hi[a] - lo[a]) * static_cast<double>(j) /
                               static_cast<double>(per_axis - 1);
    }
  }
  return grid;
}

[[nodiscard]] inline std::vector<RVec> default_grid(const SeedMap& seed, int per_axis = 5) {
  return uniform_grid(seed.box_lo, seed.box_hi, per_axis);
}

// ---------------------------------------------------------------------------
// Certification

struct SeedCertificate {
  std::optional<double> constraint_residual;      // | <phi,phi> -/+ 1 |; absent for flat
  std::optional<double> horizontality_residual;   // max_a |<i phi_a, phi>|; absent for flat
  double lagrangian_residual = 0.0;               // max_{a<b} |omega(phi_a, phi_b)|
  double minimality_residual = 0.0;               // |trace_g of target SFF|
  double min_metric_eigenvalue = 0.0;
  double max_metric_eigenvalue = 0.0;

  [[nodiscard]] bool certified(double tol = 1e-6) const {
    const auto ok = [tol](const std::optional<double>& r) { return !r || *r <= tol; };
    return ok(constraint_residual) && ok(horizontality_residual) &&
           lagrangian_residual <= tol && minimality_residual <= tol &&
           min_metric_eigenvalue > 0.0;
  }
};

namespace detail {

struct SeedPointResiduals {
  double constraint = 0.0;
  double horizontality = 0.0;
  double lagrangian = 0.0;
  double minimality = 0.0;
  double eig_min = std::numeric_limits<double>::infinity();
  double eig_max = 0.0;
};

[[nodiscard]] inline SeedPointResiduals seed_residuals_at(const SeedMap& seed, const RVec& u) {
  const Jet2 jet = seed.jets(u);
  const HermitianForm form = seed.form();
  const int p = seed.domain_dim;

  SeedPointResiduals r;
  RMat g(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) g(a, b) = real_inner(jet.first[a], jet.first[b], form);
  Eigen::SelfAdjointEigenSolver<RMat> eig(g);
  r.eig_min = eig.eigenvalues().minCoeff();
  r.eig_max = eig.eigenvalues().maxCoeff();
  if (!(r.eig_min > 0.0) || r.eig_max / r.eig_min > 1e8)
    throw std::runtime_error("certify_seed: degenerate induced metric at a grid point "
                             "(condition number " +
                             fmt17(r.eig_max / std::max(r.eig_min, 1e-300)) + ")");

  if (seed.target != SeedTarget::flat) {
    const double norm_sq = real_inner(jet.value, jet.value, form);
    const double want = seed.target == SeedTarget::sphere ? 1.0 : -1.0;
    r.constraint = std::abs(norm_sq - want);
    const CVec iphi = Complex(0.0, 1.0) * jet.value;
    for (int a = 0; a < p; ++a)
      r.horizontality = std::max(r.horizontality, std::abs(real_inner(jet.first[a], iphi, form)));
  }
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      r.lagrangian =
          std::max(r.lagrangian, std::abs(symplectic_form(jet.first[a], jet.first[b], form)));

  // Mean curvature in the target: trace_g of the flat Hessian minus the
  // Christoffel correction, then (sphere/ads) minus the radial component.
  // dg_c(a,b) = <phi_ca, phi_b> + <phi_a, phi_cb> is exact from the jets.
  const RMat g_inv = g.inverse();
  std::vector<RMat> dg(static_cast<std::size_t>(p), RMat(p, p));
  for (int c = 0; c < p; ++c)
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        dg[static_cast<std::size_t>(c)](a, b) = real_inner(jet.second[c][a], jet.first[b], form) +
                                                real_inner(jet.first[a], jet.second[c][b], form);
  CVec laplacian = CVec::Zero(seed.ambient_complex_dim);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      CVec term = jet.second[a][b];
      for (int c = 0; c < p; ++c) {
        double gamma = 0.0;  // Gamma^c_{ab}
        for (int e = 0; e < p; ++e)
          gamma += 0.5 * g_inv(c, e) *
                   (dg[static_cast<std::size_t>(a)](e, b) + dg[static_cast<std::size_t>(b)](e, a) -
                    dg[static_cast<std::size_t>(e)](a, b));
        term -= gamma * jet.first[c];
      }
      laplacian += g_inv(a, b) * term;
    }
  CVec mean = laplacian;
  if (seed.target != SeedTarget::flat) {
    const double radial = real_inner(laplacian, jet.value, form) /
                          real_inner(jet.value, jet.value, form);
    mean -= radial * jet.value;
  }
  r.minimality = mean.norm();
  return r;
}

}  // namespace detail

/// Evaluates the defining seed properties on a grid and reports the maxima.
/// Grid points run in parallel; the reported maxima reduce in index order.
[[nodiscard]] inline SeedCertificate certify_seed(const SeedMap& seed,
                                                  const std::vector<RVec>& grid) {
  seed.validate();
  if (grid.empty()) throw std::invalid_argument("certify_seed: empty grid");
  std::vector<detail::SeedPointResiduals> per_point(grid.size());
  parallel_for(grid.size(),
               [&](std::size_t i) { per_point[i] = detail::seed_residuals_at(seed, grid[i]); });
  SeedCertificate cert;
  cert.min_metric_eigenvalue = std::numeric_limits<double>::infinity();
  if (seed.target != SeedTarget::flat) {
    cert.constraint_residual = 0.0;
    cert.horizontality_residual = 0.0;
  }
  for (const auto& r : per_point) {
    if (cert.constraint_residual)
      *cert.constraint_residual = std::max(*cert.constraint_residual, r.constraint);
    if (cert.horizontality_residual)
      *cert.horizontality_residual = std::max(*cert.horizontality_residual, r.horizontality);
    cert.lagrangian_residual = std::max(cert.lagrangian_residual, r.lagrangian);
    cert.minimality_residual = std::max(cert.minimality_residual, r.minimality);
    cert.min_metric_eigenvalue = std::min(cert.min_metric_eigenvalue, r.eig_min);
    cert.max_metric_eigenvalue = std::max(cert.max_metric_eigenvalue, r.eig_max);
  }
  return cert;
}

[[nodiscard]] inline SeedCertificate certify_seed(const SeedMap& seed, int per_axis = 5) {
  return certify_seed(seed, default_grid(seed, per_axis));
}

// ---------------------------------------------------------------------------
// The w-potential for flat seeds

namespace detail {

/// Composite 10-point Gauss-Legendre quadrature, panels of width <= 1/4.
/// Fixed node placement keeps the result a smooth function of the endpoints,
/// so downstream finite differences see no quadrature noise.
template <typename F>
[[nodiscard]] double path_quadrature(const F& f, double a, double b) {
  static constexpr double nodes[5] = {0.14887433898163121, 0.43339539412924719,
                                      0.67940956829902441, 0.86506336668898451,
                                      0.97390652851717172};
  static constexpr double weights[5] = {0.29552422471475287, 0.26926671930999636,
                                        0.21908636251598204, 0.14945134915058059,
                                        0.066671344308688138};
  if (a == b) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / 0.25)));
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (int k = 0; k < 5; ++k)
      total += weights[k] * half * (f(mid - half * nodes[k]) + f(mid + half * nodes[k]));
  }
  return total;
}

}  // namespace detail

/// w with gradient F_a(u) = real_inner(i phi_a, phi), defined up to the value
/// w0 at the base point; evaluated by quadrature along axis-aligned segments.
class WPotential {
 public:
  WPotential(SeedMap seed, RVec base_point, double w0 = 0.0)
      : seed_(std::move(seed)), base_(std::move(base_point)), w0_(w0) {
    seed_.validate();
    if (seed_.target != SeedTarget::flat)
      throw std::invalid_argument("WPotential: seed must target flat C^m");
    if (base_.size() != seed_.domain_dim)
      throw std::invalid_argument("WPotential: base point dimension mismatch");
    for (int a = 0; a < seed_.domain_dim; ++a) order_.push_back(a);
  }

  [[nodiscard]] const SeedMap& seed() const { return seed_; }
  [[nodiscard]] const RVec& base_point() const { return base_; }

  [[nodiscard]] double gradient_component(const RVec& u, int axis) const {
    const Jet2 jet = seed_.jets(u);
    return real_inner(Complex(0.0, 1.0) * jet.first[static_cast<std::size_t>(axis)], jet.value);
  }

  [[nodiscard]] RVec gradient(const RVec& u) const {
    const Jet2 jet = seed_.jets(u);
    RVec grad(seed_.domain_dim);
    for (int a = 0; a < seed_.domain_dim; ++a)
      grad[a] = real_inner(Complex(0.0, 1.0) * jet.first[static_cast<std::size_t>(a)], jet.value);
    return grad;
  }

  /// d_b F_a, exact from the jets; symmetric exactly when phi is Lagrangian.
  [[nodiscard]] RMat gradient_jacobian(const RVec& u) const {
    const Jet2 jet = seed_.jets(u);
    const int p = seed_.domain_dim;
    RMat jac(p, p);
    const Complex i(0.0, 1.0);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        jac(a, b) = real_inner(i * jet.second[a][b], jet.value) +
                    real_inner(i * jet.first[static_cast<std::size_t>(a)],
                               jet.first[static_cast<std::size_t>(b)]);
    return jac;
  }

  /// d_b F_a - d_a F_b = 2 omega(phi_a, phi_b): zero exactly when Lagrangian.
  [[nodiscard]] double compatibility_residual(const RVec& u, int a, int b) const {
    const Jet2 jet = seed_.jets(u);
    return 2.0 * symplectic_form(jet.first[static_cast<std::size_t>(a)],
                                 jet.first[static_cast<std::size_t>(b)]);
  }

  [[nodiscard]] double value(const RVec& u) const { return value_with_axis_order(u, order_); }

  /// Path integral along axis-aligned segments in the given axis order.
  [[nodiscard]] double value_with_axis_order(const RVec& u, const std::vector<int>& order) const {
    if (static_cast<int>(order.size()) != seed_.domain_dim)
      throw std::invalid_argument("WPotential: axis order must be a permutation of all axes");
    double w = w0_;
    RVec cursor = base_;
    for (int axis : order) {
      if (axis < 0 || axis >= seed_.domain_dim)
        throw std::invalid_argument("WPotential: axis order out of range");
      const double from = cursor[axis], to = u[axis];
      if (from != to) {
        RVec point = cursor;
        const auto f = [&](double x) {
          point[axis] = x;
          return gradient_component(point, axis);
        };
        w += detail::path_quadrature(f, from, to);
      }
      cursor[axis] = to;
    }
    return w;
  }

 private:
  SeedMap seed_;
  RVec base_;
  double w0_;
  std::vector<int> order_;
};

/// Checks mixed-partial compatibility of the w-system on the grid, then
/// returns the potential. A curl above 1e-6 means phi is not Lagrangian.
[[nodiscard]] inline WPotential solve_w(const SeedMap& seed, const std::vector<RVec>& grid,
                                        RVec base_point, double w0 = 0.0) {
  WPotential w(seed, std::move(base_point), w0);
  double worst = 0.0;
  int worst_a = -1, worst_b = -1;
  for (const RVec& u : grid)
    for (int a = 0; a < seed.domain_dim; ++a)
      for (int b = a + 1; b < seed.domain_dim; ++b) {
        const double curl = std::abs(w.compatibility_residual(u, a, b));
        if (curl > worst) {
          worst = curl;
          worst_a = a;
          worst_b = b;
        }
      }
  if (worst > 1e-6)
    throw std::runtime_error(
        "solve_w: the w-system is incompatible (phi is not Lagrangian): "
        "|d_b F_a - d_a F_b| = " +
        fmt17(worst) + " at axis pair (" + std::to_string(worst_a) + ", " +
        std::to_string(worst_b) + ")");
  return w;
}

[[nodiscard]] inline WPotential solve_w(const SeedMap& seed, RVec base_point, double w0 = 0.0) {
  return solve_w(seed, default_grid(seed), std::move(base_point), w0);
}

// ---------------------------------------------------------------------------
// Catalog

/// phi(u) = (cos u, sin u): the n = 2 sphere seed (great circle in S^3).
[[nodiscard]] inline SeedMap circle_geodesic() {
  SeedMap seed;
  seed.id = "circle";
  seed.target = SeedTarget::sphere;
  seed.domain_dim = 1;
  seed.ambient_complex_dim = 2;
  seed.jets = [](const RVec& u) {
    Jet2 jet;
    jet.value = CVec(2);
    jet.value << std::cos(u[0]), std::sin(u[0]);
    jet.first = {CVec(2)};
    jet.first[0] << -std::sin(u[0]), std::cos(u[0]);
    jet.second = {{CVec(2)}};
    jet.second[0][0] = -jet.value;
    return jet;
  };
  seed.box_lo = RVec::Constant(1, 0.0);
  seed.box_hi = RVec::Constant(1, 6.0);
  seed.certified = true;
  return seed;
}

/// phi(u) = (cosh u, sinh u): the n = 2 anti-de-Sitter seed, <phi,phi> = -1.
[[nodiscard]] inline SeedMap hyperbolic_geodesic() {
  SeedMap seed;
  seed.id = "hyperbolic";
  seed.target = SeedTarget::ads;
  seed.domain_dim = 1;
  seed.ambient_complex_dim = 2;
  seed.jets = [](const RVec& u) {
    Jet2 jet;
    jet.value = CVec(2);
    jet.value << std::cosh(u[0]), std::sinh(u[0]);
    jet.first = {CVec(2)};
    jet.first[0] << std::sinh(u[0]), std::cosh(u[0]);
    jet.second = {{CVec(2)}};
    jet.second[0][0] = jet.value;
    return jet;
  };
  seed.box_lo = RVec::Constant(1, -1.0);
  seed.box_hi = RVec::Constant(1, 1.0);
  seed.certified = true;
  return seed;
}

/// phi(u) = u in C^1: the n = 2 flat seed; its w-potential is constant.
[[nodiscard]] inline SeedMap flat_line() {
  SeedMap seed;
  seed.id = "flat_line";
  seed.target = SeedTarget::flat;
  seed.domain_dim = 1;
  seed.ambient_complex_dim = 1;
  seed.jets = [](const RVec& u) {
    Jet2 jet;
    jet.value = CVec::Constant(1, Complex(u[0], 0.0));
    jet.first = {CVec::Constant(1, Complex(1.0, 0.0))};
    jet.second = {{CVec::Zero(1)}};
    return jet;
  };
  seed.box_lo = RVec::Constant(1, -1.0);
  seed.box_hi = RVec::Constant(1, 1.0);
  seed.certified = true;
  return seed;
}

/// phi(u) = u embedded as the real plane R^m in C^m (flat, totally geodesic).
[[nodiscard]] inline SeedMap flat_plane(int m) {
  if (m < 1) throw std::invalid_argument("flat_plane: dimension must be >= 1");
  SeedMap seed;
  seed.id = "flat_plane(" + std::to_string(m) + ")";
  seed.target = SeedTarget::flat;
  seed.domain_dim = m;
  seed.ambient_complex_dim = m;
  seed.jets = [m](const RVec& u) {
    Jet2 jet;
    jet.value = CVec::Zero(m);
    for (int j = 0; j < m; ++j) jet.value[j] = Complex(u[j], 0.0);
    jet.first.assign(static_cast<std::size_t>(m), CVec::Zero(m));
    for (int a = 0; a < m; ++a) jet.first[static_cast<std::size_t>(a)][a] = Complex(1.0, 0.0);
    jet.second.assign(static_cast<std::size_t>(m),
                      std::vector<CVec>(static_cast<std::size_t>(m), CVec::Zero(m)));
    return jet;
  };
  seed.box_lo = RVec::Constant(m, -1.0);
  seed.box_hi = RVec::Constant(m, 1.0);
  seed.certified = true;
  return seed;
}

namespace detail {

/// Phase matrix for the torus seed: sqrt(n) times the n-1 Helmert columns
/// h_k = (1,...,1,-k,0,...,0)/sqrt(k(k+1)). Columns are orthogonal to
/// (1,...,1), A^T A = n I, and every row has squared norm n-1.
[[nodiscard]] inline RMat torus_phase_matrix(int n) {
  RMat a = RMat::Zero(n, n - 1);
  for (int k = 1; k <= n - 1; ++k) {
    const double scale = std::sqrt(static_cast<double>(n) /
                                   (static_cast<double>(k) * static_cast<double>(k + 1)));
    for (int j = 0; j < k; ++j) a(j, k - 1) = scale;
    a(k, k - 1) = -static_cast<double>(k) * scale;
  }
  return a;
}

[[nodiscard]] inline SeedMap torus_seed_from_matrix(std::string id, int n, const RMat& a,
                                                    bool certified) {
  SeedMap seed;
  seed.id = std::move(id);
  seed.target = SeedTarget::sphere;
  seed.domain_dim = n - 1;
  seed.ambient_complex_dim = n;
  const auto matrix = std::make_shared<const RMat>(a);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  seed.jets = [matrix, n, scale](const RVec& u) {
    const RVec theta = (*matrix) * u;
    Jet2 jet;
    jet.value = CVec(n);
    for (int j = 0; j < n; ++j)
      jet.value[j] = scale * std::exp(Complex(0.0, theta[j]));
    const int p = n - 1;
    jet.first.assign(static_cast<std::size_t>(p), CVec(n));
    jet.second.assign(static_cast<std::size_t>(p),
                      std::vector<CVec>(static_cast<std::size_t>(p), CVec(n)));
    const Complex i(0.0, 1.0);
    for (int al = 0; al < p; ++al)
      for (int j = 0; j < n; ++j)
        jet.first[static_cast<std::size_t>(al)][j] = i * (*matrix)(j, al) * jet.value[j];
    for (int al = 0; al < p; ++al)
      for (int be = 0; be < p; ++be)
        for (int j = 0; j < n; ++j)
          jet.second[static_cast<std::size_t>(al)][static_cast<std::size_t>(be)][j] =
              -(*matrix)(j, al) * (*matrix)(j, be) * jet.value[j];
    return jet;
  };
  seed.box_lo = RVec::Constant(n - 1, 0.0);
  seed.box_hi = RVec::Constant(n - 1, 1.0);
  seed.certified = certified;
  return seed;
}

}  // namespace detail

/// The flat minimal Legendrian torus phi = (1/sqrt(n)) (e^{i theta_1}, ...,
/// e^{i theta_n}) with theta = A u, sum_j theta_j = 0, induced metric the
/// identity. Serves as the sphere seed for every n >= 3.
[[nodiscard]] inline SeedMap legendrian_torus(int n) {
  if (n < 3) throw std::invalid_argument("legendrian_torus: requires n >= 3");
  return detail::torus_seed_from_matrix("legendrian_torus(" + std::to_string(n) + ")", n,
                                        detail::torus_phase_matrix(n), true);
}

/// Negative control: the torus with its first phase row scaled by 1.01, which
/// destroys both the zero phase-sum and the equal row norms; certification
/// must fail (minimality and horizontality).
[[nodiscard]] inline SeedMap perturbed_torus(int n) {
  if (n < 3) throw std::invalid_argument("perturbed_torus: requires n >= 3");
  RMat a = detail::torus_phase_matrix(n);
  a.row(0) *= 1.01;
  return detail::torus_seed_from_matrix("perturbed_torus(" + std::to_string(n) + ")", n, a,
                                        false);
}

namespace detail {

/// Components of the spherical chart on S^(m) in R^(m+1) as products of
/// univariate sin/cos factors; factor codes: 0 -> 1, 1 -> sin, 2 -> cos.
struct FactorTable {
  // codes[j][a] is the factor of component j in angle a.
  std::vector<std::vector<int>> codes;

  [[nodiscard]] static double eval(int code, double x, int deriv) {
    switch (code) {
      case 0: return deriv == 0 ? 1.0 : 0.0;
      case 1: return deriv == 0 ? std::sin(x) : deriv == 1 ? std::cos(x) : -std::sin(x);
      default: return deriv == 0 ? std::cos(x) : deriv == 1 ? -std::sin(x) : -std::cos(x);
    }
  }

  [[nodiscard]] double component(int j, const RVec& v, const std::vector<int>& derivs) const {
    double prod = 1.0;
    for (std::size_t a = 0; a < codes[static_cast<std::size_t>(j)].size(); ++a)
      prod *= eval(codes[static_cast<std::size_t>(j)][a], v[static_cast<Eigen::Index>(a)],
                   derivs[a]);
    return prod;
  }
};

[[nodiscard]] inline FactorTable spherical_chart(int angles) {
  // Component j < angles: sin v_1 ... sin v_j cos v_{j+1}; last: all sines.
  FactorTable table;
  table.codes.assign(static_cast<std::size_t>(angles) + 1,
                     std::vector<int>(static_cast<std::size_t>(angles), 0));
  for (int j = 0; j <= angles; ++j) {
    for (int a = 0; a < std::min(j, angles); ++a)
      table.codes[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] = 1;
    if (j < angles) table.codes[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 2;
  }
  return table;
}

}  // namespace detail

/// The totally geodesic real hyperbolic (n-1)-space inside H^(2n-1)_1(-1):
/// phi(u) = (cosh u_1, sinh u_1 * Omega(u_2, ..., u_{n-1})) with Omega the
/// spherical chart on S^(n-2). Minimal Legendrian anti-de-Sitter seed for
/// n >= 3; the chart needs sinh u_1 != 0 and interior sphere angles.
[[nodiscard]] inline SeedMap ads_hyperboloid(int n) {
  if (n < 3) throw std::invalid_argument("ads_hyperboloid: requires n >= 3");
  SeedMap seed;
  seed.id = "ads_hyperboloid(" + std::to_string(n) + ")";
  seed.target = SeedTarget::ads;
  seed.domain_dim = n - 1;
  seed.ambient_complex_dim = n;
  const int angles = n - 2;
  const auto table = std::make_shared<const detail::FactorTable>(detail::spherical_chart(angles));
  seed.jets = [table, n, angles](const RVec& u) {
    const double r = u[0];
    const RVec v = u.tail(angles);
    const double ch = std::cosh(r), sh = std::sinh(r);
    const int p = n - 1;
    std::vector<int> derivs(static_cast<std::size_t>(angles), 0);
    const auto omega = [&](int j, int da, int db) {
      std::fill(derivs.begin(), derivs.end(), 0);
      if (da >= 0) ++derivs[static_cast<std::size_t>(da)];
      if (db >= 0) ++derivs[static_cast<std::size_t>(db)];
      return table->component(j, v, derivs);
    };
    Jet2 jet;
    jet.value = CVec::Zero(n);
    jet.first.assign(static_cast<std::size_t>(p), CVec::Zero(n));
    jet.second.assign(static_cast<std::size_t>(p),
                      std::vector<CVec>(static_cast<std::size_t>(p), CVec::Zero(n)));
    jet.value[0] = ch;
    jet.first[0][0] = sh;
    jet.second[0][0][0] = ch;
    for (int j = 0; j <= angles; ++j) {
      const int slot = 1 + j;
      jet.value[slot] = sh * omega(j, -1, -1);
      jet.first[0][slot] = ch * omega(j, -1, -1);
      jet.second[0][0][slot] = sh * omega(j, -1, -1);
      for (int a = 0; a < angles; ++a) {
        jet.first[static_cast<std::size_t>(1 + a)][slot] = sh * omega(j, a, -1);
        jet.second[0][static_cast<std::size_t>(1 + a)][slot] = ch * omega(j, a, -1);
        jet.second[static_cast<std::size_t>(1 + a)][0][slot] = ch * omega(j, a, -1);
        for (int b = 0; b < angles; ++b)
          jet.second[static_cast<std::size_t>(1 + a)][static_cast<std::size_t>(1 + b)][slot] =
              sh * omega(j, a, b);
      }
    }
    return jet;
  };
  seed.box_lo = RVec::Constant(n - 1, 0.4);
  seed.box_hi = RVec::Constant(n - 1, 1.2);
  seed.certified = true;
  return seed;
}

/// Looks up a catalog seed by name: circle | hyperbolic | flat_line |
/// legendrian_torus | perturbed_torus | ads_hyperboloid | flat_plane
/// (the last four parametrized by n).
[[nodiscard]] inline SeedMap catalog_seed(const std::string& name, int n) {
  if (name == "circle") return circle_geodesic();
  if (name == "hyperbolic") return hyperbolic_geodesic();
  if (name == "flat_line") return flat_line();
  if (name == "legendrian_torus" || name == "torus") return legendrian_torus(n);
  if (name == "perturbed_torus") return perturbed_torus(n);
  if (name == "ads_hyperboloid") return ads_hyperboloid(n);
  if (name == "flat_plane") return flat_plane(n - 1);
  throw std::invalid_argument("unknown catalog seed '" + name + "'");
}

// ---------------------------------------------------------------------------
// Sampled-seed file I/O
//
// Header line: n=<int> target=<sphere|ads|flat> dims=<int>
// then one row per grid node: u2 ... un re(z1) im(z1) ... re(zm) im(zm),
// whitespace-separated decimal text on a rectangular grid (any row order).
// dims is the complex dimension m of the target space. Jets come from
// tensor-product Lagrange interpolation on up to 6 nodes per axis.

inline void write_seed_samples(std::ostream& out, const SeedMap& seed,
                               const std::vector<std::vector<double>>& axes) {
  seed.validate();
  if (static_cast<int>(axes.size()) != seed.domain_dim)
    throw std::invalid_argument("write_seed_samples: one axis per domain dimension required");
  for (const auto& axis : axes)
    if (axis.empty()) throw std::invalid_argument("write_seed_samples: empty axis");
  out << "n=" << seed.domain_dim + 1 << " target=" << to_string(seed.target)
      << " dims=" << seed.ambient_complex_dim << "\n";
  const auto p = static_cast<std::size_t>(seed.domain_dim);
  std::vector<std::size_t> idx(p, 0);
  bool more = true;
  while (more) {
    RVec u(seed.domain_dim);
    for (std::size_t a = 0; a < p; ++a) u[static_cast<Eigen::Index>(a)] = axes[a][idx[a]];
    const CVec z = seed.value(u);
    for (int a = 0; a < seed.domain_dim; ++a) out << fmt17(u[a]) << ' ';
    for (int j = 0; j < seed.ambient_complex_dim; ++j) {
      out << fmt17(z[j].real()) << ' ' << fmt17(z[j].imag());
      out << (j + 1 == seed.ambient_complex_dim ? '\n' : ' ');
    }
    more = false;
    for (std::size_t a = p; a-- > 0;) {
      if (++idx[a] < axes[a].size()) {
        more = true;
        break;
      }
      idx[a] = 0;
    }
  }
}

/// Reads a sampled seed and wraps it in tensor-product Lagrange interpolation
/// (window of up to 6 nodes per axis, so interpolation order >= 4 whenever
/// the grid has >= 5 nodes per axis). The result is not certified; run
/// certify_seed before using it in a builder.
[[nodiscard]] inline SeedMap read_seed_samples(std::istream& in) {
  std::string line;
  auto next_content_line = [&](std::string& dst) {
    while (std::getline(in, dst)) {
      const auto pos = dst.find_first_not_of(" \t\r");
      if (pos == std::string::npos || dst[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_content_line(line)) throw std::runtime_error("seed file: missing header");

  int n = 0, m = 0;
  std::optional<SeedTarget> target;
  for (const std::string& field : split_fields(line)) {
    const auto eq = field.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("seed file: malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "n")
      n = static_cast<int>(parse_double(val));
    else if (key == "target")
      target = parse_seed_target(val);
    else if (key == "dims")
      m = static_cast<int>(parse_double(val));
    else
      throw std::runtime_error("seed file: unknown header key '" + key + "'");
  }
  if (n < 2 || m < 1 || !target)
    throw std::runtime_error("seed file: header must set n>=2, target, dims>=1");
  const int p = n - 1;
  if ((*target == SeedTarget::flat && m != n - 1) || (*target != SeedTarget::flat && m != n))
    throw std::runtime_error("seed file: dims inconsistent with target (sphere/ads need dims=n, "
                             "flat needs dims=n-1)");

  struct Row {
    RVec u;
    CVec z;
  };
  std::vector<Row> rows;
  while (next_content_line(line)) {
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != p + 2 * m)
      throw std::runtime_error("seed file: row has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(p + 2 * m));
    Row row{RVec(p), CVec(m)};
    for (int a = 0; a < p; ++a) row.u[a] = parse_double(fields[static_cast<std::size_t>(a)]);
    for (int j = 0; j < m; ++j)
      row.z[j] = Complex(parse_double(fields[static_cast<std::size_t>(p + 2 * j)]),
                         parse_double(fields[static_cast<std::size_t>(p + 2 * j + 1)]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("seed file: no data rows");

  auto grid = std::make_shared<detail::TensorGrid>();
  grid->value_dim = m;
  grid->axes.assign(static_cast<std::size_t>(p), {});
  for (int a = 0; a < p; ++a) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (const Row& row : rows) vals.push_back(row.u[a]);
    grid->axes[static_cast<std::size_t>(a)] = detail::TensorGrid::collect_axis(std::move(vals));
    if (grid->axes[static_cast<std::size_t>(a)].size() < 2)
      throw std::runtime_error("seed file: axis " + std::to_string(a) +
                               " needs at least 2 distinct values");
  }
  const std::size_t expected = grid->node_count();
  if (expected != rows.size())
    throw std::runtime_error("seed file: " + std::to_string(rows.size()) +
                             " rows do not fill a rectangular grid of " +
                             std::to_string(expected) + " nodes");
  grid->values.assign(expected, CVec());
  for (const Row& row : rows) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(p));
    for (int a = 0; a < p; ++a) idx[static_cast<std::size_t>(a)] = grid->locate(a, row.u[a]);
    auto& slot = grid->values[grid->flat_index(idx)];
    if (slot.size() != 0) throw std::runtime_error("seed file: duplicate grid node");
    slot = row.z;
  }
  grid->validate();

  SeedMap seed;
  seed.id = "file_seed";
  seed.target = *target;
  seed.domain_dim = p;
  seed.ambient_complex_dim = m;
  seed.jets = [grid](const RVec& u) { return grid->jet(u); };
  seed.box_lo = RVec(p);
  seed.box_hi = RVec(p);
  for (int a = 0; a < p; ++a) {
    seed.box_lo[a] = grid->axes[static_cast<std::size_t>(a)].front();
    seed.box_hi[a] = grid->axes[static_cast<std::size_t>(a)].back();
  }
  seed.certified = false;
  return seed;
}

}  // namespace lagforge
