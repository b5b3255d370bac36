#pragma once

// The classifying profile system
//
//   lambda' = ((1-2d)/d) lambda mu
//   mu'     = -c - mu^2 - d(1-d) lambda^2
//   theta'  = lambda
//
// integrated with a fixed-step classical RK4 scheme (step-doubling error
// monitor, blow-up guards) and quintic-Hermite dense output, plus the closed
// forms and first integrals used to cross-check it.

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lagforge/format.hpp"
#include "lagforge/rational.hpp"

namespace lagforge {

/// Ambient curvature c in {-1, 0, +1} and the warping ratio d (exact).
/// d = 0 and d = 1/2 are excluded poles of the system.
struct ProfileParams {
  int curvature_c = 0;
  Rational d{1, 4};

  void validate() const {
    if (curvature_c < -1 || curvature_c > 1)
      throw std::invalid_argument("ProfileParams: curvature must be -1, 0, or +1");
    if (d == Rational(0) || d == Rational(1, 2))
      throw std::invalid_argument("ProfileParams: d must avoid 0 and 1/2");
  }

  [[nodiscard]] double d_value() const { return to_double(d); }
  /// (1-2d)/d, the coefficient of lambda*mu in lambda'.
  [[nodiscard]] double lambda_rate_coeff() const {
    return to_double((Rational(1) - 2 * d) / d);
  }
};

struct ProfileState {
  double t = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double theta = 0.0;
};

struct ProfileRates {
  double dlambda = 0.0;
  double dmu = 0.0;
  double dtheta = 0.0;
};

[[nodiscard]] inline ProfileRates ode_rhs(const ProfileParams& p, const ProfileState& s) {
  p.validate();
  const double d = p.d_value();
  return ProfileRates{
      .dlambda = p.lambda_rate_coeff() * s.lambda * s.mu,
      .dmu = -static_cast<double>(p.curvature_c) - s.mu * s.mu - d * (1.0 - d) * s.lambda * s.lambda,
      .dtheta = s.lambda,
  };
}

namespace detail {

/// Time-derivative of ode_rhs along the flow; exact, used for dense output.
[[nodiscard]] inline ProfileRates ode_rhs_prime(const ProfileParams& p, const ProfileState& s,
                                                const ProfileRates& r) {
  const double d = p.d_value();
  return ProfileRates{
      .dlambda = p.lambda_rate_coeff() * (r.dlambda * s.mu + s.lambda * r.dmu),
      .dmu = -2.0 * s.mu * r.dmu - 2.0 * d * (1.0 - d) * s.lambda * r.dlambda,
      .dtheta = r.dlambda,
  };
}

[[nodiscard]] inline ProfileState rk4_step(const ProfileParams& p, const ProfileState& y,
                                           double h) {
  const auto advance = [&](const ProfileState& base, const ProfileRates& k, double factor) {
    return ProfileState{base.t + factor, base.lambda + factor * k.dlambda,
                        base.mu + factor * k.dmu, base.theta + factor * k.dtheta};
  };
  const ProfileRates k1 = ode_rhs(p, y);
  const ProfileRates k2 = ode_rhs(p, advance(y, k1, h / 2.0));
  const ProfileRates k3 = ode_rhs(p, advance(y, k2, h / 2.0));
  const ProfileRates k4 = ode_rhs(p, advance(y, k3, h));
  return ProfileState{
      y.t + h,
      y.lambda + h / 6.0 * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda),
      y.mu + h / 6.0 * (k1.dmu + 2.0 * k2.dmu + 2.0 * k3.dmu + k4.dmu),
      y.theta + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta)};
}

/// Quintic Hermite: matches value, first, and second derivative at both ends.
/// Returns the interpolant at fraction s in [0, 1] of a cell of width h.
[[nodiscard]] inline double quintic(double y0, double d0, double s0, double y1, double d1,
                                    double s1, double h, double s) {
  const double D0 = h * d0, S0 = h * h * s0, D1 = h * d1, S1 = h * h * s1;
  const double a0 = y0;
  const double a1 = D0;
  const double a2 = 0.5 * S0;
  const double a3 = -10.0 * y0 - 6.0 * D0 - 1.5 * S0 + 10.0 * y1 - 4.0 * D1 + 0.5 * S1;
  const double a4 = 15.0 * y0 + 8.0 * D0 + 1.5 * S0 - 15.0 * y1 + 7.0 * D1 - S1;
  const double a5 = -6.0 * y0 - 3.0 * D0 - 0.5 * S0 + 6.0 * y1 - 3.0 * D1 + 0.5 * S1;
  return a0 + s * (a1 + s * (a2 + s * (a3 + s * (a4 + s * a5))));
}

}  // namespace detail

enum class Truncation { none, lambda_floor, magnitude_cap, step_error };

[[nodiscard]] constexpr const char* to_string(Truncation t) {
  switch (t) {
    case Truncation::none: return "none";
    case Truncation::lambda_floor: return "lambda_floor";
    case Truncation::magnitude_cap: return "magnitude_cap";
    case Truncation::step_error: return "step_error";
  }
  return "unknown";
}

struct IntegrateOptions {
  double step = 1e-3;
  double error_tolerance = 1e-10;  // per-step, relative to 1 + |component|
  double lambda_floor = 1e-9;
  double magnitude_cap = 1e9;
};

/// An integral curve of the profile system on a uniform t-grid with dense
/// output between samples. Nodes store the state together with its exact
/// first and second time-derivatives.
class Trajectory {
 public:
  struct Node {
    ProfileState y;
    ProfileRates d1;
    ProfileRates d2;
  };

  Trajectory(ProfileParams params, std::vector<Node> nodes, double step, Truncation truncation)
      : params_(std::move(params)),
        nodes_(std::move(nodes)),
        step_(step),
        truncation_(truncation) {
    if (nodes_.empty()) throw std::invalid_argument("Trajectory: no samples");
  }

  [[nodiscard]] const ProfileParams& params() const { return params_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] Truncation truncation() const { return truncation_; }
  [[nodiscard]] bool truncated() const { return truncation_ != Truncation::none; }

  [[nodiscard]] double t_start() const { return nodes_.front().y.t; }
  [[nodiscard]] double t_end() const { return nodes_.back().y.t; }
  [[nodiscard]] double t_min() const { return std::min(t_start(), t_end()); }
  [[nodiscard]] double t_max() const { return std::max(t_start(), t_end()); }

  /// Dense output. Throws std::domain_error outside the achieved t-range.
  [[nodiscard]] ProfileState at(double t) const {
    const double tol = 1e-9 * (1.0 + std::abs(step_));
    if (t < t_min() - tol || t > t_max() + tol)
      throw std::domain_error("Trajectory: t = " + fmt17(t) + " outside [" + fmt17(t_min()) +
                              ", " + fmt17(t_max()) + "]");
    if (nodes_.size() == 1) return nodes_.front().y;
    const double h = step_;
    auto cell = static_cast<std::ptrdiff_t>(std::floor((t - t_start()) / h));
    const auto last = static_cast<std::ptrdiff_t>(nodes_.size()) - 2;
    if (cell < 0) cell = 0;
    if (cell > last) cell = last;
    const Node& a = nodes_[static_cast<std::size_t>(cell)];
    const Node& b = nodes_[static_cast<std::size_t>(cell) + 1];
    const double s = (t - a.y.t) / h;
    return ProfileState{
        t,
        detail::quintic(a.y.lambda, a.d1.dlambda, a.d2.dlambda, b.y.lambda, b.d1.dlambda,
                        b.d2.dlambda, h, s),
        detail::quintic(a.y.mu, a.d1.dmu, a.d2.dmu, b.y.mu, b.d1.dmu, b.d2.dmu, h, s),
        detail::quintic(a.y.theta, a.d1.dtheta, a.d2.dtheta, b.y.theta, b.d1.dtheta, b.d2.dtheta,
                        h, s)};
  }

  [[nodiscard]] ProfileRates rates_at(double t) const { return ode_rhs(params_, at(t)); }

 private:
  ProfileParams params_;
  std::vector<Node> nodes_;
  double step_;
  Truncation truncation_;
};

/// RK4 with step-doubling: each sample advance also runs two half-steps; the
/// pair must agree within error_tolerance * (1 + |component|) or integration
/// halts with a step_error flag. The (more accurate) half-step pair is the
/// accepted value. Blow-up guards: |lambda| below lambda_floor or any
/// component above magnitude_cap halt with the corresponding flag.
[[nodiscard]] inline Trajectory integrate(const ProfileParams& p, const ProfileState& s0,
                                          double t_end, const IntegrateOptions& opts = {}) {
  p.validate();
  if (!(opts.step > 0.0)) throw std::invalid_argument("integrate: step must be positive");
  if (!std::isfinite(s0.lambda) || !std::isfinite(s0.mu) || !std::isfinite(s0.theta) ||
      !std::isfinite(s0.t))
    throw std::invalid_argument("integrate: non-finite initial state");
  if (std::abs(s0.lambda) < opts.lambda_floor)
    throw std::domain_error("integrate: |lambda| must stay above " + fmt17(opts.lambda_floor) +
                            "; the warping degenerates at lambda = 0");

  const auto make_node = [&](const ProfileState& y) {
    const ProfileRates d1 = ode_rhs(p, y);
    return Trajectory::Node{y, d1, detail::ode_rhs_prime(p, y, d1)};
  };

  const double span = t_end - s0.t;
  if (span == 0.0)
    return Trajectory(p, {make_node(s0)}, opts.step, Truncation::none);

  const auto cells = static_cast<long>(std::ceil(std::abs(span) / opts.step - 1e-12));
  const double h = span / static_cast<double>(cells);

  std::vector<Trajectory::Node> nodes;
  nodes.reserve(static_cast<std::size_t>(cells) + 1);
  nodes.push_back(make_node(s0));

  Truncation flag = Truncation::none;
  ProfileState y = s0;
  for (long i = 0; i < cells; ++i) {
    const ProfileState full = detail::rk4_step(p, y, h);
    const ProfileState fine =
        detail::rk4_step(p, detail::rk4_step(p, y, h / 2.0), h / 2.0);
    const auto exceeded = [&](double a, double b) {
      return std::abs(a - b) > opts.error_tolerance * (1.0 + std::abs(b));
    };
    if (exceeded(full.lambda, fine.lambda) || exceeded(full.mu, fine.mu) ||
        exceeded(full.theta, fine.theta)) {
      flag = Truncation::step_error;
      break;
    }
    ProfileState next = fine;
    next.t = s0.t + static_cast<double>(i + 1) * h;  // exact grid time
    if (std::abs(next.lambda) < opts.lambda_floor) {
      flag = Truncation::lambda_floor;
      break;
    }
    if (std::abs(next.lambda) > opts.magnitude_cap || std::abs(next.mu) > opts.magnitude_cap ||
        std::abs(next.theta) > opts.magnitude_cap) {
      flag = Truncation::magnitude_cap;
      break;
    }
    nodes.push_back(make_node(next));
    y = next;
  }
  return Trajectory(p, std::move(nodes), h, flag);
}

[[nodiscard]] inline Trajectory integrate(const ProfileParams& p, const ProfileState& s0,
                                          double t_end, double step) {
  IntegrateOptions opts;
  opts.step = step;
  return integrate(p, s0, t_end, opts);
}

/// c = 0: mu^2 + d^2 lambda^2. c = +1: 1 + mu^2 + d^2 lambda^2 (positive).
/// c = -1: 1 - mu^2 - d^2 lambda^2; its sign is a flow invariant and selects
/// the lift branch.
[[nodiscard]] inline double q_factor(const ProfileParams& p, const ProfileState& s) {
  p.validate();
  const double d = p.d_value();
  const double core = s.mu * s.mu + d * d * s.lambda * s.lambda;
  switch (p.curvature_c) {
    case 0: return core;
    case 1: return 1.0 + core;
    default: return 1.0 - core;
  }
}

/// lambda^(2d/(1-2d)) (mu^2 + d^2 lambda^2), conserved along flat (c = 0)
/// trajectories. Requires lambda > 0 for the rational power.
[[nodiscard]] inline double conserved_flat(const Rational& d, const ProfileState& s) {
  if (d == Rational(0) || d == Rational(1, 2))
    throw std::invalid_argument("conserved_flat: d must avoid 0 and 1/2");
  if (!(s.lambda > 0.0))
    throw std::domain_error("conserved_flat: requires lambda > 0");
  const double exponent = to_double(2 * d / (Rational(1) - 2 * d));
  const double dv = to_double(d);
  return std::pow(s.lambda, exponent) * (s.mu * s.mu + dv * dv * s.lambda * s.lambda);
}

/// lambda^(2d/(1-2d)) q_factor, conserved for every curvature (q' = -2 mu q
/// and (lambda^p)' = 2 mu lambda^p cancel). Reduces to conserved_flat at c=0.
[[nodiscard]] inline double first_integral(const ProfileParams& p, const ProfileState& s) {
  p.validate();
  if (!(s.lambda > 0.0))
    throw std::domain_error("first_integral: requires lambda > 0");
  const double exponent = to_double(2 * p.d / (Rational(1) - 2 * p.d));
  return std::pow(s.lambda, exponent) * q_factor(p, s);
}

/// Closed-form flat-profile relations, constants normalized away.
/// d = 1: the single pair mu = lambda/k2, theta = k2 ln|k2/lambda| (from
/// mu = 1/t, lambda = k2/t, theta = k2 ln|t|). d != 1: the two sign pairs
///   (mu, theta) = (-sqrt(S), +T) and (+sqrt(S), -T),
///   S = k^2 lambda^(2d/(2d-1)) - d^2 lambda^2,
///   T = (1/(d-1)) csc^-1((k/d) lambda^(-(d-1)/(2d-1))),
/// ordered so each pair solves the system jointly.
struct FlatClosedForm {
  std::vector<std::pair<double, double>> mu_theta;
};

[[nodiscard]] inline FlatClosedForm closed_form_flat(const Rational& d, double k, double lambda) {
  if (d == Rational(0) || d == Rational(1, 2))
    throw std::invalid_argument("closed_form_flat: d must avoid 0 and 1/2");
  if (d == Rational(1)) {
    if (k == 0.0) throw std::invalid_argument("closed_form_flat: k2 must be nonzero at d = 1");
    if (lambda == 0.0)
      throw std::domain_error("closed_form_flat: lambda must be nonzero at d = 1");
    return FlatClosedForm{{{lambda / k, k * std::log(std::abs(k / lambda))}}};
  }
  if (!(lambda > 0.0))
    throw std::domain_error("closed_form_flat: requires lambda > 0");
  if (k == 0.0) throw std::invalid_argument("closed_form_flat: k must be nonzero");

  const double dv = to_double(d);
  const double exp_s = to_double(2 * d / (2 * d - 1));
  const double exp_arg = to_double((d - Rational(1)) / (2 * d - 1));
  double S = k * k * std::pow(lambda, exp_s) - dv * dv * lambda * lambda;
  const double scale = k * k * std::pow(lambda, exp_s) + dv * dv * lambda * lambda;
  if (S < 0.0 && S > -1e-13 * scale) S = 0.0;  // turning point, up to roundoff
  const double arg = (dv / k) * std::pow(lambda, exp_arg);
  if (S < 0.0 || std::abs(arg) > 1.0 + 1e-13) {
    // |arg| <= 1 delimits the reachable lambda; name the admissible side.
    const double boundary = std::pow(std::abs(k / dv), 1.0 / exp_arg);
    const bool below = exp_arg > 0.0;
    throw std::domain_error(std::string("closed_form_flat: lambda outside the admissible ") +
                            (below ? "interval (0, " + fmt17(boundary) + "]"
                                   : "interval [" + fmt17(boundary) + ", inf)"));
  }
  const double root = std::sqrt(std::max(S, 0.0));
  const double theta = (1.0 / (dv - 1.0)) * std::asin(std::clamp(arg, -1.0, 1.0));
  return FlatClosedForm{{{-root, theta}, {root, -theta}}};
}

/// CSV columns: t, lambda, mu, theta, q_factor, conserved (the all-curvature
/// first integral; "nan" where lambda <= 0 makes the rational power undefined).
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,lambda,mu,theta,q_factor,conserved\n";
  for (const auto& node : traj.nodes()) {
    const ProfileState& s = node.y;
    out << fmt17(s.t) << ',' << fmt17(s.lambda) << ',' << fmt17(s.mu) << ',' << fmt17(s.theta)
        << ',' << fmt17(q_factor(traj.params(), s)) << ',';
    if (s.lambda > 0.0)
      out << fmt17(first_integral(traj.params(), s));
    else
      out << "nan";
    out << '\n';
  }
}

}  // namespace lagforge
