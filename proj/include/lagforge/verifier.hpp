#pragma once

// Numerical verification of chart geometry: orthonormal frames, the second
// fundamental form and its fit against the shape-operator pattern
// h(e_1,e_1) = lambda J e_1, h(e_1,e_a) = d lambda J e_a,
// h(e_a,e_b) = delta_ab d lambda J e_1 + trace-free part, the Gauss and
// Codazzi equations, and the warped-product structure of the induced metric.
// run_report samples a chart grid, evaluates every applicable check with
// per-check error isolation, and serializes the results to JSON and CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "lagforge/delta.hpp"
#include "lagforge/format.hpp"
#include "lagforge/immersions.hpp"
#include "lagforge/jets.hpp"
#include "lagforge/linalg.hpp"
#include "lagforge/parallel.hpp"
#include "lagforge/profile.hpp"
#include "lagforge/rational.hpp"

namespace lagforge {

/// Tangent data at one chart point: coordinate first derivatives, the induced
/// metric, and an orthonormal tangent frame with e_1 along the t-direction.
/// frame_coeff(i, a) expresses e_i = sum_a frame_coeff(i, a) dL/dx_a.
struct FramePoint {
  RVec x;
  CVec position;
  std::vector<CVec> coord_first;
  RMat metric;
  std::vector<CVec> frame;
  RMat frame_coeff;
};

[[nodiscard]] inline FramePoint frame_from_first(const AmbientSpace& ambient, const RVec& x,
                                                 CVec position, std::vector<CVec> first) {
  const int n = static_cast<int>(first.size());
  if (n < 1) throw std::invalid_argument("frame_from_first: no coordinate directions");
  FramePoint fp;
  fp.x = x;
  fp.position = std::move(position);
  fp.coord_first = std::move(first);
  fp.metric = RMat(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      fp.metric(a, b) = real_inner(fp.coord_first[static_cast<std::size_t>(a)],
                                   fp.coord_first[static_cast<std::size_t>(b)], ambient.form);
  fp.frame.resize(static_cast<std::size_t>(n));
  fp.frame_coeff = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    CVec v = fp.coord_first[static_cast<std::size_t>(i)];
    RVec coeff = RVec::Zero(n);
    coeff[i] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        const double p = real_inner(v, fp.frame[static_cast<std::size_t>(j)], ambient.form);
        v -= p * fp.frame[static_cast<std::size_t>(j)];
        coeff -= p * RVec(fp.frame_coeff.row(j));
      }
    }
    const double nrm2 = real_inner(v, v, ambient.form);
    if (!(nrm2 > 1e-16))
      throw std::runtime_error("frame_from_first: tangent frame degenerates (pivot " +
                               fmt17(nrm2 > 0.0 ? std::sqrt(nrm2) : 0.0) +
                               " in coordinate direction " + std::to_string(i) + ")");
    const double inv = 1.0 / std::sqrt(nrm2);
    fp.frame[static_cast<std::size_t>(i)] = inv * v;
    fp.frame_coeff.row(i) = inv * coeff;
  }
  return fp;
}

[[nodiscard]] inline FramePoint frame_at(const ImmersionChart& chart, const RVec& x,
                                         double step = 1e-4) {
  const Jet2 jet = chart.jets(x, step);
  return frame_from_first(chart.ambient, x, jet.value, jet.first);
}

/// Frame components of the second fundamental form: h[k](i,j) is the J e_k
/// coefficient of h(e_i, e_j). `leftover` is the largest magnitude outside
/// the tangent + J(tangent) (+ position and J position, on lifts) span; a
/// leftover above the tolerance means the chart is not a horizontal
/// Lagrangian immersion and extraction is aborted.
struct SffTensor {
  FramePoint frame;
  std::vector<RMat> h;
  double leftover = 0.0;
};

[[nodiscard]] inline SffTensor sff_from_jet(const AmbientSpace& ambient, const RVec& x,
                                            const Jet2& jet, double leftover_tol = 1e-5) {
  const int n = static_cast<int>(jet.first.size());
  SffTensor out;
  out.frame = frame_from_first(ambient, x, jet.value, jet.first);
  out.h.assign(static_cast<std::size_t>(n), RMat::Zero(n, n));
  const bool lift = ambient.is_lift();
  const CVec& pos = out.frame.position;
  const CVec ipos = Complex(0.0, 1.0) * pos;
  const double cval = lift ? ambient.constraint_value() : 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      CVec nij = CVec::Zero(pos.size());
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          nij += out.frame.frame_coeff(i, a) * out.frame.frame_coeff(j, b) *
                 jet.second[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      for (int k = 0; k < n; ++k) {
        const CVec& ek = out.frame.frame[static_cast<std::size_t>(k)];
        nij -= real_inner(nij, ek, ambient.form) * ek;
      }
      if (lift) {
        nij -= (real_inner(nij, pos, ambient.form) / cval) * pos;
        nij -= (real_inner(nij, ipos, ambient.form) / cval) * ipos;
      }
      CVec residual = nij;
      for (int k = 0; k < n; ++k) {
        const CVec jek = Complex(0.0, 1.0) * out.frame.frame[static_cast<std::size_t>(k)];
        const double comp = real_inner(nij, jek, ambient.form);
        out.h[static_cast<std::size_t>(k)](i, j) = comp;
        out.h[static_cast<std::size_t>(k)](j, i) = comp;
        residual -= comp * jek;
      }
      out.leftover = std::max(out.leftover, residual.norm());
    }
  }
  if (out.leftover > leftover_tol)
    throw std::runtime_error(
        "second_fundamental_form: component outside J(tangent) of magnitude " +
        fmt17(out.leftover) + " at a chart point (not a horizontal Lagrangian immersion?)");
  return out;
}

[[nodiscard]] inline SffTensor second_fundamental_form(const ImmersionChart& chart, const RVec& x,
                                                       double step = 1e-4,
                                                       double leftover_tol = 1e-5) {
  return sff_from_jet(chart.ambient, x, chart.jets(x, step), leftover_tol);
}

/// Least-structure fit of the extracted h against the shape pattern: lambda
/// is read off h^1_11, d from the mean of h^a_{1a}/lambda. The structure
/// residual is the largest deviation from the pattern outside the free
/// trace-less block, the trace residual the largest |sum_a h^g_{aa}| (g >= 2).
struct Eq1Fit {
  double lambda_rec = 0.0;
  double d_rec = 0.0;
  bool minimal_case = false;
  double structure_residual = 0.0;
  double trace_residual = 0.0;
};

[[nodiscard]] inline Eq1Fit fit_eq1(const SffTensor& sff) {
  const int n = static_cast<int>(sff.h.size());
  if (n < 2) throw std::invalid_argument("fit_eq1: need chart dimension >= 2");
  Eq1Fit fit;
  fit.lambda_rec = sff.h[0](0, 0);
  fit.minimal_case = std::abs(fit.lambda_rec) < 1e-8;
  double b_rec = 0.0;
  for (int a = 1; a < n; ++a) b_rec += sff.h[static_cast<std::size_t>(a)](0, a);
  b_rec /= (n - 1);
  fit.d_rec = fit.minimal_case ? std::numeric_limits<double>::quiet_NaN()
                               : b_rec / fit.lambda_rec;
  double s = 0.0;
  for (int k = 1; k < n; ++k)
    s = std::max(s, std::abs(sff.h[static_cast<std::size_t>(k)](0, 0)));
  for (int a = 1; a < n; ++a) s = std::max(s, std::abs(sff.h[0](0, a)));
  for (int a = 1; a < n; ++a)
    for (int b = 1; b < n; ++b) {
      const double target = a == b ? b_rec : 0.0;
      s = std::max(s, std::abs(sff.h[static_cast<std::size_t>(b)](0, a) - target));
      s = std::max(s, std::abs(sff.h[0](a, b) - target));
    }
  fit.structure_residual = s;
  for (int g = 1; g < n; ++g) {
    double trace = 0.0;
    for (int a = 1; a < n; ++a) trace += sff.h[static_cast<std::size_t>(g)](a, a);
    fit.trace_residual = std::max(fit.trace_residual, std::abs(trace));
  }
  return fit;
}

namespace detail {

/// Metric, Christoffel symbols, and the cubic form C_jkl = <dL_jk, i dL_l>
/// at one point, with the metric derivatives taken exactly from the jet:
/// d_c g_ab = <L_ca, L_b> + <L_a, L_cb>.
struct MetricJet {
  RMat g;
  RMat g_inv;
  std::vector<RMat> gamma;  // gamma[i](j,k) = Gamma^i_jk
  std::vector<RMat> cubic;  // cubic[l](j,k) = C_jkl
};

[[nodiscard]] inline MetricJet metric_jet(const AmbientSpace& ambient, const Jet2& jet) {
  const int n = static_cast<int>(jet.first.size());
  MetricJet mj;
  mj.g = RMat(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      mj.g(a, b) = real_inner(jet.first[static_cast<std::size_t>(a)],
                              jet.first[static_cast<std::size_t>(b)], ambient.form);
  Eigen::LLT<RMat> llt(mj.g);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("metric_jet: induced metric is not positive definite");
  mj.g_inv = llt.solve(RMat::Identity(n, n));
  std::vector<RMat> dg(static_cast<std::size_t>(n), RMat(n, n));
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        dg[static_cast<std::size_t>(c)](a, b) =
            real_inner(jet.second[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)],
                       jet.first[static_cast<std::size_t>(b)], ambient.form) +
            real_inner(jet.first[static_cast<std::size_t>(a)],
                       jet.second[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)],
                       ambient.form);
  mj.gamma.assign(static_cast<std::size_t>(n), RMat(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int m = 0; m < n; ++m)
          sum += mj.g_inv(i, m) * (dg[static_cast<std::size_t>(j)](m, k) +
                                   dg[static_cast<std::size_t>(k)](m, j) -
                                   dg[static_cast<std::size_t>(m)](j, k));
        mj.gamma[static_cast<std::size_t>(i)](j, k) = 0.5 * sum;
      }
  mj.cubic.assign(static_cast<std::size_t>(n), RMat(n, n));
  for (int l = 0; l < n; ++l) {
    const CVec jl = Complex(0.0, 1.0) * jet.first[static_cast<std::size_t>(l)];
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        mj.cubic[static_cast<std::size_t>(l)](j, k) = real_inner(
            jet.second[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)], jl,
            ambient.form);
  }
  return mj;
}

/// Everything the curvature-level checks need at one point: the frame and
/// SFF, the coordinate curvature tensor (Christoffel derivatives by central
/// differences of exact-jet Christoffels), and the cubic form with its
/// covariant derivative ingredients.
struct CurvatureBundle {
  FramePoint frame;
  std::vector<RMat> h;
  MetricJet center;
  std::vector<std::vector<RMat>> dgamma;  // dgamma[m][i](j,k) = d_m Gamma^i_jk
  std::vector<std::vector<RMat>> dcubic;  // dcubic[m][l](j,k) = d_m C_jkl
  std::vector<double> r_low;              // R_abcd = <R(d_c, d_d) d_b, d_a>

  [[nodiscard]] double r(int a, int b, int c, int d, int n) const {
    return r_low[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)];
  }
};

[[nodiscard]] inline CurvatureBundle curvature_bundle(const ImmersionChart& chart, const RVec& x,
                                                      double fd_step = 1e-4,
                                                      double curvature_step = 1e-3,
                                                      double leftover_tol = 1e-5) {
  const int n = chart.chart_dim;
  CurvatureBundle cb;
  const Jet2 jc = chart.jets(x, fd_step);
  SffTensor sff = sff_from_jet(chart.ambient, x, jc, leftover_tol);
  cb.frame = std::move(sff.frame);
  cb.h = std::move(sff.h);
  cb.center = metric_jet(chart.ambient, jc);
  cb.dgamma.resize(static_cast<std::size_t>(n));
  cb.dcubic.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    RVec xp = x, xm = x;
    xp[m] += curvature_step;
    xm[m] -= curvature_step;
    const MetricJet plus = metric_jet(chart.ambient, chart.jets(xp, fd_step));
    const MetricJet minus = metric_jet(chart.ambient, chart.jets(xm, fd_step));
    auto& dgm = cb.dgamma[static_cast<std::size_t>(m)];
    auto& dcm = cb.dcubic[static_cast<std::size_t>(m)];
    dgm.assign(static_cast<std::size_t>(n), RMat(n, n));
    dcm.assign(static_cast<std::size_t>(n), RMat(n, n));
    for (int i = 0; i < n; ++i) {
      dgm[static_cast<std::size_t>(i)] =
          (plus.gamma[static_cast<std::size_t>(i)] - minus.gamma[static_cast<std::size_t>(i)]) /
          (2.0 * curvature_step);
      dcm[static_cast<std::size_t>(i)] =
          (plus.cubic[static_cast<std::size_t>(i)] - minus.cubic[static_cast<std::size_t>(i)]) /
          (2.0 * curvature_step);
    }
  }
  // R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj
  //         - Gamma^i_lm Gamma^m_kj; lower with g to <R(d_k, d_l) d_j, d_i>.
  cb.r_low.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        RVec r_up = RVec::Zero(n);
        for (int i = 0; i < n; ++i) {
          double v = cb.dgamma[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)](l, j) -
                     cb.dgamma[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)](k, j);
          for (int m = 0; m < n; ++m)
            v += cb.center.gamma[static_cast<std::size_t>(i)](k, m) *
                     cb.center.gamma[static_cast<std::size_t>(m)](l, j) -
                 cb.center.gamma[static_cast<std::size_t>(i)](l, m) *
                     cb.center.gamma[static_cast<std::size_t>(m)](k, j);
          r_up[i] = v;
        }
        for (int a = 0; a < n; ++a) {
          double low = 0.0;
          for (int i = 0; i < n; ++i) low += cb.center.g(a, i) * r_up[i];
          cb.r_low[static_cast<std::size_t>(((a * n + j) * n + k) * n + l)] = low;
        }
      }
  return cb;
}

/// <R(e_k, e_l) e_j, e_i> in the orthonormal frame.
[[nodiscard]] inline double frame_curvature(const CurvatureBundle& cb, int i, int j, int k,
                                            int l) {
  const int n = static_cast<int>(cb.h.size());
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    const double ca = cb.frame.frame_coeff(i, a);
    if (ca == 0.0) continue;
    for (int b = 0; b < n; ++b) {
      const double cab = ca * cb.frame.frame_coeff(j, b);
      if (cab == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        const double cabc = cab * cb.frame.frame_coeff(k, c);
        if (cabc == 0.0) continue;
        for (int d = 0; d < n; ++d) {
          const double w = cabc * cb.frame.frame_coeff(l, d);
          if (w != 0.0) sum += w * cb.r(a, b, c, d, n);
        }
      }
    }
  }
  return sum;
}

/// Index tuples the Gauss check samples: every (a,1,a,1)-type plane plus a
/// fixed-seed batch of random 4-tuples.
[[nodiscard]] inline std::vector<std::array<int, 4>> gauss_tuples(int n, int random_count,
                                                                  unsigned long seed) {
  std::vector<std::array<int, 4>> tuples;
  for (int a = 1; a < n; ++a) tuples.push_back({a, 0, a, 0});
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int r = 0; r < random_count; ++r)
    tuples.push_back({pick(rng), pick(rng), pick(rng), pick(rng)});
  return tuples;
}

[[nodiscard]] inline double gauss_residual_from_bundle(
    const CurvatureBundle& cb, int curvature_c, const std::vector<std::array<int, 4>>& tuples) {
  const int n = static_cast<int>(cb.h.size());
  double worst = 0.0;
  for (const auto& [i, j, k, l] : tuples) {
    const double lhs = frame_curvature(cb, i, j, k, l);
    double rhs = curvature_c * ((i == k ? 1.0 : 0.0) * (j == l ? 1.0 : 0.0) -
                                (j == k ? 1.0 : 0.0) * (i == l ? 1.0 : 0.0));
    for (int g = 0; g < n; ++g)
      rhs += cb.h[static_cast<std::size_t>(g)](i, k) * cb.h[static_cast<std::size_t>(g)](j, l) -
             cb.h[static_cast<std::size_t>(g)](j, k) * cb.h[static_cast<std::size_t>(g)](i, l);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Largest violation of the symmetrized covariant-derivative identity
/// nabla_m C_jkl = nabla_j C_mkl for a cubic field given by value and
/// directional central differences plus the center Christoffels.
[[nodiscard]] inline double codazzi_from_fields(const std::vector<RMat>& cubic,
                                                const std::vector<std::vector<RMat>>& dcubic,
                                                const std::vector<RMat>& gamma) {
  const int n = static_cast<int>(cubic.size());
  auto cov = [&](int m, int j, int k, int l) {
    double v = dcubic[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)](j, k);
    for (int p = 0; p < n; ++p) {
      v -= gamma[static_cast<std::size_t>(p)](m, j) * cubic[static_cast<std::size_t>(l)](p, k);
      v -= gamma[static_cast<std::size_t>(p)](m, k) * cubic[static_cast<std::size_t>(l)](j, p);
      v -= gamma[static_cast<std::size_t>(p)](m, l) * cubic[static_cast<std::size_t>(p)](j, k);
    }
    return v;
  };
  double worst = 0.0;
  for (int m = 0; m < n; ++m)
    for (int j = m + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l)
          worst = std::max(worst, std::abs(cov(m, j, k, l) - cov(j, m, k, l)));
  return worst;
}

/// Largest deviation of C_jkl from total symmetry, the Lagrangian signature
/// of the cubic form.
[[nodiscard]] inline double cubic_symmetry_residual(const std::vector<RMat>& cubic) {
  const int n = static_cast<int>(cubic.size());
  auto c = [&](int j, int k, int l) { return cubic[static_cast<std::size_t>(l)](j, k); };
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        worst = std::max(worst, std::abs(c(j, k, l) - c(k, j, l)));
        worst = std::max(worst, std::abs(c(j, k, l) - c(j, l, k)));
        worst = std::max(worst, std::abs(c(j, k, l) - c(l, k, j)));
      }
  return worst;
}

}  // namespace detail

[[nodiscard]] inline double gauss_residual(const ImmersionChart& chart, const RVec& x,
                                           double fd_step = 1e-4, double curvature_step = 1e-3,
                                           int random_tuples = 20, unsigned long seed = 99991) {
  const auto cb = detail::curvature_bundle(chart, x, fd_step, curvature_step);
  return detail::gauss_residual_from_bundle(
      cb, chart.ambient.curvature_c,
      detail::gauss_tuples(chart.chart_dim, random_tuples, seed));
}

/// |<R(e_a, e_1) e_1, e_a> + mu' + mu^2| maximized over a; the sectional
/// curvature of every t-seed plane must equal -(mu' + mu^2).
[[nodiscard]] inline double gauss_profile_residual(const ImmersionChart& chart, const RVec& x,
                                                   double fd_step = 1e-4,
                                                   double curvature_step = 1e-3) {
  if (!chart.profile)
    throw std::invalid_argument("gauss_profile_residual: chart has no profile trajectory");
  const auto cb = detail::curvature_bundle(chart, x, fd_step, curvature_step);
  const ProfileState s = chart.profile->at(x[0]);
  const ProfileRates r = chart.profile->rates_at(x[0]);
  const double target = -(r.dmu + s.mu * s.mu);
  double worst = 0.0;
  for (int a = 1; a < chart.chart_dim; ++a)
    worst = std::max(worst, std::abs(detail::frame_curvature(cb, a, 0, a, 0) - target));
  return worst;
}

[[nodiscard]] inline double codazzi_residual(const ImmersionChart& chart, const RVec& x,
                                             double fd_step = 1e-4,
                                             double curvature_step = 1e-3) {
  const auto cb = detail::curvature_bundle(chart, x, fd_step, curvature_step);
  return detail::codazzi_from_fields(cb.center.cubic, cb.dcubic, cb.center.gamma);
}

/// Warping recovered from the induced metric at one point: f_rec is the
/// length of the first seed coordinate direction, mu_rec the central
/// difference of ln f across t. Seeds are normalized so that direction has
/// unit length, making f_rec the warping factor itself.
struct WarpedSample {
  double f_rec = 0.0;
  double mu_rec = 0.0;
};

[[nodiscard]] inline WarpedSample warped_profile_at(const ImmersionChart& chart, const RVec& x,
                                                    double delta = 1e-3, double fd_step = 1e-4) {
  if (chart.chart_dim < 2)
    throw std::invalid_argument("warped_profile_at: need a seed direction");
  auto g11_at = [&](double t_val) {
    RVec yp = x, ym = x;
    yp[0] = t_val;
    ym[0] = t_val;
    yp[1] += fd_step;
    ym[1] -= fd_step;
    const CVec du = (chart.eval(yp) - chart.eval(ym)) / (2.0 * fd_step);
    const double g11 = real_inner(du, du, chart.ambient.form);
    if (!(g11 > 1e-16))
      throw std::runtime_error("warped_profile_at: vanishing first seed direction");
    return g11;
  };
  WarpedSample out;
  out.f_rec = std::sqrt(g11_at(x[0]));
  out.mu_rec = (std::log(g11_at(x[0] + delta)) - std::log(g11_at(x[0] - delta))) / (4.0 * delta);
  return out;
}

// ---------------------------------------------------------------------------
// Grid report

struct ReportOptions {
  int t_count = 9;
  int u_count = 5;
  double fd_step = 1e-4;
  double curvature_step = 1e-3;
  int random_tuples = 20;
  unsigned long tuple_seed = 99991;
  double sff_leftover_tol = 1e-5;
};

struct CheckStat {
  bool applicable = false;
  double max = 0.0;
  RVec argmax;
  std::size_t samples = 0;
  std::string error;
};

struct VerificationReport {
  std::string builder;
  Rational d{1, 4};
  int curvature_c = 0;
  int branch = 0;
  std::string seed_id;
  int chart_dim = 0;
  bool domain_truncated = false;
  std::vector<std::string> check_names;
  std::map<std::string, CheckStat> checks;
  std::vector<RVec> points;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;
};

[[nodiscard]] inline const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {
      "constraint",    "lagrangian", "horizontality",     "transport",
      "eq1_lambda",    "eq1_d",      "eq1_structure",     "eq1_trace",
      "cubic",         "gauss",      "gauss_profile",     "codazzi",
      "warped_block",  "warped_mu",  "warped_geodesic",   "warped_seed_drift",
  };
  return names;
}

/// Per-check pass thresholds for built charts at the default grid and
/// finite-difference steps.
[[nodiscard]] inline std::map<std::string, double> default_tolerances() {
  return {
      {"constraint", 1e-10},     {"lagrangian", 1e-6},       {"horizontality", 1e-6},
      {"transport", 1e-6},       {"eq1_lambda", 1e-4},       {"eq1_d", 1e-4},
      {"eq1_structure", 1e-5},   {"eq1_trace", 1e-5},        {"cubic", 1e-5},
      {"gauss", 5e-4},           {"gauss_profile", 5e-4},    {"codazzi", 5e-4},
      {"warped_block", 1e-6},    {"warped_mu", 1e-4},        {"warped_geodesic", 1e-5},
      {"warped_seed_drift", 1e-5},
  };
}

namespace detail {

struct PointOutcome {
  std::vector<double> values;  // one slot per check name, NaN = not evaluated
  std::vector<std::pair<std::size_t, std::string>> errors;  // (check index, message)
};

[[nodiscard]] inline std::vector<std::vector<double>> report_axes(const ImmersionChart& chart,
                                                                  const ReportOptions& opts,
                                                                  bool needs_curvature) {
  if (chart.samples) return chart.samples->axes;
  if (opts.t_count < 2 || opts.u_count < 2)
    throw std::invalid_argument("run_report: need at least 2 samples per axis");
  const double span = chart.t_hi - chart.t_lo;
  if (!(span > 0.0)) throw std::invalid_argument("run_report: chart t-interval is empty");
  const double fd_margin = needs_curvature ? 3.0 * (opts.curvature_step + opts.fd_step)
                                           : 3.0 * opts.fd_step;
  const double margin = std::max(fd_margin, 0.01 * span);
  if (2.0 * margin >= span)
    throw std::invalid_argument("run_report: chart t-interval too short for the FD margins");
  std::vector<std::vector<double>> axes;
  std::vector<double> t_axis;
  const double lo = chart.t_lo + margin, hi = chart.t_hi - margin;
  for (int i = 0; i < opts.t_count; ++i)
    t_axis.push_back(lo + (hi - lo) * i / (opts.t_count - 1));
  axes.push_back(std::move(t_axis));
  for (int a = 0; a + 1 < chart.chart_dim; ++a) {
    std::vector<double> u_axis;
    for (int i = 0; i < opts.u_count; ++i)
      u_axis.push_back(chart.u_lo[a] + (chart.u_hi[a] - chart.u_lo[a]) * i / (opts.u_count - 1));
    axes.push_back(std::move(u_axis));
  }
  return axes;
}

}  // namespace detail

/// Samples the chart on a grid and evaluates every check applicable to its
/// kind (lift vs flat, smooth vs sampled, with or without profile/seed).
/// Exceptions are confined to the check that raised them; the report records
/// the first error per check together with the max residual over the grid.
[[nodiscard]] inline VerificationReport run_report(const ImmersionChart& chart,
                                                   const ReportOptions& opts = {}) {
  chart.validate();
  const int n = chart.chart_dim;
  const auto& names = all_check_names();
  const std::size_t n_checks = names.size();
  auto index_of = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(names.begin(), names.end(), name) - names.begin());
  };
  const std::size_t ix_constraint = index_of("constraint");
  const std::size_t ix_lagrangian = index_of("lagrangian");
  const std::size_t ix_horizontality = index_of("horizontality");
  const std::size_t ix_transport = index_of("transport");
  const std::size_t ix_eq1_lambda = index_of("eq1_lambda");
  const std::size_t ix_eq1_d = index_of("eq1_d");
  const std::size_t ix_eq1_structure = index_of("eq1_structure");
  const std::size_t ix_eq1_trace = index_of("eq1_trace");
  const std::size_t ix_cubic = index_of("cubic");
  const std::size_t ix_gauss = index_of("gauss");
  const std::size_t ix_gauss_profile = index_of("gauss_profile");
  const std::size_t ix_codazzi = index_of("codazzi");
  const std::size_t ix_warped_block = index_of("warped_block");
  const std::size_t ix_warped_mu = index_of("warped_mu");
  const std::size_t ix_warped_geodesic = index_of("warped_geodesic");
  const std::size_t ix_warped_seed_drift = index_of("warped_seed_drift");

  const bool is_lift = chart.ambient.is_lift();
  const bool smooth = chart.smooth;
  const bool has_profile = static_cast<bool>(chart.profile);
  const bool has_seed = static_cast<bool>(chart.seed);

  std::vector<bool> active(n_checks, false);
  active[ix_constraint] = is_lift;
  active[ix_lagrangian] = true;
  active[ix_horizontality] = is_lift;
  active[ix_transport] = smooth && has_profile && has_seed && chart.builder == "flat";
  active[ix_eq1_lambda] = smooth && has_profile;
  active[ix_eq1_d] = smooth && has_profile;
  active[ix_eq1_structure] = smooth && has_profile;
  active[ix_eq1_trace] = smooth && has_profile;
  active[ix_cubic] = smooth;
  active[ix_gauss] = smooth;
  active[ix_gauss_profile] = smooth && has_profile;
  active[ix_codazzi] = smooth;
  active[ix_warped_block] = true;
  active[ix_warped_mu] = smooth && has_profile;
  active[ix_warped_geodesic] = smooth && has_profile;
  active[ix_warped_seed_drift] = true;

  const bool needs_curvature =
      active[ix_gauss] || active[ix_gauss_profile] || active[ix_codazzi];
  const auto axes = detail::report_axes(chart, opts, needs_curvature);

  VerificationReport report;
  report.builder = chart.builder;
  report.d = chart.d;
  report.curvature_c = chart.curvature_c;
  report.branch = chart.branch;
  report.seed_id = chart.seed_id;
  report.chart_dim = n;
  report.domain_truncated = chart.domain_truncated;
  report.check_names = names;
  for (std::size_t c = 0; c < n_checks; ++c) report.checks[names[c]].applicable = active[c];

  std::size_t u_block = 1;
  for (std::size_t a = 1; a < axes.size(); ++a) u_block *= axes[a].size();
  const std::size_t total = axes[0].size() * u_block;
  report.points.resize(total);
  {
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t p = 0; p < total; ++p) {
      RVec x(n);
      for (std::size_t a = 0; a < axes.size(); ++a)
        x[static_cast<Eigen::Index>(a)] = axes[a][idx[a]];
      report.points[p] = x;
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].size()) break;
        idx[a] = 0;
      }
    }
  }

  const bool warped_grid_ok = axes[0].size() >= 5;
  const std::string warped_grid_error =
      warped_grid_ok ? std::string()
                     : "warped-structure checks need at least 5 t samples (got " +
                           std::to_string(axes[0].size()) + ")";

  // Reference u-block of the induced metric at the first t sample, for the
  // seed-drift comparison at every later t.
  std::vector<RMat> drift_reference(u_block);
  std::vector<std::string> drift_reference_error(u_block);
  if (active[ix_warped_seed_drift] && warped_grid_ok && n >= 2) {
    parallel_for(u_block, [&](std::size_t u_off) {
      const RVec& x = report.points[u_off];
      try {
        const Jet2 jet = chart.jets(x, opts.fd_step);
        RMat g(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            g(a, b) = real_inner(jet.first[static_cast<std::size_t>(a)],
                                 jet.first[static_cast<std::size_t>(b)], chart.ambient.form);
        if (!(g(1, 1) > 1e-16)) throw std::runtime_error("vanishing first seed direction");
        drift_reference[u_off] = g.bottomRightCorner(n - 1, n - 1) / g(1, 1);
      } catch (const std::exception& e) {
        drift_reference_error[u_off] = e.what();
      }
    });
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<detail::PointOutcome> outcomes(total);
  const auto tuples = detail::gauss_tuples(n, opts.random_tuples, opts.tuple_seed);

  parallel_for(total, [&](std::size_t p) {
    detail::PointOutcome& out = outcomes[p];
    out.values.assign(n_checks, nan);
    const RVec& x = report.points[p];
    auto fail = [&](std::size_t check, const std::string& msg) {
      out.errors.emplace_back(check, msg);
    };

    Jet2 jet;
    bool have_jet = false;
    try {
      jet = chart.jets(x, opts.fd_step);
      have_jet = true;
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < n_checks; ++c)
        if (active[c]) fail(c, std::string("jet evaluation failed: ") + e.what());
      return;
    }

    const auto& form = chart.ambient.form;
    if (active[ix_constraint]) {
      out.values[ix_constraint] =
          std::abs(real_inner(jet.value, jet.value, form) - chart.ambient.constraint_value());
    }
    if (active[ix_lagrangian]) {
      double worst = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          worst = std::max(worst, std::abs(symplectic_form(
                                      jet.first[static_cast<std::size_t>(a)],
                                      jet.first[static_cast<std::size_t>(b)], form)));
      out.values[ix_lagrangian] = worst;
    }
    if (active[ix_horizontality]) {
      const CVec ipos = Complex(0.0, 1.0) * jet.value;
      double worst = 0.0;
      for (int a = 0; a < n; ++a)
        worst = std::max(worst,
                         std::abs(real_inner(jet.first[static_cast<std::size_t>(a)], ipos, form)));
      out.values[ix_horizontality] = worst;
    }
    if (active[ix_transport]) {
      try {
        const ProfileState s = chart.profile->at(x[0]);
        const CVec target =
            std::exp(Complex(0.0, s.theta)) * chart.seed->value(x.tail(n - 1));
        out.values[ix_transport] = (jet.first[0] - target).norm();
      } catch (const std::exception& e) {
        fail(ix_transport, e.what());
      }
    }
    if (active[ix_warped_block]) {
      RMat g(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          g(a, b) = real_inner(jet.first[static_cast<std::size_t>(a)],
                               jet.first[static_cast<std::size_t>(b)], form);
      double worst = 0.0;
      for (int a = 1; a < n; ++a) worst = std::max(worst, std::abs(g(0, a)));
      out.values[ix_warped_block] = worst;
      if (active[ix_warped_seed_drift]) {
        if (!warped_grid_ok) {
          fail(ix_warped_seed_drift, warped_grid_error);
        } else {
          const std::size_t u_off = p % u_block;
          if (!drift_reference_error[u_off].empty()) {
            fail(ix_warped_seed_drift,
                 "reference row failed: " + drift_reference_error[u_off]);
          } else if (!(g(1, 1) > 1e-16)) {
            fail(ix_warped_seed_drift, "vanishing first seed direction");
          } else {
            RMat block = g.bottomRightCorner(n - 1, n - 1) / g(1, 1);
            out.values[ix_warped_seed_drift] =
                (block - drift_reference[u_off]).cwiseAbs().maxCoeff();
          }
        }
      }
    }

    if (smooth && has_profile &&
        (active[ix_eq1_lambda] || active[ix_eq1_structure] || active[ix_warped_geodesic] ||
         active[ix_warped_mu])) {
      ProfileState s{};
      bool have_state = false;
      try {
        s = chart.profile->at(x[0]);
        have_state = true;
      } catch (const std::exception& e) {
        for (std::size_t c : {ix_eq1_lambda, ix_eq1_d, ix_eq1_structure, ix_eq1_trace,
                              ix_warped_mu, ix_warped_geodesic})
          if (active[c]) fail(c, e.what());
      }
      if (have_state) {
        try {
          const SffTensor sff =
              sff_from_jet(chart.ambient, x, jet, opts.sff_leftover_tol);
          const Eq1Fit fit = fit_eq1(sff);
          out.values[ix_eq1_lambda] = std::abs(fit.lambda_rec - s.lambda);
          if (fit.minimal_case)
            fail(ix_eq1_d, "recovered lambda below 1e-8; d is undetermined in the minimal case");
          else
            out.values[ix_eq1_d] = std::abs(fit.d_rec - to_double(chart.d));
          out.values[ix_eq1_structure] = fit.structure_residual;
          out.values[ix_eq1_trace] = fit.trace_residual;
          if (active[ix_warped_geodesic]) {
            const CVec& tvec = sff.frame.coord_first[0];
            const CVec& acc = jet.second[0][0];
            const double tt = real_inner(tvec, tvec, form);
            const CVec v = (acc - (real_inner(acc, tvec, form) / tt) * tvec) / tt;
            double worst = 0.0;
            for (int k = 1; k < n; ++k)
              worst = std::max(worst, std::abs(real_inner(
                                          v, sff.frame.frame[static_cast<std::size_t>(k)], form)));
            out.values[ix_warped_geodesic] = worst;
          }
        } catch (const std::exception& e) {
          for (std::size_t c :
               {ix_eq1_lambda, ix_eq1_d, ix_eq1_structure, ix_eq1_trace, ix_warped_geodesic})
            if (active[c]) fail(c, e.what());
        }
        if (active[ix_warped_mu]) {
          if (!warped_grid_ok) {
            fail(ix_warped_mu, warped_grid_error);
          } else {
            try {
              const WarpedSample ws =
                  warped_profile_at(chart, x, opts.curvature_step, opts.fd_step);
              out.values[ix_warped_mu] = std::abs(ws.mu_rec - s.mu);
            } catch (const std::exception& e) {
              fail(ix_warped_mu, e.what());
            }
          }
        }
      }
    }

    if (active[ix_cubic]) {
      try {
        const detail::MetricJet mj = detail::metric_jet(chart.ambient, jet);
        out.values[ix_cubic] = detail::cubic_symmetry_residual(mj.cubic);
      } catch (const std::exception& e) {
        fail(ix_cubic, e.what());
      }
    }

    if (needs_curvature) {
      try {
        const detail::CurvatureBundle cb = detail::curvature_bundle(
            chart, x, opts.fd_step, opts.curvature_step, opts.sff_leftover_tol);
        if (active[ix_gauss])
          out.values[ix_gauss] =
              detail::gauss_residual_from_bundle(cb, chart.ambient.curvature_c, tuples);
        if (active[ix_codazzi])
          out.values[ix_codazzi] =
              detail::codazzi_from_fields(cb.center.cubic, cb.dcubic, cb.center.gamma);
        if (active[ix_gauss_profile]) {
          const ProfileState s = chart.profile->at(x[0]);
          const ProfileRates r = chart.profile->rates_at(x[0]);
          const double target = -(r.dmu + s.mu * s.mu);
          double worst = 0.0;
          for (int a = 1; a < n; ++a)
            worst = std::max(worst, std::abs(detail::frame_curvature(cb, a, 0, a, 0) - target));
          out.values[ix_gauss_profile] = worst;
        }
      } catch (const std::exception& e) {
        for (std::size_t c : {ix_gauss, ix_gauss_profile, ix_codazzi})
          if (active[c]) fail(c, e.what());
      }
    }

    (void)have_jet;
  });

  report.rows.resize(total);
  for (std::size_t p = 0; p < total; ++p) report.rows[p] = std::move(outcomes[p].values);
  for (std::size_t p = 0; p < total; ++p) {
    for (const auto& [check, msg] : outcomes[p].errors) {
      CheckStat& stat = report.checks[names[check]];
      if (stat.error.empty())
        stat.error = "at (" + [&] {
          std::string s;
          for (int a = 0; a < n; ++a)
            s += (a ? ", " : "") + fmt17(report.points[p][a]);
          return s;
        }() + "): " + msg;
    }
    for (std::size_t c = 0; c < n_checks; ++c) {
      const double v = report.rows[p][c];
      if (std::isnan(v)) continue;
      CheckStat& stat = report.checks[names[c]];
      ++stat.samples;
      if (stat.samples == 1 || v > stat.max) {
        stat.max = v;
        stat.argmax = report.points[p];
      }
    }
  }

  if (chart.domain_truncated)
    report.notes.push_back(
        "chart domain truncated: the branch-3 integrand reached the magnitude cap");
  if (n >= 2) {
    const auto tag = classify_special_d(n, chart.d);
    if (tag.case_two)
      report.notes.push_back("d = 1/(n-1): second special case; minimality of the companion "
                             "construction is not certified by this report");
  }
  return report;
}

[[nodiscard]] inline nlohmann::json report_to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["chart"] = {{"builder", report.builder},
                {"d", to_string(report.d)},
                {"c", report.curvature_c},
                {"branch", report.branch},
                {"seed", report.seed_id},
                {"n", report.chart_dim},
                {"domain_truncated", report.domain_truncated}};
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& name : report.check_names) {
    const CheckStat& stat = report.checks.at(name);
    nlohmann::json entry;
    entry["applicable"] = stat.applicable;
    entry["samples"] = stat.samples;
    if (stat.samples > 0) {
      entry["max"] = stat.max;
      std::vector<double> arg(stat.argmax.data(), stat.argmax.data() + stat.argmax.size());
      entry["argmax"] = arg;
    }
    if (!stat.error.empty()) entry["error"] = stat.error;
    checks[name] = entry;
  }
  j["checks"] = checks;
  j["points"] = report.points.size();
  j["notes"] = report.notes;
  return j;
}

inline void write_report_csv(std::ostream& out, const VerificationReport& report) {
  out << "t";
  for (int a = 2; a <= report.chart_dim; ++a) out << ",u" << a;
  for (const auto& name : report.check_names) out << ',' << name;
  out << '\n';
  for (std::size_t p = 0; p < report.points.size(); ++p) {
    for (int a = 0; a < report.chart_dim; ++a)
      out << (a ? "," : "") << fmt17(report.points[p][a]);
    for (std::size_t c = 0; c < report.check_names.size(); ++c) {
      const double v = report.rows[p][c];
      out << ',' << (std::isnan(v) ? std::string("nan") : fmt17(v));
    }
    out << '\n';
  }
}

/// Human-readable failure lines: an applicable check fails when it recorded
/// an error, sampled nothing, or exceeded its tolerance.
[[nodiscard]] inline std::vector<std::string> report_failures(
    const VerificationReport& report, const std::map<std::string, double>& tolerances) {
  std::vector<std::string> failures;
  for (const auto& name : report.check_names) {
    const CheckStat& stat = report.checks.at(name);
    if (!stat.applicable) continue;
    const auto it = tolerances.find(name);
    if (it == tolerances.end()) continue;
    if (!stat.error.empty()) {
      failures.push_back(name + ": error " + stat.error);
      continue;
    }
    if (stat.samples == 0) {
      failures.push_back(name + ": no samples evaluated");
      continue;
    }
    if (stat.max > it->second)
      failures.push_back(name + ": max residual " + fmt17(stat.max) + " exceeds tolerance " +
                         fmt17(it->second));
  }
  return failures;
}

}  // namespace lagforge
