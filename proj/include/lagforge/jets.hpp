#pragma once

// Central-difference 2-jets of maps R^k -> C^m. Every chart and seed
// derivative in the verifier flows through here, so the stencil layout and
// symmetrization are fixed once and tested once.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagforge/linalg.hpp"

namespace lagforge {

/// Value, first derivatives, and symmetric second derivatives of a map
/// R^k -> C^m at one point, with the step that produced them.
struct Jet2 {
  CVec value;
  std::vector<CVec> first;                // k entries
  std::vector<std::vector<CVec>> second;  // k x k, second[i][j] == second[j][i]
  double step = 0.0;
};

using PointMap = std::function<CVec(const RVec&)>;

namespace detail {

inline CVec eval_checked(const PointMap& f, const RVec& x) {
  CVec v;
  try {
    v = f(x);
  } catch (const std::exception& e) {
    std::string where = "(";
    for (int i = 0; i < x.size(); ++i)
      where += (i ? ", " : "") + std::to_string(x[i]);
    throw std::domain_error("jet2: evaluation failed at stencil point " + where + "): " +
                            e.what());
  }
  if (!v.allFinite())
    throw std::domain_error("jet2: non-finite value on stencil");
  return v;
}

}  // namespace detail

/// 2-jet by central differences: first derivatives (f(x+h) - f(x-h)) / 2h,
/// diagonal seconds by the 3-point formula, mixed seconds by the symmetric
/// 4-point formula (symmetric in (i,j) by construction). Default step suits
/// derivative-level checks; curvature-level callers pass 1e-3.
[[nodiscard]] inline Jet2 jet2(const PointMap& f, const RVec& x, double step = 1e-4) {
  if (!(step > 0.0)) throw std::invalid_argument("jet2: step must be positive");
  if (!x.allFinite()) throw std::invalid_argument("jet2: non-finite base point");
  const int k = static_cast<int>(x.size());

  Jet2 jet;
  jet.step = step;
  jet.value = detail::eval_checked(f, x);
  const int m = static_cast<int>(jet.value.size());

  std::vector<CVec> plus(k), minus(k);
  for (int i = 0; i < k; ++i) {
    RVec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    plus[i] = detail::eval_checked(f, xp);
    minus[i] = detail::eval_checked(f, xm);
    if (plus[i].size() != m || minus[i].size() != m)
      throw std::domain_error("jet2: map changed output dimension across stencil");
  }

  jet.first.resize(k);
  for (int i = 0; i < k; ++i) jet.first[i] = (plus[i] - minus[i]) / (2.0 * step);

  jet.second.assign(k, std::vector<CVec>(k));
  for (int i = 0; i < k; ++i)
    jet.second[i][i] = (plus[i] - 2.0 * jet.value + minus[i]) / (step * step);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      RVec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += step; xpp[j] += step;
      xpm[i] += step; xpm[j] -= step;
      xmp[i] -= step; xmp[j] += step;
      xmm[i] -= step; xmm[j] -= step;
      const CVec mixed = (detail::eval_checked(f, xpp) - detail::eval_checked(f, xpm) -
                          detail::eval_checked(f, xmp) + detail::eval_checked(f, xmm)) /
                         (4.0 * step * step);
      jet.second[i][j] = mixed;
      jet.second[j][i] = mixed;
    }
  }
  return jet;
}

}  // namespace lagforge
