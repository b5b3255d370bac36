#pragma once

// Exact coefficients of the optimal delta-invariant inequality for Lagrangian
// submanifolds of complex space forms, and the classification of the
// exceptional warping ratios d attached to it.

#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagforge/rational.hpp"

namespace lagforge {

/// A tuple (n_1, ..., n_k) against dimension n: nondecreasing,
/// 2 <= n_1 <= ... <= n_k <= n-1, with sum at most n.
struct Partition {
  int n = 0;
  std::vector<int> parts;

  void validate() const {
    if (n < 3) throw std::invalid_argument("Partition: n must be >= 3");
    if (parts.empty()) throw std::invalid_argument("Partition: at least one part required");
    int previous = 2;
    for (int p : parts) {
      if (p < 2) throw std::invalid_argument("Partition: parts must be >= 2");
      if (p < previous) throw std::invalid_argument("Partition: parts must be nondecreasing");
      if (p > n - 1)
        throw std::invalid_argument("Partition: parts must be <= n-1 (got " + std::to_string(p) +
                                    " with n=" + std::to_string(n) + ")");
      previous = p;
    }
    if (sum() > n) throw std::invalid_argument("Partition: parts sum exceeds n");
  }

  [[nodiscard]] int sum() const {
    return std::accumulate(parts.begin(), parts.end(), 0);
  }
  [[nodiscard]] int k() const { return static_cast<int>(parts.size()); }
};

/// Coefficient a(n; n_1..n_k) of |H|^2 in the sharp inequality
/// delta(n_1..n_k) <= a |H|^2 + (1/2)(n(n-1) - sum n_j(n_j-1)) c.
/// Exact; positive for every valid partition.
[[nodiscard]] inline Rational a_coefficient(const Partition& p) {
  p.validate();
  const Rational n(p.n);
  const Rational k(p.k());
  const Rational total(p.sum());

  Rational numerator, denominator;
  if (p.sum() < p.n) {
    Rational s{0};
    for (int part : p.parts) s += Rational(1, 2 + part);
    numerator = n - total + 3 * k - 1 - 6 * s;
    denominator = n - total + 3 * k + 2 - 6 * s;
  } else {
    // Full partitions drop the first part from both sums.
    Rational s{0};
    for (std::size_t j = 1; j < p.parts.size(); ++j) s += Rational(1, 2 + p.parts[j]);
    numerator = k - 1 - 2 * s;
    denominator = k - 2 * s;
  }
  const Rational a = n * n * numerator / (2 * denominator);
  if (a <= Rational(0)) throw std::logic_error("a_coefficient: nonpositive result");
  return a;
}

/// Right-hand side of the inequality at |H|^2 = h_norm_sq and ambient
/// curvature 4c; the exact rational coefficients convert to double only here.
[[nodiscard]] inline double delta_bound_rhs(const Partition& p, double h_norm_sq,
                                            int curvature_c) {
  if (curvature_c < -1 || curvature_c > 1)
    throw std::invalid_argument("delta_bound_rhs: curvature must be -1, 0, or +1");
  if (!(h_norm_sq >= 0.0))
    throw std::invalid_argument("delta_bound_rhs: |H|^2 must be nonnegative");
  const Rational a = a_coefficient(p);
  long long pinned = static_cast<long long>(p.n) * (p.n - 1);
  for (int part : p.parts) pinned -= static_cast<long long>(part) * (part - 1);
  const Rational curvature_coeff = Rational(pinned, 2);
  return to_double(a) * h_norm_sq + to_double(curvature_coeff) * curvature_c;
}

/// The exceptional warping ratios: case one is d = 1/(2+m) for an integer
/// m >= 2 dividing n-1; case two is d = 1/(n-1) with n >= 5. Both can hold
/// simultaneously.
struct SpecialCaseTag {
  std::optional<int> case_one_m;
  bool case_two = false;
};

[[nodiscard]] inline SpecialCaseTag classify_special_d(int n, const Rational& d) {
  if (n < 2) throw std::invalid_argument("classify_special_d: n must be >= 2");
  SpecialCaseTag tag;
  if (d.numerator() == 1 && d.denominator() >= 4) {
    const long long m = d.denominator() - 2;
    if ((n - 1) % m == 0) tag.case_one_m = static_cast<int>(m);
  }
  if (n >= 5 && d == Rational(1, n - 1)) tag.case_two = true;
  return tag;
}

}  // namespace lagforge
