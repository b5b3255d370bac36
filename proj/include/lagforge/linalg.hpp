#pragma once

// Signed Hermitian linear algebra on C^m: the forms behind the round sphere
// S^(2m-1)(1), the anti-de-Sitter quadric H^(2m-1)_1(-1), and flat C^m, plus
// the real/symplectic pairings used for Lagrangian and Legendrian conditions.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lagforge {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Per-slot sign pattern of a Hermitian form on C^m: all +1, or -1 in exactly
/// one slot for Lorentzian targets.
struct HermitianForm {
  Eigen::VectorXi signs;

  [[nodiscard]] static HermitianForm all_plus(int m) {
    require_dim(m);
    HermitianForm f;
    f.signs = Eigen::VectorXi::Ones(m);
    return f;
  }

  /// Timelike slot defaults to slot 0.
  [[nodiscard]] static HermitianForm lorentzian(int m, int timelike_slot = 0) {
    require_dim(m);
    if (timelike_slot < 0 || timelike_slot >= m)
      throw std::invalid_argument("HermitianForm: timelike slot out of range");
    HermitianForm f;
    f.signs = Eigen::VectorXi::Ones(m);
    f.signs[timelike_slot] = -1;
    return f;
  }

  [[nodiscard]] int dim() const { return static_cast<int>(signs.size()); }

  [[nodiscard]] int timelike_slot() const {
    for (int j = 0; j < dim(); ++j)
      if (signs[j] < 0) return j;
    return -1;
  }

  void validate() const {
    if (dim() < 1) throw std::invalid_argument("HermitianForm: empty signature");
    int minus = 0;
    for (int j = 0; j < dim(); ++j) {
      if (signs[j] != 1 && signs[j] != -1)
        throw std::invalid_argument("HermitianForm: signs must be +1 or -1");
      if (signs[j] == -1) ++minus;
    }
    if (minus > 1)
      throw std::invalid_argument("HermitianForm: at most one timelike slot");
  }

 private:
  static void require_dim(int m) {
    if (m < 1) throw std::invalid_argument("HermitianForm: dimension must be >= 1");
  }
};

namespace detail {
inline void require_same_dim(const CVec& a, const CVec& b, const HermitianForm& form) {
  if (a.size() != b.size() || a.size() != form.dim())
    throw std::invalid_argument("inner product: dimension mismatch (a=" +
                                std::to_string(a.size()) + ", b=" + std::to_string(b.size()) +
                                ", form=" + std::to_string(form.dim()) + ")");
}
}  // namespace detail

/// sum_j s_j a_j conj(b_j); conjugate-linear in the second argument.
[[nodiscard]] inline Complex hermitian_inner(const CVec& a, const CVec& b,
                                             const HermitianForm& form) {
  detail::require_same_dim(a, b, form);
  Complex acc{0.0, 0.0};
  for (int j = 0; j < form.dim(); ++j)
    acc += static_cast<double>(form.signs[j]) * a[j] * std::conj(b[j]);
  return acc;
}

/// Real part of the Hermitian form: the (pseudo-)Riemannian metric of the
/// ambient C^m viewed as R^(2m).
[[nodiscard]] inline double real_inner(const CVec& a, const CVec& b, const HermitianForm& form) {
  return hermitian_inner(a, b, form).real();
}

/// omega(a, b) = real_inner(i a, b); antisymmetric, and omega(a, i a) = |a|^2
/// for the all-plus form. Vanishing on all tangent pairs is the Lagrangian
/// condition.
[[nodiscard]] inline double symplectic_form(const CVec& a, const CVec& b,
                                            const HermitianForm& form) {
  // Re<i a, b> = -Im<a, b>.
  return -hermitian_inner(a, b, form).imag();
}

/// Convenience overloads for the all-plus (flat C^m) form.
[[nodiscard]] inline Complex hermitian_inner(const CVec& a, const CVec& b) {
  return hermitian_inner(a, b, HermitianForm::all_plus(static_cast<int>(a.size())));
}
[[nodiscard]] inline double real_inner(const CVec& a, const CVec& b) {
  return hermitian_inner(a, b).real();
}
[[nodiscard]] inline double symplectic_form(const CVec& a, const CVec& b) {
  return -hermitian_inner(a, b).imag();
}

/// A complex space form together with the ambient C^m its charts map into:
/// curvature c in {-1, 0, +1}, complex dimension n of the Lagrangian factor,
/// and the slot signature (m = n for flat charts, m = n+1 for lifts).
struct AmbientSpace {
  int curvature_c = 0;
  int complex_dim_n = 2;
  HermitianForm form;

  /// C^n itself (c = 0); charts land directly in it.
  [[nodiscard]] static AmbientSpace flat(int n) {
    AmbientSpace s{0, n, HermitianForm::all_plus(require_n(n))};
    return s;
  }

  /// S^(2n+1)(1) in C^(n+1), the Hopf lift target over CP^n(4).
  [[nodiscard]] static AmbientSpace sphere_lift(int n) {
    AmbientSpace s{+1, n, HermitianForm::all_plus(require_n(n) + 1)};
    return s;
  }

  /// H^(2n+1)_1(-1) in C^(n+1)_1 (timelike slot 0), the lift target over CH^n(-4).
  [[nodiscard]] static AmbientSpace ads_lift(int n) {
    AmbientSpace s{-1, n, HermitianForm::lorentzian(require_n(n) + 1, 0)};
    return s;
  }

  [[nodiscard]] bool is_lift() const { return curvature_c != 0; }

  /// Target value of <L,L> on the lift quadric (+1 sphere, -1 anti-de-Sitter).
  [[nodiscard]] double constraint_value() const {
    if (!is_lift())
      throw std::domain_error("AmbientSpace: flat space has no quadric constraint");
    return curvature_c > 0 ? 1.0 : -1.0;
  }

  void validate() const {
    if (curvature_c < -1 || curvature_c > 1)
      throw std::invalid_argument("AmbientSpace: curvature must be -1, 0, or +1");
    if (complex_dim_n < 2)
      throw std::invalid_argument("AmbientSpace: complex dimension must be >= 2");
    form.validate();
    const int expected = is_lift() ? complex_dim_n + 1 : complex_dim_n;
    if (form.dim() != expected)
      throw std::invalid_argument("AmbientSpace: signature has " + std::to_string(form.dim()) +
                                  " slots, expected " + std::to_string(expected));
    const bool has_timelike = form.timelike_slot() >= 0;
    if (has_timelike != (curvature_c == -1))
      throw std::invalid_argument(
          "AmbientSpace: a timelike slot is required exactly for the c = -1 lift");
  }

 private:
  static int require_n(int n) {
    if (n < 2) throw std::invalid_argument("AmbientSpace: complex dimension must be >= 2");
    return n;
  }
};

}  // namespace lagforge
