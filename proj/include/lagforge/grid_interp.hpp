#pragma once

// Tensor-product Lagrange interpolation on a rectangular grid of complex
// vectors, with first and second derivatives of the interpolant. Each axis
// uses a moving window of up to 6 nodes, so the interpolation order is >= 4
// whenever the grid has >= 5 nodes per axis.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lagforge/jets.hpp"
#include "lagforge/linalg.hpp"

namespace lagforge::detail {

/// Lagrange basis values, first, and second derivatives at x over the nodes.
inline void lagrange_basis(const std::vector<double>& nodes, double x, std::vector<double>& b0,
                           std::vector<double>& b1, std::vector<double>& b2) {
  const std::size_t w = nodes.size();
  b0.assign(w, 0.0);
  b1.assign(w, 0.0);
  b2.assign(w, 0.0);
  for (std::size_t j = 0; j < w; ++j) {
    double denom = 1.0;
    for (std::size_t l = 0; l < w; ++l)
      if (l != j) denom *= nodes[j] - nodes[l];
    double val = 1.0;
    for (std::size_t l = 0; l < w; ++l)
      if (l != j) val *= x - nodes[l];
    b0[j] = val / denom;
    double d1 = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      if (k == j) continue;
      double prod = 1.0;
      for (std::size_t l = 0; l < w; ++l)
        if (l != j && l != k) prod *= x - nodes[l];
      d1 += prod;
    }
    b1[j] = d1 / denom;
    double d2 = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      if (k == j) continue;
      for (std::size_t q = k + 1; q < w; ++q) {
        if (q == j) continue;
        double prod = 1.0;
        for (std::size_t l = 0; l < w; ++l)
          if (l != j && l != k && l != q) prod *= x - nodes[l];
        d2 += prod;
      }
    }
    b2[j] = 2.0 * d2 / denom;
  }
}

/// Index window of up to `width` nodes centered on x within a sorted axis.
[[nodiscard]] inline std::pair<std::size_t, std::size_t> basis_window(
    const std::vector<double>& nodes, double x, std::size_t width) {
  const std::size_t count = nodes.size();
  const std::size_t w = std::min(width, count);
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  auto center = static_cast<std::size_t>(std::distance(nodes.begin(), it));
  std::size_t start = center > w / 2 ? center - w / 2 : 0;
  if (start + w > count) start = count - w;
  return {start, w};
}

struct TensorGrid {
  std::vector<std::vector<double>> axes;  // sorted node values per axis
  std::vector<CVec> values;               // row-major, last axis fastest
  int value_dim = 0;

  [[nodiscard]] std::size_t flat_index(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) flat = flat * axes[a].size() + idx[a];
    return flat;
  }

  [[nodiscard]] std::size_t node_count() const {
    std::size_t total = 1;
    for (const auto& axis : axes) total *= axis.size();
    return total;
  }

  void validate() const {
    if (axes.empty()) throw std::invalid_argument("TensorGrid: no axes");
    for (const auto& axis : axes)
      if (axis.size() < 2) throw std::invalid_argument("TensorGrid: axis needs >= 2 nodes");
    if (values.size() != node_count())
      throw std::invalid_argument("TensorGrid: value count does not fill the grid");
    if (value_dim < 1) throw std::invalid_argument("TensorGrid: value_dim must be >= 1");
  }

  /// Interpolated value with first and second derivatives at u.
  [[nodiscard]] Jet2 jet(const RVec& u) const {
    const auto p = axes.size();
    std::vector<std::vector<double>> b0(p), b1(p), b2(p);
    std::vector<std::size_t> start(p), width(p);
    for (std::size_t a = 0; a < p; ++a) {
      const auto [s, w] = basis_window(axes[a], u[static_cast<Eigen::Index>(a)], 6);
      start[a] = s;
      width[a] = w;
      const std::vector<double> window(axes[a].begin() + static_cast<std::ptrdiff_t>(s),
                                       axes[a].begin() + static_cast<std::ptrdiff_t>(s + w));
      lagrange_basis(window, u[static_cast<Eigen::Index>(a)], b0[a], b1[a], b2[a]);
    }
    Jet2 result;
    result.value = CVec::Zero(value_dim);
    result.first.assign(p, CVec::Zero(value_dim));
    result.second.assign(p, std::vector<CVec>(p, CVec::Zero(value_dim)));
    std::vector<std::size_t> offset(p, 0);
    std::vector<std::size_t> idx(p);
    bool more = true;
    while (more) {
      for (std::size_t a = 0; a < p; ++a) idx[a] = start[a] + offset[a];
      const CVec& z = values[flat_index(idx)];
      double w0 = 1.0;
      for (std::size_t a = 0; a < p; ++a) w0 *= b0[a][offset[a]];
      result.value += w0 * z;
      for (std::size_t da = 0; da < p; ++da) {
        double w1 = 1.0;
        for (std::size_t a = 0; a < p; ++a) w1 *= (a == da ? b1[a][offset[a]] : b0[a][offset[a]]);
        result.first[da] += w1 * z;
        for (std::size_t db = da; db < p; ++db) {
          double w2 = 1.0;
          for (std::size_t a = 0; a < p; ++a) {
            if (a == da && a == db)
              w2 *= b2[a][offset[a]];
            else if (a == da || a == db)
              w2 *= b1[a][offset[a]];
            else
              w2 *= b0[a][offset[a]];
          }
          result.second[da][db] += w2 * z;
          if (db != da) result.second[db][da] += w2 * z;
        }
      }
      more = false;
      for (std::size_t a = p; a-- > 0;) {
        if (++offset[a] < width[a]) {
          more = true;
          break;
        }
        offset[a] = 0;
      }
    }
    return result;
  }

  /// Locates a coordinate on an axis within tolerance 1e-9 (absolute+relative).
  [[nodiscard]] std::size_t locate(std::size_t axis, double v) const {
    const auto& nodes = axes[axis];
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v - 1e-9);
    if (it == nodes.end() || std::abs(*it - v) > 1e-9 * (1.0 + std::abs(v)))
      throw std::runtime_error("TensorGrid: coordinate off the grid: " + std::to_string(v));
    return static_cast<std::size_t>(std::distance(nodes.begin(), it));
  }

  /// Builds sorted deduplicated axes from raw per-row coordinates.
  [[nodiscard]] static std::vector<double> collect_axis(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    std::vector<double> axis;
    for (double v : vals)
      if (axis.empty() || v - axis.back() > 1e-12 * (1.0 + std::abs(v))) axis.push_back(v);
    return axis;
  }
};

}  // namespace lagforge::detail
