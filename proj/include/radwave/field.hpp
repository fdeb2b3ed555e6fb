#pragma once
/// @file field.hpp
/// Complex samples on a CharGrid and the cumulative line quadratures used to
/// integrate along its rows and columns.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radwave/geometry.hpp"

namespace radwave {

using cplx = std::complex<double>;

class ComplexField {
 public:
  ComplexField() : grid_(1.0, 1) {}
  explicit ComplexField(const CharGrid& grid, cplx fill = {})
      : grid_(grid), values_(grid.node_count(), fill) {}

  /// Samples f(t, r) at every node.
  template <class F>
  static ComplexField sample(const CharGrid& grid, F&& f) {
    ComplexField out(grid);
    for_each_node(grid, [&](std::size_t i, std::size_t j, std::size_t k) {
      out.values_[k] = cplx(f(grid.t(i, j), grid.r(i, j)));
    });
    return out;
  }

  const CharGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  cplx& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return values_[grid_.index(i, j)];
  }
  cplx& operator[](std::size_t k) { return values_[k]; }
  const cplx& operator[](std::size_t k) const { return values_[k]; }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : values_) m = std::max(m, std::abs(z));
    return m;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  ComplexField& operator+=(const ComplexField& o) {
    require_same_grid(o, "operator+=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    require_same_grid(o, "operator-=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  ComplexField& operator*=(cplx c) {
    for (auto& z : values_) z *= c;
    return *this;
  }

  friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
  friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
  friend ComplexField operator*(cplx c, ComplexField a) { return a *= c; }

  void require_same_grid(const ComplexField& o, const char* what) const {
    if (!(grid_ == o.grid_)) {
      throw std::invalid_argument(std::string(what) + ": fields live on different grids");
    }
  }

 private:
  CharGrid grid_;
  std::vector<cplx> values_;
};

/// sup |a - b| over all nodes.
inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  a.require_same_grid(b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

enum class Quadrature { Trapezoid, Simpson };

/// Cumulative integral out[k] = int_0^{k h} f over equispaced samples f[0..m].
///
/// Simpson uses the quadratic end formula for the first panel and Simpson
/// steps of two panels afterwards.
template <class T>
void cumulative_integral(std::span<const T> f, std::span<T> out, double h, Quadrature q) {
  const std::size_t m = f.size();
  if (out.size() != m) throw std::invalid_argument("cumulative_integral: size mismatch");
  if (m == 0) return;
  out[0] = T{};
  if (q == Quadrature::Trapezoid || m < 3) {
    for (std::size_t k = 1; k < m; ++k) out[k] = out[k - 1] + (h / 2.0) * (f[k - 1] + f[k]);
    return;
  }
  out[1] = (h / 12.0) * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  for (std::size_t k = 2; k < m; ++k)
    out[k] = out[k - 2] + (h / 3.0) * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
}

}  // namespace radwave
