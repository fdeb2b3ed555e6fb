#pragma once
/// @file geometry.hpp
/// Null coordinates, the triangular characteristic lattice and the weights
/// used by the weighted sup-norms.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace radwave {

/// A point in null coordinates tau_plus = (t+r)/2, tau_minus = (t-r)/2.
struct CharPoint {
  double tau_plus = 0.0;
  double tau_minus = 0.0;

  double t() const { return tau_plus + tau_minus; }
  double r() const { return tau_plus - tau_minus; }

  friend bool operator==(const CharPoint&, const CharPoint&) = default;
};

inline CharPoint to_char(double t, double r) {
  if (!(r >= 0.0)) {
    throw std::invalid_argument("to_char: radius must be non-negative, got " +
                                std::to_string(r));
  }
  return {(t + r) / 2.0, (t - r) / 2.0};
}

inline std::pair<double, double> from_char(const CharPoint& p) {
  return {p.t(), p.r()};
}

/// Japanese bracket <s> = sqrt(1 + s^2).
inline double jbracket(double s) { return std::hypot(1.0, s); }

/// Uniform lattice on 0 <= tau_minus <= tau_plus <= tau_max.
///
/// Node (i, j) sits at (i h, j h) with 0 <= j <= i <= n; i indexes tau_plus
/// and j indexes tau_minus. Storage is column-major in tau_plus: all nodes of
/// one tau_plus value are contiguous, and the flat order is lexicographic in
/// (tau_plus, tau_minus).
class CharGrid {
 public:
  CharGrid(double tau_max, std::size_t n) : tau_max_(tau_max), n_(n) {
    if (!(tau_max > 0.0) || !std::isfinite(tau_max)) {
      throw std::invalid_argument("CharGrid: tau_max must be positive and finite");
    }
    if (n == 0) throw std::invalid_argument("CharGrid: n must be positive");
    h_ = tau_max / static_cast<double>(n);
  }

  double tau_max() const { return tau_max_; }
  std::size_t n() const { return n_; }
  double h() const { return h_; }
  std::size_t node_count() const { return (n_ + 1) * (n_ + 2) / 2; }

  std::size_t index(std::size_t i, std::size_t j) const { return i * (i + 1) / 2 + j; }

  double tau(std::size_t k) const { return static_cast<double>(k) * h_; }
  CharPoint point(std::size_t i, std::size_t j) const { return {tau(i), tau(j)}; }
  double t(std::size_t i, std::size_t j) const { return tau(i) + tau(j); }
  double r(std::size_t i, std::size_t j) const { return tau(i) - tau(j); }

  friend bool operator==(const CharGrid& a, const CharGrid& b) {
    return a.n_ == b.n_ && a.tau_max_ == b.tau_max_;
  }

 private:
  double tau_max_;
  std::size_t n_;
  double h_;
};

/// Visit every node in flat (lexicographic) order as f(i, j, flat_index).
template <class F>
void for_each_node(const CharGrid& g, F&& f) {
  std::size_t k = 0;
  for (std::size_t i = 0; i <= g.n(); ++i)
    for (std::size_t j = 0; j <= i; ++j) f(i, j, k++);
}

enum class WeightKind { TauPlus, TauPlusR, TauPlusR2Bracket };

/// Weights tau_+, tau_+ r and tau_+ r^2 <r>^eps.
struct WeightSpec {
  WeightKind kind = WeightKind::TauPlus;
  double epsilon = 0.0;

  static WeightSpec tau_plus() { return {WeightKind::TauPlus, 0.0}; }
  static WeightSpec tau_plus_r() { return {WeightKind::TauPlusR, 0.0}; }
  static WeightSpec tau_plus_r2_bracket(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("WeightSpec: epsilon must be positive");
    return {WeightKind::TauPlusR2Bracket, eps};
  }
};

inline double weight_eval(const WeightSpec& spec, const CharPoint& p) {
  const double r = p.r();
  // Exact lattice nodes satisfy these without slack.
  if (r < 0.0 || p.t() < 0.0) {
    throw std::invalid_argument("weight_eval: point outside the physical region t >= r >= 0");
  }
  switch (spec.kind) {
    case WeightKind::TauPlus:
      return p.tau_plus;
    case WeightKind::TauPlusR:
      return p.tau_plus * r;
    case WeightKind::TauPlusR2Bracket:
      return p.tau_plus * r * r * std::pow(jbracket(r), spec.epsilon);
  }
  return 0.0;
}

}  // namespace radwave
