#pragma once
/// @file dyadic.hpp
/// Littlewood-Paley partition of unity on the half line and the dyadic
/// smallness functional for short-range potentials.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "radwave/geometry.hpp"

namespace radwave {

namespace detail {

/// C-infinity template exp(-1/((r-1/2)(2-r))) on (1/2, 2), zero elsewhere.
inline double bump_template(double r) {
  if (!(r > 0.5 && r < 2.0)) return 0.0;
  return std::exp(-1.0 / ((r - 0.5) * (2.0 - r)));
}

}  // namespace detail

/// The profile phi = psi / sum_k psi(2^k .). Only k in {-1, 0, 1} can be
/// nonzero on (1/2, 2); the wider loop costs nothing and keeps the sum exact.
inline double lp_bump(double r) {
  const double num = detail::bump_template(r);
  if (num == 0.0) return 0.0;
  double den = 0.0;
  for (int k = -2; k <= 2; ++k) den += detail::bump_template(std::ldexp(r, k));
  return num / den;
}

inline std::function<double(double)> make_bump() { return &lp_bump; }

/// phi_j(r) = phi(2^j r); supported on [2^{-j-1}, 2^{-j+1}].
inline double phi_j(int j, double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("phi_j: r must be positive, got " + std::to_string(r));
  }
  return lp_bump(std::ldexp(r, j));
}

/// A truncated window of the partition, j_min..j_max inclusive.
struct DyadicPartition {
  std::function<double(double)> bump = make_bump();
  int j_min = -20;
  int j_max = 20;

  double operator()(int j, double r) const { return bump(std::ldexp(r, j)); }
};

class WindowTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum of phi_j(r) over j_min..j_max. Throws WindowTooSmall when a nonzero
/// term falls outside the window.
inline double partition_sum(double r, int j_min, int j_max) {
  if (!(r > 0.0)) throw std::invalid_argument("partition_sum: r must be positive");
  if (j_min > j_max) throw std::invalid_argument("partition_sum: empty window");
  // phi_j(r) can be nonzero only for j within 1 of -ilogb(r).
  const int c = -std::ilogb(r);
  bool missing = false;
  for (int j = c - 2; j <= c + 2; ++j) missing = missing || ((j < j_min || j > j_max) && phi_j(j, r) != 0.0);
  if (missing) {
    throw WindowTooSmall("partition_sum: window [" + std::to_string(j_min) + ", " +
                         std::to_string(j_max) + "] does not cover r = " + std::to_string(r));
  }
  double s = 0.0;
  for (int j = j_min; j <= j_max; ++j) s += phi_j(j, r);
  return s;
}

/// Sum over the smallest window that covers r.
inline double partition_sum(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("partition_sum: r must be positive");
  const int c = -std::ilogb(r);
  return partition_sum(r, c - 2, c + 2);
}

using Sampler = std::function<std::complex<double>(double t, double r)>;

struct ShortRangeReport {
  double value = 0.0;
  std::vector<std::pair<int, double>> per_j;
  double epsilon_a = 0.0;
  double delta_a = 0.0;
  bool satisfied = false;
  std::vector<std::string> warnings;
};

struct ShortRangeOptions {
  int j_min = -20;
  int j_max = 40;
  std::vector<double> t_samples{0.0};
  int r_samples_per_shell = 64;
  double delta_a = 1.0;
};

/// Sum over j of 2^{-j} <2^{-j}>^{eps_A} sup_{t,r} |phi_j(r) A(t,r)|.
///
/// The sup runs over every t sample as well as r, so the resulting bound is
/// uniform in time. Radii are log-spaced inside each shell, endpoints included.
inline ShortRangeReport short_range_norm(const Sampler& a_minus, double epsilon_a,
                                         const ShortRangeOptions& opt = {}) {
  if (!(epsilon_a > 0.0)) throw std::invalid_argument("short_range_norm: epsilon_a must be positive");
  if (opt.j_min > opt.j_max) throw std::invalid_argument("short_range_norm: empty j range");
  if (opt.r_samples_per_shell < 2) throw std::invalid_argument("short_range_norm: need >= 2 radii per shell");
  if (opt.t_samples.empty()) throw std::invalid_argument("short_range_norm: no time samples");

  ShortRangeReport rep;
  rep.epsilon_a = epsilon_a;
  rep.delta_a = opt.delta_a;
  const int m = opt.r_samples_per_shell;
  for (int j = opt.j_min; j <= opt.j_max; ++j) {
    double sup = 0.0;
    for (int k = 0; k < m; ++k) {
      const double r = std::exp2(-j - 1 + 2.0 * k / (m - 1));
      const double phi = phi_j(j, r);
      if (phi == 0.0) continue;
      for (double t : opt.t_samples) sup = std::max(sup, phi * std::abs(a_minus(t, r)));
    }
    const double scale = std::exp2(-j);
    const double term = scale * std::pow(jbracket(scale), epsilon_a) * sup;
    rep.per_j.emplace_back(j, term);
  }
  // Fixed j order keeps the reduction deterministic.
  for (const auto& [j, term] : rep.per_j) rep.value += term;
  rep.satisfied = rep.value <= rep.delta_a;

  const double lo = rep.per_j.front().second;
  const double hi = rep.per_j.back().second;
  if (rep.value > 0.0) {
    if (lo > 1e-3 * rep.value) {
      rep.warnings.push_back("boundary term at j = " + std::to_string(opt.j_min) +
                             " exceeds 1e-3 of the total; sum may be truncated (large r)");
    }
    if (hi > 1e-3 * rep.value) {
      rep.warnings.push_back("boundary term at j = " + std::to_string(opt.j_max) +
                             " exceeds 1e-3 of the total; sum may be truncated (small r)");
    }
  }
  return rep;
}

}  // namespace radwave
