#pragma once
/// @file models.hpp
/// Potential and forcing catalogs, the A+/A- splitting and the gauge phase.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "radwave/dyadic.hpp"
#include "radwave/field.hpp"
#include "radwave/geometry.hpp"

namespace radwave {

/// (1 - x^2)^power on [-1, 1], zero outside.
inline double poly_bump(double x, int power = 4) {
  if (!(std::abs(x) < 1.0)) return 0.0;
  return std::pow(1.0 - x * x, power);
}

// ---------------------------------------------------------------------------
// Potential profiles. Each evaluates to i * lambda * (real profile).

struct InversePower {
  double lambda = 0.0;
  double p = 2.0;
};
struct BumpProfile {
  double lambda = 0.0;
  double r0 = 1.0;
  double w = 0.5;
};
struct TimeModulated {
  double lambda = 0.0;
  double p = 2.0;
  double omega = 1.0;
};

using Profile = std::variant<InversePower, BumpProfile, TimeModulated>;

inline double profile_real(const Profile& prof, double t, double r) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, InversePower>) {
          return f.lambda * std::pow(1.0 + r, -f.p);
        } else if constexpr (std::is_same_v<T, BumpProfile>) {
          return f.lambda * poly_bump((r - f.r0) / f.w);
        } else {
          return f.lambda * std::cos(f.omega * t) * std::pow(1.0 + r, -f.p);
        }
      },
      prof);
}

inline double& profile_lambda(Profile& prof) {
  return std::visit([](auto& f) -> double& { return f.lambda; }, prof);
}

inline cplx profile_value(const Profile& prof, double t, double r) {
  return {0.0, profile_real(prof, t, r)};
}

/// Which profile (if any) drives A- and A+.
struct PotentialModel {
  std::optional<Profile> minus;
  std::optional<Profile> plus;
  double epsilon_a = 0.5;
};

/// Potential given by its (t, r) components A0, A1, both purely imaginary.
struct Potential {
  Sampler a0;
  Sampler a1;
  double epsilon_a = 0.5;
};

/// Raised when an inverse-power tail is too slow for the dyadic sum to converge.
class ShortRangeViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotElectromagnetic : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void validate_profile(const Profile& prof, double epsilon_a, const char* which) {
  const auto check_p = [&](double p) {
    if (!(p > 1.0 + epsilon_a)) {
      throw ShortRangeViolation(std::string("short-range condition violated for ") + which +
                                ": decay power p = " + std::to_string(p) +
                                " must exceed 1 + epsilon_a = " + std::to_string(1.0 + epsilon_a));
    }
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if (!std::isfinite(f.lambda)) throw std::invalid_argument("potential amplitude must be finite");
        if constexpr (std::is_same_v<T, BumpProfile>) {
          if (!(f.w > 0.0)) throw std::invalid_argument("bump potential width must be positive");
        } else {
          check_p(f.p);
        }
      },
      prof);
}

}  // namespace detail

inline Potential make_potential(const PotentialModel& model) {
  if (!(model.epsilon_a > 0.0)) throw std::invalid_argument("epsilon_a must be positive");
  if (model.minus) detail::validate_profile(*model.minus, model.epsilon_a, "A-");
  if (model.plus) detail::validate_profile(*model.plus, model.epsilon_a, "A+");
  const auto minus = model.minus;
  const auto plus = model.plus;
  const auto eval = [](const std::optional<Profile>& p, double t, double r) {
    return p ? profile_value(*p, t, r) : cplx{};
  };
  // A0 = A+ + A-, A1 = A+ - A-.
  Potential out;
  out.a0 = [=](double t, double r) { return eval(plus, t, r) + eval(minus, t, r); };
  out.a1 = [=](double t, double r) { return eval(plus, t, r) - eval(minus, t, r); };
  out.epsilon_a = model.epsilon_a;
  return out;
}

inline Potential zero_potential(double epsilon_a = 0.5) {
  return make_potential(PotentialModel{std::nullopt, std::nullopt, epsilon_a});
}

/// A+ = (A0 + A1)/2, A- = (A0 - A1)/2. The returned samplers throw
/// NotElectromagnetic when a component has a real part above 1e-12.
inline std::pair<Sampler, Sampler> split_pm(const Potential& a) {
  const auto check = [](cplx z, const char* which, double t, double r) {
    if (std::abs(z.real()) > 1e-12) {
      throw NotElectromagnetic(std::string("potential component ") + which +
                               " has nonzero real part " + std::to_string(z.real()) +
                               " at (t, r) = (" + std::to_string(t) + ", " + std::to_string(r) + ")");
    }
  };
  Sampler a0 = a.a0, a1 = a.a1;
  Sampler plus = [=](double t, double r) {
    const cplx x = a0(t, r), y = a1(t, r);
    check(x, "A0", t, r);
    check(y, "A1", t, r);
    return (x + y) / 2.0;
  };
  Sampler minus = [=](double t, double r) {
    const cplx x = a0(t, r), y = a1(t, r);
    check(x, "A0", t, r);
    check(y, "A1", t, r);
    return (x - y) / 2.0;
  };
  return {plus, minus};
}

// ---------------------------------------------------------------------------
// Forcing.

struct Forcing {
  Sampler f;
  /// F must vanish unless t >= r + margin. Unset means one grid cell.
  std::optional<double> support_margin;

  double margin_on(const CharGrid& g) const { return support_margin.value_or(g.h()); }
};

inline Forcing zero_forcing() {
  return {[](double, double) { return cplx{}; }, std::nullopt};
}

/// amplitude * B((t - t0)/wt) * B((r - r0)/wr) with B the quartic bump.
struct BumpForcing {
  double amplitude = 1.0;
  double t0 = 3.0;
  double r0 = 1.0;
  double wt = 0.5;
  double wr = 0.5;
};

inline Forcing make_forcing(const BumpForcing& b, std::optional<double> margin = std::nullopt) {
  if (!(b.wt > 0.0 && b.wr > 0.0)) throw std::invalid_argument("bump forcing widths must be positive");
  const double gap = (b.t0 - b.wt) - (b.r0 + b.wr);
  if (gap < margin.value_or(0.0)) {
    throw std::invalid_argument("bump forcing support reaches t - r = " + std::to_string(gap) +
                                ", below the support margin");
  }
  return {[b](double t, double r) {
            return cplx(b.amplitude * poly_bump((t - b.t0) / b.wt) * poly_bump((r - b.r0) / b.wr));
          },
          margin};
}

/// Smooth radial profile u*(t,r) = S((t - t0)/a) S(r/b), S(x) = (1 - x^2)^6.
///
/// It is even in r and vanishes unless t - r >= t0 - a - b, so v* = r u*
/// is a compactly supported solution of box u = box u* with zero data.
struct ManufacturedProfile {
  double t0 = 3.0;
  double a = 1.5;
  double b = 1.2;

  static constexpr int kPower = 6;

  // S and its first two derivatives.
  static double s0(double x) { return poly_bump(x, kPower); }
  static double s1(double x) {
    return std::abs(x) < 1.0 ? -2.0 * kPower * x * std::pow(1.0 - x * x, kPower - 1) : 0.0;
  }
  static double s2(double x) {
    if (!(std::abs(x) < 1.0)) return 0.0;
    const double q = 1.0 - x * x;
    return -2.0 * kPower * std::pow(q, kPower - 1) +
           4.0 * kPower * (kPower - 1) * x * x * std::pow(q, kPower - 2);
  }
  /// S'(x)/x, which stays smooth at x = 0.
  static double s1_over_x(double x) {
    return std::abs(x) < 1.0 ? -2.0 * kPower * std::pow(1.0 - x * x, kPower - 1) : 0.0;
  }

  double u(double t, double r) const { return s0((t - t0) / a) * s0(r / b); }
  double u_t(double t, double r) const { return s1((t - t0) / a) / a * s0(r / b); }
  double u_r(double t, double r) const { return s0((t - t0) / a) * s1(r / b) / b; }
  double v(double t, double r) const { return r * u(t, r); }

  /// u_tt - u_rr - (2/r) u_r.
  double box_u(double t, double r) const {
    const double x = (t - t0) / a, y = r / b;
    return s2(x) / (a * a) * s0(y) - s0(x) * (s2(y) + 2.0 * s1_over_x(y)) / (b * b);
  }

  double nabla_minus_u(double t, double r) const { return u_t(t, r) - u_r(t, r); }

  /// Forcing for which u* solves box u - A- nabla_- u = F (A+ = 0).
  Forcing forcing(const Sampler& a_minus = {}) const {
    const ManufacturedProfile self = *this;
    if (!a_minus) return {[self](double t, double r) { return cplx(self.box_u(t, r)); }, std::nullopt};
    return {[self, a_minus](double t, double r) {
              return cplx(self.box_u(t, r)) - a_minus(t, r) * self.nabla_minus_u(t, r);
            },
            std::nullopt};
  }
};

// ---------------------------------------------------------------------------
// Potential on the grid and the gauge phase.

/// Coefficients of the source-integrated equation
///   d+ d- v = S + a_minus (d- v) + a_plus (d+ v) + b u,  u = v / r.
/// For box u - A.grad u = F one has S = rF, a_minus = A-, a_plus = A+,
/// b = A- - A+.
struct GridCoupling {
  ComplexField a_minus;
  ComplexField a_plus;
  ComplexField b;

  bool plus_is_zero() const { return a_plus.max_abs() == 0.0; }
  bool is_zero() const {
    return a_minus.max_abs() == 0.0 && a_plus.max_abs() == 0.0 && b.max_abs() == 0.0;
  }
};

inline GridCoupling zero_coupling(const CharGrid& g) {
  return {ComplexField(g), ComplexField(g), ComplexField(g)};
}

inline GridCoupling sample_coupling(const Potential& pot, const CharGrid& g) {
  const auto [plus, minus] = split_pm(pot);
  GridCoupling c{ComplexField::sample(g, minus), ComplexField::sample(g, plus), ComplexField(g)};
  for (std::size_t k = 0; k < c.b.size(); ++k) c.b[k] = c.a_minus[k] - c.a_plus[k];
  return c;
}

struct GaugePhase {
  ComplexField phi;
  bool is_imaginary = true;
};

namespace detail {

/// phi(i, j) = int_0^{tau_j} f(tau_i, s) ds by the composite trapezoid rule,
/// with f given as a (t, r) sampler.
inline ComplexField integrate_along_minus(const Sampler& f, const CharGrid& g) {
  ComplexField out(g);
  std::vector<cplx> col, acc;
  for (std::size_t i = 0; i <= g.n(); ++i) {
    col.resize(i + 1);
    acc.resize(i + 1);
    for (std::size_t j = 0; j <= i; ++j) col[j] = f(g.t(i, j), g.r(i, j));
    cumulative_integral<cplx>(col, acc, g.h(), Quadrature::Trapezoid);
    for (std::size_t j = 0; j <= i; ++j) out(i, j) = acc[j];
  }
  return out;
}

/// (d/dtau_+) f = (d_t + d_r) f by a centered difference, one-sided near r = 0.
inline Sampler d_plus(const Sampler& f, double step = 1e-5) {
  return [f, step](double t, double r) {
    if (r >= step) return (f(t + step, r + step) - f(t - step, r - step)) / (2.0 * step);
    return (-3.0 * f(t, r) + 4.0 * f(t + step, r + step) - f(t + 2 * step, r + 2 * step)) /
           (2.0 * step);
  };
}

}  // namespace detail

/// phi with d- phi = A+ and phi = 0 on the light cone tau_- = 0.
inline GaugePhase gauge_phase(const Sampler& a_plus, const CharGrid& g) {
  GaugePhase out{detail::integrate_along_minus(a_plus, g), true};
  for (const auto& z : out.phi.values()) {
    if (std::abs(z.real()) > 1e-12) {
      out.is_imaginary = false;
      break;
    }
  }
  return out;
}

enum class GaugeDirection { Forward, Inverse };

/// Nodewise multiplication by exp(+phi) (Forward) or exp(-phi) (Inverse).
inline ComplexField gauge_apply(const ComplexField& v, const GaugePhase& phase, GaugeDirection dir) {
  v.require_same_grid(phase.phi, "gauge_apply");
  ComplexField out(v.grid());
  const double sign = dir == GaugeDirection::Forward ? 1.0 : -1.0;
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] * std::exp(sign * phase.phi[k]);
  return out;
}

/// Problem for w = exp(-phi) v after the A+ term is removed.
struct GaugeReducedProblem {
  GaugePhase phase;
  GridCoupling coupling;
  ComplexField source;
};

/// Conjugates d+ d- v = S + A- (d- v + u) + A+ (d+ v - u) by v = exp(phi) w.
///
/// The result has a_plus = 0, a_minus = A- - d+ phi and the zeroth-order
/// coefficient b = A- - A+ + r (A- A+ - d+ A+); the source becomes exp(-phi) S.
inline GaugeReducedProblem gauge_reduce(const Potential& pot, const ComplexField& source) {
  const CharGrid& g = source.grid();
  const auto [plus, minus] = split_pm(pot);
  GaugeReducedProblem out{gauge_phase(plus, g), zero_coupling(g), ComplexField(g)};
  const Sampler dplus = detail::d_plus(plus);
  const ComplexField dplus_phi = detail::integrate_along_minus(dplus, g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k) {
    const double t = g.t(i, j), r = g.r(i, j);
    const cplx am = minus(t, r), ap = plus(t, r);
    out.coupling.a_minus[k] = am - dplus_phi[k];
    out.coupling.b[k] = am - ap + r * (am * ap - dplus(t, r));
    out.source[k] = std::exp(-out.phase.phi[k]) * source[k];
  });
  return out;
}

}  // namespace radwave
