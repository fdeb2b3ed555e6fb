#pragma once
/// @file solver.hpp
/// Characteristic solver for d+ d- v = G with v = r u and zero Cauchy data.
///
/// The equation box_A u = F becomes d+ d- v = G in null coordinates, with
/// G = rF + A- (d- v + u) + A+ (d+ v - u). Given G, the lattice integrals are
///
///   d- v(tp, tm) = trace(tm) + int_{tm}^{tp} G(s, tm) ds
///   d+ v(tp, tm) = int_0^{tm} G(tp, s) ds
///   v(tp, tm)    = -int_{tm}^{tp} d- v(tp, s) ds
///
/// where trace(tm) = -int_0^{tm} G(tm, s) ds is the value of d- v on r = 0
/// forced by the Dirichlet condition v(t, 0) = 0 (Reflected mode). The
/// PaperFormula mode drops the trace. A potential couples G back to v, and
/// the resulting Volterra system is solved by Picard iteration.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "radwave/dyadic.hpp"
#include "radwave/field.hpp"
#include "radwave/geometry.hpp"
#include "radwave/models.hpp"

namespace radwave {

enum class BoundaryMode { Reflected, PaperFormula };

inline const char* to_string(BoundaryMode m) {
  return m == BoundaryMode::Reflected ? "reflected" : "paper";
}

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  Quadrature quadrature = Quadrature::Trapezoid;
  /// Upper bound for the reported residual; exceeded means an inconsistent
  /// forcing or quadrature. Infinite disables the check.
  double residual_tol = std::numeric_limits<double>::infinity();

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolveOptions: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("SolveOptions: max_iter must be >= 1");
  }
};

struct Solution {
  ComplexField u;
  ComplexField v;
  ComplexField nabla_minus_v;
  ComplexField nabla_minus_u;
  int iterations = 0;
  double final_update = 0.0;
  double residual = 0.0;
  BoundaryMode boundary_mode = BoundaryMode::Reflected;
  /// Right-hand side G evaluated at the returned iterate.
  ComplexField G;
  /// sup |v^{k+1} - v^k| per Picard step; empty for a direct free solve.
  std::vector<double> increments;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public SolverError {
 public:
  DivergenceError(const std::string& what, double short_range_norm)
      : SolverError(what), short_range_norm_(short_range_norm) {}
  double short_range_norm() const { return short_range_norm_; }

 private:
  double short_range_norm_;
};

class MaxIterExceeded : public SolverError {
 public:
  using SolverError::SolverError;
};

// ---------------------------------------------------------------------------
// Line integrals. Rows (fixed tau_-) and columns (fixed tau_+) are independent
// and each row writes only its own nodes, so the loops parallelize without
// changing the arithmetic.

/// d- v from G by integrating along tau_+ from the diagonal.
inline ComplexField nabla_minus_from_G(const ComplexField& G, BoundaryMode mode,
                                       Quadrature q = Quadrature::Trapezoid) {
  const CharGrid& g = G.grid();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.n());
  ComplexField out(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj <= n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    std::vector<cplx> line, acc;
    cplx trace{};
    if (mode == BoundaryMode::Reflected && j > 0) {
      line.resize(j + 1);
      acc.resize(j + 1);
      for (std::size_t s = 0; s <= j; ++s) line[s] = G(j, s);
      cumulative_integral<cplx>(line, acc, g.h(), q);
      trace = -acc[j];
    }
    const std::size_t m = g.n() - j + 1;
    line.resize(m);
    acc.resize(m);
    for (std::size_t k = 0; k < m; ++k) line[k] = G(j + k, j);
    cumulative_integral<cplx>(line, acc, g.h(), q);
    for (std::size_t k = 0; k < m; ++k) out(j + k, j) = trace + acc[k];
  }
  return out;
}

/// d+ v(tp, tm) = int_0^{tm} G(tp, s) ds. Valid in Reflected mode, where v
/// vanishes on the light cone tau_- = 0.
inline ComplexField nabla_plus_from_G(const ComplexField& G, Quadrature q = Quadrature::Trapezoid) {
  const CharGrid& g = G.grid();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.n());
  ComplexField out(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii <= n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<cplx> line(i + 1), acc(i + 1);
    for (std::size_t j = 0; j <= i; ++j) line[j] = G(i, j);
    cumulative_integral<cplx>(line, acc, g.h(), q);
    for (std::size_t j = 0; j <= i; ++j) out(i, j) = acc[j];
  }
  return out;
}

/// v(tp, tm) = -int_{tm}^{tp} d- v(tp, s) ds; zero on the diagonal.
inline ComplexField v_from_nabla(const ComplexField& nabla_minus_v,
                                 Quadrature q = Quadrature::Trapezoid) {
  const CharGrid& g = nabla_minus_v.grid();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.n());
  ComplexField out(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii <= n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<cplx> line(i + 1), acc(i + 1);
    for (std::size_t m = 0; m <= i; ++m) line[m] = nabla_minus_v(i, i - m);
    cumulative_integral<cplx>(line, acc, g.h(), q);
    out(i, i) = cplx{};
    for (std::size_t m = 1; m <= i; ++m) out(i, i - m) = -acc[m];
  }
  return out;
}

class DirichletViolation : public SolverError {
 public:
  using SolverError::SolverError;
};

/// u = v / r off the diagonal; on r = 0 the limit d_r v is taken from a
/// second-order extrapolation of u, preferring the constant-t direction.
///
/// Throws DirichletViolation naming the first diagonal node where
/// |v| > diag_tol * (1 + max|v|).
inline ComplexField u_from_v(const ComplexField& v, double diag_tol = 1e-12) {
  const CharGrid& g = v.grid();
  const std::size_t n = g.n();
  const double scale = 1.0 + v.max_abs();
  for (std::size_t i = 0; i <= n; ++i) {
    if (std::abs(v(i, i)) > diag_tol * scale) {
      throw DirichletViolation("u_from_v: v does not vanish on r = 0 at node (" + std::to_string(i) +
                               ", " + std::to_string(i) + "), |v| = " + std::to_string(std::abs(v(i, i))));
    }
  }
  ComplexField u(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k) {
    if (i != j) u[k] = v[k] / g.r(i, j);
  });
  for (std::size_t i = 0; i <= n; ++i) {
    cplx val{};
    if (i >= 2 && i + 2 <= n) {
      val = 2.0 * u(i + 1, i - 1) - u(i + 2, i - 2);
    } else if (i >= 2) {
      val = 2.0 * u(i, i - 1) - u(i, i - 2);
    } else if (i + 2 <= n) {
      val = 2.0 * u(i + 1, i) - u(i + 2, i);
    } else if (i + 1 <= n) {
      val = u(i + 1, i);
    } else if (i >= 1) {
      val = u(i, i - 1);
    }
    u(i, i) = val;
  }
  return u;
}

/// d- u by centered differences along tau_-, one-sided at both ends.
inline ComplexField nabla_minus_of(const ComplexField& u) {
  const CharGrid& g = u.grid();
  const double h = g.h();
  ComplexField out(g);
  for (std::size_t i = 1; i <= g.n(); ++i) {
    if (i == 1) {
      out(1, 0) = out(1, 1) = (u(1, 1) - u(1, 0)) / h;
      continue;
    }
    out(i, 0) = (-3.0 * u(i, 0) + 4.0 * u(i, 1) - u(i, 2)) / (2.0 * h);
    for (std::size_t j = 1; j < i; ++j) out(i, j) = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h);
    out(i, i) = (3.0 * u(i, i) - 4.0 * u(i, i - 1) + u(i, i - 2)) / (2.0 * h);
  }
  return out;
}

/// sup over interior nodes of |centered mixed difference of v - G|.
inline double residual(const ComplexField& v, const ComplexField& G) {
  v.require_same_grid(G, "residual");
  const CharGrid& g = v.grid();
  const double h2 = 4.0 * g.h() * g.h();
  double worst = 0.0;
  for (std::size_t i = 3; i + 1 <= g.n(); ++i) {
    for (std::size_t j = 1; j + 2 <= i; ++j) {
      const cplx mixed = (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1)) / h2;
      worst = std::max(worst, std::abs(mixed - G(i, j)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sources and G assembly.

/// S = r F on the grid, after checking that F vanishes where t - r < margin.
inline ComplexField source_from_forcing(const Forcing& F, const CharGrid& g) {
  const double margin = F.margin_on(g);
  ComplexField s(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k) {
    const double t = g.t(i, j), r = g.r(i, j);
    const cplx f = F.f(t, r);
    if (t - r < margin && f != cplx{}) {
      throw std::invalid_argument("forcing is nonzero at (t, r) = (" + std::to_string(t) + ", " +
                                  std::to_string(r) + "), inside the support margin t - r < " +
                                  std::to_string(margin));
    }
    s[k] = r * f;
  });
  return s;
}

class NonFiniteValue : public SolverError {
 public:
  using SolverError::SolverError;
};

/// G = S + a- (d- v) + a+ (d+ v) + b u, nodewise. Terms whose coefficient is
/// exactly zero are skipped so that a vanishing potential leaves G == S.
inline ComplexField assemble_G(const ComplexField& source, const GridCoupling& c,
                               const ComplexField& nabla_minus_v, const ComplexField& nabla_plus_v,
                               const ComplexField& u) {
  const CharGrid& g = source.grid();
  ComplexField G(source);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k) {
    cplx acc = G[k];
    if (c.a_minus[k] != cplx{}) acc += c.a_minus[k] * nabla_minus_v[k];
    if (c.a_plus[k] != cplx{}) acc += c.a_plus[k] * nabla_plus_v[k];
    if (c.b[k] != cplx{}) acc += c.b[k] * u[k];
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) {
      throw NonFiniteValue("assemble_G: non-finite value at node (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
    }
    G[k] = acc;
  });
  return G;
}

/// G = rF + A- (d- v + v/r) for a potential with A+ = 0.
inline ComplexField assemble_G(const Forcing& F, const Sampler& a_minus, const ComplexField& v,
                               const ComplexField& nabla_minus_v) {
  v.require_same_grid(nabla_minus_v, "assemble_G");
  const CharGrid& g = v.grid();
  GridCoupling c = zero_coupling(g);
  c.a_minus = ComplexField::sample(g, a_minus);
  c.b = c.a_minus;
  return assemble_G(source_from_forcing(F, g), c, nabla_minus_v, ComplexField(g), u_from_v(v));
}

// ---------------------------------------------------------------------------
// Solves.

namespace detail {

struct Iterate {
  ComplexField nmv, npv, v, u;
};

inline Iterate integrate(const ComplexField& G, BoundaryMode mode, Quadrature q, bool need_plus) {
  Iterate it;
  it.nmv = nabla_minus_from_G(G, mode, q);
  it.npv = need_plus ? nabla_plus_from_G(G, q) : ComplexField(G.grid());
  it.v = v_from_nabla(it.nmv, q);
  it.u = u_from_v(it.v);
  return it;
}

inline Solution finish(Iterate&& it, const ComplexField& G, BoundaryMode mode, const SolveOptions& opts) {
  Solution sol;
  sol.residual = residual(it.v, G);
  sol.nabla_minus_u = nabla_minus_of(it.u);
  sol.u = std::move(it.u);
  sol.v = std::move(it.v);
  sol.nabla_minus_v = std::move(it.nmv);
  sol.boundary_mode = mode;
  sol.G = G;
  if (!(sol.residual <= opts.residual_tol)) {
    throw SolverError("residual " + std::to_string(sol.residual) + " exceeds tolerance " +
                      std::to_string(opts.residual_tol) +
                      "; forcing support or quadrature is inconsistent");
  }
  return sol;
}

}  // namespace detail

/// Direct solve of d+ d- v = S with no potential.
inline Solution solve_source(const ComplexField& source, BoundaryMode mode = BoundaryMode::Reflected,
                             const SolveOptions& opts = {}) {
  opts.validate();
  auto it = detail::integrate(source, mode, opts.quadrature, false);
  Solution sol = detail::finish(std::move(it), source, mode, opts);
  sol.iterations = 1;
  return sol;
}

inline Solution solve_free(const Forcing& F, const CharGrid& grid, BoundaryMode mode = BoundaryMode::Reflected,
                           const SolveOptions& opts = {}) {
  return solve_source(source_from_forcing(F, grid), mode, opts);
}

/// Picard iteration for d+ d- v = S + a- d- v + a+ d+ v + b u.
///
/// Stops when sup|v^{k+1} - v^k| <= tol (1 + sup|v^{k+1}|). Three consecutive
/// growing increments raise DivergenceError carrying `short_range_norm`.
inline Solution solve_coupled(const ComplexField& source, const GridCoupling& c,
                              BoundaryMode mode = BoundaryMode::Reflected, const SolveOptions& opts = {},
                              double short_range_norm = std::numeric_limits<double>::quiet_NaN()) {
  opts.validate();
  const CharGrid& g = source.grid();
  const bool need_plus = !c.plus_is_zero();
  detail::Iterate cur{ComplexField(g), ComplexField(g), ComplexField(g), ComplexField(g)};
  std::vector<double> inc;
  int growth = 0;
  for (int k = 1;; ++k) {
    ComplexField G = assemble_G(source, c, cur.nmv, cur.npv, cur.u);
    detail::Iterate next = detail::integrate(G, mode, opts.quadrature, need_plus);
    const double d = max_abs_diff(next.v, cur.v);
    inc.push_back(d);
    cur = std::move(next);
    if (d <= opts.tol * (1.0 + cur.v.max_abs())) {
      ComplexField G_final = assemble_G(source, c, cur.nmv, cur.npv, cur.u);
      Solution sol = detail::finish(std::move(cur), G_final, mode, opts);
      sol.iterations = k;
      sol.final_update = d;
      sol.increments = std::move(inc);
      return sol;
    }
    growth = (inc.size() >= 2 && d > inc[inc.size() - 2]) ? growth + 1 : 0;
    if (growth >= 3) {
      std::string msg = "Picard iteration diverges (increments grew 3 times in a row, last " +
                        std::to_string(d) + "): potential too large";
      if (!std::isnan(short_range_norm)) msg += ", short-range norm " + std::to_string(short_range_norm);
      throw DivergenceError(msg, short_range_norm);
    }
    if (k >= opts.max_iter) {
      throw MaxIterExceeded("Picard iteration did not reach tol " + std::to_string(opts.tol) + " in " +
                            std::to_string(opts.max_iter) + " iterations (last increment " +
                            std::to_string(d) + ")");
    }
  }
}

/// Short-range norm of A- over the time span of a grid.
inline double grid_short_range_norm(const Sampler& a_minus, double epsilon_a, const CharGrid& g) {
  ShortRangeOptions o;
  o.t_samples.clear();
  const int nt = 33;
  for (int k = 0; k < nt; ++k) o.t_samples.push_back(2.0 * g.tau_max() * k / (nt - 1));
  return short_range_norm(a_minus, epsilon_a, o).value;
}

/// Picard solve of box_A u = F for a potential with A+ = 0 on the grid.
inline Solution solve_perturbed(const Forcing& F, const Potential& A, const CharGrid& grid,
                                const SolveOptions& opts = {}, BoundaryMode mode = BoundaryMode::Reflected) {
  GridCoupling c = sample_coupling(A, grid);
  if (!c.plus_is_zero()) {
    throw std::invalid_argument(
        "solve_perturbed: A+ does not vanish; remove it with gauge_reduce and solve_coupled");
  }
  const ComplexField source = source_from_forcing(F, grid);
  try {
    return solve_coupled(source, c, mode, opts);
  } catch (const DivergenceError& e) {
    const double srn = grid_short_range_norm(split_pm(A).second, A.epsilon_a, grid);
    throw DivergenceError(std::string(e.what()) + " (measured short-range norm of A-: " +
                              std::to_string(srn) + ")",
                          srn);
  }
}

}  // namespace radwave
