#pragma once
/// @file cli.hpp
/// Subcommand orchestration: runs a scenario, writes CSV reports and a
/// manifest with SHA-256 checksums of every emitted file.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radwave/config.hpp"
#include "radwave/dyadic.hpp"
#include "radwave/estimates.hpp"
#include "radwave/models.hpp"
#include "radwave/solver.hpp"
#include "radwave/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace radwave {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitDivergence = 2, kExitCheckFailed = 3 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"solve", "norms",   "lemma1",         "decay",
                                              "gauge-check", "sweep", "partition-check", "converge"};
  return names;
}

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// Thread count from RADWAVE_THREADS, when set.
inline void apply_thread_env() {
#ifdef _OPENMP
  if (const char* s = std::getenv("RADWAVE_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

/// Shortest round-trip formatting; negative zero prints as 0.
inline std::string fmt_num(double x) {
  if (x == 0.0) return "0";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return hex.str();
}

namespace detail {

class Csv {
 public:
  Csv(const std::filesystem::path& p, const std::string& header) : out_(p, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + p.string());
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  void line(const std::string& s) { out_ << s << '\n'; }

 private:
  static std::string cell(double x) { return fmt_num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  std::ofstream out_;
};

struct Scenario {
  CharGrid grid;
  Forcing forcing;
  std::optional<Potential> potential;
  GridCoupling coupling;
  ComplexField source;
};

inline Scenario build(const ScenarioConfig& cfg, const CharGrid& grid) {
  Scenario sc{grid, cfg.make_forcing(), std::nullopt, zero_coupling(grid), ComplexField(grid)};
  if (auto model = cfg.potential_model()) {
    sc.potential = make_potential(*model);
    sc.coupling = sample_coupling(*sc.potential, grid);
  }
  sc.source = source_from_forcing(sc.forcing, grid);
  return sc;
}

inline Solution solve(const ScenarioConfig& cfg, const Scenario& sc) {
  return solve_coupled(sc.source, sc.coupling, cfg.solver.mode, cfg.solve_options(),
                       sc.potential ? grid_short_range_norm(split_pm(*sc.potential).second,
                                                            sc.potential->epsilon_a, sc.grid)
                                    : 0.0);
}

inline std::filesystem::path out_file(const ScenarioConfig& cfg, const std::string& suffix) {
  return std::filesystem::path(cfg.output.dir) / (cfg.output.prefix + "_" + suffix);
}

inline nlohmann::ordered_json config_echo(const RawConfig& raw) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [sec, keys] : raw.sections) {
    auto& s = j[sec];
    s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : keys) s[k] = v.text;
  }
  return j;
}

inline std::string timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(e));
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline std::filesystem::path write_manifest(const ScenarioConfig& cfg, const std::string& name,
                                            const std::vector<std::filesystem::path>& files) {
  nlohmann::ordered_json m;
  m["tool"] = "radwave";
  m["version"] = kVersion;
  m["subcommand"] = name;
  m["timestamp"] = timestamp();
  m["config"] = config_echo(cfg.raw);
  m["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    m["files"].push_back({{"name", f.filename().string()}, {"sha256", sha256_file(f)}});
  }
  const auto path = out_file(cfg, name + "_manifest.json");
  std::ofstream(path, std::ios::binary) << m.dump(2) << '\n';
  return path;
}

// --- subcommands -----------------------------------------------------------

inline void write_solution(const std::filesystem::path& p, const Solution& sol) {
  Csv csv(p, "tau_plus,tau_minus,t,r,re_u,im_u,abs_u,re_v,im_v,re_nmv,im_nmv");
  const CharGrid& g = sol.u.grid();
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k) {
    csv.row(g.tau(i), g.tau(j), g.t(i, j), g.r(i, j), sol.u[k].real(), sol.u[k].imag(), std::abs(sol.u[k]),
            sol.v[k].real(), sol.v[k].imag(), sol.nabla_minus_v[k].real(), sol.nabla_minus_v[k].imag());
  });
}

inline RunResult cmd_solve(const ScenarioConfig& cfg) {
  const auto sc = build(cfg, cfg.make_grid());
  const Solution sol = solve(cfg, sc);
  RunResult res;
  res.files.push_back(out_file(cfg, "solution.csv"));
  write_solution(res.files.back(), sol);
  res.message = "iterations " + std::to_string(sol.iterations) + ", residual " + fmt_num(sol.residual);
  return res;
}

inline RunResult cmd_norms(const ScenarioConfig& cfg) {
  const auto sc = build(cfg, cfg.make_grid());
  const Solution sol = solve(cfg, sc);
  const auto eps_a = sc.potential ? std::optional<double>(sc.potential->epsilon_a) : std::nullopt;
  const EstimateReport rep = estimate_constants(sol, sc.forcing, cfg.estimate.epsilon, eps_a);
  RunResult res;
  res.files.push_back(out_file(cfg, "norms.csv"));
  {
    Csv csv(res.files.back(),
            "epsilon,norm_u,norm_nabla,norm_F,c_emp_u,c_emp_nabla,argmax_u_tp,argmax_u_tm,truncation");
    csv.row(rep.epsilon, rep.norm_u, rep.norm_nabla, rep.norm_F, rep.c_emp_u, rep.c_emp_nabla,
            rep.argmax_u.tau_plus, rep.argmax_u.tau_minus, rep.truncation);
  }
  // Boundary trace carried by the reflected representation, for the G of this solution.
  const BoundaryAudit audit = boundary_trace_audit(sol.G, cfg.solver.quadrature);
  res.files.push_back(out_file(cfg, "boundary.csv"));
  {
    Csv csv(res.files.back(), "tau_minus,re_trace,im_trace,abs_trace");
    for (std::size_t j = 0; j < audit.row_value.size(); ++j) {
      const cplx z = audit.row_value[j];
      csv.row(sc.grid.tau(j), z.real(), z.imag(), std::abs(z));
    }
    csv.line("weighted_norm,max_row_variation");
    csv.row(audit.weighted_norm, audit.max_row_variation);
  }
  res.message = "c_emp_u " + fmt_num(rep.c_emp_u) + ", c_emp_nabla " + fmt_num(rep.c_emp_nabla) +
                (rep.epsilon_exceeds_epsilon_a ? " (epsilon > epsilon_a)" : "");
  return res;
}

inline RunResult cmd_lemma1(const ScenarioConfig& cfg) {
  const auto pts = lemma1_lattice(cfg.lemma1.tau_max, static_cast<std::size_t>(cfg.lemma1.n));
  RunResult res;
  res.files.push_back(out_file(cfg, "lemma1.csv"));
  Csv csv(res.files.back(), "epsilon,samples,sup_ratio,c_constructive,argmax_tp,argmax_tm,pass");
  bool all = true;
  for (double eps : cfg.lemma1.epsilons) {
    const Lemma1Report rep = lemma1_check(pts, eps);
    csv.row(eps, rep.samples.size(), rep.sup_ratio, rep.c_constructive, rep.argmax.tau_plus,
            rep.argmax.tau_minus, rep.pass);
    all = all && rep.pass;
  }
  if (!all) {
    res.exit_code = kExitCheckFailed;
    res.message = "bound violated for at least one epsilon";
  }
  return res;
}

inline RunResult cmd_decay(const ScenarioConfig& cfg) {
  const auto sc = build(cfg, cfg.make_grid());
  const Solution sol = solve(cfg, sc);
  const auto [lo, hi] = cfg.window();
  const DecayFit fit = decay_fit(sol.u, lo, hi, cfg.estimate.fit_samples);
  RunResult res;
  res.files.push_back(out_file(cfg, "decay.csv"));
  Csv csv(res.files.back(), "t,sup_u");
  for (std::size_t k = 0; k < fit.t_values.size(); ++k) csv.row(fit.t_values[k], fit.sup_u[k]);
  csv.line("slope,intercept,window_lo,window_hi");
  csv.row(fit.slope, fit.intercept, fit.t_lo, fit.t_hi);
  res.message = "slope " + fmt_num(fit.slope);
  return res;
}

/// Largest |a - b| over the nodes of the coarse grid of `a`; `b` lives on a
/// grid refined by an integer factor.
inline double max_diff_refined(const ComplexField& coarse, const ComplexField& fine) {
  const std::size_t f = fine.grid().n() / coarse.grid().n();
  double m = 0.0;
  for_each_node(coarse.grid(), [&](std::size_t i, std::size_t j, std::size_t k) {
    m = std::max(m, std::abs(coarse[k] - fine(f * i, f * j)));
  });
  return m;
}

struct GaugeCheckResult {
  double modulus_defect = 0.0;
  double consistency = 0.0;
  double discretization = 0.0;
  double zeroth_order = 0.0;
};

/// Solve with (A+, A-) directly and through the phase-reduced problem.
inline GaugeCheckResult gauge_check(const PotentialModel& model, const Forcing& forcing, const CharGrid& grid,
                                    const SolveOptions& opts) {
  const Potential pot = make_potential(model);
  const auto direct_at = [&](const CharGrid& g) {
    return solve_coupled(source_from_forcing(forcing, g), sample_coupling(pot, g), BoundaryMode::Reflected, opts);
  };
  const Solution direct = direct_at(grid);
  const Solution fine = direct_at(CharGrid(grid.tau_max(), 2 * grid.n()));
  const GaugeReducedProblem red = gauge_reduce(pot, source_from_forcing(forcing, grid));
  const Solution reduced = solve_coupled(red.source, red.coupling, BoundaryMode::Reflected, opts);
  const ComplexField back = gauge_apply(reduced.v, red.phase, GaugeDirection::Forward);
  const ComplexField turned = gauge_apply(direct.v, red.phase, GaugeDirection::Forward);

  GaugeCheckResult r;
  for (std::size_t k = 0; k < direct.v.size(); ++k) {
    r.modulus_defect = std::max(r.modulus_defect, std::abs(std::abs(turned[k]) - std::abs(direct.v[k])));
    r.zeroth_order = std::max(r.zeroth_order, std::abs(red.coupling.b[k] - red.coupling.a_minus[k]));
  }
  r.consistency = max_abs_diff(back, direct.v);
  r.discretization = max_diff_refined(direct.v, fine.v);
  return r;
}

inline RunResult cmd_gauge_check(const ScenarioConfig& cfg) {
  auto model = cfg.potential_model();
  if (!model || (!model->minus && !model->plus)) {
    throw ConfigError(0, "potential", "gauge-check needs a [potential] section with a family");
  }
  // Without an explicit A+ profile, A- is reused for A+.
  if (!model->plus) model->plus = model->minus;
  const GaugeCheckResult r = gauge_check(*model, cfg.make_forcing(), cfg.make_grid(), cfg.solve_options());
  RunResult res;
  res.files.push_back(out_file(cfg, "gauge.csv"));
  Csv csv(res.files.back(), "metric,value,threshold,pass");
  const bool mod_ok = r.modulus_defect <= 1e-12;
  const bool cons_ok = r.consistency <= 5.0 * r.discretization;
  csv.row("modulus_invariance", r.modulus_defect, 1e-12, mod_ok);
  csv.row("gauge_consistency", r.consistency, 5.0 * r.discretization, cons_ok);
  csv.row("discretization_error", r.discretization, std::nan(""), true);
  csv.row("zeroth_order_term", r.zeroth_order, std::nan(""), true);
  if (!(mod_ok && cons_ok)) {
    res.exit_code = kExitCheckFailed;
    res.message = "gauge invariance check failed";
  }
  return res;
}

inline RunResult cmd_sweep(const ScenarioConfig& cfg) {
  auto model = cfg.potential_model();
  if (!model || !model->minus) throw ConfigError(0, "potential", "sweep needs a [potential] family for A-");
  if (model->plus) throw ConfigError(0, "potential.plus_family", "sweep runs with A+ = 0");
  SweepScenario sc;
  sc.grid = cfg.make_grid();
  sc.forcing = cfg.make_forcing();
  sc.model = *model;
  sc.epsilon = cfg.estimate.epsilon;
  sc.opts = cfg.solve_options();
  sc.mode = cfg.solver.mode;
  const auto rows = sweep_amplitude(sc, cfg.sweep.lambdas);
  RunResult res;
  res.files.push_back(out_file(cfg, "sweep.csv"));
  Csv csv(res.files.back(), "lambda,short_range_norm,iterations,contraction_ratio,c_emp_u,c_emp_nabla,diverged");
  for (const auto& r : rows) {
    csv.row(r.lambda, r.short_range_norm, r.iterations, r.contraction_ratio, r.c_emp_u, r.c_emp_nabla, r.diverged);
  }
  return res;
}

struct PartitionCheck {
  std::vector<std::pair<double, double>> sums;  // (r, sum)
  double max_abs_error = 0.0;
  int support_violations = 0;
  int dilation_violations = 0;
  int window_errors = 0;

  bool pass() const {
    return max_abs_error <= 1e-12 && support_violations == 0 && dilation_violations == 0 && window_errors == 0;
  }
};

inline PartitionCheck partition_check(double log2_lo, double log2_hi, int samples, int j_min, int j_max) {
  PartitionCheck pc;
  for (int k = 0; k < samples; ++k) {
    const double r = std::exp2(log2_lo + (log2_hi - log2_lo) * k / (samples - 1));
    try {
      const double s = partition_sum(r, j_min, j_max);
      pc.sums.emplace_back(r, s);
      pc.max_abs_error = std::max(pc.max_abs_error, std::abs(s - 1.0));
    } catch (const WindowTooSmall&) {
      ++pc.window_errors;
      pc.sums.emplace_back(r, std::nan(""));
    }
  }
  // Support and dilation, probed densely around each shell.
  for (int j = j_min; j <= j_max; ++j) {
    const double lo = std::exp2(-j - 1), hi = std::exp2(-j + 1);
    for (int k = 0; k <= 64; ++k) {
      const double r = std::exp2(-j - 3 + 6.0 * k / 64.0);
      const double v = phi_j(j, r);
      const bool inside = r > lo && r < hi;
      if ((!inside && v != 0.0) || (inside && !(v > 0.0))) ++pc.support_violations;
      if (v != phi_j(0, std::ldexp(r, j))) ++pc.dilation_violations;
    }
    if (phi_j(j, lo) != 0.0 || phi_j(j, hi) != 0.0) ++pc.support_violations;
  }
  return pc;
}

inline RunResult cmd_partition_check(const ScenarioConfig& cfg) {
  const auto& p = cfg.partition;
  const PartitionCheck pc = partition_check(p.log2_r_min, p.log2_r_max, p.samples, p.j_min, p.j_max);
  RunResult res;
  res.files.push_back(out_file(cfg, "partition.csv"));
  {
    Csv csv(res.files.back(), "r,partition_sum,abs_error");
    for (const auto& [r, s] : pc.sums) csv.row(r, s, std::abs(s - 1.0));
  }
  res.files.push_back(out_file(cfg, "partition_summary.csv"));
  {
    Csv csv(res.files.back(), "max_abs_error,support_violations,dilation_violations,window_errors,pass");
    csv.row(pc.max_abs_error, pc.support_violations, pc.dilation_violations, pc.window_errors, pc.pass());
  }
  if (!pc.pass()) {
    res.exit_code = kExitCheckFailed;
    res.message = "partition of unity check failed";
  }
  return res;
}

struct ConvergenceRow {
  std::size_t n = 0;
  double h = 0.0;
  double max_error = 0.0;
  double observed_order = std::nan("");
};

/// Max error of v against the manufactured r u* across grid refinements.
inline std::vector<ConvergenceRow> convergence_table(const ManufacturedProfile& mp,
                                                     const std::optional<PotentialModel>& model, double tau_max,
                                                     const std::vector<std::size_t>& levels,
                                                     const SolveOptions& opts) {
  Sampler am;
  if (model && model->minus) {
    const Profile prof = *model->minus;
    am = [prof](double t, double r) { return profile_value(prof, t, r); };
  }
  const Forcing F = mp.forcing(am);
  std::vector<ConvergenceRow> rows;
  for (std::size_t n : levels) {
    const CharGrid g(tau_max, n);
    const Solution sol = am ? solve_perturbed(F, make_potential(*model), g, opts)
                            : solve_free(F, g, BoundaryMode::Reflected, opts);
    const ComplexField exact = ComplexField::sample(g, [&](double t, double r) { return mp.v(t, r); });
    ConvergenceRow row{n, g.h(), max_abs_diff(sol.v, exact)};
    if (!rows.empty()) row.observed_order = std::log(rows.back().max_error / row.max_error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
  }
  return rows;
}

inline RunResult cmd_converge(const ScenarioConfig& cfg) {
  ManufacturedProfile mp;
  if (cfg.forcing.family == "manufactured") {
    const auto& p = cfg.forcing.params;
    if (p.count("t0")) mp.t0 = p.at("t0");
    if (p.count("a")) mp.a = p.at("a");
    if (p.count("b")) mp.b = p.at("b");
  }
  auto model = cfg.potential_model();
  if (model && model->plus) throw ConfigError(0, "potential.plus_family", "converge runs with A+ = 0");
  std::vector<std::size_t> levels;
  for (double l : cfg.converge.levels) levels.push_back(static_cast<std::size_t>(l));
  const auto rows = convergence_table(mp, model, cfg.grid.tau_max, levels, cfg.solve_options());
  RunResult res;
  res.files.push_back(out_file(cfg, "converge.csv"));
  Csv csv(res.files.back(), "h,max_error,observed_order");
  for (const auto& r : rows) csv.row(r.h, r.max_error, r.observed_order);
  return res;
}

}  // namespace detail

/// Runs one subcommand and writes its files plus the manifest. Errors map to
/// exit codes: configuration/usage 1, solver divergence 2, failed check 3.
inline RunResult run_subcommand(const std::string& name, const ScenarioConfig& cfg) {
  RunResult res;
  try {
    std::filesystem::create_directories(cfg.output.dir);
    if (name == "solve") res = detail::cmd_solve(cfg);
    else if (name == "norms") res = detail::cmd_norms(cfg);
    else if (name == "lemma1") res = detail::cmd_lemma1(cfg);
    else if (name == "decay") res = detail::cmd_decay(cfg);
    else if (name == "gauge-check") res = detail::cmd_gauge_check(cfg);
    else if (name == "sweep") res = detail::cmd_sweep(cfg);
    else if (name == "partition-check") res = detail::cmd_partition_check(cfg);
    else if (name == "converge") res = detail::cmd_converge(cfg);
    else return {kExitUsage, {}, "unknown subcommand '" + name + "'"};
    res.files.push_back(detail::write_manifest(cfg, name, res.files));
  } catch (const DivergenceError& e) {
    return {kExitDivergence, {}, e.what()};
  } catch (const MaxIterExceeded& e) {
    return {kExitDivergence, {}, e.what()};
  } catch (const std::exception& e) {
    return {kExitUsage, {}, e.what()};
  }
  return res;
}

}  // namespace radwave
