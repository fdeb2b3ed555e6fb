#pragma once
/// @file config.hpp
/// Scenario configuration: a flat INI-style text format with typed scalars.
///
///   # comment
///   [grid]
///   tau_max = 10
///   n = 200
///   [estimate]
///   fit_window = [2.5, 10]
///
/// Values are numbers, bare words, "quoted strings" or [number, ...] lists.
/// Unknown sections or keys, duplicate keys, type mismatches and constraint
/// violations are reported as ConfigError with the line and key path.

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "radwave/estimates.hpp"
#include "radwave/models.hpp"
#include "radwave/solver.hpp"

namespace radwave {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& path, const std::string& msg)
      : std::runtime_error(format(line, path, msg)), line_(line), path_(path) {}
  int line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  static std::string format(int line, const std::string& path, const std::string& msg) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!path.empty()) out += path + ": ";
    return out + msg;
  }
  int line_;
  std::string path_;
};

struct ConfigValue {
  enum class Kind { Number, Word, List } kind = Kind::Word;
  std::string text;
  double number = 0.0;
  std::vector<double> list;
  int line = 0;
};

/// section -> key -> value, in file order for echoing.
struct RawConfig {
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return std::nullopt;
  return v;
}

inline ConfigValue parse_value(const std::string& raw, int line, const std::string& path) {
  ConfigValue v;
  v.line = line;
  v.text = raw;
  if (raw.empty()) throw ConfigError(line, path, "missing value");
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError(line, path, "unterminated list");
    v.kind = ConfigValue::Kind::List;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto num = parse_number(item);
      if (!num) throw ConfigError(line, path, "list entry '" + item + "' is not a number");
      v.list.push_back(*num);
    }
    return v;
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError(line, path, "unterminated string");
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (const auto num = parse_number(raw)) {
    v.kind = ConfigValue::Kind::Number;
    v.number = *num;
  }
  return v;
}

}  // namespace detail

inline RawConfig parse_raw_config(const std::string& text) {
  RawConfig cfg;
  std::stringstream in(text);
  std::string line_text;
  std::string section;
  int line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    // '#' starts a comment unless it sits inside a quoted string.
    bool quoted = false;
    for (std::size_t k = 0; k < line_text.size(); ++k) {
      if (line_text[k] == '"') quoted = !quoted;
      if (line_text[k] == '#' && !quoted) {
        line_text.resize(k);
        break;
      }
    }
    const std::string s = detail::trim(line_text);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "", "malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(line, "", "empty section name");
      if (cfg.sections.count(section)) throw ConfigError(line, section, "duplicate section");
      cfg.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
    if (section.empty()) throw ConfigError(line, "", "key outside of any [section]");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string path = section + "." + key;
    if (key.empty()) throw ConfigError(line, section, "empty key");
    auto& sec = cfg.sections[section];
    if (sec.count(key)) {
      throw ConfigError(line, path, "duplicate key (first set on line " + std::to_string(sec[key].line) + ")");
    }
    sec[key] = detail::parse_value(detail::trim(s.substr(eq + 1)), line, path);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Typed scenario.

struct ScenarioConfig {
  struct Grid {
    double tau_max = 10.0;
    int n = 200;
  } grid;
  struct ForcingCfg {
    std::string family = "bump";  // bump | zero | manufactured
    std::map<std::string, double> params;
    std::optional<double> support_margin;
  } forcing;
  struct PotentialCfg {
    std::string family;  // inverse_power | bump | time_modulated
    std::map<std::string, double> params;
    std::string plus_family;
    std::map<std::string, double> plus_params;
    double epsilon_a = 0.5;
  };
  std::optional<PotentialCfg> potential;
  struct Estimate {
    double epsilon = 0.5;
    std::optional<std::pair<double, double>> fit_window;
    int fit_samples = 64;
  } estimate;
  struct SolverCfg {
    double tol = 1e-10;
    int max_iter = 200;
    BoundaryMode mode = BoundaryMode::Reflected;
    Quadrature quadrature = Quadrature::Trapezoid;
  } solver;
  struct Output {
    std::string dir = "out";
    std::string prefix = "run";
  } output;
  struct Sweep {
    std::vector<double> lambdas{0.0, 0.01, 0.02, 0.04, 0.08};
  } sweep;
  struct Lemma1 {
    double tau_max = 100.0;
    int n = 150;
    std::vector<double> epsilons{0.25, 0.5, 1.0, 2.0};
  } lemma1;
  struct Converge {
    std::vector<double> levels{100, 200, 400};
  } converge;
  struct Partition {
    double log2_r_min = -20;
    double log2_r_max = 20;
    int samples = 200;
    int j_min = -20;
    int j_max = 20;
  } partition;

  RawConfig raw;

  CharGrid make_grid() const { return CharGrid(grid.tau_max, static_cast<std::size_t>(grid.n)); }
  std::pair<double, double> window() const {
    return fit_window_or(grid.tau_max);
  }
  std::pair<double, double> fit_window_or(double tau_max) const {
    return estimate.fit_window.value_or(std::pair{tau_max / 4.0, tau_max});
  }
  SolveOptions solve_options() const {
    SolveOptions o;
    o.tol = solver.tol;
    o.max_iter = solver.max_iter;
    o.quadrature = solver.quadrature;
    return o;
  }
  Forcing make_forcing() const;
  std::optional<PotentialModel> potential_model() const;
};

namespace detail {

/// Pulls typed values out of one section and remembers what was consumed.
class SectionReader {
 public:
  SectionReader(const RawConfig& raw, std::string name) : name_(std::move(name)) {
    if (auto it = raw.sections.find(name_); it != raw.sections.end()) sec_ = &it->second;
  }
  bool present() const { return sec_ != nullptr; }
  bool has(const std::string& key) const { return sec_ && sec_->count(key); }

  const ConfigValue* find(const std::string& key) {
    if (!sec_) return nullptr;
    auto it = sec_->find(key);
    if (it == sec_->end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::optional<double> number(const std::string& key) {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::Number) throw ConfigError(v->line, path(key), "expected a number, got '" + v->text + "'");
    return v->number;
  }
  std::optional<int> integer(const std::string& key) {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::Number || v->number != std::floor(v->number) || std::abs(v->number) > 1e9) {
      throw ConfigError(v->line, path(key), "expected an integer, got '" + v->text + "'");
    }
    return static_cast<int>(v->number);
  }
  std::optional<std::string> word(const std::string& key) {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::Word) throw ConfigError(v->line, path(key), "expected a name, got '" + v->text + "'");
    return v->text;
  }
  std::optional<std::vector<double>> list(const std::string& key) {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != ConfigValue::Kind::List) throw ConfigError(v->line, path(key), "expected a [list], got '" + v->text + "'");
    return v->list;
  }

  void require(bool ok, const std::string& key, const std::string& msg) const {
    if (ok) return;
    const int line = (sec_ && sec_->count(key)) ? sec_->at(key).line : 0;
    throw ConfigError(line, path(key), msg);
  }

  void reject_unknown() const {
    if (!sec_) return;
    for (const auto& [key, v] : *sec_) {
      if (!used_.count(key)) throw ConfigError(v.line, path(key), "unknown key");
    }
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const std::map<std::string, ConfigValue>* sec_ = nullptr;
  std::set<std::string> used_;
};

inline const std::map<std::string, std::vector<std::string>>& forcing_families() {
  static const std::map<std::string, std::vector<std::string>> f{
      {"bump", {"amplitude", "t0", "r0", "wt", "wr"}},
      {"zero", {}},
      {"manufactured", {"t0", "a", "b"}},
  };
  return f;
}

inline const std::map<std::string, std::vector<std::string>>& potential_families() {
  static const std::map<std::string, std::vector<std::string>> f{
      {"inverse_power", {"lambda", "p"}},
      {"bump", {"lambda", "r0", "w"}},
      {"time_modulated", {"lambda", "p", "omega"}},
  };
  return f;
}

inline Profile make_profile(const std::string& family, const std::map<std::string, double>& p) {
  const auto get = [&](const char* k, double d) {
    auto it = p.find(k);
    return it == p.end() ? d : it->second;
  };
  if (family == "inverse_power") return InversePower{get("lambda", 0.0), get("p", 2.0)};
  if (family == "bump") return BumpProfile{get("lambda", 0.0), get("r0", 1.0), get("w", 0.5)};
  if (family == "time_modulated") return TimeModulated{get("lambda", 0.0), get("p", 2.0), get("omega", 1.0)};
  throw std::invalid_argument("unknown potential family " + family);
}

}  // namespace detail

inline Forcing ScenarioConfig::make_forcing() const {
  const auto get = [&](const char* k, double d) {
    auto it = forcing.params.find(k);
    return it == forcing.params.end() ? d : it->second;
  };
  if (forcing.family == "zero") {
    Forcing f = zero_forcing();
    f.support_margin = forcing.support_margin;
    return f;
  }
  if (forcing.family == "manufactured") {
    ManufacturedProfile mp{get("t0", 3.0), get("a", 1.5), get("b", 1.2)};
    auto model = potential_model();
    Sampler a_minus;
    if (model && model->minus) {
      const Profile prof = *model->minus;
      a_minus = [prof](double t, double r) { return profile_value(prof, t, r); };
    }
    Forcing f = mp.forcing(a_minus);
    f.support_margin = forcing.support_margin;
    return f;
  }
  BumpForcing b{get("amplitude", 1.0), get("t0", 3.0), get("r0", 1.0), get("wt", 0.5), get("wr", 0.5)};
  return radwave::make_forcing(b, forcing.support_margin);
}

inline std::optional<PotentialModel> ScenarioConfig::potential_model() const {
  if (!potential) return std::nullopt;
  PotentialModel m;
  m.epsilon_a = potential->epsilon_a;
  if (!potential->family.empty()) m.minus = detail::make_profile(potential->family, potential->params);
  if (!potential->plus_family.empty()) m.plus = detail::make_profile(potential->plus_family, potential->plus_params);
  return m;
}

inline ScenarioConfig parse_config(const std::string& text) {
  using detail::SectionReader;
  ScenarioConfig cfg;
  cfg.raw = parse_raw_config(text);
  static const std::set<std::string> known{"grid",   "forcing", "potential", "estimate", "solver",
                                           "output", "sweep",   "lemma1",    "converge", "partition"};
  for (const auto& [name, sec] : cfg.raw.sections) {
    if (!known.count(name)) {
      const int line = sec.empty() ? 0 : sec.begin()->second.line;
      throw ConfigError(line, name, "unknown section");
    }
  }

  SectionReader grid(cfg.raw, "grid");
  if (!grid.present()) throw ConfigError(0, "grid", "missing required section");
  const auto tau_max = grid.number("tau_max");
  const auto n = grid.integer("n");
  grid.require(tau_max.has_value(), "tau_max", "missing required key");
  grid.require(n.has_value(), "n", "missing required key");
  grid.require(*tau_max > 0.0 && std::isfinite(*tau_max), "tau_max", "must be positive");
  grid.require(*n >= 4, "n", "must be at least 4");
  cfg.grid = {*tau_max, *n};
  grid.reject_unknown();

  SectionReader forcing(cfg.raw, "forcing");
  if (!forcing.present()) throw ConfigError(0, "forcing", "missing required section");
  {
    const auto family = forcing.word("family");
    forcing.require(family.has_value(), "family", "missing required key");
    const auto& fams = detail::forcing_families();
    auto it = fams.find(*family);
    forcing.require(it != fams.end(), "family", "unknown forcing family '" + *family + "' (bump, zero, manufactured)");
    cfg.forcing.family = *family;
    for (const auto& key : it->second) {
      if (auto v = forcing.number(key)) cfg.forcing.params[key] = *v;
    }
    if (auto m = forcing.number("support_margin")) {
      forcing.require(*m >= 0.0, "support_margin", "must be non-negative");
      cfg.forcing.support_margin = *m;
    }
    forcing.reject_unknown();
    if (cfg.forcing.family == "bump") {
      const auto& p = cfg.forcing.params;
      const auto get = [&](const char* k, double d) { return p.count(k) ? p.at(k) : d; };
      forcing.require(get("wt", 0.5) > 0.0, "wt", "must be positive");
      forcing.require(get("wr", 0.5) > 0.0, "wr", "must be positive");
      const double gap = (get("t0", 3.0) - get("wt", 0.5)) - (get("r0", 1.0) + get("wr", 0.5));
      const double margin = cfg.forcing.support_margin.value_or(cfg.grid.tau_max / cfg.grid.n);
      forcing.require(gap >= margin, "t0",
                      "bump support must satisfy t - r >= support margin (" + std::to_string(margin) + ")");
    }
  }

  SectionReader pot(cfg.raw, "potential");
  if (pot.present()) {
    ScenarioConfig::PotentialCfg pc;
    if (auto e = pot.number("epsilon_a")) {
      pot.require(*e > 0.0, "epsilon_a", "must be positive");
      pc.epsilon_a = *e;
    }
    const auto& fams = detail::potential_families();
    const auto read_family = [&](const std::string& fam_key, const std::string& prefix, std::string& family,
                                 std::map<std::string, double>& params) {
      const auto f = pot.word(fam_key);
      if (!f || *f == "none") return;
      auto it = fams.find(*f);
      pot.require(it != fams.end(), fam_key,
                  "unknown potential family '" + *f + "' (inverse_power, bump, time_modulated, none)");
      family = *f;
      for (const auto& key : it->second) {
        if (auto v = pot.number(prefix + key)) params[key] = *v;
      }
      if (family != "bump") {
        const double p = params.count("p") ? params.at("p") : 2.0;
        pot.require(p > 1.0 + pc.epsilon_a, prefix + "p",
                    "short-range condition violated: decay power p must exceed 1 + epsilon_a = " +
                        std::to_string(1.0 + pc.epsilon_a));
      } else {
        pot.require(!params.count("w") || params.at("w") > 0.0, prefix + "w", "must be positive");
      }
    };
    read_family("family", "", pc.family, pc.params);
    read_family("plus_family", "plus_", pc.plus_family, pc.plus_params);
    pot.reject_unknown();
    cfg.potential = pc;
  }

  SectionReader est(cfg.raw, "estimate");
  if (auto e = est.number("epsilon")) {
    est.require(*e > 0.0, "epsilon", "must be positive");
    cfg.estimate.epsilon = *e;
  }
  if (auto w = est.list("fit_window")) {
    est.require(w->size() == 2, "fit_window", "expected [t_lo, t_hi]");
    est.require((*w)[0] > 0.0 && (*w)[1] > (*w)[0], "fit_window", "need 0 < t_lo < t_hi");
    est.require((*w)[1] <= cfg.grid.tau_max, "fit_window", "t_hi must not exceed grid.tau_max");
    cfg.estimate.fit_window = std::pair{(*w)[0], (*w)[1]};
  }
  if (auto s = est.integer("fit_samples")) {
    est.require(*s >= 2, "fit_samples", "must be at least 2");
    cfg.estimate.fit_samples = *s;
  }
  est.reject_unknown();

  SectionReader sol(cfg.raw, "solver");
  if (auto t = sol.number("tol")) {
    sol.require(*t > 0.0, "tol", "must be positive");
    cfg.solver.tol = *t;
  }
  if (auto m = sol.integer("max_iter")) {
    sol.require(*m >= 1, "max_iter", "must be at least 1");
    cfg.solver.max_iter = *m;
  }
  if (auto m = sol.word("mode")) {
    sol.require(*m == "reflected" || *m == "paper", "mode", "expected reflected or paper");
    cfg.solver.mode = *m == "paper" ? BoundaryMode::PaperFormula : BoundaryMode::Reflected;
  }
  if (auto q = sol.word("quadrature")) {
    sol.require(*q == "trapezoid" || *q == "simpson", "quadrature", "expected trapezoid or simpson");
    cfg.solver.quadrature = *q == "simpson" ? Quadrature::Simpson : Quadrature::Trapezoid;
  }
  sol.reject_unknown();

  SectionReader out(cfg.raw, "output");
  if (auto d = out.word("dir")) cfg.output.dir = *d;
  if (auto p = out.word("prefix")) {
    out.require(!p->empty() && p->find('/') == std::string::npos, "prefix", "must be a plain file name prefix");
    cfg.output.prefix = *p;
  }
  out.reject_unknown();

  SectionReader sweep(cfg.raw, "sweep");
  if (auto l = sweep.list("lambdas")) {
    bool ok = !l->empty();
    for (std::size_t k = 0; k < l->size(); ++k) ok = ok && (*l)[k] >= 0.0 && (k == 0 || (*l)[k] >= (*l)[k - 1]);
    sweep.require(ok, "lambdas", "must be a non-empty, non-negative ascending list");
    cfg.sweep.lambdas = *l;
  }
  sweep.reject_unknown();

  SectionReader l1(cfg.raw, "lemma1");
  if (auto t = l1.number("tau_max")) {
    l1.require(*t > 0.0, "tau_max", "must be positive");
    cfg.lemma1.tau_max = *t;
  }
  if (auto k = l1.integer("n")) {
    l1.require(*k >= 2, "n", "must be at least 2");
    cfg.lemma1.n = *k;
  }
  if (auto e = l1.list("epsilons")) {
    bool ok = !e->empty();
    for (double x : *e) ok = ok && x > 0.0;
    l1.require(ok, "epsilons", "must be a non-empty list of positive numbers");
    cfg.lemma1.epsilons = *e;
  }
  l1.reject_unknown();

  SectionReader conv(cfg.raw, "converge");
  if (auto l = conv.list("levels")) {
    bool ok = l->size() >= 2;
    for (std::size_t k = 0; k < l->size(); ++k)
      ok = ok && (*l)[k] >= 4 && (*l)[k] == std::floor((*l)[k]) && (k == 0 || (*l)[k] > (*l)[k - 1]);
    conv.require(ok, "levels", "need at least two increasing integer grid sizes >= 4");
    cfg.converge.levels = *l;
  }
  conv.reject_unknown();

  SectionReader part(cfg.raw, "partition");
  if (auto v = part.number("log2_r_min")) cfg.partition.log2_r_min = *v;
  if (auto v = part.number("log2_r_max")) cfg.partition.log2_r_max = *v;
  part.require(cfg.partition.log2_r_max > cfg.partition.log2_r_min, "log2_r_max", "must exceed log2_r_min");
  if (auto v = part.integer("samples")) {
    part.require(*v >= 2, "samples", "must be at least 2");
    cfg.partition.samples = *v;
  }
  if (auto v = part.integer("j_min")) cfg.partition.j_min = *v;
  if (auto v = part.integer("j_max")) cfg.partition.j_max = *v;
  part.require(cfg.partition.j_max > cfg.partition.j_min, "j_max", "must exceed j_min");
  part.reject_unknown();

  return cfg;
}

}  // namespace radwave
