#include "rmqfi/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rmqfi/constants.hpp"
#include "rmqfi/dynamics.hpp"
#include "rmqfi/operators.hpp"
#include "rmqfi/states.hpp"

namespace rmqfi {

using ojson = nlohmann::ordered_json;

namespace {

std::string fmt_g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// shortest round-trip decimal, used for config echoes
std::string fmt_shortest(double v) {
  if (!std::isfinite(v)) return fmt_g17(v);
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (const char c : k)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'))
      return false;
  return true;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

// flat key=value reader with strict leftover-key detection and an ordered
// echo of every resolved value (parsed defaults included)
class ConfigReader {
 public:
  explicit ConfigReader(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value, got '" + body + "'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (!valid_key(key))
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": invalid key '" + key + "'");
      if (value.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty value for key '" + key + "'");
      const auto it = entries_.find(key);
      if (it != entries_.end())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": duplicate key '" + key + "' (first set on line " +
                          std::to_string(it->second.line) + ")");
      entries_[key] = Entry{value, lineno, false};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  // raw access without echo (for seed / scenario / output special cases)
  std::optional<std::string> take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  int line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  void note(const std::string& key, const std::string& value) {
    resolved_.emplace_back(key, value);
  }

  double num(const std::string& key, double def, double lo, double hi) {
    double v = def;
    if (const auto raw = take(key)) v = parse_double(*raw, key, line_of(key));
    check_range(v, key, lo, hi);
    note(key, fmt_shortest(v));
    return v;
  }

  int integer(const std::string& key, int def, int lo, int hi) {
    long long v = def;
    if (const auto raw = take(key)) v = parse_int(*raw, key, line_of(key));
    check_range(static_cast<double>(v), key, lo, hi);
    note(key, std::to_string(v));
    return static_cast<int>(v);
  }

  std::optional<int> optional_integer(const std::string& key, int lo, int hi) {
    const auto raw = take(key);
    if (!raw) {
      note(key, "none");
      return std::nullopt;
    }
    const long long v = parse_int(*raw, key, line_of(key));
    check_range(static_cast<double>(v), key, lo, hi);
    note(key, std::to_string(v));
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key, std::vector<double> def,
                           double lo, double hi, std::size_t min_size) {
    std::vector<double> v = std::move(def);
    if (const auto raw = take(key)) {
      v.clear();
      std::stringstream ss(*raw);
      std::string item;
      while (std::getline(ss, item, ','))
        v.push_back(parse_double(trim(item), key, line_of(key)));
    }
    if (v.size() < min_size)
      throw ConfigError(where(key) + "key '" + key + "' needs at least " +
                        std::to_string(min_size) + " values");
    for (const double x : v) check_range(x, key, lo, hi);
    std::string echo;
    for (std::size_t i = 0; i < v.size(); ++i)
      echo += (i ? "," : "") + fmt_shortest(v[i]);
    note(key, echo);
    return v;
  }

  std::string word(const std::string& key, const std::string& def,
                   const std::vector<std::string>& allowed) {
    std::string v = def;
    if (const auto raw = take(key)) v = *raw;
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string opts;
      for (std::size_t i = 0; i < allowed.size(); ++i)
        opts += (i ? ", " : "") + allowed[i];
      throw ConfigError(where(key) + "key '" + key + "' must be one of: " +
                        opts + " (got '" + v + "')");
    }
    note(key, v);
    return v;
  }

  void finish(const std::string& scenario) const {
    std::string bad;
    for (const auto& [key, entry] : entries_) {
      if (entry.used) continue;
      if (!bad.empty()) bad += ", ";
      bad += "'" + key + "' (line " + std::to_string(entry.line) + ")";
    }
    if (!bad.empty())
      throw ConfigError("unknown config key(s) for scenario " + scenario +
                        ": " + bad);
  }

  const std::vector<std::pair<std::string, std::string>>& resolved() const {
    return resolved_;
  }

  double parse_double(const std::string& s, const std::string& key, int line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE ||
        !std::isfinite(v))
      throw ConfigError("config line " + std::to_string(line) + ": key '" +
                        key + "' has non-numeric value '" + s + "'");
    return v;
  }

  long long parse_int(const std::string& s, const std::string& key, int line) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
      throw ConfigError("config line " + std::to_string(line) + ": key '" +
                        key + "' has non-integer value '" + s + "'");
    return v;
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };

  std::string where(const std::string& key) const {
    const int line = line_of(key);
    return line ? "config line " + std::to_string(line) + ": " : "config: ";
  }

  void check_range(double v, const std::string& key, double lo, double hi) {
    if (v < lo || v > hi)
      throw ConfigError(where(key) + "key '" + key + "' = " + fmt_shortest(v) +
                        " outside [" + fmt_shortest(lo) + ", " +
                        fmt_shortest(hi) + "]");
  }

  std::map<std::string, Entry> entries_;
  std::vector<std::pair<std::string, std::string>> resolved_;
};

std::uint64_t parse_seed_value(const std::string& s, int line) {
  const std::string t = trim(s);
  errno = 0;
  char* end = nullptr;
  if (t.empty() || t[0] == '-')
    throw ConfigError("config line " + std::to_string(line) +
                      ": key 'seed' must be a non-negative integer, got '" +
                      t + "'");
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError("config line " + std::to_string(line) +
                      ": key 'seed' must be a non-negative integer, got '" +
                      t + "'");
  return v;
}

// self-audit bookkeeping: in exact-probability mode at least 99% of audited
// rows must sit within 5 reported standard errors of their oracle
struct Audit {
  bool enabled = true;
  std::int64_t audited = 0;
  std::int64_t within = 0;

  void add(double est, double err, double oracle) {
    if (!enabled) return;
    ++audited;
    if (std::abs(est - oracle) <= 5.0 * err + 1e-12) ++within;
  }
  bool pass() const {
    if (audited == 0) return true;
    return static_cast<double>(within) >=
           0.99 * static_cast<double>(audited) - 1e-9;
  }
  ojson to_json() const {
    ojson j;
    j["mode"] = enabled ? "exact" : "shots";
    j["rows_audited"] = audited;
    j["rows_within_5_sigma"] = within;
    j["pass"] = pass();
    return j;
  }
};

ojson base_summary(const ScenarioConfig& cfg) {
  ojson j;
  j["software"] = ojson{{"name", "qfi_rm"}, {"version", software_version()}};
  j["scenario"] = scenario_name(cfg.scenario);
  ojson conf = ojson::object();
  for (const auto& [k, v] : cfg.resolved) conf[k] = v;
  j["config"] = conf;
  return j;
}

ScenarioResult seal(ResultTable table, ojson summary, const Audit& audit) {
  summary["audit"] = audit.to_json();
  ScenarioResult out;
  out.table = std::move(table);
  out.summary_json = summary.dump();
  out.exit_code = audit.pass() ? exit_ok : exit_numerical;
  return out;
}

ojson fit_to_json(const FitResult& fit) {
  ojson j;
  j["sub_qfi"] = fit.sub_qfi;
  j["sub_qfi_error"] = fit.sub_qfi_error;
  ojson coeffs = ojson::array();
  for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i)
    coeffs.push_back(fit.coefficients(i));
  j["coefficients"] = coeffs;
  j["residual_norm"] = fit.residual_norm;
  return j;
}

StateFamily ramsey_time_family(const RamseyParams& base) {
  return [base](double th) {
    RamseyParams p = base;
    p.t = base.t + th / base.delta;
    return ramsey_state(p);
  };
}

double ramsey_qfi_closed_form(double phi, double t, double t2star) {
  const double s = std::sin(phi);
  return s * s * std::exp(-2.0 * (t / t2star) * (t / t2star));
}

ScenarioResult run_ramsey_time(const ScenarioConfig& cfg) {
  ResultTable table;
  table.scenario = scenario_name(cfg.scenario);
  table.columns = {"t_us",            "qfi_estimate",  "qfi_error",
                   "qfi_exact",       "purity_estimate", "purity_error",
                   "purity_exact",    "n_unitaries"};

  EnsembleSpec es;
  es.kind = EnsembleKind::haar_single_qubit_euler;
  es.n_qubits = 1;

  Rng root(cfg.seed);
  Audit audit;
  audit.enabled = !cfg.shots.has_value();
  SweepOptions so;
  so.shots = cfg.shots;

  const std::vector<double> times =
      linspace(cfg.time_min_us, cfg.time_max_us, cfg.n_time_points);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const RamseyParams base{cfg.phi_rad, cfg.delta_rad_per_us, t, cfg.t2star_us};
    const SweepResult sw =
        sweep_dg(ramsey_time_family(base), 0.0, cfg.dtheta_grid, es,
                 cfg.n_unitaries, root.sub(1000 + i), so);
    const FitResult fit = fit_quadratic(sw);
    const double qfi_oracle =
        ramsey_qfi_closed_form(cfg.phi_rad, t, cfg.t2star_us);

    const Mat rho = ramsey_state(base);
    const RecordBatch rb = collect_records(rho, nullptr, es, cfg.n_unitaries,
                                           root.sub(500000 + i), cfg.shots);
    const Estimate pur = estimate_purity(rb);
    const double pur_oracle = purity(rho);

    audit.add(fit.sub_qfi, fit.sub_qfi_error, qfi_oracle);
    audit.add(pur.value, pur.std_error, pur_oracle);
    table.cells.push_back({fmt_g17(t), fmt_g17(fit.sub_qfi),
                           fmt_g17(fit.sub_qfi_error), fmt_g17(qfi_oracle),
                           fmt_g17(pur.value), fmt_g17(pur.std_error),
                           fmt_g17(pur_oracle),
                           std::to_string(cfg.n_unitaries)});
  }

  ojson summary = base_summary(cfg);
  summary["results"] =
      ojson{{"n_time_points", static_cast<int>(times.size())}};
  return seal(std::move(table), std::move(summary), audit);
}

ScenarioResult run_ramsey_phi(const ScenarioConfig& cfg) {
  ResultTable table;
  table.scenario = scenario_name(cfg.scenario);
  table.columns = {"phi_rad",   "qfi_estimate",    "qfi_error",
                   "qfi_exact", "coherence_exact", "n_unitaries"};

  EnsembleSpec es;
  es.kind = EnsembleKind::haar_single_qubit_euler;
  es.n_qubits = 1;

  // the probe time maximizing contrast sensitivity for this detuning
  const double t_fixed = 1.5 * pi / cfg.delta_rad_per_us;

  Rng root(cfg.seed);
  Audit audit;
  audit.enabled = !cfg.shots.has_value();
  SweepOptions so;
  so.shots = cfg.shots;

  const std::vector<double> phis =
      linspace(cfg.phi_min_rad, cfg.phi_max_rad, cfg.n_phi_points);
  std::vector<double> estimates, oracles;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double phi = phis[i];
    const RamseyParams base{phi, cfg.delta_rad_per_us, t_fixed, cfg.t2star_us};
    const SweepResult sw =
        sweep_dg(ramsey_time_family(base), 0.0, cfg.dtheta_grid, es,
                 cfg.n_unitaries, root.sub(1000 + i), so);
    const FitResult fit = fit_quadratic(sw);
    const double qfi_oracle =
        ramsey_qfi_closed_form(phi, t_fixed, cfg.t2star_us);
    const double coherence = std::abs(ramsey_state(base)(0, 1));

    audit.add(fit.sub_qfi, fit.sub_qfi_error, qfi_oracle);
    estimates.push_back(fit.sub_qfi);
    oracles.push_back(qfi_oracle);
    table.cells.push_back({fmt_g17(phi), fmt_g17(fit.sub_qfi),
                           fmt_g17(fit.sub_qfi_error), fmt_g17(qfi_oracle),
                           fmt_g17(coherence),
                           std::to_string(cfg.n_unitaries)});
  }

  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(
        std::max_element(v.begin(), v.end()) - v.begin());
  };
  ojson summary = base_summary(cfg);
  summary["results"] = ojson{
      {"t_fixed_us", t_fixed},
      {"argmax_phi_rad_estimate", phis[argmax(estimates)]},
      {"argmax_phi_rad_oracle", phis[argmax(oracles)]},
  };
  return seal(std::move(table), std::move(summary), audit);
}

ScenarioResult run_ghz_sweep(const ScenarioConfig& cfg) {
  ResultTable table;
  table.scenario = scenario_name(cfg.scenario);
  table.columns = {"dtheta_rad", "dg_estimate", "dg_error", "dg_oracle",
                   "n_unitaries"};

  const int n = cfg.n_qubits;
  const Vec psi =
      cfg.preparation == "twisting" ? ghz_prepare_twisting(n) : ghz_prepare(n);
  Mat rho0 = projector(psi);
  if (cfg.coherence < 1.0) {
    // realize the requested remaining coherence c = exp(-2 gamma t N)
    const double gt = -std::log(cfg.coherence) / (2.0 * n);
    rho0 = dephase(rho0, DephasingParams{1.0, gt});
  }
  const StateFamily fam = [rho0, n](double th) {
    return encode_phase(rho0, th, n);
  };

  EnsembleSpec es;
  es.kind = EnsembleKind::haar_local_product;
  es.n_qubits = n;

  SweepOptions so;
  so.shots = cfg.shots;
  Audit audit;
  audit.enabled = !cfg.shots.has_value();

  const SweepResult sw = sweep_dg(fam, cfg.theta0_rad, cfg.dtheta_grid, es,
                                  cfg.n_unitaries, Rng(cfg.seed).sub(1), so);
  const Mat rho_a = fam(cfg.theta0_rad);
  for (Eigen::Index j = 0; j < sw.dtheta_grid.size(); ++j) {
    const double dg_oracle = modified_bures_distance(
        rho_a, fam(cfg.theta0_rad + sw.dtheta_grid(j)));
    audit.add(sw.dg_values(j), sw.dg_errors(j), dg_oracle);
    table.cells.push_back({fmt_g17(sw.dtheta_grid(j)), fmt_g17(sw.dg_values(j)),
                           fmt_g17(sw.dg_errors(j)), fmt_g17(dg_oracle),
                           std::to_string(cfg.n_unitaries)});
  }

  const FitResult fit = fit_quadratic(sw);
  const double qfi_exact =
      exact_qfi_unitary(rho_a, collective_spin(Axis::z, n)).value;
  const WitnessResult w = witness(std::max(0.0, fit.sub_qfi), n);

  ojson summary = base_summary(cfg);
  ojson results;
  results["fit"] = fit_to_json(fit);
  results["qfi_exact"] = qfi_exact;
  results["witness"] = ojson{{"qfi_density", w.qfi_density},
                             {"m_witnessed", w.m_witnessed},
                             {"n_qubits", w.n_qubits}};
  summary["results"] = results;
  return seal(std::move(table), std::move(summary), audit);
}

EnsembleSpec manybody_ensemble(const ScenarioConfig& cfg) {
  EnsembleSpec es;
  es.kind = EnsembleKind::hamiltonian_evolution;
  es.n_qubits = std::max(2, cfg.n_qubits);
  es.segments = cfg.segments;
  es.segment_time = cfg.segment_time;
  es.delta_std = cfg.disorder_std;
  es.ising = IsingParams{es.n_qubits, cfg.coupling_g, cfg.alpha_exponent,
                         cfg.rabi_omega};
  return es;
}

ScenarioResult run_manybody_scaling(const ScenarioConfig& cfg) {
  ResultTable table;
  table.scenario = scenario_name(cfg.scenario);
  table.columns = {"case",           "n_qubits",        "n_required",
                   "converged",      "mean_rel_error",  "sub_qfi_estimate",
                   "sub_qfi_error",  "sub_qfi_oracle"};

  const EnsembleSpec es = manybody_ensemble(cfg);
  std::vector<int> ns;
  for (int n = cfg.n_qubits_min; n <= cfg.n_qubits_max; ++n) ns.push_back(n);
  ScalingSearch search;
  search.repetitions = cfg.repetitions;
  search.n_floor = cfg.n_floor;
  search.n_ceiling = cfg.n_ceiling;

  struct CaseDef {
    std::string label;
    double gamma_over_g;
  };
  const std::vector<CaseDef> cases = {{"pure", 0.0},
                                      {"mixed", cfg.gamma_over_g_mixed}};

  Rng root(cfg.seed);
  // the generic 5-sigma audit does not apply here: the search stops at the
  // first n whose mean error crosses epsilon, so the surviving deviation is a
  // systematic offset of order epsilon, not a fluctuation of the reported
  // spread. the self-audit instead re-checks the convergence contract itself:
  // every row flagged converged must show mean_rel_error <= epsilon.
  std::int64_t audited = 0, consistent = 0;
  ojson case_json = ojson::array();
  bool any_fit_failed = false;
  const double rep_norm = std::sqrt(static_cast<double>(cfg.repetitions));

  for (std::size_t c = 0; c < cases.size(); ++c) {
    ScalingScenario sc;
    sc.ensemble = es;
    sc.gamma = cases[c].gamma_over_g * cfg.coupling_g;
    sc.dephasing_time = cfg.dephasing_time;
    sc.dtheta = cfg.dtheta_rad;
    sc.theta0 = 0.0;
    const std::vector<RequiredN> rows =
        required_measurements(sc, cfg.epsilon, ns, root.sub(7000 + c), search);

    int n_converged = 0;
    for (const RequiredN& r : rows) {
      const double err = r.estimate_spread / rep_norm;
      if (r.converged) {
        ++audited;
        if (r.mean_rel_error <= cfg.epsilon + 1e-12) ++consistent;
        ++n_converged;
      }
      table.cells.push_back({cases[c].label, std::to_string(r.n_qubits),
                             std::to_string(r.n_required),
                             r.converged ? "1" : "0", fmt_g17(r.mean_rel_error),
                             fmt_g17(r.mean_estimate), fmt_g17(err),
                             fmt_g17(r.oracle)});
    }

    ojson cj;
    cj["case"] = cases[c].label;
    cj["gamma_over_g"] = cases[c].gamma_over_g;
    cj["n_converged"] = n_converged;
    try {
      const ExponentFit ef = fit_scaling_exponent(rows);
      cj["fit"] = ojson{{"a", ef.a},
                        {"b", ef.b},
                        {"a_err", ef.a_err},
                        {"b_err", ef.b_err}};
    } catch (const std::exception&) {
      cj["fit"] = nullptr;
      any_fit_failed = true;
    }
    case_json.push_back(cj);
  }

  ojson summary = base_summary(cfg);
  summary["results"] = ojson{{"epsilon", cfg.epsilon}, {"cases", case_json}};
  const bool audit_pass = consistent == audited;
  summary["audit"] = ojson{{"mode", "convergence-contract"},
                           {"rows_audited", audited},
                           {"rows_within_epsilon", consistent},
                           {"pass", audit_pass}};
  ScenarioResult out;
  out.table = std::move(table);
  out.summary_json = summary.dump();
  out.exit_code = audit_pass && !any_fit_failed ? exit_ok : exit_numerical;
  return out;
}

ScenarioResult run_manybody_time_evolution(const ScenarioConfig& cfg) {
  ResultTable table;
  table.scenario = scenario_name(cfg.scenario);
  table.columns = {"case",          "t",
                   "sub_qfi_estimate", "sub_qfi_error",
                   "sub_qfi_oracle",   "qfi_exact",
                   "qfi_density_estimate", "m_witnessed",
                   "n_unitaries"};

  const int n = cfg.n_qubits;
  const EnsembleSpec es = manybody_ensemble(cfg);
  const Mat jz = collective_spin(Axis::z, n);
  const double dth = cfg.dtheta_rad;

  struct CaseDef {
    std::string label;
    double gamma;
  };
  const std::vector<CaseDef> cases = {
      {"pure", 0.0}, {"mixed", cfg.gamma_over_g * cfg.coupling_g}};

  Rng root(cfg.seed);
  Audit audit;
  const std::vector<double> times =
      linspace(cfg.time_min, cfg.time_max, cfg.n_time_points);
  int m_witnessed_t0_pure = -1;

  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double coh = ghz_coherence(n, cases[c].gamma, times[i]);
      const PointEstimate pe = estimate_ghz_sub_qfi_point(
          n, coh, 0.0, dth, es, cfg.n_unitaries,
          root.sub((c + 1) * 100000 + i));
      const StateFamily fam = dephased_ghz_family(n, coh);
      const Mat rho0 = fam(0.0);
      const double sub_oracle =
          modified_bures_distance(rho0, fam(dth)) / (dth * dth);
      const double qfi_exact = exact_qfi_unitary(rho0, jz).value;
      const WitnessResult w = witness(std::max(0.0, pe.sub_qfi), n);
      if (c == 0 && i == 0) m_witnessed_t0_pure = w.m_witnessed;

      audit.add(pe.sub_qfi, pe.error, sub_oracle);
      table.cells.push_back(
          {cases[c].label, fmt_g17(times[i]), fmt_g17(pe.sub_qfi),
           fmt_g17(pe.error), fmt_g17(sub_oracle), fmt_g17(qfi_exact),
           fmt_g17(w.qfi_density), std::to_string(w.m_witnessed),
           std::to_string(cfg.n_unitaries)});
    }
  }

  ojson summary = base_summary(cfg);
  summary["results"] =
      ojson{{"witnessed_depth_t0_pure", m_witnessed_t0_pure + 1},
            {"n_time_points", static_cast<int>(times.size())}};
  return seal(std::move(table), std::move(summary), audit);
}

} // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::ramsey_qfi_vs_time: return "ramsey_qfi_vs_time";
    case Scenario::ramsey_qfi_vs_phi: return "ramsey_qfi_vs_phi";
    case Scenario::ghz_sweep: return "ghz_sweep";
    case Scenario::manybody_scaling: return "manybody_scaling";
    case Scenario::manybody_time_evolution: return "manybody_time_evolution";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  for (const Scenario s :
       {Scenario::ramsey_qfi_vs_time, Scenario::ramsey_qfi_vs_phi,
        Scenario::ghz_sweep, Scenario::manybody_scaling,
        Scenario::manybody_time_evolution})
    if (scenario_name(s) == name) return s;
  throw ConfigError(
      "unknown scenario '" + name +
      "'; valid: ramsey_qfi_vs_time, ramsey_qfi_vs_phi, ghz_sweep, "
      "manybody_scaling, manybody_time_evolution");
}

std::string software_version() { return "0.1.0"; }

std::string csv_schema_tag() { return "# qfi_rm_csv_v1"; }

ScenarioConfig load_scenario_config(Scenario scenario,
                                    const std::string& config_path,
                                    std::optional<std::uint64_t> cli_seed,
                                    const std::string& cli_out) {
  ConfigReader r(config_path);
  ScenarioConfig cfg;
  cfg.scenario = scenario;

  if (const auto sv = r.take("scenario")) {
    const int line = r.line_of("scenario");
    if (scenario_from_name(trim(*sv)) != scenario)
      throw ConfigError("config line " + std::to_string(line) +
                        ": scenario '" + trim(*sv) +
                        "' does not match requested scenario '" +
                        scenario_name(scenario) + "'");
  }
  r.note("scenario", scenario_name(scenario));

  if (cli_seed.has_value()) {
    r.take("seed"); // command line wins; still consume the key
    cfg.seed = *cli_seed;
  } else if (const auto sv = r.take("seed")) {
    cfg.seed = parse_seed_value(*sv, r.line_of("seed"));
  } else {
    throw ConfigError(
        "seed is required: set 'seed = <integer>' in the config or pass "
        "--seed");
  }
  r.note("seed", std::to_string(cfg.seed));

  if (!cli_out.empty()) {
    r.take("output_path");
    cfg.output_base = cli_out;
  } else if (const auto ov = r.take("output_path")) {
    cfg.output_base = *ov;
  } else {
    cfg.output_base = scenario_name(scenario);
  }
  r.note("output_path", cfg.output_base);

  const double two_pi = 2.0 * pi;
  const auto default_grid = []() {
    const RVec g = default_dtheta_grid();
    return std::vector<double>(g.data(), g.data() + g.size());
  };
  const auto grid_from = [&cfg](const std::vector<double>& v) {
    cfg.dtheta_grid = Eigen::Map<const RVec>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index i = 1; i < cfg.dtheta_grid.size(); ++i)
      if (!(cfg.dtheta_grid(i) > cfg.dtheta_grid(i - 1)))
        throw ConfigError(
            "key 'dtheta_grid_rad' must be strictly increasing");
  };

  switch (scenario) {
    case Scenario::ramsey_qfi_vs_time: {
      cfg.phi_rad = r.num("phi_rad", 0.5 * pi, -two_pi, two_pi);
      cfg.delta_rad_per_us =
          r.num("delta_rad_per_us", two_pi * 1.459, 1e-6, 1e3);
      cfg.t2star_us = r.num("t2star_us", 2.58, 1e-6, 1e6);
      cfg.time_min_us = r.num("time_min_us", 0.0, 0.0, 1e6);
      cfg.time_max_us = r.num("time_max_us", 5.0, 0.0, 1e6);
      if (!(cfg.time_max_us > cfg.time_min_us))
        throw ConfigError("'time_max_us' must exceed 'time_min_us'");
      cfg.n_time_points = r.integer("n_time_points", 10, 2, 10000);
      cfg.n_unitaries = r.integer("n_unitaries", 400, 2, 10000000);
      grid_from(r.list("dtheta_grid_rad", default_grid(), 1e-6, 3.2, 4));
      cfg.shots = r.optional_integer("shots", 1, 1000000000);
      break;
    }
    case Scenario::ramsey_qfi_vs_phi: {
      cfg.delta_rad_per_us =
          r.num("delta_rad_per_us", two_pi * 1.459, 1e-6, 1e3);
      cfg.t2star_us = r.num("t2star_us", 2.58, 1e-6, 1e6);
      cfg.phi_min_rad = r.num("phi_min_rad", 0.0, -two_pi, two_pi);
      cfg.phi_max_rad = r.num("phi_max_rad", pi, -two_pi, two_pi);
      if (!(cfg.phi_max_rad > cfg.phi_min_rad))
        throw ConfigError("'phi_max_rad' must exceed 'phi_min_rad'");
      cfg.n_phi_points = r.integer("n_phi_points", 9, 2, 10000);
      cfg.n_unitaries = r.integer("n_unitaries", 2000, 2, 10000000);
      grid_from(r.list("dtheta_grid_rad", default_grid(), 1e-6, 3.2, 4));
      cfg.shots = r.optional_integer("shots", 1, 1000000000);
      break;
    }
    case Scenario::ghz_sweep: {
      cfg.n_qubits = r.integer("n_qubits", 4, 1, 10);
      cfg.theta0_rad = r.num("theta0_rad", 0.0, -two_pi, two_pi);
      cfg.coherence = r.num("coherence", 1.0, 1e-6, 1.0);
      cfg.preparation =
          r.word("preparation", "circuit", {"circuit", "twisting"});
      cfg.n_unitaries = r.integer("n_unitaries", 1000, 2, 10000000);
      grid_from(r.list("dtheta_grid_rad", default_grid(), 1e-6, 3.2, 4));
      cfg.shots = r.optional_integer("shots", 1, 1000000000);
      break;
    }
    case Scenario::manybody_scaling: {
      cfg.n_qubits_min = r.integer("n_qubits_min", 2, 2, 12);
      cfg.n_qubits_max = r.integer("n_qubits_max", 8, 2, 12);
      if (cfg.n_qubits_max < cfg.n_qubits_min)
        throw ConfigError("'n_qubits_max' must be >= 'n_qubits_min'");
      cfg.epsilon = r.num("epsilon", 0.09, 1e-6, 1.0);
      cfg.gamma_over_g_mixed = r.num("gamma_over_g_mixed", 0.01, 0.0, 10.0);
      cfg.dephasing_time = r.num("dephasing_time", 5.0, 0.0, 1e6);
      cfg.repetitions = r.integer("repetitions", 20, 1, 1000);
      cfg.n_floor = r.integer("n_floor", 16, 2, 10000000);
      cfg.n_ceiling = r.integer("n_ceiling", 16384, 2, 10000000);
      if (cfg.n_ceiling < cfg.n_floor)
        throw ConfigError("'n_ceiling' must be >= 'n_floor'");
      cfg.dtheta_rad = r.num("dtheta_rad", 0.1, 1e-6, 3.2);
      cfg.segments = r.integer("segments", 20, 1, 1000);
      cfg.segment_time = r.num("segment_time", 1.0, 1e-6, 100.0);
      cfg.disorder_std =
          r.num("disorder_std", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.coupling_g = r.num("coupling_g", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.rabi_omega = r.num("rabi_omega", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.alpha_exponent = r.num("alpha_exponent", 1.5, 1e-6, 2.999999);
      break;
    }
    case Scenario::manybody_time_evolution: {
      cfg.n_qubits = r.integer("n_qubits", 8, 2, 12);
      cfg.n_unitaries = r.integer("n_unitaries", 1000, 2, 10000000);
      cfg.gamma_over_g = r.num("gamma_over_g", 0.01, 0.0, 10.0);
      cfg.segments = r.integer("segments", 20, 1, 1000);
      cfg.segment_time = r.num("segment_time", 1.0, 1e-6, 100.0);
      cfg.disorder_std =
          r.num("disorder_std", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.coupling_g = r.num("coupling_g", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.rabi_omega = r.num("rabi_omega", 1.0 / cfg.segment_time, 0.0, 1e3);
      cfg.alpha_exponent = r.num("alpha_exponent", 1.5, 1e-6, 2.999999);
      cfg.time_min = r.num("time_min", 0.0, 0.0, 1e9);
      const double gam = cfg.gamma_over_g * cfg.coupling_g;
      const double tmax_def = gam > 0.0 ? 1.0 / gam : 100.0;
      cfg.time_max = r.num("time_max", tmax_def, 1e-9, 1e9);
      if (!(cfg.time_max > cfg.time_min))
        throw ConfigError("'time_max' must exceed 'time_min'");
      cfg.n_time_points = r.integer("n_time_points", 20, 2, 10000);
      cfg.dtheta_rad = r.num("dtheta_rad", 0.1, 1e-6, 3.2);
      break;
    }
  }

  r.finish(scenario_name(scenario));
  cfg.resolved = r.resolved();
  return cfg;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::ramsey_qfi_vs_time: return run_ramsey_time(cfg);
    case Scenario::ramsey_qfi_vs_phi: return run_ramsey_phi(cfg);
    case Scenario::ghz_sweep: return run_ghz_sweep(cfg);
    case Scenario::manybody_scaling: return run_manybody_scaling(cfg);
    case Scenario::manybody_time_evolution:
      return run_manybody_time_evolution(cfg);
  }
  throw NumericalError("unhandled scenario");
}

ScenarioResult run_estimate_from_records(const std::string& records_path) {
  {
    std::ifstream probe(records_path);
    if (!probe) throw IoError("cannot open records file: " + records_path);
  }
  RecordBatch batch;
  try {
    batch = read_records(records_path);
  } catch (const std::exception& e) {
    throw ConfigError("invalid records file: " + std::string(e.what()));
  }
  if (batch.spec.kind == EnsembleKind::hamiltonian_evolution)
    throw ConfigError(
        "records were taken under a hamiltonian-evolution ensemble; the "
        "kernel estimators require local-haar ensembles");

  ResultTable table;
  table.scenario = "estimate_from_records";
  table.columns = {"estimator", "value", "std_error", "n_unitaries"};

  const bool two_states = batch.records.front().probs_b.has_value();
  std::vector<std::pair<std::string, Estimate>> rows;
  rows.emplace_back("purity_a", estimate_purity(batch, 'a'));
  if (two_states) {
    rows.emplace_back("purity_b", estimate_purity(batch, 'b'));
    rows.emplace_back("overlap_ab", estimate_overlap(batch));
    rows.emplace_back("superfidelity", estimate_superfidelity(batch));
    if (batch.spec.n_qubits == 1)
      rows.emplace_back("fidelity_single_qubit",
                        estimate_fidelity_single_qubit(batch));
  }
  ojson ests = ojson::object();
  for (const auto& [label, est] : rows) {
    table.cells.push_back({label, fmt_g17(est.value), fmt_g17(est.std_error),
                           std::to_string(est.n_unitaries)});
    ests[label] = ojson{{"value", est.value},
                        {"std_error", est.std_error},
                        {"method", est.method}};
  }

  ojson summary;
  summary["software"] =
      ojson{{"name", "qfi_rm"}, {"version", software_version()}};
  summary["scenario"] = "estimate_from_records";
  summary["config"] = ojson{
      {"records_file", records_path},
      {"ensemble", ensemble_kind_name(batch.spec.kind)},
      {"n_qubits", batch.spec.n_qubits},
      {"n_records", static_cast<std::int64_t>(batch.records.size())},
      {"shots",
       batch.records.front().shots ? std::to_string(*batch.records.front().shots)
                                   : std::string("none")},
  };
  summary["results"] = ojson{{"estimates", ests}};
  Audit audit;
  audit.enabled = false;
  ScenarioResult out = seal(std::move(table), std::move(summary), audit);
  // nothing to audit against: external records carry no oracle
  out.exit_code = exit_ok;
  return out;
}

OutputPaths write_outputs(const ScenarioResult& result, const std::string& base_in,
                          const std::string& format) {
  if (format != "csv" && format != "json")
    throw ConfigError("unknown output format '" + format +
                      "' (expected csv or json)");
  std::string base = base_in;
  for (const std::string suffix : {".csv", ".json"})
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
      base.erase(base.size() - suffix.size());
  if (base.empty()) throw ConfigError("empty output path");

  ojson summary = ojson::parse(result.summary_json);
  OutputPaths paths;

  if (format == "csv") {
    paths.rows_csv = base + ".csv";
    std::ofstream out(paths.rows_csv, std::ios::binary);
    if (!out) throw IoError("cannot write " + paths.rows_csv);
    out << csv_schema_tag() << "\n";
    out << "scenario";
    for (const std::string& col : result.table.columns) out << "," << col;
    out << "\n";
    for (const auto& row : result.table.cells) {
      out << result.table.scenario;
      for (const std::string& cell : row) out << "," << cell;
      out << "\n";
    }
    out.flush();
    if (!out) throw IoError("failed writing " + paths.rows_csv);
    summary["rows_file"] = paths.rows_csv;
  } else {
    ojson rows = ojson::array();
    for (const auto& row : result.table.cells) {
      ojson obj;
      obj["scenario"] = result.table.scenario;
      for (std::size_t j = 0; j < result.table.columns.size(); ++j)
        obj[result.table.columns[j]] = row[j];
      rows.push_back(obj);
    }
    summary["rows"] = rows;
  }

  paths.summary = base + ".json";
  std::ofstream js(paths.summary, std::ios::binary);
  if (!js) throw IoError("cannot write " + paths.summary);
  js << summary.dump(2) << "\n";
  js.flush();
  if (!js) throw IoError("failed writing " + paths.summary);
  return paths;
}

} // namespace rmqfi
