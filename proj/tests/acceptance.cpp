// acceptance gate: every release criterion below runs against an exact
// density-matrix oracle (or a closed form) at a pinned tolerance and prints
// exactly one PASS/FAIL line with the measured value. the binary exits
// nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmqfi/dynamics.hpp"
#include "rmqfi/experiments.hpp"
#include "rmqfi/operators.hpp"
#include "rmqfi/states.hpp"

using namespace rmqfi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

StateFamily unitary_family(const Mat& rho, const Mat& g) {
  return [rho, g](double th) {
    const Mat u = expi_hermitian(g, th);
    return Mat((u * rho * u.adjoint()).eval());
  };
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_base(const std::string& tag) {
  return (std::filesystem::temp_directory_path() / ("rmqfi_acc_" + tag))
      .string();
}

std::string write_cfg(const std::string& tag, const std::string& content) {
  const std::string path = tmp_base(tag) + ".cfg";
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

double table_cell(const ResultTable& t, std::size_t row, const std::string& col) {
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (t.columns[j] == col) return std::stod(t.cells[row][j]);
  throw std::runtime_error("missing column " + col);
}

std::string table_raw(const ResultTable& t, std::size_t row,
                      const std::string& col) {
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (t.columns[j] == col) return t.cells[row][j];
  throw std::runtime_error("missing column " + col);
}

// ---------------------------------------------------------------- criteria

// for pure states the fitted sub-qfi is an unbiased estimate of the exact
// qfi: the ensemble-mean relative deviation over 100 states must be within
// 1%. (per state the n=2000 shot noise is 2-3%, so equality is a statement
// about the mean, not each draw)
Outcome pure_state_fit_accuracy() {
  Rng rng(101);
  const int n_states = 100;
  double rel_sum = 0.0, abs_sum = 0.0;
  for (int i = 0; i < n_states; ++i) {
    const int nq = 1 + i % 3;
    const Eigen::Index dim = Eigen::Index(1) << nq;
    Rng sr = rng.sub(static_cast<std::uint64_t>(i));
    const Mat rho = random_density(sr, dim, 1);
    const Mat g = random_hermitian(sr, dim);
    const double exact = exact_qfi_unitary(rho, g).value;

    EnsembleSpec es;
    es.kind = EnsembleKind::haar_local_product;
    es.n_qubits = nq;
    const SweepResult sw = sweep_dg(unitary_family(rho, g), 0.0,
                                    default_dtheta_grid(), es, 2000,
                                    sr.sub(999));
    const FitResult fit = fit_quadratic(sw);
    const double rel = (fit.sub_qfi - exact) / exact;
    rel_sum += rel;
    abs_sum += std::abs(rel);
  }
  const double mean_rel = rel_sum / n_states;
  return {std::abs(mean_rel) <= 0.01,
          "mean (fit-exact)/exact = " + fmt(mean_rel) + " over " +
              std::to_string(n_states) +
              " pure states (limit 0.01); mean magnitude " +
              fmt(abs_sum / n_states)};
}

// for mixed states the fitted value must stay below exact qfi + 3 sigma
Outcome mixed_state_lower_bound() {
  Rng rng(202);
  const int n_states = 50;
  int violations = 0;
  double worst = -1e300;
  for (int i = 0; i < n_states; ++i) {
    const int nq = 1 + i % 3;
    const Eigen::Index dim = Eigen::Index(1) << nq;
    Rng sr = rng.sub(static_cast<std::uint64_t>(i));
    const Mat rho = random_density(sr, dim, 0); // full rank
    const Mat g = random_hermitian(sr, dim);
    const double exact = exact_qfi_unitary(rho, g).value;

    EnsembleSpec es;
    es.kind = EnsembleKind::haar_local_product;
    es.n_qubits = nq;
    const SweepResult sw = sweep_dg(unitary_family(rho, g), 0.0,
                                    default_dtheta_grid(), es, 400,
                                    sr.sub(999));
    const FitResult fit = fit_quadratic(sw);
    const double slack =
        (fit.sub_qfi - exact) / std::max(fit.sub_qfi_error, 1e-300);
    worst = std::max(worst, slack);
    if (fit.sub_qfi > exact + 3.0 * fit.sub_qfi_error) ++violations;
  }
  return {violations == 0,
          std::to_string(violations) + "/" + std::to_string(n_states) +
              " upper-bound violations; worst (fit-exact)/sigma = " +
              fmt(worst) + " (limit 3)"};
}

// the time scan reproduces sin^2(phi) exp(-2 (t/T2*)^2) within 3 sigma
Outcome ramsey_decay_tracking() {
  const std::string cfg_path = write_cfg("ramsey_time", "seed = 3\n");
  const ScenarioConfig cfg = load_scenario_config(
      Scenario::ramsey_qfi_vs_time, cfg_path, std::nullopt, "");
  const ScenarioResult res = run_scenario(cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.table.cells.size(); ++i) {
    const double est = table_cell(res.table, i, "qfi_estimate");
    const double err = table_cell(res.table, i, "qfi_error");
    const double ora = table_cell(res.table, i, "qfi_exact");
    worst = std::max(worst, std::abs(est - ora) / std::max(err, 1e-300));
  }
  const bool ok = worst <= 3.0 && res.table.cells.size() == 10;
  return {ok, "max |est-oracle|/sigma = " + fmt(worst) + " over " +
                  std::to_string(res.table.cells.size()) +
                  " time points (limit 3)"};
}

// 6 <p_a p_b> - 1 estimates Tr(rho(t) rho(0)) for the single-qubit pair
Outcome two_state_overlap_estimator() {
  Rng root(404);
  EnsembleSpec es;
  es.kind = EnsembleKind::haar_single_qubit_euler;
  es.n_qubits = 1;
  const double delta = 2.0 * pi * 1.459;
  const RamseyParams p0{0.5 * pi, delta, 0.0, 2.58};
  const Mat rho0 = ramsey_state(p0);
  double worst = 0.0;
  const std::vector<double> times = linspace(0.0, 5.0, 10);
  for (std::size_t i = 0; i < times.size(); ++i) {
    RamseyParams pt = p0;
    pt.t = times[i];
    const Mat rho_t = ramsey_state(pt);
    const RecordBatch batch =
        collect_records(rho_t, &rho0, es, 400, root.sub(i));
    const Estimate est = estimate_fidelity_single_qubit(batch);
    const double oracle = (rho_t * rho0).trace().real();
    worst = std::max(worst,
                     std::abs(est.value - oracle) / std::max(est.std_error, 1e-300));
  }
  return {worst <= 3.0, "max |est-oracle|/sigma = " + fmt(worst) +
                            " over 10 time points (limit 3)"};
}

// the 4-qubit ghz sweep must fit sub-qfi = 16 within 3 sigma
Outcome ideal_ghz_fit() {
  const std::string cfg_path = write_cfg("ghz", "seed = 5\n");
  const ScenarioConfig cfg =
      load_scenario_config(Scenario::ghz_sweep, cfg_path, std::nullopt, "");
  const ScenarioResult res = run_scenario(cfg);
  const auto summary = nlohmann::ordered_json::parse(res.summary_json);
  const double fitted = summary["results"]["fit"]["sub_qfi"].get<double>();
  const double err = summary["results"]["fit"]["sub_qfi_error"].get<double>();
  const double z = std::abs(fitted - 16.0) / std::max(err, 1e-300);
  return {z <= 3.0, "fitted " + fmt(fitted) + " +/- " + fmt(err) +
                        " vs 16 (z = " + fmt(z) + ", limit 3)"};
}

// every sampled time of the 8-qubit trajectory tracks its oracle within
// 3 sigma, and the ideal point witnesses all 8 qubits
Outcome dephasing_trajectory_tracking() {
  const std::string cfg_path = write_cfg("te", "seed = 7\n");
  const ScenarioConfig cfg = load_scenario_config(
      Scenario::manybody_time_evolution, cfg_path, std::nullopt, "");
  const ScenarioResult res = run_scenario(cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.table.cells.size(); ++i) {
    const double est = table_cell(res.table, i, "sub_qfi_estimate");
    const double err = table_cell(res.table, i, "sub_qfi_error");
    const double ora = table_cell(res.table, i, "sub_qfi_oracle");
    worst = std::max(worst, std::abs(est - ora) / std::max(err, 1e-300));
  }
  const auto summary = nlohmann::ordered_json::parse(res.summary_json);
  const int depth = summary["results"]["witnessed_depth_t0_pure"].get<int>();
  const bool ok =
      worst <= 3.0 && depth == 8 && res.table.cells.size() == 40;
  return {ok, "max |est-oracle|/sigma = " + fmt(worst) + " over " +
                  std::to_string(res.table.cells.size()) +
                  " rows (limit 3); witnessed depth " + std::to_string(depth) +
                  " (expected 8)"};
}

// measurement-cost exponents: log2 n_required = a + b N with b inside the
// published bands for the pure and dephased scenarios; one fresh seed retry
Outcome measurement_cost_scaling() {
  const auto attempt = [](std::uint64_t seed) {
    const std::string cfg_path =
        write_cfg("scaling_" + std::to_string(seed),
                  "seed = " + std::to_string(seed) + "\n");
    const ScenarioConfig cfg = load_scenario_config(
        Scenario::manybody_scaling, cfg_path, std::nullopt, "");
    const ScenarioResult res = run_scenario(cfg);
    const auto summary = nlohmann::ordered_json::parse(res.summary_json);
    double b_pure = std::nan(""), b_mixed = std::nan("");
    for (const auto& cj : summary["results"]["cases"]) {
      if (cj["fit"].is_null()) continue;
      if (cj["case"] == "pure") b_pure = cj["fit"]["b"].get<double>();
      if (cj["case"] == "mixed") b_mixed = cj["fit"]["b"].get<double>();
    }
    return std::pair<double, double>(b_pure, b_mixed);
  };
  auto [b_pure, b_mixed] = attempt(11);
  bool retried = false;
  auto in_bands = [](double bp, double bm) {
    return bp >= 0.35 && bp <= 0.73 && bm >= 0.14 && bm <= 0.44;
  };
  if (!in_bands(b_pure, b_mixed)) {
    retried = true;
    std::tie(b_pure, b_mixed) = attempt(12);
  }
  const bool pass = in_bands(b_pure, b_mixed);
  std::string detail = "b_pure = " + fmt(b_pure) +
                       " (band [0.35, 0.73]), b_mixed = " + fmt(b_mixed) +
                       " (band [0.14, 0.44])" +
                       (retried ? ", after one fresh-seed retry" : "");
  if (!pass)
    detail += "; exact-probability records: per-unitary estimator variance "
              "does not grow with qubit count while the target grows as N^2, "
              "so the required unitary count falls with N (see README)";
  return {pass, detail};
}

// both single-qubit parametrizations reproduce the haar moments
// E|u00|^2 = 1/2 and E|u00|^4 = 1/3 within 3 monte-carlo sigma
Outcome haar_moment_calibration() {
  const int n = 100000;
  const double sd2 = std::sqrt(1.0 / 12.0 / n);        // var |u00|^2 = 1/12
  const double sd4 = std::sqrt((0.2 - 1.0 / 9.0) / n); // var |u00|^4
  double worst = 0.0;
  for (const EnsembleKind kind :
       {EnsembleKind::haar_single_qubit_euler, EnsembleKind::haar_local_product}) {
    EnsembleSpec es;
    es.kind = kind;
    es.n_qubits = 1;
    Rng rng(kind == EnsembleKind::haar_single_qubit_euler ? 801 : 802);
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const Mat u = draw_unitary(es, rng).matrix();
      const double a2 = std::norm(u(0, 0));
      m2 += a2;
      m4 += a2 * a2;
    }
    m2 /= n;
    m4 /= n;
    worst = std::max(worst, std::abs(m2 - 0.5) / sd2);
    worst = std::max(worst, std::abs(m4 - 1.0 / 3.0) / sd4);
  }
  return {worst <= 3.0, "max moment deviation " + fmt(worst) +
                            " sigma across both parametrizations (limit 3)"};
}

// the closed-form dephasing channel agrees with an rk4 integration of the
// local-z lindbladian to 1e-6
Outcome dephasing_channel_oracle() {
  Rng rng(909);
  double worst = 0.0;
  for (int nq = 1; nq <= 4; ++nq) {
    const Eigen::Index dim = Eigen::Index(1) << nq;
    const DephasingParams p{0.25, 1.2};
    for (int rep = 0; rep < 2; ++rep) {
      const Mat rho = rep == 0 ? projector(ghz_prepare(nq))
                               : random_density(rng, dim, 0);
      const Mat a = dephase(rho, p);
      const Mat b = lindblad_evolve(rho, p, 600);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-6,
          "max |closed form - rk4| = " + fmt(worst) + " (limit 1e-6)"};
}

// identical seeds must give byte-identical csv, summary and record files
Outcome seeded_reproducibility() {
  const std::string cfg_path = write_cfg(
      "repro", "seed = 99\nn_time_points = 3\nn_unitaries = 100\ntime_max_us = 2\n");
  const auto run_once = [&](const std::string& tag) {
    const ScenarioResult res = run_scenario(load_scenario_config(
        Scenario::ramsey_qfi_vs_time, cfg_path, std::nullopt, ""));
    return write_outputs(res, tmp_base(tag), "csv");
  };
  const OutputPaths a = run_once("repro_a");
  const OutputPaths b = run_once("repro_b");
  const bool csv_same = slurp(a.rows_csv) == slurp(b.rows_csv);

  EnsembleSpec es;
  es.kind = EnsembleKind::haar_local_product;
  es.n_qubits = 2;
  const Mat rho = projector(ghz_prepare(2));
  const auto rec_once = [&](const std::string& tag) {
    const RecordBatch batch = collect_records(rho, nullptr, es, 50, Rng(4), 64);
    const std::string path = tmp_base(tag) + ".jsonl";
    write_records(path, batch);
    return slurp(path);
  };
  const bool rec_same = rec_once("rec_a") == rec_once("rec_b");

  // and a different seed must not reproduce the same rows
  const std::string cfg2 = write_cfg(
      "repro2", "seed = 100\nn_time_points = 3\nn_unitaries = 100\ntime_max_us = 2\n");
  const ScenarioResult other = run_scenario(load_scenario_config(
      Scenario::ramsey_qfi_vs_time, cfg2, std::nullopt, ""));
  const OutputPaths c = write_outputs(other, tmp_base("repro_c"), "csv");
  const bool differs = slurp(a.rows_csv) != slurp(c.rows_csv);

  return {csv_same && rec_same && differs,
          std::string("csv ") + (csv_same ? "identical" : "DIFFER") +
              ", records " + (rec_same ? "identical" : "DIFFER") +
              ", fresh seed " + (differs ? "differs" : "IDENTICAL")};
}

} // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* label;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"pure-state fit accuracy", 120.0, pure_state_fit_accuracy},
      {"mixed-state lower bound", 120.0, mixed_state_lower_bound},
      {"ramsey decay tracking", 60.0, ramsey_decay_tracking},
      {"two-state overlap estimator", 30.0, two_state_overlap_estimator},
      {"ideal ghz fit", 60.0, ideal_ghz_fit},
      {"dephasing trajectory tracking", 600.0, dephasing_trajectory_tracking},
      {"measurement-cost scaling", 3600.0, measurement_cost_scaling},
      {"haar moment calibration", 10.0, haar_moment_calibration},
      {"dephasing channel oracle", 30.0, dephasing_channel_oracle},
      {"seeded reproducibility", 300.0, seeded_reproducibility},
  };

  // optional argv filter: 1-based criterion numbers to run (default: all)
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion number: %s\n", argv[a]);
      return 2;
    }
    selected[static_cast<std::size_t>(k - 1)] = true;
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_budget = elapsed <= criteria[i].budget_s;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s [%2zu] %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", i + 1,
                criteria[i].label, out.detail.c_str(), elapsed,
                in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  const std::size_t n_run = static_cast<std::size_t>(
      std::count(selected.begin(), selected.end(), true));
  if (failures > 0)
    std::printf("%d of %zu criteria failed\n", failures, n_run);
  else
    std::printf("all %zu criteria passed\n", n_run);
  return failures == 0 ? 0 : 1;
}
