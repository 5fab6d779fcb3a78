#include "rmqfi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmqfi/constants.hpp"
#include "rmqfi/states.hpp"

namespace rmqfi {

namespace {

void validate_grid(const RVec& grid) {
  if (grid.size() < 4)
    throw std::invalid_argument("sweep: grid needs at least 4 offsets");
  for (int i = 0; i < grid.size(); ++i) {
    if (!(grid(i) > 0.0))
      throw std::invalid_argument("sweep: offsets must be positive");
    if (i > 0 && !(grid(i) > grid(i - 1)))
      throw std::invalid_argument("sweep: offsets must be strictly increasing");
  }
}

// equal-purity assembly of the distance from kernel means; the arithmetic
// mean of the purity deficits keeps the estimator linear in the means, which
// removes the clamp bias the literal sqrt-product form has for pure states
double assemble_distance(double xab, double xaa, double xbb) {
  const double g = xab + 0.5 * ((1.0 - xaa) + (1.0 - xbb));
  return 8.0 * (1.0 - std::sqrt(std::max(0.0, g)));
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size() - 1));
}

} // namespace

RVec default_dtheta_grid() {
  RVec g(8);
  for (int i = 0; i < 8; ++i) g(i) = 0.05 + 0.05 * i;
  return g;
}

SweepResult sweep_dg(const StateFamily& family, double theta0, const RVec& grid,
                     const EnsembleSpec& ensemble, int n_unitaries,
                     const Rng& rng, const SweepOptions& opts) {
  validate_grid(grid);
  if (n_unitaries < 2) throw std::invalid_argument("sweep: need at least 2 unitaries");
  if (opts.bootstrap_resamples < 2)
    throw std::invalid_argument("sweep: need at least 2 bootstrap resamples");
  const int npts = static_cast<int>(grid.size());
  const Mat rho_a = family(theta0);
  const int dim = 1 << ensemble.n_qubits;
  if (rho_a.rows() != dim || rho_a.cols() != dim)
    throw std::invalid_argument("sweep: family dimension does not match ensemble");
  std::vector<Mat> rho_b(npts);
  for (int j = 0; j < npts; ++j) rho_b[j] = family(theta0 + grid(j));

  RMat stats(n_unitaries, 1 + 2 * npts);
  for (int k = 0; k < n_unitaries; ++k) {
    Rng rk = rng.sub(static_cast<std::uint64_t>(k));
    const UnitaryMatrix u = sample_unitary(ensemble, rk);
    const RVec pa = opts.shots ? measure(rho_a, u, *opts.shots, rk) : measure(rho_a, u);
    stats(k, 0) = hamming_kernel(pa, pa);
    for (int j = 0; j < npts; ++j) {
      const RVec pb =
          opts.shots ? measure(rho_b[j], u, *opts.shots, rk) : measure(rho_b[j], u);
      stats(k, 1 + 2 * j) = hamming_kernel(pb, pb);
      stats(k, 2 + 2 * j) = hamming_kernel(pa, pb);
    }
  }

  SweepResult out;
  out.dtheta_grid = grid;
  out.n_unitaries = n_unitaries;
  out.per_unitary = stats;
  out.dg_values.resize(npts);
  const RVec colmean = stats.colwise().mean();
  for (int j = 0; j < npts; ++j)
    out.dg_values(j) =
        assemble_distance(colmean(2 + 2 * j), colmean(0), colmean(1 + 2 * j));

  // joint bootstrap over unitaries for the per-point errors
  Rng boot = rng.sub(0xB007C0DEull);
  const int nb = opts.bootstrap_resamples;
  RMat reps(nb, npts);
  RVec sums(1 + 2 * npts);
  for (int b = 0; b < nb; ++b) {
    sums.setZero();
    for (int i = 0; i < n_unitaries; ++i) {
      const int pick = std::min<int>(
          n_unitaries - 1, static_cast<int>(boot.uniform() * n_unitaries));
      sums += stats.row(pick).transpose();
    }
    sums /= static_cast<double>(n_unitaries);
    for (int j = 0; j < npts; ++j)
      reps(b, j) = assemble_distance(sums(2 + 2 * j), sums(0), sums(1 + 2 * j));
  }
  out.dg_errors.resize(npts);
  for (int j = 0; j < npts; ++j) {
    const double mean = reps.col(j).mean();
    out.dg_errors(j) =
        std::sqrt((reps.col(j).array() - mean).square().sum() / (nb - 1));
  }
  return out;
}

SweepResult sweep_dg_exact(const StateFamily& family, double theta0,
                           const RVec& grid) {
  validate_grid(grid);
  SweepResult out;
  out.dtheta_grid = grid;
  out.dg_values.resize(grid.size());
  out.dg_errors = RVec::Zero(grid.size());
  const Mat rho_a = family(theta0);
  for (int j = 0; j < grid.size(); ++j)
    out.dg_values(j) = modified_bures_distance(rho_a, family(theta0 + grid(j)));
  out.n_unitaries = 0;
  out.per_unitary.resize(0, 0);
  return out;
}

FitResult fit_quadratic(const SweepResult& sweep, const FitOptions& opts) {
  const int m = static_cast<int>(sweep.dtheta_grid.size());
  if (m < 4) throw std::invalid_argument("fit_quadratic: need at least 4 grid points");
  if (sweep.dg_values.size() != m || sweep.dg_errors.size() != m)
    throw std::invalid_argument("fit_quadratic: inconsistent sweep vectors");
  if (opts.degree < 2) throw std::invalid_argument("fit_quadratic: degree < 2");
  const int k = opts.degree - 1; // powers 2..degree
  if (m < k)
    throw std::invalid_argument("fit_quadratic: more coefficients than grid points");

  bool weighted = true;
  for (int i = 0; i < m; ++i)
    if (!(sweep.dg_errors(i) > 0.0) || !std::isfinite(sweep.dg_errors(i)))
      weighted = false;
  RVec sqw(m);
  for (int i = 0; i < m; ++i) sqw(i) = weighted ? 1.0 / sweep.dg_errors(i) : 1.0;

  RMat x(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) x(i, j) = std::pow(sweep.dtheta_grid(i), 2 + j);
  const RMat a = sqw.asDiagonal() * x;
  const RVec y = sqw.cwiseProduct(sweep.dg_values);

  Eigen::ColPivHouseholderQR<RMat> qr(a);
  if (qr.rank() < k)
    throw std::runtime_error("fit_quadratic: rank-deficient design matrix");
  const RVec beta = qr.solve(y);

  FitResult out;
  out.coefficients = beta;
  out.sub_qfi = beta(0);
  out.residual_norm = (sweep.dg_values - x * beta).norm();

  const RMat cov = (a.transpose() * a).inverse();
  double var2 = cov(0, 0);
  const double wrss = (a * beta - y).squaredNorm();
  if (weighted) {
    const double chi2_red = m > k ? wrss / (m - k) : 1.0;
    var2 *= std::max(1.0, chi2_red);
  } else {
    var2 *= m > k ? wrss / (m - k) : 0.0;
  }
  out.sub_qfi_error = std::sqrt(std::max(0.0, var2));

  // joint bootstrap of the whole fit when per-unitary statistics exist:
  // resample unitaries, rebuild every grid point, refit with the same weights
  if (sweep.per_unitary.rows() > 1 && opts.bootstrap_resamples > 1) {
    const int n = static_cast<int>(sweep.per_unitary.rows());
    const int npts = m;
    Rng boot(opts.bootstrap_seed);
    std::vector<double> c2s(opts.bootstrap_resamples);
    RVec sums(sweep.per_unitary.cols());
    RVec dstar(npts);
    for (int b = 0; b < opts.bootstrap_resamples; ++b) {
      sums.setZero();
      for (int i = 0; i < n; ++i) {
        const int pick =
            std::min<int>(n - 1, static_cast<int>(boot.uniform() * n));
        sums += sweep.per_unitary.row(pick).transpose();
      }
      sums /= static_cast<double>(n);
      for (int j = 0; j < npts; ++j)
        dstar(j) = assemble_distance(sums(2 + 2 * j), sums(0), sums(1 + 2 * j));
      c2s[b] = qr.solve(RVec(sqw.cwiseProduct(dstar)))(0);
    }
    out.sub_qfi_error = std::max(out.sub_qfi_error, sample_sd(c2s));
  }
  return out;
}

WitnessResult witness(double qfi_value, int n_qubits) {
  if (qfi_value < 0.0) throw std::invalid_argument("witness: negative qfi");
  if (n_qubits < 1) throw std::invalid_argument("witness: n_qubits < 1");
  WitnessResult out;
  out.n_qubits = n_qubits;
  out.qfi_density = qfi_value / n_qubits;
  const double fl = std::floor(out.qfi_density);
  // strict inequality F/N > m: an exact integer density only witnesses m-1
  long m = fl == out.qfi_density ? static_cast<long>(fl) - 1
                                 : static_cast<long>(fl);
  m = std::clamp(m, 0L, static_cast<long>(n_qubits) - 1L);
  out.m_witnessed = static_cast<int>(m);
  return out;
}

double ghz_coherence(int n_qubits, double gamma, double t) {
  if (n_qubits < 1) throw std::invalid_argument("ghz_coherence: n_qubits < 1");
  if (gamma < 0.0 || t < 0.0)
    throw std::invalid_argument("ghz_coherence: negative rate or time");
  return std::exp(-2.0 * gamma * t * n_qubits);
}

Mat dephased_ghz_density(int n_qubits, double theta, double coherence) {
  if (n_qubits < 1 || n_qubits > 12)
    throw std::invalid_argument("dephased_ghz_density: n_qubits out of range");
  if (coherence < 0.0 || coherence > 1.0)
    throw std::invalid_argument("dephased_ghz_density: coherence outside [0,1]");
  const int dim = 1 << n_qubits;
  Mat rho = Mat::Zero(dim, dim);
  rho(0, 0) = 0.5;
  rho(dim - 1, dim - 1) = 0.5;
  const cxd off = 0.5 * coherence * std::polar(1.0, -theta * n_qubits);
  rho(0, dim - 1) = off;
  rho(dim - 1, 0) = std::conj(off);
  return rho;
}

StateFamily dephased_ghz_family(int n_qubits, double coherence) {
  return [n_qubits, coherence](double theta) {
    return dephased_ghz_density(n_qubits, theta, coherence);
  };
}

namespace {

// outcome probabilities of the dephased ghz state at phase theta given the
// propagated computational corners u0 = U|0..0>, u1 = U|1..1>
RVec ghz_probs(const Vec& u0, const Vec& u1, double coherence, double theta,
               int n_qubits) {
  const cxd phase = std::polar(1.0, -theta * n_qubits);
  const int dim = u0.size();
  RVec p(dim);
  for (int s = 0; s < dim; ++s) {
    const double val = 0.5 * std::norm(u0(s)) + 0.5 * std::norm(u1(s)) +
                       coherence * std::real(phase * u0(s) * std::conj(u1(s)));
    p(s) = std::max(0.0, val);
  }
  return p;
}

struct KernelTriples {
  std::vector<double> xaa, xbb, xab;
};

double point_sub_qfi(double mab, double maa, double mbb, double dtheta) {
  const double g = mab + 0.5 * ((1.0 - maa) + (1.0 - mbb));
  return 8.0 * (1.0 - std::sqrt(std::max(0.0, g))) / (dtheta * dtheta);
}

} // namespace

PointEstimate estimate_ghz_sub_qfi_point(int n_qubits, double coherence,
                                         double theta0, double dtheta,
                                         const EnsembleSpec& ensemble,
                                         int n_unitaries, const Rng& rng,
                                         int bootstrap_resamples) {
  if (dtheta <= 0.0) throw std::invalid_argument("point estimate: dtheta <= 0");
  if (n_unitaries < 2)
    throw std::invalid_argument("point estimate: need at least 2 unitaries");
  if (bootstrap_resamples < 2)
    throw std::invalid_argument("point estimate: need at least 2 resamples");
  EnsembleSpec es = ensemble;
  es.n_qubits = n_qubits;
  const int dim = 1 << n_qubits;
  const Vec e0 = basis_state(dim, 0);
  const Vec e1 = basis_state(dim, dim - 1);

  KernelTriples ker;
  ker.xaa.resize(n_unitaries);
  ker.xbb.resize(n_unitaries);
  ker.xab.resize(n_unitaries);
  for (int k = 0; k < n_unitaries; ++k) {
    Rng rk = rng.sub(static_cast<std::uint64_t>(k));
    const SampledUnitary su = draw_unitary(es, rk);
    const Vec u0 = su.apply(e0);
    const Vec u1 = su.apply(e1);
    const RVec pa = ghz_probs(u0, u1, coherence, theta0, n_qubits);
    const RVec pb = ghz_probs(u0, u1, coherence, theta0 + dtheta, n_qubits);
    ker.xaa[k] = hamming_kernel(pa, pa);
    ker.xbb[k] = hamming_kernel(pb, pb);
    ker.xab[k] = hamming_kernel(pa, pb);
  }

  double maa = 0, mbb = 0, mab = 0;
  for (int k = 0; k < n_unitaries; ++k) {
    maa += ker.xaa[k];
    mbb += ker.xbb[k];
    mab += ker.xab[k];
  }
  maa /= n_unitaries;
  mbb /= n_unitaries;
  mab /= n_unitaries;

  PointEstimate out;
  out.sub_qfi = point_sub_qfi(mab, maa, mbb, dtheta);
  out.n_unitaries = n_unitaries;

  Rng boot = rng.sub(0xB007C0DEull);
  std::vector<double> reps(bootstrap_resamples);
  for (int b = 0; b < bootstrap_resamples; ++b) {
    double saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n_unitaries; ++i) {
      const int pick = std::min<int>(
          n_unitaries - 1, static_cast<int>(boot.uniform() * n_unitaries));
      saa += ker.xaa[pick];
      sbb += ker.xbb[pick];
      sab += ker.xab[pick];
    }
    reps[b] = point_sub_qfi(sab / n_unitaries, saa / n_unitaries,
                            sbb / n_unitaries, dtheta);
  }
  out.error = sample_sd(reps);
  return out;
}

std::vector<RequiredN> required_measurements(const ScalingScenario& scenario,
                                             double epsilon,
                                             const std::vector<int>& n_list,
                                             const Rng& rng,
                                             const ScalingSearch& search) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("required_measurements: epsilon outside (0,1]");
  if (n_list.empty())
    throw std::invalid_argument("required_measurements: empty qubit list");
  if (search.repetitions < 1 || search.n_floor < 2 ||
      search.n_ceiling < search.n_floor)
    throw std::invalid_argument("required_measurements: bad search parameters");
  if (!(scenario.dtheta > 0.0))
    throw std::invalid_argument("required_measurements: dtheta <= 0");

  std::vector<RequiredN> rows;
  rows.reserve(n_list.size());
  for (const int n_qubits : n_list) {
    if (n_qubits < 2 || n_qubits > 12)
      throw std::invalid_argument("required_measurements: n_qubits out of range");
    const double c =
        ghz_coherence(n_qubits, scenario.gamma, scenario.dephasing_time);
    const StateFamily fam = dephased_ghz_family(n_qubits, c);
    const double dstar = modified_bures_distance(
        fam(scenario.theta0), fam(scenario.theta0 + scenario.dtheta));
    const double fstar = dstar / (scenario.dtheta * scenario.dtheta);
    if (!(fstar > 0.0))
      throw std::runtime_error("required_measurements: degenerate oracle");

    EnsembleSpec es = scenario.ensemble;
    es.n_qubits = n_qubits;
    const int dim = 1 << n_qubits;
    const Vec e0 = basis_state(dim, 0);
    const Vec e1 = basis_state(dim, dim - 1);

    struct Stream {
      Rng base;
      std::vector<double> caa, cbb, cab; // cumulative kernel sums
    };
    std::vector<Stream> streams;
    streams.reserve(search.repetitions);
    for (int r = 0; r < search.repetitions; ++r)
      streams.push_back(Stream{
          rng.sub(100000ull * static_cast<std::uint64_t>(n_qubits) +
                  static_cast<std::uint64_t>(r)),
          {}, {}, {}});

    const auto extend = [&](int target) {
      for (Stream& st : streams) {
        while (static_cast<int>(st.caa.size()) < target) {
          const std::uint64_t k = st.caa.size();
          Rng rk = st.base.sub(k);
          const SampledUnitary su = draw_unitary(es, rk);
          const Vec u0 = su.apply(e0);
          const Vec u1 = su.apply(e1);
          const RVec pa = ghz_probs(u0, u1, c, scenario.theta0, n_qubits);
          const RVec pb =
              ghz_probs(u0, u1, c, scenario.theta0 + scenario.dtheta, n_qubits);
          const double paa = st.caa.empty() ? 0.0 : st.caa.back();
          const double pbb = st.cbb.empty() ? 0.0 : st.cbb.back();
          const double pab = st.cab.empty() ? 0.0 : st.cab.back();
          st.caa.push_back(paa + hamming_kernel(pa, pa));
          st.cbb.push_back(pbb + hamming_kernel(pb, pb));
          st.cab.push_back(pab + hamming_kernel(pa, pb));
        }
      }
    };
    const auto rep_estimates = [&](int m) {
      std::vector<double> vals;
      vals.reserve(streams.size());
      for (const Stream& st : streams) {
        const double maa = st.caa[m - 1] / m;
        const double mbb = st.cbb[m - 1] / m;
        const double mab = st.cab[m - 1] / m;
        vals.push_back(point_sub_qfi(mab, maa, mbb, scenario.dtheta));
      }
      return vals;
    };
    const auto mean_err = [&](int m) {
      double acc = 0.0;
      for (const double fhat : rep_estimates(m))
        acc += std::abs(fhat - fstar) / fstar;
      return acc / streams.size();
    };
    const auto make_row = [&](int m, bool converged) {
      RequiredN row;
      row.n_qubits = n_qubits;
      row.n_required = m;
      row.converged = converged;
      row.mean_rel_error = mean_err(m);
      const std::vector<double> vals = rep_estimates(m);
      double mean = 0.0;
      for (const double v : vals) mean += v;
      mean /= vals.size();
      row.mean_estimate = mean;
      row.estimate_spread = sample_sd(vals);
      row.oracle = fstar;
      return row;
    };

    int n = search.n_floor;
    extend(n);
    double err = mean_err(n);
    if (err < epsilon) {
      rows.push_back(make_row(n, true));
      continue;
    }
    int lo = n;
    int hi = 0;
    bool found = false;
    while (true) {
      long next = 2L * lo;
      if (next > search.n_ceiling) {
        if (lo < search.n_ceiling) {
          extend(search.n_ceiling);
          err = mean_err(search.n_ceiling);
          if (err < epsilon) {
            hi = search.n_ceiling;
            found = true;
          } else {
            lo = search.n_ceiling;
          }
        }
        break;
      }
      extend(static_cast<int>(next));
      err = mean_err(static_cast<int>(next));
      if (err < epsilon) {
        hi = static_cast<int>(next);
        found = true;
        break;
      }
      lo = static_cast<int>(next);
    }
    if (!found) {
      rows.push_back(make_row(search.n_ceiling, false));
      continue;
    }
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (mean_err(mid) < epsilon)
        hi = mid;
      else
        lo = mid;
    }
    rows.push_back(make_row(hi, true));
  }
  return rows;
}

ExponentFit fit_scaling_exponent(const std::vector<RequiredN>& rows) {
  std::vector<double> xs, ys;
  for (const RequiredN& r : rows) {
    if (!r.converged) continue;
    xs.push_back(static_cast<double>(r.n_qubits));
    ys.push_back(std::log2(static_cast<double>(r.n_required)));
  }
  const int m = static_cast<int>(xs.size());
  if (m < 2)
    throw std::runtime_error("fit_scaling_exponent: fewer than 2 converged points");
  double xbar = 0, ybar = 0;
  for (int i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= m;
  ybar /= m;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0))
    throw std::runtime_error("fit_scaling_exponent: degenerate qubit counts");
  ExponentFit out;
  out.b = sxy / sxx;
  out.a = ybar - out.b * xbar;
  double rss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ys[i] - out.a - out.b * xs[i];
    rss += r * r;
  }
  const double s2 = m > 2 ? rss / (m - 2) : 0.0;
  out.b_err = std::sqrt(s2 / sxx);
  out.a_err = std::sqrt(s2 * (1.0 / m + xbar * xbar / sxx));
  return out;
}

} // namespace rmqfi
