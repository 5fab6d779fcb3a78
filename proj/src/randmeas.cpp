#include "rmqfi/randmeas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "rmqfi/constants.hpp"
#include "rmqfi/states.hpp"

namespace rmqfi {

namespace {

using cxd = std::complex<double>;

// haar-distributed 2x2 unitary in the (theta, lambda, phi) parametrization;
// |u00|^2 = cos^2(theta/2) is uniform on [0,1]
Mat haar2_from_angles(double theta, double lambda, double phi) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Mat u(2, 2);
  u(0, 0) = c;
  u(0, 1) = -std::polar(s, lambda);
  u(1, 0) = std::polar(s, phi);
  u(1, 1) = std::polar(c, phi + lambda);
  return u;
}

void draw_haar2_angles(Rng& rng, double* theta, double* lambda, double* phi) {
  const double xi = rng.uniform();
  *theta = 2.0 * std::asin(std::sqrt(xi));
  *lambda = rng.uniform(0.0, 2.0 * pi);
  *phi = rng.uniform(0.0, 2.0 * pi);
}

Mat rotation_x(double a) {
  Mat r(2, 2);
  const double c = std::cos(0.5 * a);
  const double s = std::sin(0.5 * a);
  r(0, 0) = c;
  r(0, 1) = cxd(0, -s);
  r(1, 0) = cxd(0, -s);
  r(1, 1) = c;
  return r;
}

Mat rotation_y(double a) {
  Mat r(2, 2);
  const double c = std::cos(0.5 * a);
  const double s = std::sin(0.5 * a);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

// convert a special-unitary 2x2 to Rx(a) Ry(b) Rx(c) angles via its
// quaternion components; the reconstruction may differ by a global sign
void su2_to_euler_xyx(const Mat& su, double* a, double* b, double* c) {
  const double w = su(0, 0).real();
  const double z = -su(0, 0).imag();
  const double y = su(1, 0).real();
  const double x = -su(1, 0).imag();
  const double cb = std::hypot(w, x);
  const double sb = std::hypot(y, z);
  *b = 2.0 * std::atan2(sb, cb);
  const double s = cb > 1e-14 ? std::atan2(x, w) : 0.0;
  const double d = sb > 1e-14 ? std::atan2(z, y) : 0.0;
  *a = s + d;
  *c = s - d;
}

// z-basis diagonal of sum_j delta_j sigma_z^(j); site 0 is the most
// significant bit
RVec disorder_z_diag(const double* deltas, int n) {
  const int dim = 1 << n;
  RVec diag = RVec::Zero(dim);
  for (int s = 0; s < dim; ++s) {
    double e = 0.0;
    for (int j = 0; j < n; ++j)
      e += ((s >> (n - 1 - j)) & 1) ? -deltas[j] : deltas[j];
    diag(s) = e;
  }
  return diag;
}

void apply_single_qubit(Vec& v, const Mat& u, int site, int n) {
  const int dim = 1 << n;
  const int mask = 1 << (n - 1 - site);
  for (int s = 0; s < dim; ++s) {
    if (s & mask) continue;
    const cxd v0 = v(s);
    const cxd v1 = v(s | mask);
    v(s) = u(0, 0) * v0 + u(0, 1) * v1;
    v(s | mask) = u(1, 0) * v0 + u(1, 1) * v1;
  }
}

void validate_spec(const EnsembleSpec& spec) {
  if (spec.n_qubits < 1 || spec.n_qubits > 20)
    throw std::invalid_argument("ensemble: n_qubits out of range");
  if (spec.kind == EnsembleKind::haar_single_qubit_euler && spec.n_qubits != 1)
    throw std::invalid_argument("ensemble: euler parametrization is single-qubit only");
  if (spec.kind == EnsembleKind::hamiltonian_evolution) {
    if (spec.n_qubits < 2)
      throw std::invalid_argument("ensemble: hamiltonian evolution needs >= 2 qubits");
    if (spec.segments < 1) throw std::invalid_argument("ensemble: segments < 1");
    if (spec.segment_time <= 0.0)
      throw std::invalid_argument("ensemble: segment_time <= 0");
    if (spec.delta_std < 0.0)
      throw std::invalid_argument("ensemble: delta_std < 0");
  }
}

IsingParams resolved_ising(const EnsembleSpec& spec) {
  IsingParams p = spec.ising;
  p.n_qubits = spec.n_qubits;
  return p;
}

} // namespace

std::string ensemble_kind_name(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::haar_single_qubit_euler: return "haar_single_qubit_euler";
    case EnsembleKind::haar_local_product: return "haar_local_product";
    case EnsembleKind::hamiltonian_evolution: return "hamiltonian_evolution";
  }
  throw std::logic_error("unknown ensemble kind");
}

EnsembleKind ensemble_kind_from_name(const std::string& name) {
  if (name == "haar_single_qubit_euler") return EnsembleKind::haar_single_qubit_euler;
  if (name == "haar_local_product") return EnsembleKind::haar_local_product;
  if (name == "hamiltonian_evolution") return EnsembleKind::hamiltonian_evolution;
  throw std::invalid_argument("unknown ensemble kind: " + name);
}

SampledUnitary draw_unitary(const EnsembleSpec& spec, Rng& rng) {
  validate_spec(spec);
  SampledUnitary s;
  s.spec = spec;
  switch (spec.kind) {
    case EnsembleKind::haar_single_qubit_euler: {
      double theta, lambda, phi;
      draw_haar2_angles(rng, &theta, &lambda, &phi);
      const Mat u = haar2_from_angles(theta, lambda, phi);
      // strip the determinant phase so the quaternion extraction applies
      const Mat su = u * std::polar(1.0, -0.5 * (phi + lambda));
      double a, b, c;
      su2_to_euler_xyx(su, &a, &b, &c);
      s.params = {a, b, c};
      break;
    }
    case EnsembleKind::haar_local_product: {
      s.params.reserve(3 * spec.n_qubits);
      for (int q = 0; q < spec.n_qubits; ++q) {
        double theta, lambda, phi;
        draw_haar2_angles(rng, &theta, &lambda, &phi);
        s.params.push_back(theta);
        s.params.push_back(lambda);
        s.params.push_back(phi);
      }
      break;
    }
    case EnsembleKind::hamiltonian_evolution: {
      s.params.reserve(static_cast<std::size_t>(spec.segments) * spec.n_qubits);
      for (int m = 0; m < spec.segments; ++m)
        for (int j = 0; j < spec.n_qubits; ++j)
          s.params.push_back(spec.delta_std * rng.normal());
      s.ising_x_diag = ising_x_eigenvalues(resolved_ising(spec));
      break;
    }
  }
  return s;
}

Mat SampledUnitary::matrix() const {
  switch (spec.kind) {
    case EnsembleKind::haar_single_qubit_euler:
      return rotation_x(params[0]) * rotation_y(params[1]) * rotation_x(params[2]);
    case EnsembleKind::haar_local_product: {
      Mat u = Mat::Identity(1, 1);
      for (int q = 0; q < spec.n_qubits; ++q)
        u = kron(u, haar2_from_angles(params[3 * q], params[3 * q + 1],
                                      params[3 * q + 2]));
      return u;
    }
    case EnsembleKind::hamiltonian_evolution: {
      const int n = spec.n_qubits;
      const int dim = 1 << n;
      const Mat h_static = ising_hamiltonian(resolved_ising(spec));
      Mat u = Mat::Identity(dim, dim);
      for (int m = 0; m < spec.segments; ++m) {
        Mat h = h_static;
        h.diagonal() += disorder_z_diag(&params[static_cast<std::size_t>(m) * n], n)
                            .cast<cxd>();
        u = expi_hermitian(h, spec.segment_time) * u;
      }
      return u;
    }
  }
  throw std::logic_error("unknown ensemble kind");
}

Vec SampledUnitary::apply(const Vec& v) const {
  const int n = spec.n_qubits;
  if (v.size() != (1 << n))
    throw std::invalid_argument("apply: vector dimension mismatch");
  Vec w = v;
  switch (spec.kind) {
    case EnsembleKind::haar_single_qubit_euler:
      return matrix() * v;
    case EnsembleKind::haar_local_product: {
      for (int q = 0; q < n; ++q)
        apply_single_qubit(w, haar2_from_angles(params[3 * q], params[3 * q + 1],
                                                params[3 * q + 2]),
                           q, n);
      return w;
    }
    case EnsembleKind::hamiltonian_evolution: {
      for (int m = 0; m < spec.segments; ++m) {
        const RVec z = disorder_z_diag(&params[static_cast<std::size_t>(m) * n], n);
        w = propagate_z_plus_x_diagonal(z, ising_x_diag, spec.segment_time, w);
      }
      return w;
    }
  }
  throw std::logic_error("unknown ensemble kind");
}

Provenance SampledUnitary::provenance() const {
  return Provenance{ensemble_kind_name(spec.kind), params};
}

UnitaryMatrix sample_unitary(const EnsembleSpec& spec, Rng& rng) {
  const SampledUnitary s = draw_unitary(spec, rng);
  UnitaryMatrix out{s.matrix(), s.provenance()};
  const int dim = out.u.rows();
  const double defect =
      (out.u.adjoint() * out.u - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > tol::unitarity)
    throw std::logic_error("sample_unitary: unitarity defect " + std::to_string(defect));
  return out;
}

std::vector<double> bessel_j_sequence(int kmax, double x) {
  if (kmax < 0) throw std::invalid_argument("bessel: kmax < 0");
  if (x < 0.0) throw std::invalid_argument("bessel: negative argument");
  std::vector<double> out(kmax + 1, 0.0);
  if (x < 1e-300) {
    out[0] = 1.0;
    return out;
  }
  // downward recurrence from well past the turnover k ~ x, then normalize
  // with j0 + 2 sum_{even k} jk = 1
  const int start = kmax + 25 + static_cast<int>(x);
  double jp1 = 0.0;
  double j = 1e-250;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = (2.0 * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 <= kmax) out[k - 1] = j;
    if (((k - 1) & 1) == 0) norm += (k - 1 == 0 ? 1.0 : 2.0) * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      for (double& v : out) v *= 1e-250;
    }
  }
  for (double& v : out) v /= norm;
  return out;
}

Vec propagate_z_plus_x_diagonal(const RVec& z_diag, const RVec& x_diag, double t,
                                const Vec& v) {
  const int dim = v.size();
  if (z_diag.size() != dim || x_diag.size() != dim)
    throw std::invalid_argument("propagate: diagonal size mismatch");
  if (t < 0.0) throw std::invalid_argument("propagate: negative time");
  const double lo = z_diag.minCoeff() + x_diag.minCoeff();
  const double hi = z_diag.maxCoeff() + x_diag.maxCoeff();
  const double center = 0.5 * (hi + lo);
  const double radius = 0.5 * (hi - lo);
  const cxd phase = std::polar(1.0, -center * t);
  const double z = radius * t;
  if (z < 1e-14) return phase * v;

  const auto apply_scaled = [&](const Vec& w) {
    // (H - center) / radius with H = diag(z) + F diag(x) F, F = hadamard^n
    Vec a = w;
    fwht_inplace(a);
    a.array() *= x_diag.array();
    fwht_inplace(a);
    a.array() += z_diag.array() * w.array();
    return Vec(((a - center * w) / radius).eval());
  };

  const int kmax = static_cast<int>(z) + 30 +
                   static_cast<int>(3.0 * std::cbrt(z + 1.0));
  const std::vector<double> bes = bessel_j_sequence(kmax, z);

  Vec tkm1 = v;                 // T_0(Hs) v
  Vec tk = apply_scaled(v);     // T_1(Hs) v
  Vec acc = bes[0] * tkm1 + 2.0 * cxd(0, -1) * bes[1] * tk;
  cxd ik(-1, 0); // (-i)^k for k = 2 onward
  for (int k = 2; k <= kmax; ++k) {
    Vec tkp1 = 2.0 * apply_scaled(tk) - tkm1;
    tkm1.swap(tk);
    tk.swap(tkp1);
    acc += 2.0 * ik * bes[k] * tk;
    ik *= cxd(0, -1);
    if (k > z + 5 && std::abs(bes[k]) < 1e-16) break;
  }
  return phase * acc;
}

RVec measure(const Mat& rho, const UnitaryMatrix& u) {
  if (rho.rows() != rho.cols() || rho.rows() != u.u.rows())
    throw std::invalid_argument("measure: dimension mismatch");
  const Mat m = u.u * rho;
  RVec p = m.cwiseProduct(u.u.conjugate()).rowwise().sum().real();
  for (int i = 0; i < p.size(); ++i) p(i) = std::max(0.0, p(i));
  return p;
}

namespace {

RVec multinomial_frequencies(const RVec& p, int shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("measure: shots < 1");
  const int dim = p.size();
  std::vector<double> cdf(dim);
  double run = 0.0;
  for (int i = 0; i < dim; ++i) {
    run += p(i);
    cdf[i] = run;
  }
  RVec freq = RVec::Zero(dim);
  for (int s = 0; s < shots; ++s) {
    const double r = rng.uniform() * run;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    int idx = static_cast<int>(it - cdf.begin());
    if (idx >= dim) idx = dim - 1;
    freq(idx) += 1.0;
  }
  return freq / static_cast<double>(shots);
}

} // namespace

RVec measure(const Mat& rho, const UnitaryMatrix& u, int shots, Rng& rng) {
  return multinomial_frequencies(measure(rho, u), shots, rng);
}

RVec measure_low_rank(const LowRankState& state, const SampledUnitary& u) {
  const int dim = state.vectors.rows();
  if (state.weights.size() != state.vectors.cols())
    throw std::invalid_argument("low-rank state: weight/vector count mismatch");
  RVec p = RVec::Zero(dim);
  for (int k = 0; k < state.weights.size(); ++k) {
    const Vec w = u.apply(state.vectors.col(k));
    p += std::max(0.0, state.weights(k)) * w.cwiseAbs2();
  }
  return p;
}

RVec measure_low_rank_shots(const LowRankState& state, const SampledUnitary& u,
                            int shots, Rng& rng) {
  return multinomial_frequencies(measure_low_rank(state, u), shots, rng);
}

double hamming_kernel(const RVec& probs_a, const RVec& probs_b) {
  const int dim = probs_a.size();
  if (probs_b.size() != dim || dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("hamming_kernel: bad probability vector sizes");
  // apply the tensor kernel [[1,-1/2],[-1/2,1]]^(x)n to probs_b bit by bit
  RVec t = probs_b;
  for (int step = 1; step < dim; step <<= 1) {
    for (int i = 0; i < dim; ++i) {
      if (i & step) continue;
      const double x = t(i);
      const double y = t(i | step);
      t(i) = x - 0.5 * y;
      t(i | step) = y - 0.5 * x;
    }
  }
  return static_cast<double>(dim) * probs_a.dot(t);
}

RecordBatch collect_records(const Mat& rho_a, const Mat* rho_b,
                            const EnsembleSpec& spec, int n, const Rng& rng,
                            std::optional<int> shots) {
  validate_spec(spec);
  if (n < 1) throw std::invalid_argument("collect_records: n < 1");
  const int dim = 1 << spec.n_qubits;
  if (rho_a.rows() != dim || rho_a.cols() != dim)
    throw std::invalid_argument("collect_records: state a dimension mismatch");
  if (rho_b != nullptr && (rho_b->rows() != dim || rho_b->cols() != dim))
    throw std::invalid_argument("collect_records: state b dimension mismatch");
  if (shots && *shots < 1) throw std::invalid_argument("collect_records: shots < 1");

  RecordBatch batch;
  batch.spec = spec;
  batch.records.reserve(n);
  for (int k = 0; k < n; ++k) {
    Rng rk = rng.sub(static_cast<std::uint64_t>(k));
    const UnitaryMatrix u = sample_unitary(spec, rk);
    MeasurementRecord rec;
    rec.unitary_index = k;
    rec.shots = shots;
    rec.probs_a = shots ? measure(rho_a, u, *shots, rk) : measure(rho_a, u);
    if (rho_b != nullptr)
      rec.probs_b = shots ? measure(*rho_b, u, *shots, rk) : measure(*rho_b, u);
    batch.records.push_back(std::move(rec));
  }
  return batch;
}

namespace {

void require_local_ensemble(const RecordBatch& batch, const char* op) {
  if (batch.spec.kind == EnsembleKind::hamiltonian_evolution)
    throw std::invalid_argument(std::string(op) +
                                ": records must come from a local haar ensemble");
}

void require_two_states(const RecordBatch& batch, const char* op) {
  for (const auto& r : batch.records)
    if (!r.probs_b)
      throw std::invalid_argument(std::string(op) + ": records lack a second state");
}

Estimate mean_and_error(const std::vector<double>& values, std::string method) {
  const auto n = static_cast<std::int64_t>(values.size());
  if (n == 0) throw std::invalid_argument(method + ": empty record batch");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  if (n > 1) {
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
  }
  return Estimate{mean, std::sqrt(var / static_cast<double>(n)), n,
                  std::move(method)};
}

} // namespace

Estimate estimate_overlap(const RecordBatch& batch) {
  require_local_ensemble(batch, "estimate_overlap");
  require_two_states(batch, "estimate_overlap");
  std::vector<double> x;
  x.reserve(batch.records.size());
  for (const auto& r : batch.records)
    x.push_back(hamming_kernel(r.probs_a, *r.probs_b));
  return mean_and_error(x, "hamming_kernel_overlap");
}

Estimate estimate_purity(const RecordBatch& batch, char which) {
  require_local_ensemble(batch, "estimate_purity");
  if (which != 'a' && which != 'b')
    throw std::invalid_argument("estimate_purity: which must be 'a' or 'b'");
  if (which == 'b') require_two_states(batch, "estimate_purity");
  std::vector<double> x;
  x.reserve(batch.records.size());
  for (const auto& r : batch.records) {
    const RVec& p = which == 'a' ? r.probs_a : *r.probs_b;
    x.push_back(hamming_kernel(p, p));
  }
  return mean_and_error(x, "hamming_kernel_purity");
}

Estimate estimate_superfidelity(const RecordBatch& batch, int bootstrap_resamples,
                                std::uint64_t bootstrap_seed) {
  require_local_ensemble(batch, "estimate_superfidelity");
  require_two_states(batch, "estimate_superfidelity");
  if (bootstrap_resamples < 1)
    throw std::invalid_argument("estimate_superfidelity: resamples < 1");
  const auto n = static_cast<std::int64_t>(batch.records.size());
  if (n == 0) throw std::invalid_argument("estimate_superfidelity: empty batch");

  std::vector<double> xab(n), xaa(n), xbb(n);
  for (std::int64_t k = 0; k < n; ++k) {
    const auto& r = batch.records[k];
    xab[k] = hamming_kernel(r.probs_a, *r.probs_b);
    xaa[k] = hamming_kernel(r.probs_a, r.probs_a);
    xbb[k] = hamming_kernel(*r.probs_b, *r.probs_b);
  }
  const auto g_of = [&](const std::vector<std::int64_t>& idx) {
    double mab = 0.0, maa = 0.0, mbb = 0.0;
    for (std::int64_t i : idx) {
      mab += xab[i];
      maa += xaa[i];
      mbb += xbb[i];
    }
    const double m = static_cast<double>(idx.size());
    mab /= m;
    maa /= m;
    mbb /= m;
    return mab + std::sqrt(std::max(0.0, 1.0 - maa) * std::max(0.0, 1.0 - mbb));
  };

  std::vector<std::int64_t> all(n);
  for (std::int64_t i = 0; i < n; ++i) all[i] = i;
  const double value = g_of(all);

  Rng rng(bootstrap_seed);
  std::vector<double> reps(bootstrap_resamples);
  std::vector<std::int64_t> idx(n);
  for (int b = 0; b < bootstrap_resamples; ++b) {
    for (std::int64_t i = 0; i < n; ++i)
      idx[i] = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(n));
    reps[b] = g_of(idx);
  }
  double mean = 0.0;
  for (double v : reps) mean += v;
  mean /= reps.size();
  double var = 0.0;
  for (double v : reps) var += (v - mean) * (v - mean);
  var /= (reps.size() > 1 ? reps.size() - 1 : 1);
  return Estimate{value, std::sqrt(var), n, "superfidelity_bootstrap"};
}

Estimate estimate_fidelity_single_qubit(const RecordBatch& batch) {
  require_local_ensemble(batch, "estimate_fidelity_single_qubit");
  require_two_states(batch, "estimate_fidelity_single_qubit");
  if (batch.spec.n_qubits != 1)
    throw std::invalid_argument("estimate_fidelity_single_qubit: one qubit only");
  std::vector<double> x;
  x.reserve(batch.records.size());
  for (const auto& r : batch.records)
    x.push_back(6.0 * r.probs_a(0) * (*r.probs_b)(0) - 1.0);
  return mean_and_error(x, "single_qubit_fidelity");
}

namespace {

using ojson = nlohmann::ordered_json;

ojson record_to_json(const MeasurementRecord& rec, const EnsembleSpec& spec) {
  ojson j;
  j["unitary_index"] = rec.unitary_index;
  j["ensemble"] = ensemble_kind_name(spec.kind);
  j["n_qubits"] = spec.n_qubits;
  if (spec.kind == EnsembleKind::hamiltonian_evolution) {
    j["segments"] = spec.segments;
    j["segment_time"] = spec.segment_time;
    j["delta_std"] = spec.delta_std;
    j["ising_g"] = spec.ising.g;
    j["ising_alpha"] = spec.ising.alpha_exp;
    j["ising_omega"] = spec.ising.omega;
  }
  if (rec.shots)
    j["shots"] = *rec.shots;
  else
    j["shots"] = nullptr;
  j["probs_a"] = std::vector<double>(rec.probs_a.begin(), rec.probs_a.end());
  if (rec.probs_b)
    j["probs_b"] = std::vector<double>(rec.probs_b->begin(), rec.probs_b->end());
  else
    j["probs_b"] = nullptr;
  return j;
}

RVec probs_from_json(const ojson& arr, int dim, int line) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
    throw std::runtime_error("records line " + std::to_string(line) +
                             ": probability vector has wrong length");
  RVec p(dim);
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    p(i) = arr[i].get<double>();
    if (!(p(i) >= -1e-12))
      throw std::runtime_error("records line " + std::to_string(line) +
                               ": negative probability");
    sum += p(i);
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::runtime_error("records line " + std::to_string(line) +
                             ": probabilities sum to " + std::to_string(sum));
  return p;
}

} // namespace

void write_records(const std::string& path, const RecordBatch& batch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& rec : batch.records)
    out << record_to_json(rec, batch.spec).dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

RecordBatch read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  RecordBatch batch;
  std::string line;
  int lineno = 0;
  bool have_spec = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("records line " + std::to_string(lineno) +
                               ": parse error: " + e.what());
    }
    for (const char* key : {"unitary_index", "ensemble", "n_qubits", "shots",
                            "probs_a", "probs_b"})
      if (!j.contains(key))
        throw std::runtime_error("records line " + std::to_string(lineno) +
                                 ": missing field " + key);
    EnsembleSpec spec;
    spec.kind = ensemble_kind_from_name(j["ensemble"].get<std::string>());
    spec.n_qubits = j["n_qubits"].get<int>();
    if (spec.kind == EnsembleKind::hamiltonian_evolution) {
      for (const char* key :
           {"segments", "segment_time", "delta_std", "ising_g", "ising_alpha",
            "ising_omega"})
        if (!j.contains(key))
          throw std::runtime_error("records line " + std::to_string(lineno) +
                                   ": missing field " + key);
      spec.segments = j["segments"].get<int>();
      spec.segment_time = j["segment_time"].get<double>();
      spec.delta_std = j["delta_std"].get<double>();
      spec.ising.n_qubits = spec.n_qubits;
      spec.ising.g = j["ising_g"].get<double>();
      spec.ising.alpha_exp = j["ising_alpha"].get<double>();
      spec.ising.omega = j["ising_omega"].get<double>();
    }
    if (!have_spec) {
      batch.spec = spec;
      have_spec = true;
    } else {
      const EnsembleSpec& ref = batch.spec;
      const bool same =
          ref.kind == spec.kind && ref.n_qubits == spec.n_qubits &&
          (spec.kind != EnsembleKind::hamiltonian_evolution ||
           (ref.segments == spec.segments &&
            ref.segment_time == spec.segment_time &&
            ref.delta_std == spec.delta_std && ref.ising.g == spec.ising.g &&
            ref.ising.alpha_exp == spec.ising.alpha_exp &&
            ref.ising.omega == spec.ising.omega));
      if (!same)
        throw std::runtime_error("records line " + std::to_string(lineno) +
                                 ": ensemble parameters differ from first line");
    }
    const int dim = 1 << spec.n_qubits;
    MeasurementRecord rec;
    rec.unitary_index = j["unitary_index"].get<std::int64_t>();
    if (!j["shots"].is_null()) {
      rec.shots = j["shots"].get<int>();
      if (*rec.shots < 1)
        throw std::runtime_error("records line " + std::to_string(lineno) +
                                 ": invalid shots");
    }
    rec.probs_a = probs_from_json(j["probs_a"], dim, lineno);
    if (!j["probs_b"].is_null()) rec.probs_b = probs_from_json(j["probs_b"], dim, lineno);
    batch.records.push_back(std::move(rec));
  }
  if (!have_spec) throw std::runtime_error("records file is empty: " + path);
  return batch;
}

} // namespace rmqfi
