#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "rmqfi/constants.hpp"
#include "rmqfi/dynamics.hpp"
#include "rmqfi/linalg.hpp"
#include "rmqfi/randmeas.hpp"
#include "rmqfi/rng.hpp"
#include "rmqfi/states.hpp"

using namespace rmqfi;
using cxd = std::complex<double>;

namespace {

EnsembleSpec local_spec(int n) {
  EnsembleSpec s;
  s.kind = n == 1 ? EnsembleKind::haar_single_qubit_euler
                  : EnsembleKind::haar_local_product;
  s.n_qubits = n;
  return s;
}

EnsembleSpec product_spec(int n) {
  EnsembleSpec s;
  s.kind = EnsembleKind::haar_local_product;
  s.n_qubits = n;
  return s;
}

EnsembleSpec hamiltonian_spec(int n, double delta_std = 1.0, double g = 1.0,
                              double omega = 1.0) {
  EnsembleSpec s;
  s.kind = EnsembleKind::hamiltonian_evolution;
  s.n_qubits = n;
  s.segments = 20;
  s.segment_time = 1.0;
  s.delta_std = delta_std;
  s.ising = IsingParams{n, g, 1.5, omega};
  return s;
}

double hamming_kernel_dense(const RVec& pa, const RVec& pb) {
  const int dim = pa.size();
  double x = 0.0;
  for (int s = 0; s < dim; ++s)
    for (int sp = 0; sp < dim; ++sp)
      x += pa(s) * pb(sp) *
           std::pow(-2.0, -std::popcount(static_cast<unsigned>(s ^ sp)));
  return dim * x;
}

Mat dense_z_plus_x_hamiltonian(const RVec& zd, const RVec& xd) {
  const int dim = zd.size();
  Mat had1(2, 2);
  had1 << 1, 1, 1, -1;
  had1 /= std::sqrt(2.0);
  Mat f = Mat::Identity(1, 1);
  while (f.rows() < dim) f = kron(f, had1);
  Mat h = Mat::Zero(dim, dim);
  h.diagonal() = zd.cast<cxd>();
  h += f * xd.cast<cxd>().asDiagonal() * f;
  return h;
}

} // namespace

TEST_CASE("single-qubit euler parametrization reproduces haar moments") {
  Rng rng(2024);
  const EnsembleSpec spec = local_spec(1);
  const int n = 100000;
  double m2 = 0.0, m4 = 0.0;
  std::vector<double> q;
  q.reserve(n);
  for (int k = 0; k < n; ++k) {
    Rng rk = rng.sub(k);
    const UnitaryMatrix u = sample_unitary(spec, rk);
    const double a2 = std::norm(u.u(0, 0));
    m2 += a2;
    m4 += a2 * a2;
    q.push_back(a2);
  }
  m2 /= n;
  m4 /= n;
  // |u00|^2 is uniform on [0,1] for haar; 4 sigma monte-carlo bands
  CHECK(std::abs(m2 - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(m4 - 1.0 / 3.0) < 4.0 * std::sqrt((0.2 - 1.0 / 9.0) / n));
  // kolmogorov distance of |u00|^2 from uniform
  std::sort(q.begin(), q.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i)
    ks = std::max(ks, std::abs(q[i] - (i + 0.5) / n));
  CHECK(ks < 0.01);
}

TEST_CASE("local product factors reproduce haar moments") {
  Rng rng(77);
  const EnsembleSpec spec = product_spec(3);
  const int n = 100000;
  RVec m2 = RVec::Zero(3), m4 = RVec::Zero(3);
  double j2 = 0.0; // joint moment E|U00|^2 = (1/2)^3
  for (int k = 0; k < n; ++k) {
    Rng rk = rng.sub(k);
    const SampledUnitary s = draw_unitary(spec, rk);
    double joint = 1.0;
    for (int q = 0; q < 3; ++q) {
      const double c2 = std::pow(std::cos(0.5 * s.params[3 * q]), 2);
      m2(q) += c2;
      m4(q) += c2 * c2;
      joint *= c2;
    }
    j2 += joint;
  }
  m2 /= n;
  m4 /= n;
  j2 /= n;
  for (int q = 0; q < 3; ++q) {
    CHECK(std::abs(m2(q) - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(m4(q) - 1.0 / 3.0) < 4.0 * std::sqrt((0.2 - 1.0 / 9.0) / n));
  }
  const double var_joint = std::pow(1.0 / 3.0, 3) - std::pow(0.125, 2);
  CHECK(std::abs(j2 - 0.125) < 4.0 * std::sqrt(var_joint / n));
}

TEST_CASE("sampled unitaries are unitary and carry provenance") {
  Rng rng(5);
  for (const EnsembleSpec& spec :
       {local_spec(1), product_spec(2), product_spec(4), hamiltonian_spec(2),
        hamiltonian_spec(3)}) {
    for (int k = 0; k < 3; ++k) {
      Rng rk = rng.sub(k);
      const UnitaryMatrix u = sample_unitary(spec, rk);
      const int dim = 1 << spec.n_qubits;
      REQUIRE(u.u.rows() == dim);
      CHECK((u.u.adjoint() * u.u - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() <
            tol::unitarity);
      CHECK(u.provenance.kind == ensemble_kind_name(spec.kind));
      CHECK(!u.provenance.params.empty());
    }
  }
  CHECK_THROWS(([&] {
    EnsembleSpec bad = local_spec(1);
    bad.n_qubits = 2; // euler parametrization is single-qubit only
    Rng r(1);
    sample_unitary(bad, r);
  })());
  CHECK_THROWS(([&] {
    EnsembleSpec bad = hamiltonian_spec(2);
    bad.segment_time = 0.0;
    Rng r(1);
    sample_unitary(bad, r);
  })());
}

TEST_CASE("hamiltonian ensemble with all couplings zero is the identity") {
  EnsembleSpec spec = hamiltonian_spec(2, 0.0, 0.0, 0.0);
  Rng rng(9);
  const SampledUnitary s = draw_unitary(spec, rng);
  CHECK((s.matrix() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  Vec v(4);
  v << 0.5, cxd(0, 0.5), -0.5, cxd(0.25, 0.25);
  CHECK((s.apply(v) - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bessel sequence matches the standard library") {
  for (double x : {0.3, 2.0, 7.5, 21.0}) {
    const auto seq = bessel_j_sequence(40, x);
    for (int k = 0; k <= 40; ++k)
      CHECK(std::abs(seq[k] - std::cyl_bessel_j(static_cast<unsigned>(k), x)) < 1e-12);
  }
  const auto zero = bessel_j_sequence(5, 0.0);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == 0.0);
}

TEST_CASE("chebyshev propagation matches the dense matrix exponential") {
  Rng rng(31);
  for (int n : {1, 2, 3}) {
    const int dim = 1 << n;
    for (int rep = 0; rep < 3; ++rep) {
      RVec zd(dim), xd(dim);
      for (int i = 0; i < dim; ++i) {
        zd(i) = rng.uniform(-3.0, 3.0);
        xd(i) = rng.uniform(-3.0, 3.0);
      }
      Vec v(dim);
      for (int i = 0; i < dim; ++i) v(i) = cxd(rng.normal(), rng.normal());
      v.normalize();
      const double t = rng.uniform(0.1, 2.0);
      const Vec fast = propagate_z_plus_x_diagonal(zd, xd, t, v);
      const Vec ref = expi_hermitian(dense_z_plus_x_hamiltonian(zd, xd), t) * v;
      CHECK((fast - ref).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("hamiltonian ensemble fast apply matches its dense matrix") {
  Rng rng(88);
  for (int n : {2, 3, 4}) {
    const EnsembleSpec spec = hamiltonian_spec(n);
    for (int k = 0; k < 2; ++k) {
      Rng rk = rng.sub(10 * n + k);
      const SampledUnitary s = draw_unitary(spec, rk);
      const Mat u = s.matrix();
      const int dim = 1 << n;
      Vec v(dim);
      for (int i = 0; i < dim; ++i) v(i) = cxd(rng.normal(), rng.normal());
      v.normalize();
      CHECK((s.apply(v) - u * v).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("measure returns exact born probabilities") {
  Rng rng(3);
  const Mat mixed = Mat::Identity(4, 4) / 4.0;
  Rng r1 = rng.sub(1);
  const UnitaryMatrix u = sample_unitary(product_spec(2), r1);
  const RVec p = measure(mixed, u);
  for (int i = 0; i < 4; ++i) CHECK(p(i) == doctest::Approx(0.25).epsilon(1e-12));

  // computational state measured without rotation
  UnitaryMatrix id{Mat::Identity(2, 2), {"haar_single_qubit_euler", {0, 0, 0}}};
  const RVec p0 = measure(projector(basis_state(2, 0)), id);
  CHECK(p0(0) == doctest::Approx(1.0));
  CHECK(p0(1) < 1e-12);

  // ramsey populations are cos^2, sin^2 of half the polar angle
  const Mat rho = ramsey_state(RamseyParams{0.7, 2.0, 0.4, 1.3});
  const RVec pr = measure(rho, id);
  CHECK(pr(0) == doctest::Approx(std::pow(std::cos(0.35), 2)).epsilon(1e-12));
  CHECK(pr(1) == doctest::Approx(std::pow(std::sin(0.35), 2)).epsilon(1e-12));

  CHECK_THROWS(measure(mixed, id));
}

TEST_CASE("multinomial sampling converges to the exact distribution") {
  Rng rng(12);
  const Mat rho = random_density(rng, 8, 0);
  Rng ru = rng.sub(1);
  const UnitaryMatrix u = sample_unitary(product_spec(3), ru);
  const RVec exact = measure(rho, u);
  Rng rs = rng.sub(2);
  const RVec freq = measure(rho, u, 1000000, rs);
  CHECK(std::abs(freq.sum() - 1.0) < 1e-12);
  CHECK(0.5 * (exact - freq).lpNorm<1>() < 1e-2);
  CHECK_THROWS(measure(rho, u, 0, rs));
}

TEST_CASE("low-rank measurement agrees with the dense path") {
  Rng rng(21);
  const int n = 3;
  const Vec ghz = ghz_prepare(n);
  const Mat pure = projector(ghz);
  const Mat mixed = dephase(pure, DephasingParams{0.25, 1.0});
  // rank-2 spectral form of the dephased ghz state
  const SpectralDecomposition sd = eig_hermitian(mixed);
  LowRankState lr;
  lr.weights = sd.eigenvalues.head(2);
  lr.vectors = sd.eigenvectors.leftCols(2);
  for (int k = 0; k < 3; ++k) {
    Rng rk = rng.sub(k);
    const SampledUnitary s = draw_unitary(hamiltonian_spec(n), rk);
    const RVec dense = measure(mixed, UnitaryMatrix{s.matrix(), s.provenance()});
    const RVec fast = measure_low_rank(lr, s);
    CHECK((dense - fast).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hamming kernel butterfly matches the dense double sum") {
  Rng rng(14);
  for (int n : {1, 2, 3, 4}) {
    const int dim = 1 << n;
    RVec pa(dim), pb(dim);
    for (int i = 0; i < dim; ++i) {
      pa(i) = rng.uniform();
      pb(i) = rng.uniform();
    }
    pa /= pa.sum();
    pb /= pb.sum();
    CHECK(hamming_kernel(pa, pb) ==
          doctest::Approx(hamming_kernel_dense(pa, pb)).epsilon(1e-12));
  }
  RVec bad(3);
  bad << 0.3, 0.3, 0.4;
  CHECK_THROWS(hamming_kernel(bad, bad));
}

TEST_CASE("kernel estimators are unbiased on random states") {
  Rng rng(606);
  for (int n : {1, 2, 3}) {
    const int dim = 1 << n;
    Rng rstate = rng.sub(n);
    const Mat rho_a = random_density(rstate, dim, 0);
    const Mat rho_b = random_density(rstate, dim, 0);
    const RecordBatch batch =
        collect_records(rho_a, &rho_b, local_spec(n), 2000, rng.sub(100 + n));
    const Estimate ov = estimate_overlap(batch);
    CHECK(ov.n_unitaries == 2000);
    CHECK(std::abs(ov.value - overlap(rho_a, rho_b)) <=
          4.0 * std::max(ov.std_error, 1e-12));
    const Estimate pa = estimate_purity(batch, 'a');
    CHECK(std::abs(pa.value - purity(rho_a)) <= 4.0 * std::max(pa.std_error, 1e-12));
    const Estimate pb = estimate_purity(batch, 'b');
    CHECK(std::abs(pb.value - purity(rho_b)) <= 4.0 * std::max(pb.std_error, 1e-12));
  }
}

TEST_CASE("hamiltonian ensemble approximates a 2-design for the kernel mean") {
  Rng rng(404);
  const int n = 2;
  Rng rstate = rng.sub(0);
  const Mat rho_a = random_density(rstate, 4, 1);
  const Mat rho_b = random_density(rstate, 4, 1);
  const RecordBatch batch =
      collect_records(rho_a, &rho_b, hamiltonian_spec(n), 1000, rng.sub(1));
  std::vector<double> x;
  for (const auto& r : batch.records)
    x.push_back(hamming_kernel(r.probs_a, *r.probs_b));
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (x.size() - 1);
  const double se = std::sqrt(var / x.size());
  CHECK(std::abs(mean - overlap(rho_a, rho_b)) <= 5.0 * se);
  // the public overlap estimator refuses non-local ensembles
  CHECK_THROWS(estimate_overlap(batch));
}

TEST_CASE("estimates are invariant under a fixed local rotation of the ensemble") {
  Rng rng(515);
  const int n = 2;
  Rng rstate = rng.sub(0);
  const Mat rho_a = random_density(rstate, 4, 0);
  const Mat rho_b = random_density(rstate, 4, 0);

  Mat v2(2, 2);
  const double c = std::cos(0.4), s = std::sin(0.4);
  v2 << c, -s, s, c;
  v2.col(1) *= std::polar(1.0, 0.8);
  const Mat v = kron(v2, v2);

  const EnsembleSpec spec = product_spec(n);
  RecordBatch plain, rotated;
  plain.spec = spec;
  rotated.spec = spec;
  const int nrec = 2000;
  for (int k = 0; k < nrec; ++k) {
    Rng rk = rng.sub(100 + k);
    const UnitaryMatrix u = sample_unitary(spec, rk);
    const UnitaryMatrix uv{Mat(v * u.u), u.provenance};
    MeasurementRecord a{k, measure(rho_a, u), measure(rho_b, u), std::nullopt};
    MeasurementRecord b{k, measure(rho_a, uv), measure(rho_b, uv), std::nullopt};
    plain.records.push_back(std::move(a));
    rotated.records.push_back(std::move(b));
  }
  const Estimate e1 = estimate_overlap(plain);
  const Estimate e2 = estimate_overlap(rotated);
  const double truth = overlap(rho_a, rho_b);
  CHECK(std::abs(e1.value - truth) <= 4.0 * e1.std_error);
  CHECK(std::abs(e2.value - truth) <= 4.0 * e2.std_error);
  CHECK(std::abs(e1.value - e2.value) <=
        4.0 * std::hypot(e1.std_error, e2.std_error));
}

TEST_CASE("estimator spread shrinks as the state gets more mixed") {
  Rng rng(717);
  const int n = 3;
  const Mat pure = projector(ghz_prepare(n));
  const Mat mixed = dephase(pure, DephasingParams{1.0, std::log(10.0) / 2.0});
  const RecordBatch bp = collect_records(pure, nullptr, product_spec(n), 300, rng.sub(1));
  const RecordBatch bm = collect_records(mixed, nullptr, product_spec(n), 300, rng.sub(2));
  const Estimate ep = estimate_purity(bp, 'a');
  const Estimate em = estimate_purity(bm, 'a');
  CHECK(em.std_error < ep.std_error);
}

TEST_CASE("single-qubit fidelity estimator hits its closed-form examples") {
  Rng rng(808);
  const Mat mixed = Mat::Identity(2, 2) / 2.0;
  const RecordBatch bm =
      collect_records(mixed, &mixed, local_spec(1), 50, rng.sub(1));
  const Estimate em = estimate_fidelity_single_qubit(bm);
  CHECK(em.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(em.std_error < 1e-12);

  Rng rs = rng.sub(2);
  const Mat psi = random_density(rs, 2, 1);
  const RecordBatch bp = collect_records(psi, &psi, local_spec(1), 400, rng.sub(3));
  const Estimate ep = estimate_fidelity_single_qubit(bp);
  CHECK(std::abs(ep.value - 1.0) <= 3.0 * ep.std_error);

  const Mat up = projector(basis_state(2, 0));
  const Mat dn = projector(basis_state(2, 1));
  const RecordBatch bo = collect_records(up, &dn, local_spec(1), 400, rng.sub(4));
  const Estimate eo = estimate_fidelity_single_qubit(bo);
  CHECK(std::abs(eo.value - 0.0) <= 3.0 * eo.std_error);

  const RecordBatch b2 =
      collect_records(Mat::Identity(4, 4) / 4.0, nullptr, product_spec(2), 10, rng.sub(5));
  CHECK_THROWS(estimate_fidelity_single_qubit(b2));
}

TEST_CASE("overlap and purity estimators hit their closed-form examples") {
  Rng rng(909);
  // uniform outcome distribution makes every kernel value exactly 1/2
  const Mat mixed1 = Mat::Identity(2, 2) / 2.0;
  const RecordBatch bm =
      collect_records(mixed1, &mixed1, local_spec(1), 20, rng.sub(1));
  const Estimate em = estimate_overlap(bm);
  CHECK(em.value == doctest::Approx(0.5).epsilon(1e-12));

  const Mat zz = projector(basis_state(4, 0));
  const RecordBatch bz = collect_records(zz, &zz, product_spec(2), 1000, rng.sub(2));
  const Estimate ez = estimate_overlap(bz);
  CHECK(std::abs(ez.value - 1.0) <= 3.0 * ez.std_error);

  const Mat other = projector(basis_state(4, 3));
  const RecordBatch bo = collect_records(zz, &other, product_spec(2), 1000, rng.sub(3));
  const Estimate eo = estimate_overlap(bo);
  CHECK(std::abs(eo.value) <= 3.0 * std::max(eo.std_error, 1e-12));

  const Mat mixed2 = Mat::Identity(4, 4) / 4.0;
  const RecordBatch bp = collect_records(mixed2, nullptr, product_spec(2), 20, rng.sub(4));
  const Estimate ep = estimate_purity(bp, 'a');
  CHECK(ep.value == doctest::Approx(0.25).epsilon(1e-12));

  Rng rs = rng.sub(5);
  const Mat pure3 = random_density(rs, 8, 1);
  const RecordBatch b3 = collect_records(pure3, nullptr, product_spec(3), 1000, rng.sub(6));
  const Estimate e3 = estimate_purity(b3, 'a');
  CHECK(std::abs(e3.value - 1.0) <= 3.0 * e3.std_error);

  // dephased plus state: purity (1 + e^-2) / 2
  Mat plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  const Mat deph = dephase(plus, DephasingParams{0.5, 1.0});
  const RecordBatch bd = collect_records(deph, nullptr, local_spec(1), 1500, rng.sub(7));
  const Estimate ed = estimate_purity(bd, 'a');
  CHECK(std::abs(ed.value - 0.5 * (1.0 + std::exp(-2.0))) <= 3.0 * ed.std_error);
}

TEST_CASE("superfidelity estimator hits its closed-form examples") {
  Rng rng(111);
  const Mat mixed = Mat::Identity(2, 2) / 2.0;
  const RecordBatch bm = collect_records(mixed, &mixed, local_spec(1), 30, rng.sub(1));
  const Estimate em = estimate_superfidelity(bm);
  CHECK(em.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(em.std_error < 1e-12);

  // pure single-qubit pair at relative phase 0.3: g = cos^2(0.15)
  const Mat psi0 = ramsey_state(RamseyParams{0.5 * pi, 1.0, 0.0, 1.0});
  const Mat psi1 = encode_phase(psi0, 0.3, 1);
  const RecordBatch bp = collect_records(psi0, &psi1, local_spec(1), 2000, rng.sub(2));
  const Estimate ep = estimate_superfidelity(bp);
  CHECK(std::abs(ep.value - std::pow(std::cos(0.15), 2)) <= 3.0 * ep.std_error);

  Rng rs = rng.sub(3);
  const Mat pure = random_density(rs, 4, 1);
  const RecordBatch bi = collect_records(pure, &pure, product_spec(2), 2000, rng.sub(4));
  const Estimate ei = estimate_superfidelity(bi);
  CHECK(std::abs(ei.value - 1.0) <= 3.0 * std::max(ei.std_error, 1e-3));
}

TEST_CASE("record files round-trip exactly and reject malformed input") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rmqfi_records_test";
  fs::create_directories(dir);
  const std::string path = (dir / "batch.jsonl").string();

  Rng rng(303);
  Rng rs = rng.sub(0);
  const Mat rho_a = random_density(rs, 4, 0);
  const Mat rho_b = random_density(rs, 4, 0);
  const RecordBatch batch =
      collect_records(rho_a, &rho_b, hamiltonian_spec(2), 5, rng.sub(1), 4096);
  write_records(path, batch);
  const RecordBatch back = read_records(path);
  REQUIRE(back.records.size() == batch.records.size());
  CHECK(back.spec.kind == batch.spec.kind);
  CHECK(back.spec.n_qubits == batch.spec.n_qubits);
  CHECK(back.spec.segments == batch.spec.segments);
  CHECK(back.spec.delta_std == batch.spec.delta_std);
  for (std::size_t i = 0; i < batch.records.size(); ++i) {
    CHECK(back.records[i].unitary_index == batch.records[i].unitary_index);
    CHECK(back.records[i].shots == batch.records[i].shots);
    CHECK((back.records[i].probs_a - batch.records[i].probs_a).cwiseAbs().maxCoeff() ==
          0.0);
    REQUIRE(back.records[i].probs_b.has_value());
    CHECK((*back.records[i].probs_b - *batch.records[i].probs_b)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  const auto write_lines = [&](const std::string& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
  };
  const std::string bad1 = (dir / "bad1.jsonl").string();
  write_lines(bad1, "this is not json\n");
  CHECK_THROWS(read_records(bad1));

  const std::string bad2 = (dir / "bad2.jsonl").string();
  write_lines(bad2,
              R"({"unitary_index":0,"ensemble":"haar_local_product","n_qubits":1,"shots":null,"probs_a":[0.5,0.6],"probs_b":null})"
              "\n");
  CHECK_THROWS(read_records(bad2)); // probabilities do not sum to 1

  const std::string bad3 = (dir / "bad3.jsonl").string();
  write_lines(bad3,
              R"({"unitary_index":0,"ensemble":"haar_local_product","n_qubits":1,"shots":null,"probs_a":[0.5,0.5],"probs_b":null})"
              "\n"
              R"({"unitary_index":1,"ensemble":"haar_local_product","n_qubits":2,"shots":null,"probs_a":[0.25,0.25,0.25,0.25],"probs_b":null})"
              "\n");
  CHECK_THROWS(read_records(bad3)); // inconsistent qubit count

  const std::string bad4 = (dir / "bad4.jsonl").string();
  write_lines(bad4, R"({"unitary_index":0,"ensemble":"haar_local_product"})" "\n");
  CHECK_THROWS(read_records(bad4)); // missing fields

  const std::string bad5 = (dir / "bad5.jsonl").string();
  write_lines(bad5, "");
  CHECK_THROWS(read_records(bad5));
}

TEST_CASE("identical seeds give bit-identical batches and estimates") {
  Rng rng(424);
  Rng rs = rng.sub(0);
  const Mat rho_a = random_density(rs, 4, 0);
  const Mat rho_b = random_density(rs, 4, 0);
  const RecordBatch b1 =
      collect_records(rho_a, &rho_b, product_spec(2), 100, Rng(999), 2048);
  const RecordBatch b2 =
      collect_records(rho_a, &rho_b, product_spec(2), 100, Rng(999), 2048);
  REQUIRE(b1.records.size() == b2.records.size());
  for (std::size_t i = 0; i < b1.records.size(); ++i) {
    CHECK((b1.records[i].probs_a - b2.records[i].probs_a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((*b1.records[i].probs_b - *b2.records[i].probs_b).cwiseAbs().maxCoeff() ==
          0.0);
  }
  const Estimate e1 = estimate_superfidelity(b1);
  const Estimate e2 = estimate_superfidelity(b2);
  CHECK(e1.value == e2.value);
  CHECK(e1.std_error == e2.std_error);

  // different seeds give different draws
  const RecordBatch b3 =
      collect_records(rho_a, &rho_b, product_spec(2), 100, Rng(1000), 2048);
  CHECK((b1.records[0].probs_a - b3.records[0].probs_a).cwiseAbs().maxCoeff() > 0.0);
}
