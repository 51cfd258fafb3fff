#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sncert/core.hpp"
#include "sncert/ensembles.hpp"
#include "sncert/moments.hpp"
#include "sncert/reduction.hpp"

using namespace sncert;

namespace {

SchmidtVector uniform_lambda(int r, int d) {
  RealVector lam = RealVector::Zero(d);
  for (int i = 0; i < r; ++i) lam(i) = 1.0 / r;
  return SchmidtVector(lam);
}

SchmidtVector example_r4_lambda() {
  RealVector lam(4);
  lam << 4.0 / 5.0, 1.0 / 15.0, 1.0 / 15.0, 1.0 / 15.0;
  return SchmidtVector(lam);
}

PureState schmidt_diagonal(const SchmidtVector& lam, int d_a, int d_b) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(d_a) * d_b);
  for (int i = 0; i < lam.size() && i < d_a; ++i) {
    amps(i * d_b + i) = std::sqrt(lam.lambda(i));
  }
  return PureState(d_a, d_b, amps);
}

// Rational Schmidt vector with exactly the requested distinct values; gaps
// between coefficients stay >= 1e-4 by construction.
SchmidtVector rational_lambda(int distinct, int d, RandomStream& rng,
                              std::vector<int>* mults = nullptr) {
  while (true) {
    std::vector<int> weights;
    std::vector<int> m(static_cast<size_t>(distinct));
    int slots = d;
    bool ok = true;
    for (int j = 0; j < distinct; ++j) {
      int w;
      bool fresh;
      do {
        w = 1 + static_cast<int>(rng.next_u64() % 40);
        fresh = true;
        for (int prev : weights) fresh = fresh && prev != w;
      } while (!fresh);
      weights.push_back(w);
      const int remaining = distinct - 1 - j;
      const int max_mult = slots - remaining;
      if (max_mult < 1) { ok = false; break; }
      m[static_cast<size_t>(j)] =
          1 + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(max_mult));
      slots -= m[static_cast<size_t>(j)];
    }
    if (!ok) continue;
    long long total = 0;
    for (int j = 0; j < distinct; ++j) total += static_cast<long long>(weights[static_cast<size_t>(j)]) * m[static_cast<size_t>(j)];
    RealVector lam = RealVector::Zero(d);
    int pos = 0;
    std::vector<std::pair<double, int>> vals;
    for (int j = 0; j < distinct; ++j) {
      vals.emplace_back(static_cast<double>(weights[static_cast<size_t>(j)]) / total,
                        m[static_cast<size_t>(j)]);
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    // Distinct ratios with denominator <= 40*d: min gap 1/total >= 1e-4.
    for (const auto& [v, mult] : vals) {
      for (int t = 0; t < mult; ++t) lam(pos++) = v;
    }
    if (mults) {
      mults->clear();
      for (const auto& [v, mult] : vals) mults->push_back(mult);
    }
    return SchmidtVector(lam);
  }
}

}  // namespace

TEST_CASE("k_reduced_operator basics") {
  // Maximally mixed: R_1(I/D) = ((d_B - 1)/D) I.
  const int d_a = 2, d_b = 3, dim = 6;
  const BipartiteDensity mixed(d_a, d_b, Matrix::Identity(dim, dim) / dim);
  const ReducedOperator red = k_reduced_operator(mixed, 1);
  CHECK((red.matrix - ((d_b - 1.0) / dim) * Matrix::Identity(dim, dim))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // Bell state, k=1: spectrum {-1/2, 1/2, 1/2, 1/2}.
  const auto bell = BipartiteDensity::from_pure(maximally_entangled(2, 2, 2));
  const RealVector eigs = hermitian_spectrum(k_reduced_operator(bell, 1).matrix);
  CHECK(eigs(0) == doctest::Approx(-0.5).epsilon(1e-12));
  for (int i = 1; i < 4; ++i) CHECK(eigs(i) == doctest::Approx(0.5).epsilon(1e-12));

  // Trace identity q_1 = k d_B - 1 on a random mixed state.
  RandomStream rng(3);
  const BipartiteDensity rho = induced_mixed(3, 4, 5, rng);
  for (int k = 1; k <= 3; ++k) {
    CHECK(k_reduced_operator(rho, k).matrix.trace().real() ==
          doctest::Approx(k * 4.0 - 1.0).epsilon(1e-10));
  }
}

TEST_CASE("omega_matrix examples") {
  RealVector prod(2);
  prod << 1.0, 0.0;
  CHECK(omega_matrix(SchmidtVector(prod), 1).cwiseAbs().maxCoeff() < 1e-15);

  RealVector half(2);
  half << 0.5, 0.5;
  const RealMatrix om = omega_matrix(SchmidtVector(half), 1);
  CHECK(om(0, 0) == doctest::Approx(0.0));
  CHECK(om(0, 1) == doctest::Approx(-0.5));
  CHECK(om(1, 0) == doctest::Approx(-0.5));
  CHECK(om(1, 1) == doctest::Approx(0.0));

  // Uniform spectrum: rank-one perturbation gives eigenvalues
  // {(k-r)/r} u {k/r x (r-1)} u {0 x (d-r)}.
  const int r = 4, d = 6, k = 2;
  const RealVector eigs =
      hermitian_spectrum(omega_matrix(uniform_lambda(r, d), k).cast<Complex>());
  CHECK(eigs(0) == doctest::Approx((k - r) / static_cast<double>(r)).epsilon(1e-12));
  for (int i = 1; i <= d - r; ++i) CHECK(std::abs(eigs(i)) < 1e-12);
  for (int i = d - r + 1; i < d; ++i) {
    CHECK(eigs(i) == doctest::Approx(k / static_cast<double>(r)).epsilon(1e-12));
  }
}

TEST_CASE("theta_k: uniform value, k >= r, and the dual-path agreement") {
  for (int r = 2; r <= 5; ++r) {
    for (int k = 1; k < r; ++k) {
      CHECK(theta_k(uniform_lambda(r, r), k) ==
            doctest::Approx(1.0 - static_cast<double>(k) / r).epsilon(1e-12));
    }
    CHECK(theta_k(uniform_lambda(r, r + 1), r) == doctest::Approx(0.0));
    CHECK(theta_k(uniform_lambda(r, r + 1), r + 2) == doctest::Approx(0.0));
  }

  const auto res = theta_k_detailed(example_r4_lambda(), 3);
  CHECK(res.from_spectrum > 0.0);
  CHECK(res.from_spectrum == doctest::Approx(res.from_fixed_point).epsilon(1e-10));

  RandomStream rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 5);
    const int r = 2 + static_cast<int>(rng.next_u64() % d);
    const SchmidtVector lam = dirichlet_simplex(std::min(r, d), d, rng);
    for (int k = 1; k < std::min(r, d); ++k) {
      const auto th = theta_k_detailed(lam, k);
      CHECK(std::abs(th.from_spectrum - th.from_fixed_point) < 1e-10);
    }
  }
}

TEST_CASE("reduction_negativity: zero for low Schmidt number, 1 - k/r for |+_r>") {
  // Mixture of Schmidt-rank <= k pure states has zero k-negativity.
  RandomStream rng(17);
  const int d_a = 4, d_b = 4, k = 2;
  Matrix mix = Matrix::Zero(16, 16);
  for (int i = 0; i < 6; ++i) {
    const PureState psi = fixed_sn_pure(k, d_a, d_b, rng);
    const Matrix u_a = haar_unitary(d_a, rng);
    const Matrix u_b = haar_unitary(d_b, rng);
    const Vector rotated = kron(u_a, u_b) * psi.amplitudes;
    mix += (1.0 / 6.0) * (rotated * rotated.adjoint());
  }
  const BipartiteDensity rho(d_a, d_b, mix);
  CHECK(reduction_negativity(rho, k).negativity < 1e-10);

  for (int r = 2; r <= 4; ++r) {
    const auto plus = BipartiteDensity::from_pure(maximally_entangled(r, 4, 5));
    for (int kk = 1; kk < r; ++kk) {
      CHECK(reduction_negativity(plus, kk).negativity ==
            doctest::Approx(1.0 - static_cast<double>(kk) / r).epsilon(1e-10));
    }
    CHECK(reduction_negativity(plus, r).negativity < 1e-10);
  }

  // Pure states: negativity equals theta_k of the Schmidt vector.
  for (int trial = 0; trial < 15; ++trial) {
    const SchmidtVector lam = dirichlet_simplex(4, 4, rng);
    const auto rho_psi =
        BipartiteDensity::from_pure(schmidt_diagonal(lam, 4, 6));
    for (int kk = 1; kk <= 4; ++kk) {
      CHECK(reduction_negativity(rho_psi, kk).negativity ==
            doctest::Approx(theta_k(lam, kk)).epsilon(1e-9));
    }
  }
}

TEST_CASE("pure_reduced_spectrum equals the dense eigensolve") {
  RealVector bell(2);
  bell << 0.5, 0.5;
  const RealVector spec = pure_reduced_spectrum(SchmidtVector(bell), 1, 2);
  CHECK(spec(0) == doctest::Approx(-0.5));
  CHECK(spec(1) == doctest::Approx(0.5));
  CHECK(spec(3) == doctest::Approx(0.5));

  RealVector prod(2);
  prod << 1.0, 0.0;
  const RealVector spec2 = pure_reduced_spectrum(SchmidtVector(prod), 1, 2);
  CHECK(spec2(0) == doctest::Approx(0.0));
  CHECK(spec2(2) == doctest::Approx(0.0));
  CHECK(spec2(3) == doctest::Approx(1.0));

  RandomStream rng(29);
  for (int trial = 0; trial < 25; ++trial) {
    const int d_a = 2 + static_cast<int>(rng.next_u64() % 4);
    const int d_b = d_a + static_cast<int>(rng.next_u64() % 3);
    const int r = 1 + static_cast<int>(rng.next_u64() % d_a);
    const SchmidtVector lam = dirichlet_simplex(r, d_a, rng);
    const auto rho = BipartiteDensity::from_pure(schmidt_diagonal(lam, d_a, d_b));
    for (int k = 1; k <= d_a + 1; ++k) {
      const RealVector fast = pure_reduced_spectrum(lam, k, d_b);
      const RealVector dense = hermitian_spectrum(k_reduced_operator(rho, k).matrix);
      REQUIRE(fast.size() == dense.size());
      for (Eigen::Index i = 0; i < fast.size(); ++i) {
        CHECK(fast(i) == doctest::Approx(dense(i)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("theta_k is Schur concave and nonincreasing in k") {
  RandomStream rng(31);
  int checked = 0;
  while (checked < 100) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 4);
    const SchmidtVector lam = dirichlet_simplex(d, d, rng);
    // lambda' = average of lambda over random permutations: lambda majorizes
    // lambda' because averaging under doubly stochastic maps goes down in
    // the majorization order.
    RealVector mixed = RealVector::Zero(d);
    const int n_perm = 2 + static_cast<int>(rng.next_u64() % 4);
    for (int p = 0; p < n_perm; ++p) {
      std::vector<int> perm(static_cast<size_t>(d));
      for (int i = 0; i < d; ++i) perm[static_cast<size_t>(i)] = i;
      for (int i = d - 1; i > 0; --i) {
        std::swap(perm[static_cast<size_t>(i)],
                  perm[static_cast<size_t>(rng.next_u64() % (i + 1))]);
      }
      for (int i = 0; i < d; ++i) mixed(i) += lam.lambda(perm[static_cast<size_t>(i)]) / n_perm;
    }
    std::sort(mixed.begin(), mixed.end(), std::greater<double>());
    const SchmidtVector lam2(mixed);
    for (int k = 1; k < d; ++k) {
      CHECK(theta_k(lam, k) <= theta_k(lam2, k) + 1e-12);
      CHECK(theta_k(lam, k) >= theta_k(lam, k + 1) - 1e-12);
    }
    ++checked;
  }
}

TEST_CASE("corollary range: eigenvalues of R_k within [k/d - 1, k]") {
  RandomStream rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const BipartiteDensity rho =
        induced_mixed(d, d, 1 + static_cast<int>(rng.next_u64() % 5), rng);
    for (int k = 1; k <= d; ++k) {
      const RealVector eigs = hermitian_spectrum(k_reduced_operator(rho, k).matrix);
      CHECK(eigs(0) >= static_cast<double>(k) / d - 1.0 - 1e-9);
      CHECK(eigs(eigs.size() - 1) <= k + 1e-9);
    }
  }
}

TEST_CASE("exactly one negative eigenvalue below the Schmidt rank") {
  RandomStream rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int d_a = 3 + static_cast<int>(rng.next_u64() % 2);
    const int d_b = d_a + static_cast<int>(rng.next_u64() % 2);
    const int r = 2 + static_cast<int>(rng.next_u64() % (d_a - 1));
    const SchmidtVector lam = dirichlet_simplex(r, d_a, rng);
    const auto rho = BipartiteDensity::from_pure(schmidt_diagonal(lam, d_a, d_b));
    for (int k = 1; k <= d_a; ++k) {
      const RealVector eigs = hermitian_spectrum(k_reduced_operator(rho, k).matrix);
      int negatives = 0;
      for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        if (eigs(i) < -1e-10) ++negatives;
      }
      CHECK(negatives == (k < r ? 1 : 0));
    }
  }
}

TEST_CASE("tilde_omega: compression, union law, and interlacing") {
  // Single distinct coefficient 1/r with multiplicity r -> 1x1 [k/r - 1].
  for (int r = 2; r <= 5; ++r) {
    for (int k = 1; k <= r + 1; ++k) {
      const RealMatrix t =
          tilde_omega({DistinctCoefficient{1.0 / r, r}}, k);
      REQUIRE(t.rows() == 1);
      CHECK(t(0, 0) == doctest::Approx(static_cast<double>(k) / r - 1.0));
    }
  }

  // lambda = (4/5, 1/15 x3), k=2: check the 2x2 entries and the union law.
  const SchmidtVector ex = example_r4_lambda();
  const auto coeffs = distinct_schmidt_coefficients(ex);
  REQUIRE(coeffs.size() == 2);
  const RealMatrix t = tilde_omega(coeffs, 2);
  CHECK(t(0, 0) == doctest::Approx(2.0 * 0.8 - 0.8));
  CHECK(t(0, 1) == doctest::Approx(-std::sqrt(3.0 * 0.8 / 15.0)));
  CHECK(t(1, 1) == doctest::Approx(2.0 / 15.0 - 3.0 / 15.0));

  CHECK_THROWS_AS(tilde_omega({DistinctCoefficient{0.3, 2}}, 1),
                  std::invalid_argument);

  RandomStream rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 4);
    const int distinct = 2 + static_cast<int>(rng.next_u64() % 2);
    const SchmidtVector lam = rational_lambda(distinct, d, rng);
    const auto cs = distinct_schmidt_coefficients(lam);
    REQUIRE(static_cast<int>(cs.size()) == distinct);
    const int k = 1 + static_cast<int>(rng.next_u64() % d);

    // Union law: sigma(Omega) = {k l_j x (m_j - 1)} u sigma(tilde) u {0}.
    std::vector<double> expected;
    const RealMatrix tm = tilde_omega(cs, k);
    const RealVector teigs = hermitian_spectrum(tm.cast<Complex>());
    for (Eigen::Index i = 0; i < teigs.size(); ++i) expected.push_back(teigs(i));
    int r = 0;
    for (const auto& c : cs) {
      r += c.multiplicity;
      for (int m = 0; m < c.multiplicity - 1; ++m) expected.push_back(k * c.value);
    }
    for (int z = 0; z < d - r; ++z) expected.push_back(0.0);
    std::sort(expected.begin(), expected.end());
    const RealVector dense = hermitian_spectrum(omega_matrix(lam, k).cast<Complex>());
    REQUIRE(static_cast<int>(expected.size()) == dense.size());
    for (Eigen::Index i = 0; i < dense.size(); ++i) {
      CHECK(dense(i) == doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-9));
    }

    // Strict interlacing: -1 < w_{rt-1} < k l_{rt-1} < ... < w_0 < k l_0.
    CHECK(teigs(0) > -1.0);
    for (size_t j = 0; j < cs.size(); ++j) {
      const double w = teigs(static_cast<Eigen::Index>(j));
      const double kl = k * cs[cs.size() - 1 - j].value;
      CHECK(w < kl);
      if (j + 1 < cs.size()) CHECK(kl < teigs(static_cast<Eigen::Index>(j) + 1));
    }
  }
}

TEST_CASE("distinct nonzero eigenvalue count of R_k(psi)") {
  RandomStream rng(47);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 3);
    const int d_b = d + static_cast<int>(rng.next_u64() % 2);
    const int distinct = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<int> mults;
    const SchmidtVector lam = rational_lambda(distinct, d, rng, &mults);
    int r = 0;
    for (int m : mults) r += m;
    if (r < 2) continue;
    const auto rho = BipartiteDensity::from_pure(schmidt_diagonal(lam, d, d_b));
    for (int k = 1; k <= d; ++k) {
      const int chi = distinct_nonzero_eigs(k_reduced_operator(rho, k).matrix, 1e-8);
      CHECK(chi == (k == r ? 2 * distinct - 1 : 2 * distinct));
    }
  }
}

TEST_CASE("depolarized_negativity closed form") {
  const SchmidtVector lam = example_r4_lambda();
  for (int k = 1; k <= 3; ++k) {
    CHECK(depolarized_negativity(lam, 0.0, k, 4, 4) ==
          doctest::Approx(theta_k(lam, k)).epsilon(1e-12));
    CHECK(depolarized_negativity(lam, 1.0, k, 4, 4) == doctest::Approx(0.0));
  }

  // r = d_A = d_B = 4, psi = |+_4>, k = 3: eps* = 4/15, checked dense.
  const SchmidtVector plus4 = uniform_lambda(4, 4);
  const double n3 = theta_k(plus4, 3);
  CHECK(n3 == doctest::Approx(0.25).epsilon(1e-12));
  const double eps_star = 16.0 * n3 / (3 * 4 - 1 + 16.0 * n3);
  CHECK(eps_star == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
  for (double eps : {0.05, 0.2, 0.26, 0.27, 0.5}) {
    const BipartiteDensity rho = me_depolarized(4, 4, 4, eps);
    CHECK(depolarized_negativity(plus4, eps, 3, 4, 4) ==
          doctest::Approx(reduction_negativity(rho, 3).negativity).epsilon(1e-10));
  }
}

TEST_CASE("noise_threshold_rm") {
  CHECK(noise_threshold_rm(4, 4, 4) == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
  CHECK(noise_threshold_rm(2, 2, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // Approaches 1 with growing local dimensions at fixed r.
  double prev = 0.0;
  for (int d : {8, 32, 128, 1024}) {
    const double v = noise_threshold_rm(3, d, d);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("schmidt_number_bounds_medp") {
  for (int r : {2, 3, 4}) {
    const auto [lo, hi] = schmidt_number_bounds_medp(r, 0.0, 8, 8);
    CHECK(lo == r);
    CHECK(hi == r);
  }
  // r <= sqrt(d_A), eps < 1/2 pins the Schmidt number to r.
  for (double eps : {0.1, 0.3, 0.49}) {
    const auto [lo, hi] = schmidt_number_bounds_medp(4, eps, 16, 16);
    CHECK(lo == 4);
    CHECK(hi >= 4);
  }
  CHECK_THROWS_AS(schmidt_number_bounds_medp(2, 1.0, 4, 4), std::invalid_argument);

  // Lower bound consistent with the exact reduction criterion.
  const int r = 4, d = 16;
  const double eps = 0.3;
  const auto [lo, hi] = schmidt_number_bounds_medp(r, eps, d, d);
  CHECK(lo <= hi);
  const BipartiteDensity rho = me_depolarized(r, d, d, eps);
  CHECK(reduction_criterion(rho, lo - 1).detected);
  CHECK_FALSE(reduction_criterion(rho, hi).detected);
}

TEST_CASE("reduction_criterion") {
  // SN <= k analytic case: |+_2> at k = 2, 3.
  const auto bell = BipartiteDensity::from_pure(maximally_entangled(2, 3, 3));
  CHECK(reduction_criterion(bell, 1).detected);
  CHECK_FALSE(reduction_criterion(bell, 2).detected);
  CHECK_FALSE(reduction_criterion(bell, 3).detected);

  RandomStream rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 2 + static_cast<int>(rng.next_u64() % 3);
    const PureState psi = fixed_sn_pure(r, 4, 5, rng);
    const auto rho = BipartiteDensity::from_pure(psi);
    for (int k = 1; k < r; ++k) CHECK(reduction_criterion(rho, k).detected);
    for (int k = r; k <= 4; ++k) CHECK_FALSE(reduction_criterion(rho, k).detected);
  }

  // Isotropic states: detected exactly below ceil(dF).
  for (int d : {3, 4}) {
    for (double f : {0.35, 0.6, 0.85}) {
      const BipartiteDensity rho = isotropic_state(d, f);
      const int sn = std::max(1, static_cast<int>(std::ceil(d * f - 1e-12)));
      for (int k = 1; k < d; ++k) {
        CHECK(reduction_criterion(rho, k).detected == (k < sn));
      }
    }
  }
}
