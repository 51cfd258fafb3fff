#pragma once

#include <cstdint>
#include <vector>

#include "sncert/core.hpp"
#include "sncert/ensembles.hpp"

// Simulated randomized-measurement estimation of the moments p2, p3, a2,
// a3, t2 with global classical shadows, plus the permutation-test
// alternative. Haar unitaries stand in for the Clifford 3-design; every
// design-moment identity used here holds exactly for Haar.
namespace sncert {

/// One snapshot: the applied rotation U and the measured basis index b.
/// The reconstruction is (D+1) U^dag |b><b| U - I, so E[rho-hat] = rho.
struct ShadowSample {
  Matrix unitary;
  int outcome = 0;
};

struct ShadowEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int m = 0;  // global samples used
  int l = 0;  // reduced-state samples used (t2 only)
};

struct MomentTuple {
  double p2 = 0.0;
  double p3 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double t2 = 0.0;
};

/// Sample U ~ Haar, measure U rho U^dag in the computational basis.
ShadowSample sample_shadow(const Matrix& rho, RandomStream& rng);
ShadowSample sample_shadow(const BipartiteDensity& rho, RandomStream& rng);

/// (D+1) U^dag |b><b| U - I.
Matrix expand_shadow(const ShadowSample& s);

enum class Aggregation { Mean, MedianOfMeans };

inline constexpr uint64_t kDefaultTripleBudget = 200000;

/// Pair U-statistic for Tr(rho^2) over unordered shadow pairs.
ShadowEstimate estimate_p2(const std::vector<ShadowSample>& shadows,
                           Aggregation agg = Aggregation::Mean,
                           int groups = 10);

/// Symmetrized triple U-statistic for Tr(rho^3). When the ordered-triple
/// count exceeds triple_budget, an unbiased uniform subsample of ordered
/// triples is averaged instead; rng drives the subsampling.
ShadowEstimate estimate_p3(const std::vector<ShadowSample>& shadows,
                           RandomStream& rng,
                           uint64_t triple_budget = kDefaultTripleBudget,
                           Aggregation agg = Aggregation::Mean,
                           int groups = 10);

/// Estimator for t2 = Tr_A[rho_A Tr_B(rho^2)] from M global shadows and L
/// shadows of rho_A (taken at local dimension d_a).
ShadowEstimate estimate_t2(const std::vector<ShadowSample>& shadows_ab,
                           const std::vector<ShadowSample>& shadows_a,
                           int d_a, int d_b);

/// Same estimators on explicit matrices. These accept any Hermitian inputs
/// with the right dimension; feeding exact copies of rho reproduces the
/// exact functionals, which pins down the estimator identities in tests.
ShadowEstimate estimate_p2_from_matrices(const std::vector<Matrix>& x);
ShadowEstimate estimate_p3_from_matrices(const std::vector<Matrix>& x);
ShadowEstimate estimate_t2_from_matrices(const std::vector<Matrix>& x_ab,
                                         const std::vector<Matrix>& x_a,
                                         int d_a, int d_b);

/// Var[p2-hat] <= 4(M-2)/(M(M-1)) (p2 + 2 p3)
///             + 2/(M(M-1)) [(D+1)^2 + 2 D p2].
double p2_variance_bound(double p2, double p3, int dim, int m);

struct MomentTupleEstimate {
  MomentTuple values;
  MomentTuple std_errors;
  int m = 0;
  int l = 0;
};

/// Full pipeline: M global shadows for p2, p3 and the pair part of t2;
/// L shadows of the exact reduced state rho_A (simulating single-party
/// randomized measurements) for a2, a3 and the single-party part of t2.
/// Requires d_a = d_b.
MomentTupleEstimate estimate_moment_tuple(
    const BipartiteDensity& rho, int m, int l, RandomStream& rng,
    uint64_t triple_budget = kDefaultTripleBudget);

/// Exact values of (p2, p3, a2, a3, t2) for a given state.
MomentTuple exact_moment_tuple(const BipartiteDensity& rho);

/// Simulated permutation test: Bernoulli outcomes with
/// P_+ = 1/2 + 1/2 Tr(rho_1 ... rho_N); returns the empirical P_+ - P_-
/// with its binomial standard error.
ShadowEstimate permutation_test_estimate(const std::vector<Matrix>& states,
                                         int shots, RandomStream& rng);

}  // namespace sncert
