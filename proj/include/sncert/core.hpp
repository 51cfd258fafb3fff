#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Dense complex linear algebra, bipartite states, Schmidt decomposition and
// partial traces. Composite index convention throughout the library:
// |i>_A (x) |j>_B  <->  flat index i*d_b + j.
namespace sncert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

enum class Side { A, B };

bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

/// Full eigenvalue multiset of a Hermitian matrix, sorted nondecreasing.
/// Throws if the input is not Hermitian within tolerance.
RealVector hermitian_spectrum(const Matrix& m, double herm_tol = kHermitianTol);

/// Positive semidefiniteness up to a relative tolerance:
/// sigma_min(M) >= -tol * max(1, ||M||), with ||M|| the spectral norm
/// obtained from the same eigensolve.
bool is_psd(const Matrix& m, double tol = kPsdTol);

Matrix kron(const Matrix& a, const Matrix& b);

/// Partial trace of an operator on H_A (x) H_B. side selects which factor
/// the *result* lives on: Side::A returns Tr_B, Side::B returns Tr_A.
Matrix partial_trace(const Matrix& m, int d_a, int d_b, Side side);

/// Pure bipartite state; amplitudes in the composite index convention.
struct PureState {
  int d_a = 0;
  int d_b = 0;
  Vector amplitudes;

  PureState(int d_a_, int d_b_, Vector amps);
  int dim() const { return d_a * d_b; }
  Matrix density() const { return amplitudes * amplitudes.adjoint(); }
};

/// Density operator on H_A (x) H_B: Hermitian, unit trace. The PSD part of
/// the contract is checked with is_psd() where tests require it; the
/// constructor verifies hermiticity and trace.
struct BipartiteDensity {
  int d_a = 0;
  int d_b = 0;
  Matrix rho;

  BipartiteDensity(int d_a_, int d_b_, Matrix rho_);
  static BipartiteDensity from_pure(const PureState& psi);
  int dim() const { return d_a * d_b; }
  Matrix reduced_a() const { return partial_trace(rho, d_a, d_b, Side::A); }
  Matrix reduced_b() const { return partial_trace(rho, d_a, d_b, Side::B); }
};

/// Schmidt spectrum: probability vector on the simplex, sorted nonincreasing.
struct SchmidtVector {
  RealVector lambda;

  explicit SchmidtVector(RealVector lam);
  int size() const { return static_cast<int>(lambda.size()); }
  /// Number of coefficients above the rank tolerance.
  int schmidt_rank(double tol = kRankTol) const;
};

struct SchmidtDecomposition {
  SchmidtVector coefficients;
  Matrix basis_a;  // columns |i>_A
  Matrix basis_b;  // columns |i>_B (first min(d_a,d_b) columns meaningful)
  int schmidt_number = 0;
};

/// Schmidt decomposition via the eigendecomposition of rho_A. The local
/// bases satisfy |psi> = sum_i sqrt(lambda_i) |i>_A (x) |i>_B.
SchmidtDecomposition schmidt_decompose(const PureState& psi,
                                       double rank_tol = kRankTol);

/// |+_r>: amplitude 1/sqrt(r) on the first r diagonal kets.
PureState maximally_entangled(int r, int d_a, int d_b);

/// Shared verdict of every certification criterion in the library.
/// `witness` is the criterion-specific slack: the minimum eigenvalue of the
/// tested operator/Hankel matrix, or for correlation-matrix criteria the
/// (bound - value) gap. detected corresponds to witness < -threshold, where
/// threshold is the absolute decision margin actually used; a |witness|
/// within the threshold marks a boundary case the criterion cannot resolve.
struct CriterionVerdict {
  bool detected = false;
  int k = 0;
  int order_used = 0;
  double witness = 0.0;
  double threshold = 0.0;
};

}  // namespace sncert
