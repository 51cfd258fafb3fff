#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "sncert/core.hpp"

// Seeded random and parametric state generators. All randomness flows
// through RandomStream: one (seed, stream-index) pair per Monte-Carlo sample
// so that serial and parallel runs produce identical ensembles.
namespace sncert {

class RandomStream {
 public:
  explicit RandomStream(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal (Box-Muller, no cached spare; deterministic sequence).
  double normal();
  /// Unit-rate exponential.
  double exponential();
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
};

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phase correction.
Matrix haar_unitary(int dim, RandomStream& rng);

/// Haar-distributed unit vector (normalized complex Gaussian).
Vector haar_state(int dim, RandomStream& rng);

/// Flat Dirichlet sample on r coordinates via normalized unit-rate
/// exponentials, sorted nonincreasing and zero-padded to length d.
SchmidtVector dirichlet_simplex(int r, int d, RandomStream& rng);

/// Schmidt-diagonal pure state with Dirichlet coefficients; SN = r a.s.
PureState fixed_sn_pure(int r, int d_a, int d_b, RandomStream& rng);

/// (1 - eps) U|0><0|U^dag + eps I/d^2 with U Haar on dimension d^2.
BipartiteDensity haar_depolarized(int d, double eps, RandomStream& rng);

/// Partial trace over a K-dimensional ancilla of a Haar pure state on
/// dimension d_a*d_b*K; rank <= K.
BipartiteDensity induced_mixed(int d_a, int d_b, int k_ancilla,
                               RandomStream& rng);

/// rho_F = (1-F)/(d^2-1) I + (d^2 F - 1)/(d^2-1) |+_d><+_d|.
BipartiteDensity isotropic_state(int d, double fidelity);

/// (1 - eps) |+_r><+_r| + eps I/(d_a d_b).
BipartiteDensity me_depolarized(int r, int d_a, int d_b, double eps);

enum class EnsembleKind {
  FixedSnPure,
  HaarDepolarized,
  Induced,
  Isotropic,
  MeDepolarized,
};

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::FixedSnPure;
  int r = 0;          // Schmidt rank (fixed-sn-pure, me-depolarized)
  int d_a = 0;
  int d_b = 0;
  int k_ancilla = 0;  // induced
  double eps = 0.0;   // depolarizing strength
  double fidelity = 0.0;

  void validate() const;
  std::string label() const;
};

/// One sample of the ensemble; deterministic in (spec, seed, index).
BipartiteDensity sample_state(const EnsembleSpec& spec, uint64_t seed,
                              uint64_t index);

const char* to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

}  // namespace sncert
