#include "sncert/ensembles.hpp"

#include <algorithm>
#include <cmath>

namespace sncert {

namespace {

// SplitMix64; mixes (seed, stream) into independent engine seeds.
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(uint64_t seed, uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x1234567ULL))) {}

uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  // 53-bit mantissa in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  // Box-Muller without the cached spare so the draw count is predictable.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RandomStream::exponential() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u);
}

Complex RandomStream::complex_normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  return Complex(mag * std::cos(2.0 * M_PI * u2), mag * std::sin(2.0 * M_PI * u2));
}

Matrix haar_unitary(int dim, RandomStream& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    const Complex phase = mag > 0.0 ? diag / mag : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

Vector haar_state(int dim, RandomStream& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

SchmidtVector dirichlet_simplex(int r, int d, RandomStream& rng) {
  if (r < 1 || d < r) {
    throw std::invalid_argument("dirichlet_simplex: need 1 <= r <= d");
  }
  RealVector lam = RealVector::Zero(d);
  double sum = 0.0;
  for (int i = 0; i < r; ++i) {
    lam(i) = rng.exponential();
    sum += lam(i);
  }
  for (int i = 0; i < r; ++i) lam(i) /= sum;
  std::sort(lam.begin(), lam.begin() + r, std::greater<double>());
  return SchmidtVector(lam);
}

PureState fixed_sn_pure(int r, int d_a, int d_b, RandomStream& rng) {
  if (r < 1 || r > d_a || d_a > d_b) {
    throw std::invalid_argument("fixed_sn_pure: need 1 <= r <= d_a <= d_b");
  }
  const SchmidtVector lam = dirichlet_simplex(r, std::min(d_a, d_b), rng);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(d_a) * d_b);
  for (int i = 0; i < r; ++i) amps(i * d_b + i) = std::sqrt(lam.lambda(i));
  return PureState(d_a, d_b, std::move(amps));
}

BipartiteDensity haar_depolarized(int d, double eps, RandomStream& rng) {
  if (eps < 0.0 || eps > 1.0) {
    throw std::invalid_argument("haar_depolarized: eps outside [0,1]");
  }
  const int dim = d * d;
  const Vector psi = haar_state(dim, rng);
  Matrix rho = (1.0 - eps) * (psi * psi.adjoint());
  rho += (eps / dim) * Matrix::Identity(dim, dim);
  return BipartiteDensity(d, d, std::move(rho));
}

BipartiteDensity induced_mixed(int d_a, int d_b, int k_ancilla,
                               RandomStream& rng) {
  if (k_ancilla < 1) {
    throw std::invalid_argument("induced_mixed: ancilla dimension must be >= 1");
  }
  const int dim = d_a * d_b;
  // Tracing a Haar pure state on H_AB (x) H_C over C gives G G^dag / Tr for
  // a dim x K Ginibre matrix G.
  Matrix g(dim, k_ancilla);
  for (int j = 0; j < k_ancilla; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return BipartiteDensity(d_a, d_b, std::move(rho));
}

BipartiteDensity isotropic_state(int d, double fidelity) {
  if (fidelity < 0.0 || fidelity > 1.0) {
    throw std::invalid_argument("isotropic_state: F outside [0,1]");
  }
  const int dim = d * d;
  const PureState plus = maximally_entangled(d, d, d);
  Matrix rho = ((1.0 - fidelity) / (dim - 1.0)) * Matrix::Identity(dim, dim);
  rho += ((dim * fidelity - 1.0) / (dim - 1.0)) * plus.density();
  return BipartiteDensity(d, d, std::move(rho));
}

BipartiteDensity me_depolarized(int r, int d_a, int d_b, double eps) {
  if (eps < 0.0 || eps > 1.0) {
    throw std::invalid_argument("me_depolarized: eps outside [0,1]");
  }
  const int dim = d_a * d_b;
  const PureState plus = maximally_entangled(r, d_a, d_b);
  Matrix rho = (1.0 - eps) * plus.density();
  rho += (eps / dim) * Matrix::Identity(dim, dim);
  return BipartiteDensity(d_a, d_b, std::move(rho));
}

void EnsembleSpec::validate() const {
  switch (kind) {
    case EnsembleKind::FixedSnPure:
      if (r < 1 || r > d_a || d_a > d_b) {
        throw std::invalid_argument("EnsembleSpec: need 1 <= r <= d_a <= d_b");
      }
      break;
    case EnsembleKind::HaarDepolarized:
      if (d_a != d_b || d_a < 2 || eps < 0.0 || eps > 1.0) {
        throw std::invalid_argument("EnsembleSpec: haar-depolarized needs d_a = d_b and eps in [0,1]");
      }
      break;
    case EnsembleKind::Induced:
      if (d_a < 2 || d_b < 2 || k_ancilla < 1) {
        throw std::invalid_argument("EnsembleSpec: induced needs d_a,d_b >= 2 and K >= 1");
      }
      break;
    case EnsembleKind::Isotropic:
      if (d_a != d_b || d_a < 2 || fidelity < 0.0 || fidelity > 1.0) {
        throw std::invalid_argument("EnsembleSpec: isotropic needs d_a = d_b and F in [0,1]");
      }
      break;
    case EnsembleKind::MeDepolarized:
      if (r < 1 || r > std::min(d_a, d_b) || eps < 0.0 || eps > 1.0) {
        throw std::invalid_argument("EnsembleSpec: me-depolarized needs 1 <= r <= min(d) and eps in [0,1]");
      }
      break;
  }
}

std::string EnsembleSpec::label() const {
  std::string out = to_string(kind);
  out += ":d_a=" + std::to_string(d_a) + ",d_b=" + std::to_string(d_b);
  switch (kind) {
    case EnsembleKind::FixedSnPure: out += ",r=" + std::to_string(r); break;
    case EnsembleKind::HaarDepolarized: out += ",eps=" + std::to_string(eps); break;
    case EnsembleKind::Induced: out += ",K=" + std::to_string(k_ancilla); break;
    case EnsembleKind::Isotropic: out += ",F=" + std::to_string(fidelity); break;
    case EnsembleKind::MeDepolarized:
      out += ",r=" + std::to_string(r) + ",eps=" + std::to_string(eps);
      break;
  }
  return out;
}

BipartiteDensity sample_state(const EnsembleSpec& spec, uint64_t seed,
                              uint64_t index) {
  spec.validate();
  RandomStream rng(seed, index);
  switch (spec.kind) {
    case EnsembleKind::FixedSnPure:
      return BipartiteDensity::from_pure(
          fixed_sn_pure(spec.r, spec.d_a, spec.d_b, rng));
    case EnsembleKind::HaarDepolarized:
      return haar_depolarized(spec.d_a, spec.eps, rng);
    case EnsembleKind::Induced:
      return induced_mixed(spec.d_a, spec.d_b, spec.k_ancilla, rng);
    case EnsembleKind::Isotropic:
      return isotropic_state(spec.d_a, spec.fidelity);
    case EnsembleKind::MeDepolarized:
      return me_depolarized(spec.r, spec.d_a, spec.d_b, spec.eps);
  }
  throw std::logic_error("sample_state: unknown ensemble kind");
}

const char* to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::FixedSnPure: return "fixed-sn-pure";
    case EnsembleKind::HaarDepolarized: return "haar-depolarized";
    case EnsembleKind::Induced: return "induced";
    case EnsembleKind::Isotropic: return "isotropic";
    case EnsembleKind::MeDepolarized: return "me-depolarized";
  }
  return "?";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  if (name == "fixed-sn-pure") return EnsembleKind::FixedSnPure;
  if (name == "haar-depolarized") return EnsembleKind::HaarDepolarized;
  if (name == "induced") return EnsembleKind::Induced;
  if (name == "isotropic") return EnsembleKind::Isotropic;
  if (name == "me-depolarized") return EnsembleKind::MeDepolarized;
  throw std::invalid_argument("unknown ensemble kind: " + name);
}

}  // namespace sncert
