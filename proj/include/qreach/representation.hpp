#pragma once

#include "qreach/operator_poly.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qreach {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class RepresentationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite N x N images of the generators. Commutation relations hold on the interior index range;
/// the truncation damages them only near the top of the basis.
struct TruncatedRep {
  AlgebraPtr algebra;
  std::string kind;  // "heisenberg" | "so21-discrete"
  int N = 0;
  std::vector<Matrix> generator_matrices;
  int interior_first = 0;
  int interior_last = 0;
  double hbar = 1.0;
  double bargmann_index = 0.0;  // j for so(2,1), unused otherwise

  /// Rows/columns on which products of `total_degree` generator matrices agree with the
  /// untruncated operator.
  std::pair<int, int> interior_range(int total_degree) const {
    int last = N - std::max(total_degree, 1);
    if (total_degree >= 2) last = std::min(last, interior_last - (total_degree - 2));
    return {interior_first, last};
  }
};

/// Number-basis realization of h(1): x = sqrt(hbar/2)(a + a^dag), p = i sqrt(hbar/2)(a^dag - a),
/// e = identity. Interior 0..N-2.
inline TruncatedRep heisenberg_rep(const AlgebraPtr& alg, int N) {
  if (N < 4) throw RepresentationError("heisenberg_rep needs N >= 4");
  if (alg->dim() != 3 || alg->index_of("x") != 0 || alg->index_of("p") != 1 || alg->index_of("e") != 2)
    throw RepresentationError("heisenberg_rep needs the (x, p, e) Heisenberg algebra");
  const double hbar = static_cast<double>(alg->hbar());
  Matrix a = Matrix::Zero(N, N);
  for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Matrix ad = a.adjoint();
  const double s = std::sqrt(hbar / 2.0);
  TruncatedRep rep;
  rep.algebra = alg;
  rep.kind = "heisenberg";
  rep.N = N;
  rep.generator_matrices = {s * (a + ad), cplx(0.0, s) * (ad - a), Matrix::Identity(N, N)};
  rep.interior_first = 0;
  rep.interior_last = N - 2;
  rep.hbar = hbar;
  return rep;
}

/// Lowest-weight discrete-series realization of so(2,1) in the eigenbasis of the compact
/// generator L_y: L_y|m> = m|m>, m = j + k, k = 0..N-1.
///
/// With R = L_z - i L_x raising m by one, [R, R^dag] = -2 L_y forces
/// |r_m|^2 = (m - j + 1)(m + j), and the Casimir L_y^2 - L_x^2 - L_z^2 equals j(j - 1).
/// L_z = (R + R^dag)/2 and L_x = i(R - R^dag)/2. Interior 1..N-2.
inline TruncatedRep so21_discrete_rep(const AlgebraPtr& alg, double j, int N) {
  if (!(j > 0.0) || !std::isfinite(j)) throw RepresentationError("so21_discrete_rep needs j > 0");
  if (N < 4) throw RepresentationError("so21_discrete_rep needs N >= 4");
  if (alg->dim() != 3 || alg->index_of("L_x") != 0 || alg->index_of("L_y") != 1 || alg->index_of("L_z") != 2)
    throw RepresentationError("so21_discrete_rep needs the (L_x, L_y, L_z) so(2,1) algebra");
  Matrix raise = Matrix::Zero(N, N);
  Matrix ly = Matrix::Zero(N, N);
  for (int k = 0; k < N; ++k) {
    const double m = j + k;
    ly(k, k) = m;
    if (k + 1 < N) raise(k + 1, k) = std::sqrt((m - j + 1.0) * (m + j));
  }
  Matrix lower = raise.adjoint();
  TruncatedRep rep;
  rep.algebra = alg;
  rep.kind = "so21-discrete";
  rep.N = N;
  rep.generator_matrices = {cplx(0.0, 0.5) * (raise - lower), ly, 0.5 * (raise + lower)};
  rep.interior_first = 1;
  rep.interior_last = N - 2;
  rep.hbar = static_cast<double>(alg->hbar());
  rep.bargmann_index = j;
  return rep;
}

/// Substitutes generator matrices into each PBW monomial (left-to-right products).
inline Matrix realize(const OperatorPoly& p, const TruncatedRep& rep) {
  if (p.algebra() && p.algebra() != rep.algebra) throw RepresentationError("polynomial and representation use different algebras");
  const int N = rep.N;
  Matrix out = Matrix::Zero(N, N);
  for (const auto& [m, c] : p.terms()) {
    Matrix term = Matrix::Identity(N, N);
    for (int g = 0; g < static_cast<int>(m.size()); ++g)
      for (int r = 0; r < m[static_cast<std::size_t>(g)]; ++r) term = term * rep.generator_matrices[static_cast<std::size_t>(g)];
    out += c.to_complex() * term;
  }
  return out;
}

inline Matrix skew_project(const Matrix& m) {
  if (m.rows() != m.cols()) throw RepresentationError("skew_project needs a square matrix");
  return 0.5 * (m - m.adjoint());
}

/// Largest entrywise deviation between realize([L_k, L_l]) and the matrix commutator over
/// all generator pairs, restricted to the interior block.
inline double relation_residual(const TruncatedRep& rep) {
  const auto& alg = *rep.algebra;
  auto [lo, hi] = rep.interior_range(2);
  const int len = hi - lo + 1;
  double worst = 0.0;
  for (int k = 0; k < alg.dim(); ++k)
    for (int l = k + 1; l < alg.dim(); ++l) {
      const Matrix& a = rep.generator_matrices[static_cast<std::size_t>(k)];
      const Matrix& b = rep.generator_matrices[static_cast<std::size_t>(l)];
      Matrix lhs = a * b - b * a;
      Matrix rhs = Matrix::Zero(rep.N, rep.N);
      for (const auto& t : alg.bracket(k, l)) rhs += t.coeff.to_complex() * rep.generator_matrices[static_cast<std::size_t>(t.index)];
      worst = std::max(worst, (lhs - rhs).block(lo, lo, len, len).cwiseAbs().maxCoeff());
    }
  return worst;
}

/// CSV dump in column-major order with header "row,col,re,im".
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << "row,col,re,im\n";
  os.precision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) os << r << ',' << c << ',' << m(r, c).real() << ',' << m(r, c).imag() << '\n';
}

// ---------------------------------------------------------------------------
// Smooth test states

struct StateVector {
  Vector amplitudes;
  std::string profile;

  int size() const { return static_cast<int>(amplitudes.size()); }
};

enum class ProfileType { Gaussian, Exponential, PolyGaussian, Basis };

struct ProfileSpec {
  ProfileType type = ProfileType::Gaussian;
  double center = 4.0;
  double width = 2.0;  // gaussian sigma
  double rate = 1.0;   // exponential decay rate
  int power = 2;       // polynomial prefactor (k + 1)^power
  int index = 0;       // basis state

  std::string label() const {
    switch (type) {
      case ProfileType::Gaussian:
        return "gaussian";
      case ProfileType::Exponential:
        return "exponential";
      case ProfileType::PolyGaussian:
        return "poly-gaussian";
      case ProfileType::Basis:
        return "basis";
    }
    return "unknown";
  }
};

inline ProfileType parse_profile_type(const std::string& s) {
  if (s == "gaussian") return ProfileType::Gaussian;
  if (s == "exponential") return ProfileType::Exponential;
  if (s == "poly-gaussian") return ProfileType::PolyGaussian;
  if (s == "basis") return ProfileType::Basis;
  throw RepresentationError("unknown profile type '" + s + "'");
}

/// Normalized coefficient vector with super-polynomial decay in the basis index.
inline StateVector smooth_state(const ProfileSpec& spec, int N) {
  if (N < 1) throw RepresentationError("state dimension must be positive");
  Vector v(N);
  switch (spec.type) {
    case ProfileType::Gaussian:
    case ProfileType::PolyGaussian: {
      if (!(spec.width > 0.0)) throw RepresentationError("gaussian width must be positive");
      if (spec.type == ProfileType::PolyGaussian && spec.power < 0) throw RepresentationError("polynomial power must be >= 0");
      for (int k = 0; k < N; ++k) {
        const double d = (k - spec.center) / spec.width;
        double a = std::exp(-0.5 * d * d);
        if (spec.type == ProfileType::PolyGaussian) a *= std::pow(k + 1.0, spec.power);
        v(k) = a;
      }
      break;
    }
    case ProfileType::Exponential:
      if (!(spec.rate > 0.0)) throw RepresentationError("exponential rate must be positive");
      for (int k = 0; k < N; ++k) v(k) = std::exp(-spec.rate * std::abs(k - spec.center));
      break;
    case ProfileType::Basis:
      if (spec.index < 0 || spec.index >= N) throw RepresentationError("basis index out of range");
      v.setZero();
      v(spec.index) = 1.0;
      break;
  }
  const double norm = v.norm();
  if (!(norm > 1e-300) || !std::isfinite(norm)) throw RepresentationError("degenerate state profile");
  return {v / norm, spec.label()};
}

/// Population in the top `levels` basis states, where truncation reflects amplitude.
inline double top_population(const StateVector& s, int levels = 2) {
  double pop = 0.0;
  for (int k = std::max(0, s.size() - levels); k < s.size(); ++k) pop += std::norm(s.amplitudes(k));
  return pop;
}

inline constexpr double kLeakageThreshold = 1e-6;

}  // namespace qreach
