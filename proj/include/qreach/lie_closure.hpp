#pragma once

#include "qreach/real_span.hpp"

#include <string>
#include <variant>
#include <vector>

namespace qreach {

/// Reduced basis of a degree-capped Lie closure.
struct LieBasisSet {
  AlgebraPtr algebra;
  std::vector<OperatorPoly> basis;
  int degree_cap = 0;
  /// Last round produced no new in-cap element.
  bool saturated_in_cap = false;
  /// Some generator or bracket exceeded the cap and was dropped.
  bool discarded_above_cap = false;
  int rounds = 0;

  std::size_t dim() const { return basis.size(); }

  RealSpan span() const {
    RealSpan s(algebra);
    for (const auto& b : basis) s.insert(b);
    return s;
  }

  std::vector<std::string> basis_strings() const {
    std::vector<std::string> out;
    out.reserve(basis.size());
    for (const auto& b : basis) out.push_back(b.to_string());
    return out;
  }
};

class ClosureError : public std::invalid_argument {
 public:
  explicit ClosureError(const std::string& what, OperatorPoly offending = {})
      : std::invalid_argument(what), offending_(std::move(offending)) {}
  const OperatorPoly& offending() const { return offending_; }

 private:
  OperatorPoly offending_;
};

namespace detail {

inline void require_skew(const std::vector<OperatorPoly>& gens) {
  for (const auto& g : gens) {
    if (g.is_zero()) throw ClosureError("zero generator", g);
    if (!is_skew_hermitian(g)) throw ClosureError("generator is not skew-Hermitian: " + g.to_string(), g);
  }
}

}  // namespace detail

/// Breadth-first bracket saturation under a polynomial-degree cap. Each round brackets every
/// new element with every basis element, reduces the results in a fixed serial order, and keeps
/// nonzero residuals of degree <= cap.
inline LieBasisSet generate_closure(const std::vector<OperatorPoly>& generators, int degree_cap, int max_rounds = 16) {
  if (generators.empty()) throw ClosureError("no generators");
  detail::require_skew(generators);
  AlgebraPtr alg = generators.front().algebra();
  LieBasisSet out{alg, {}, degree_cap, false, false, 0};
  RealSpan span(alg);
  std::vector<OperatorPoly> fresh;
  for (const auto& g : generators) {
    if (g.algebra() != alg) throw AlgebraError("mixed-algebra operands");
    if (g.degree() > degree_cap) {
      out.discarded_above_cap = true;
      continue;
    }
    auto red = span.reduce(g);
    if (red.in_span()) continue;
    span.insert(red.residual);
    out.basis.push_back(red.residual);
    fresh.push_back(red.residual);
  }
  while (!fresh.empty() && out.rounds < max_rounds) {
    ++out.rounds;
    std::vector<OperatorPoly> next;
    const std::size_t old_size = out.basis.size() - fresh.size();
    for (std::size_t a = 0; a < fresh.size(); ++a) {
      const std::size_t ia = old_size + a;
      for (std::size_t b = 0; b < out.basis.size(); ++b) {
        // Pairs of fresh elements are visited once.
        if (b >= old_size && b <= ia) continue;
        OperatorPoly br = commutator(out.basis[ia], out.basis[b]);
        if (br.is_zero()) continue;
        if (br.degree() > degree_cap) {
          out.discarded_above_cap = true;
          continue;
        }
        auto red = span.reduce(br);
        if (red.in_span()) continue;
        span.insert(red.residual);
        next.push_back(red.residual);
      }
    }
    for (auto& n : next) out.basis.push_back(n);
    fresh = std::move(next);
  }
  out.saturated_in_cap = fresh.empty();
  return out;
}

/// The ad-chain generators ad_{H0}^j H_i for j = 0..max_ad_depth, each chain stopping early
/// once an element is zero, in the span of those already collected, or above the cap.
inline std::vector<OperatorPoly> ad_chain_generators(const OperatorPoly& h0, const std::vector<OperatorPoly>& controls,
                                                     int degree_cap, int max_ad_depth, bool* discarded = nullptr) {
  if (controls.empty()) throw ClosureError("no control Hamiltonians");
  AlgebraPtr alg = controls.front().algebra();
  RealSpan span(alg);
  std::vector<OperatorPoly> collected;
  for (const auto& h : controls) {
    OperatorPoly x = h;
    for (int j = 0; j <= max_ad_depth; ++j) {
      if (j > 0) x = h0.is_zero() ? OperatorPoly::zero(alg) : commutator(h0, x);
      if (x.is_zero()) break;
      if (x.degree() > degree_cap) {
        if (discarded) *discarded = true;
        break;
      }
      if (span.contains(x)) break;
      span.insert(x);
      collected.push_back(x);
    }
  }
  return collected;
}

/// C = {ad_{H0}^j H_i}_LA under the cap.
inline LieBasisSet build_C(const OperatorPoly& h0, const std::vector<OperatorPoly>& controls, int degree_cap,
                           int max_ad_depth = 8, int max_rounds = 16) {
  detail::require_skew(controls);
  if (!h0.is_zero() && !is_skew_hermitian(h0)) throw ClosureError("H0 is not skew-Hermitian: " + h0.to_string(), h0);
  bool discarded = false;
  auto gens = ad_chain_generators(h0, controls, degree_cap, max_ad_depth, &discarded);
  if (gens.empty()) {
    LieBasisSet empty{controls.front().algebra(), {}, degree_cap, true, true, 0};
    return empty;
  }
  LieBasisSet out = generate_closure(gens, degree_cap, max_rounds);
  out.discarded_above_cap = out.discarded_above_cap || discarded;
  return out;
}

struct ContainmentHolds {};
struct ContainmentFails {
  OperatorPoly witness;   // the offending bracket [b, c]
  OperatorPoly residual;  // its remainder modulo span(B)
  std::size_t b_index = 0;
  std::size_t c_index = 0;
};
struct ContainmentIndeterminate {
  std::size_t above_cap = 0;
};
using ContainmentResult = std::variant<ContainmentHolds, ContainmentFails, ContainmentIndeterminate>;

inline std::string containment_label(const ContainmentResult& r) {
  if (std::holds_alternative<ContainmentHolds>(r)) return "holds";
  if (std::holds_alternative<ContainmentFails>(r)) return "fails";
  return "indeterminate";
}

/// Tests [B, C] within span(B) for every basis pair whose bracket stays within the cap.
inline ContainmentResult check_bracket_containment(const LieBasisSet& B, const LieBasisSet& C) {
  if (B.degree_cap != C.degree_cap) throw ClosureError("degree cap mismatch between B and C");
  RealSpan span_b = B.span();
  std::size_t above = 0;
  for (std::size_t i = 0; i < B.basis.size(); ++i)
    for (std::size_t j = 0; j < C.basis.size(); ++j) {
      OperatorPoly br = commutator(B.basis[i], C.basis[j]);
      if (br.is_zero()) continue;
      if (br.degree() > B.degree_cap) {
        ++above;
        continue;
      }
      auto red = span_b.reduce(br);
      if (!red.in_span()) return ContainmentFails{br, red.residual, i, j};
    }
  if (above == 0) return ContainmentHolds{};
  // B saturated and equal to C: [B, C] = [B, B] lies in B.
  if (B.saturated_in_cap && B.dim() == C.dim()) {
    RealSpan span_c = C.span();
    bool equal = true;
    for (const auto& b : B.basis)
      if (!span_c.contains(b)) {
        equal = false;
        break;
      }
    if (equal) return ContainmentHolds{};
  }
  return ContainmentIndeterminate{above};
}

struct GrowthRow {
  int cap = 0;
  std::size_t dim = 0;
  bool saturated = false;
  bool discarded = false;
};

enum class GrowthTrend { Stabilized, StrictlyIncreasing, Mixed };

inline std::string growth_trend_label(GrowthTrend t) {
  switch (t) {
    case GrowthTrend::Stabilized:
      return "finite-dimensional (stabilized)";
    case GrowthTrend::StrictlyIncreasing:
      return "growth consistent with infinite dimension (heuristic)";
    case GrowthTrend::Mixed:
      return "mixed growth";
  }
  return "mixed growth";
}

struct GrowthProfile {
  std::vector<GrowthRow> rows;

  bool strictly_increasing() const {
    if (rows.size() < 2) return false;
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].dim <= rows[k - 1].dim) return false;
    return true;
  }
  bool constant() const {
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].dim != rows[0].dim) return false;
    return true;
  }
  /// Strict growth needs at least three caps before it is reported as growth.
  GrowthTrend trend() const {
    if (constant()) return GrowthTrend::Stabilized;
    if (rows.size() >= 3 && strictly_increasing()) return GrowthTrend::StrictlyIncreasing;
    return GrowthTrend::Mixed;
  }
};

inline GrowthProfile growth_profile(const std::vector<OperatorPoly>& generators, const std::vector<int>& caps,
                                    int max_rounds = 16) {
  for (std::size_t k = 1; k < caps.size(); ++k)
    if (caps[k] <= caps[k - 1]) throw ClosureError("caps must be strictly increasing");
  GrowthProfile out;
  for (int cap : caps) {
    auto closure = generate_closure(generators, cap, max_rounds);
    out.rows.push_back({cap, closure.dim(), closure.saturated_in_cap, closure.discarded_above_cap});
  }
  return out;
}

}  // namespace qreach
