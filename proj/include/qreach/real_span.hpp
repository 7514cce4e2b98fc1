#pragma once

#include "qreach/operator_poly.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace qreach {

/// Realified coordinate: (monomial, 0 = real part | 1 = imaginary part).
using RealKey = std::pair<Monomial, int>;

struct RealKeyLess {
  bool operator()(const RealKey& a, const RealKey& b) const {
    MonomialLess less;
    if (less(a.first, b.first)) return true;
    if (less(b.first, a.first)) return false;
    return a.second < b.second;
  }
};

using RealVector = std::map<RealKey, Rational, RealKeyLess>;

inline RealVector realify(const OperatorPoly& p) {
  RealVector v;
  for (const auto& [m, c] : p.terms()) {
    if (c.re != 0) v.emplace(RealKey{m, 0}, c.re);
    if (c.im != 0) v.emplace(RealKey{m, 1}, c.im);
  }
  return v;
}

inline OperatorPoly unrealify(const AlgebraPtr& alg, const RealVector& v) {
  OperatorPoly out(alg);
  for (const auto& [key, value] : v) {
    Coeff c = key.second == 0 ? Coeff(value) : Coeff(Rational(0), value);
    out.add_term(key.first, c);
  }
  return out;
}

struct Reduction {
  OperatorPoly residual;
  /// Real coefficients c_i with v = sum_i c_i b_i + residual.
  std::vector<Rational> coefficients;

  bool in_span() const { return residual.is_zero(); }
};

/// Real span of polynomials kept in exact reduced row-echelon form over the realified
/// monomial coordinates. Residuals are echelon remainders: zero iff the vector lies in the span.
class RealSpan {
 public:
  explicit RealSpan(AlgebraPtr alg) : alg_(std::move(alg)) {}

  std::size_t rank() const { return rows_.size(); }
  std::size_t inserted() const { return inserted_; }

  Reduction reduce(const OperatorPoly& v) const {
    RealVector rem = realify(v);
    std::vector<Rational> comb(inserted_, Rational(0));
    reduce_in_place(rem, comb);
    return {unrealify(alg_, rem), std::move(comb)};
  }

  bool contains(const OperatorPoly& v) const {
    RealVector rem = realify(v);
    std::vector<Rational> comb(inserted_, Rational(0));
    reduce_in_place(rem, comb);
    return rem.empty();
  }

  /// Appends v to the generating list; returns false (and records nothing new in the row space)
  /// when v is already in the span.
  bool insert(const OperatorPoly& v) {
    RealVector rem = realify(v);
    std::vector<Rational> comb(inserted_ + 1, Rational(0));
    reduce_in_place(rem, comb);
    for (auto& row : rows_) row.comb.emplace_back(0);
    ++inserted_;
    if (rem.empty()) return false;
    // rem = v - sum comb_i b_i, so as a combination of inserted elements it is e_new - comb.
    for (auto& c : comb) c = -c;
    comb.back() = Rational(1);
    auto pivot = rem.begin()->first;
    Rational scale = rem.begin()->second;
    for (auto& [k, val] : rem) val /= scale;
    for (auto& c : comb) c /= scale;
    Row fresh{pivot, std::move(rem), std::move(comb)};
    for (auto& row : rows_) {
      auto it = row.vec.find(pivot);
      if (it == row.vec.end()) continue;
      Rational factor = it->second;
      axpy(row.vec, fresh.vec, -factor);
      for (std::size_t i = 0; i < row.comb.size(); ++i) row.comb[i] -= factor * fresh.comb[i];
    }
    rows_.push_back(std::move(fresh));
    return true;
  }

 private:
  struct Row {
    RealKey pivot;
    RealVector vec;
    std::vector<Rational> comb;
  };

  static void axpy(RealVector& y, const RealVector& x, const Rational& a) {
    for (const auto& [k, val] : x) {
      auto [it, inserted] = y.try_emplace(k, a * val);
      if (!inserted) {
        it->second += a * val;
        if (it->second == 0) y.erase(it);
      }
    }
  }

  void reduce_in_place(RealVector& rem, std::vector<Rational>& comb) const {
    for (const auto& row : rows_) {
      auto it = rem.find(row.pivot);
      if (it == rem.end()) continue;
      Rational factor = it->second;
      axpy(rem, row.vec, -factor);
      for (std::size_t i = 0; i < row.comb.size(); ++i) comb[i] += factor * row.comb[i];
    }
  }

  AlgebraPtr alg_;
  std::vector<Row> rows_;
  std::size_t inserted_ = 0;
};

/// Exact membership test of v in the real span of `basis`.
inline Reduction reduce_against(const OperatorPoly& v, const std::vector<OperatorPoly>& basis) {
  RealSpan span(v.algebra());
  for (const auto& b : basis) span.insert(b);
  return span.reduce(v);
}

}  // namespace qreach
