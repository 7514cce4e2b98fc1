#pragma once

#include "qreach/algebra.hpp"

#include <cassert>
#include <sstream>
#include <string>
#include <utility>

namespace qreach {

/// Element of the universal enveloping algebra E(L) in PBW normal form.
/// Zero coefficients are never stored, so equality is term-map equality.
class OperatorPoly {
 public:
  OperatorPoly() = default;
  explicit OperatorPoly(AlgebraPtr alg) : alg_(std::move(alg)) {}
  OperatorPoly(AlgebraPtr alg, TermMap terms) : alg_(std::move(alg)), terms_(std::move(terms)) { prune(); }

  static OperatorPoly zero(const AlgebraPtr& alg) { return OperatorPoly(alg); }
  static OperatorPoly scalar(const AlgebraPtr& alg, const Coeff& c) {
    OperatorPoly out(alg);
    if (!c.is_zero()) out.terms_.emplace(Monomial(static_cast<std::size_t>(alg->dim()), 0), c);
    return out;
  }
  static OperatorPoly unit(const AlgebraPtr& alg) { return scalar(alg, Coeff(1)); }
  static OperatorPoly generator(const AlgebraPtr& alg, int k) {
    if (alg->generator(k).unit_alias) return unit(alg);
    Monomial m(static_cast<std::size_t>(alg->dim()), 0);
    m[static_cast<std::size_t>(k)] = 1;
    OperatorPoly out(alg);
    out.terms_.emplace(std::move(m), Coeff(1));
    return out;
  }
  static OperatorPoly generator(const AlgebraPtr& alg, const std::string& label) {
    int k = alg->index_of(label);
    if (k < 0) throw AlgebraError("unknown generator '" + label + "'");
    return generator(alg, k);
  }

  const AlgebraPtr& algebra() const { return alg_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, qreach::degree(m));
    return d;
  }

  Coeff coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff() : it->second;
  }

  void add_term(const Monomial& m, const Coeff& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  OperatorPoly& operator+=(const OperatorPoly& o) {
    adopt(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  OperatorPoly& operator-=(const OperatorPoly& o) {
    adopt(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  OperatorPoly& operator*=(const Coeff& s) {
    if (s.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend OperatorPoly operator+(OperatorPoly a, const OperatorPoly& b) { return a += b; }
  friend OperatorPoly operator-(OperatorPoly a, const OperatorPoly& b) { return a -= b; }
  friend OperatorPoly operator*(const Coeff& s, OperatorPoly a) { return a *= s; }
  friend OperatorPoly operator*(OperatorPoly a, const Coeff& s) { return a *= s; }
  OperatorPoly operator-() const { return *this * Coeff(-1); }

  friend bool operator==(const OperatorPoly& a, const OperatorPoly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const OperatorPoly& a, const OperatorPoly& b) { return !(a == b); }

  /// Canonical string: terms in graded order with explicit exact coefficients; reparses
  /// to an equal polynomial.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      std::string coeff = coeff_string(c);
      bool negative = !coeff.empty() && coeff.front() == '-';
      if (first) {
        if (negative) out << "-";
      } else {
        out << (negative ? " - " : " + ");
      }
      if (negative) coeff.erase(0, 1);
      first = false;
      std::string mono = monomial_string(m);
      if (mono.empty()) {
        out << coeff;
      } else if (coeff == "1") {
        out << mono;
      } else {
        out << coeff << "*" << mono;
      }
    }
    return out.str();
  }

  std::string monomial_string(const Monomial& m) const {
    std::string s;
    for (int k = 0; k < alg_->dim(); ++k) {
      int e = m[static_cast<std::size_t>(k)];
      if (e == 0) continue;
      if (!s.empty()) s += "*";
      s += alg_->generator(k).label;
      if (e > 1) s += "^" + std::to_string(e);
    }
    return s;
  }

 private:
  static std::string coeff_string(const Coeff& c) {
    if (c.im == 0) return rational_to_string(c.re);
    if (c.re == 0) {
      if (c.im == 1) return "i";
      if (c.im == -1) return "-i";
      return rational_to_string(c.im) + "*i";
    }
    return "(" + rational_to_string(c.re) + (c.im < 0 ? " - " : " + ") +
           rational_to_string(c.im < 0 ? Rational(-c.im) : c.im) + "*i)";
  }

  void adopt(const OperatorPoly& o) {
    if (!alg_) {
      alg_ = o.alg_;
    } else if (o.alg_ && o.alg_ != alg_) {
      throw AlgebraError("mixed-algebra operands");
    }
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->second.is_zero()) {
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
  }

  AlgebraPtr alg_;
  TermMap terms_;
};

namespace detail {

inline const AlgebraPtr& common_algebra(const OperatorPoly& p, const OperatorPoly& q) {
  if (!p.algebra() || !q.algebra()) throw AlgebraError("operand without an algebra");
  if (p.algebra() != q.algebra()) throw AlgebraError("mixed-algebra operands");
  return p.algebra();
}

inline TermMap right_multiply(const SymmetryAlgebra& alg, const TermMap& terms, int g) {
  TermMap out;
  for (const auto& [m, c] : terms)
    for (const auto& [m2, c2] : alg.right_multiply(m, g)) {
      Coeff v = c * c2;
      auto [it, inserted] = out.try_emplace(m2, v);
      if (!inserted) {
        it->second += v;
        if (it->second.is_zero()) out.erase(it);
      }
    }
  return out;
}

}  // namespace detail

/// Normal-ordered product p*q.
inline OperatorPoly multiply(const OperatorPoly& p, const OperatorPoly& q) {
  const AlgebraPtr& alg = detail::common_algebra(p, q);
  OperatorPoly out(alg);
  for (const auto& [mq, cq] : q.terms()) {
    TermMap cur = p.terms();
    for (int g = 0; g < alg->dim(); ++g)
      for (int r = 0; r < mq[static_cast<std::size_t>(g)]; ++r) cur = detail::right_multiply(*alg, cur, g);
    for (const auto& [m, c] : cur) out.add_term(m, c * cq);
  }
  return out;
}

inline OperatorPoly commutator(const OperatorPoly& p, const OperatorPoly& q) {
  OperatorPoly out = multiply(p, q) - multiply(q, p);
  assert(p.degree() < 1 || q.degree() < 1 || out.degree() <= p.degree() + q.degree() - 1);
  return out;
}

/// Formal adjoint: reverse factor order, conjugate coefficients, negate each occurrence of a
/// non-Hermitian generator, then re-normal-order.
inline OperatorPoly adjoint(const OperatorPoly& p) {
  const AlgebraPtr& alg = p.algebra();
  OperatorPoly out(alg);
  for (const auto& [m, c] : p.terms()) {
    TermMap cur;
    cur.emplace(Monomial(static_cast<std::size_t>(alg->dim()), 0), c.conj());
    bool flip = false;
    for (int g = alg->dim() - 1; g >= 0; --g) {
      int e = m[static_cast<std::size_t>(g)];
      if (!alg->generator(g).hermitian && (e % 2 == 1)) flip = !flip;
      for (int r = 0; r < e; ++r) cur = detail::right_multiply(*alg, cur, g);
    }
    for (const auto& [m2, c2] : cur) out.add_term(m2, flip ? -c2 : c2);
  }
  return out;
}

inline bool is_skew_hermitian(const OperatorPoly& p) {
  return adjoint(p) == -p;
}

inline OperatorPoly power(const OperatorPoly& p, int n) {
  OperatorPoly out = OperatorPoly::unit(p.algebra());
  for (int k = 0; k < n; ++k) out = multiply(out, p);
  return out;
}

}  // namespace qreach
