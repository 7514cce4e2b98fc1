#pragma once

#include "qreach/coeff.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qreach {

/// Exponent vector (s_1, ..., s_d) of the PBW monomial L_1^{s_1} ... L_d^{s_d}.
using Monomial = std::vector<int>;

inline int degree(const Monomial& m) {
  int total = 0;
  for (int s : m) total += s;
  return total;
}

/// Graded order: lower degree first, then lexicographically larger exponent vectors first,
/// so x^2 < x*p < p^2 over the generator order (x, p).
struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = degree(a);
    int db = degree(b);
    if (da != db) return da < db;
    return b < a;
  }
};

using TermMap = std::map<Monomial, Coeff, MonomialLess>;

/// One structure-constant entry: coefficient of L_index in a bracket.
struct BracketTerm {
  int index;
  Coeff coeff;
};

class AlgebraError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Describes one generator of the symmetry algebra.
struct GeneratorSpec {
  std::string label;
  bool hermitian = true;
  bool central = false;
  /// Central generator identified with the algebra unit (e^k = e = 1 in products).
  bool unit_alias = false;
};

/// A finite-dimensional Lie algebra L = {L_1, ..., L_d}_LA given by structure constants
/// [L_k, L_l] = sum_m c[k][l][m] L_m. Immutable once built; the PBW product cache is
/// internally synchronized.
class SymmetryAlgebra {
 public:
  /// `brackets` lists [L_k, L_l] for k < l; the antisymmetric half is filled in.
  static std::shared_ptr<const SymmetryAlgebra> create(
      std::string name, std::vector<GeneratorSpec> generators,
      const std::map<std::pair<int, int>, std::vector<BracketTerm>>& brackets, Rational hbar = 1) {
    auto alg = std::shared_ptr<SymmetryAlgebra>(new SymmetryAlgebra());
    alg->name_ = std::move(name);
    alg->generators_ = std::move(generators);
    alg->hbar_ = std::move(hbar);
    const int d = alg->dim();
    if (d <= 0) throw AlgebraError("symmetry algebra needs at least one generator");
    if (alg->hbar_ <= 0) throw AlgebraError("hbar must be positive");
    for (int a = 0; a < d; ++a) {
      const auto& label = alg->generators_[a].label;
      if (label.empty() || label == "i" || label == "hbar")
        throw AlgebraError("invalid generator label '" + label + "'");
      for (int b = 0; b < a; ++b)
        if (alg->generators_[b].label == label) throw AlgebraError("duplicate generator label '" + label + "'");
      if (alg->generators_[a].unit_alias && !alg->generators_[a].central)
        throw AlgebraError("unit-alias generator '" + label + "' must be central");
    }
    alg->table_.assign(static_cast<std::size_t>(d * d), {});
    for (const auto& [key, terms] : brackets) {
      auto [k, l] = key;
      if (k < 0 || l < 0 || k >= d || l >= d) throw AlgebraError("bracket index out of range");
      if (k == l) throw AlgebraError("self-bracket must vanish and cannot be specified");
      std::vector<BracketTerm> cleaned;
      for (const auto& t : terms) {
        if (t.index < 0 || t.index >= d) throw AlgebraError("bracket target index out of range");
        if (!t.coeff.is_zero()) cleaned.push_back(t);
      }
      auto& fwd = alg->table_[static_cast<std::size_t>(k * d + l)];
      auto& rev = alg->table_[static_cast<std::size_t>(l * d + k)];
      if (!fwd.empty() || !rev.empty()) throw AlgebraError("bracket specified twice");
      fwd = cleaned;
      for (const auto& t : cleaned) rev.push_back({t.index, -t.coeff});
    }
    alg->validate();
    return alg;
  }

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(generators_.size()); }
  const GeneratorSpec& generator(int k) const { return generators_.at(static_cast<std::size_t>(k)); }
  const std::vector<GeneratorSpec>& generators() const { return generators_; }
  const Rational& hbar() const { return hbar_; }

  /// Structure constants of [L_k, L_l].
  const std::vector<BracketTerm>& bracket(int k, int l) const {
    return table_[static_cast<std::size_t>(k * dim() + l)];
  }

  int index_of(const std::string& label) const {
    for (int k = 0; k < dim(); ++k)
      if (generators_[static_cast<std::size_t>(k)].label == label) return k;
    return -1;
  }

  bool has_unit_alias() const {
    for (const auto& g : generators_)
      if (g.unit_alias) return true;
    return false;
  }

  /// Normal-ordered expansion of the monomial m times the generator L_g.
  TermMap right_multiply(const Monomial& m, int g) const {
    {
      std::lock_guard<std::mutex> lock(cache_->mutex);
      auto it = cache_->products.find({m, g});
      if (it != cache_->products.end()) return it->second;
    }
    TermMap result = compute_right_multiply(m, g);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    cache_->products.emplace(std::make_pair(m, g), result);
    return result;
  }

 private:
  SymmetryAlgebra() : cache_(std::make_unique<Cache>()) {}

  struct Cache {
    std::mutex mutex;
    std::map<std::pair<Monomial, int>, TermMap> products;
  };

  static void accumulate(TermMap& into, const Monomial& m, const Coeff& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = into.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) into.erase(it);
    }
  }

  TermMap compute_right_multiply(const Monomial& m, int g) const {
    TermMap out;
    if (generators_[static_cast<std::size_t>(g)].unit_alias) {
      out.emplace(m, Coeff(1));
      return out;
    }
    int top = -1;
    for (int k = dim() - 1; k >= 0; --k)
      if (m[static_cast<std::size_t>(k)] > 0) {
        top = k;
        break;
      }
    if (top <= g) {
      Monomial next = m;
      ++next[static_cast<std::size_t>(g)];
      out.emplace(std::move(next), Coeff(1));
      return out;
    }
    // m = m' L_top with top > g:  m' L_top L_g = (m' L_g) L_top + m' [L_top, L_g].
    Monomial head = m;
    --head[static_cast<std::size_t>(top)];
    for (const auto& [mono, c] : right_multiply(head, g))
      for (const auto& [mono2, c2] : right_multiply(mono, top)) accumulate(out, mono2, c * c2);
    for (const auto& t : bracket(top, g)) {
      if (generators_[static_cast<std::size_t>(t.index)].unit_alias) {
        accumulate(out, head, t.coeff);
        continue;
      }
      for (const auto& [mono, c] : right_multiply(head, t.index)) accumulate(out, mono, t.coeff * c);
    }
    return out;
  }

  void validate() const {
    const int d = dim();
    for (int k = 0; k < d; ++k) {
      if (!generators_[static_cast<std::size_t>(k)].central) continue;
      for (int l = 0; l < d; ++l)
        if (!bracket(k, l).empty())
          throw AlgebraError("central generator '" + generators_[static_cast<std::size_t>(k)].label +
                             "' has a nonzero bracket");
    }
    // Jacobi: [[a,b],c] + [[b,c],a] + [[c,a],b] = 0 exactly.
    auto double_bracket = [&](int a, int b, int c, std::vector<Coeff>& acc) {
      for (const auto& t : bracket(a, b))
        for (const auto& u : bracket(t.index, c)) acc[static_cast<std::size_t>(u.index)] += t.coeff * u.coeff;
    };
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        for (int c = b + 1; c < d; ++c) {
          std::vector<Coeff> acc(static_cast<std::size_t>(d));
          double_bracket(a, b, c, acc);
          double_bracket(b, c, a, acc);
          double_bracket(c, a, b, acc);
          for (const auto& v : acc)
            if (!v.is_zero())
              throw AlgebraError("structure constants violate the Jacobi identity for (" +
                                 generators_[static_cast<std::size_t>(a)].label + ", " +
                                 generators_[static_cast<std::size_t>(b)].label + ", " +
                                 generators_[static_cast<std::size_t>(c)].label + ")");
        }
  }

  std::string name_;
  std::vector<GeneratorSpec> generators_;
  Rational hbar_{1};
  std::vector<std::vector<BracketTerm>> table_;
  std::unique_ptr<Cache> cache_;
};

using AlgebraPtr = std::shared_ptr<const SymmetryAlgebra>;

/// Heisenberg algebra h(1) = {x, p, e}_LA with [x, p] = i hbar e; e is central and
/// identified with the unit in products.
inline AlgebraPtr heisenberg_algebra(Rational hbar = 1) {
  std::vector<GeneratorSpec> gens{{"x", true, false, false}, {"p", true, false, false}, {"e", true, true, true}};
  std::map<std::pair<int, int>, std::vector<BracketTerm>> br;
  br[{0, 1}] = {{2, Coeff(Rational(0), hbar)}};
  return SymmetryAlgebra::create("heisenberg", std::move(gens), br, hbar);
}

/// so(2,1) = {L_x, L_y, L_z}_LA with [L_x,L_y] = -i L_z, [L_y,L_z] = -i L_x, [L_z,L_x] = i L_y.
inline AlgebraPtr so21_algebra(Rational hbar = 1) {
  std::vector<GeneratorSpec> gens{{"L_x", true, false, false}, {"L_y", true, false, false}, {"L_z", true, false, false}};
  const Coeff i = Coeff::imag_unit();
  std::map<std::pair<int, int>, std::vector<BracketTerm>> br;
  br[{0, 1}] = {{2, -i}};
  br[{1, 2}] = {{0, -i}};
  br[{0, 2}] = {{1, -i}};  // [L_x, L_z] = -[L_z, L_x] = -i L_y
  return SymmetryAlgebra::create("so21", std::move(gens), br, hbar);
}

}  // namespace qreach
