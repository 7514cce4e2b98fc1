#pragma once

#include "qreach/operator_poly.hpp"

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qreach {

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : std::invalid_argument("syntax error at position " + std::to_string(position) + ": " + msg), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parsed Hamiltonian expression. Products are noncommutative and keep operand order.
struct ExpressionAST {
  enum class Kind { Number, Symbol, Sum, Difference, Product, Quotient, Negate, Power };
  Kind kind = Kind::Number;
  Rational number;     // Kind::Number
  std::string symbol;  // Kind::Symbol
  int exponent = 0;    // Kind::Power
  std::size_t position = 0;
  std::shared_ptr<const ExpressionAST> lhs;
  std::shared_ptr<const ExpressionAST> rhs;
};

using ExprPtr = std::shared_ptr<const ExpressionAST>;

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& src) : src_(src) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip();
    if (pos_ < src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < src_.size() && src_[pos_] == c;
  }
  static ExprPtr node(ExpressionAST::Kind k, std::size_t pos, ExprPtr a = nullptr, ExprPtr b = nullptr) {
    auto n = std::make_shared<ExpressionAST>();
    n->kind = k;
    n->position = pos;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  ExprPtr expr() {
    ExprPtr left = term();
    while (true) {
      skip();
      if (pos_ >= src_.size()) return left;
      char c = src_[pos_];
      if (c != '+' && c != '-') return left;
      std::size_t at = pos_++;
      ExprPtr right = term();
      left = node(c == '+' ? ExpressionAST::Kind::Sum : ExpressionAST::Kind::Difference, at, left, right);
    }
  }

  ExprPtr term() {
    ExprPtr left = unary();
    while (true) {
      skip();
      if (pos_ >= src_.size()) return left;
      char c = src_[pos_];
      if (c != '*' && c != '/') return left;
      std::size_t at = pos_++;
      ExprPtr right = unary();
      left = node(c == '*' ? ExpressionAST::Kind::Product : ExpressionAST::Kind::Quotient, at, left, right);
    }
  }

  ExprPtr unary() {
    skip();
    if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
      std::size_t at = pos_;
      bool neg = src_[pos_++] == '-';
      ExprPtr inner = unary();
      return neg ? node(ExpressionAST::Kind::Negate, at, inner) : inner;
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    skip();
    if (pos_ < src_.size() && src_[pos_] == '^') {
      std::size_t at = pos_++;
      skip();
      if (pos_ >= src_.size()) throw ParseError("expected exponent", pos_);
      if (src_[pos_] == '-') throw ParseError("negative powers are not allowed", pos_);
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError("exponent must be a nonnegative integer literal", pos_);
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
        throw ParseError("fractional powers are not allowed", start);
      std::string digits = src_.substr(start, pos_ - start);
      if (digits.size() > 4) throw ParseError("exponent too large", start);
      auto n = node(ExpressionAST::Kind::Power, at, base);
      std::const_pointer_cast<ExpressionAST>(n)->exponent = std::stoi(digits);
      return n;
    }
    return base;
  }

  ExprPtr primary() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      ExprPtr inner = expr();
      skip();
      if (pos_ >= src_.size() || src_[pos_] != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      auto n = node(ExpressionAST::Kind::Number, at);
      try {
        std::const_pointer_cast<ExpressionAST>(n)->number = parse_decimal(src_.substr(start, pos_ - start));
      } catch (const std::invalid_argument&) {
        throw ParseError("malformed number", start);
      }
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      auto n = node(ExpressionAST::Kind::Symbol, at);
      std::const_pointer_cast<ExpressionAST>(n)->symbol = src_.substr(start, pos_ - start);
      return n;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

inline bool scalar_value(const OperatorPoly& p, Coeff& out) {
  if (p.is_zero()) {
    out = Coeff();
    return true;
  }
  if (p.size() != 1) return false;
  const auto& [m, c] = *p.terms().begin();
  if (degree(m) != 0) return false;
  out = c;
  return true;
}

}  // namespace detail

inline ExprPtr parse_ast(const std::string& src) {
  return detail::ExpressionParser(src).parse();
}

/// Evaluates an AST over the algebra. Symbols resolve to generator labels, "i", "hbar", or
/// entries of `params`.
inline OperatorPoly evaluate(const ExpressionAST& e, const AlgebraPtr& alg, const std::map<std::string, Rational>& params = {}) {
  using K = ExpressionAST::Kind;
  switch (e.kind) {
    case K::Number:
      return OperatorPoly::scalar(alg, Coeff(e.number));
    case K::Symbol: {
      if (e.symbol == "i") return OperatorPoly::scalar(alg, Coeff::imag_unit());
      if (e.symbol == "hbar") return OperatorPoly::scalar(alg, Coeff(alg->hbar()));
      int k = alg->index_of(e.symbol);
      if (k >= 0) return OperatorPoly::generator(alg, k);
      auto it = params.find(e.symbol);
      if (it != params.end()) return OperatorPoly::scalar(alg, Coeff(it->second));
      throw ParseError("unknown symbol '" + e.symbol + "'", e.position);
    }
    case K::Sum:
      return evaluate(*e.lhs, alg, params) + evaluate(*e.rhs, alg, params);
    case K::Difference:
      return evaluate(*e.lhs, alg, params) - evaluate(*e.rhs, alg, params);
    case K::Product:
      return multiply(evaluate(*e.lhs, alg, params), evaluate(*e.rhs, alg, params));
    case K::Quotient: {
      OperatorPoly den = evaluate(*e.rhs, alg, params);
      Coeff c;
      if (!detail::scalar_value(den, c)) throw ParseError("division by an operator is not allowed", e.position);
      if (c.is_zero()) throw ParseError("division by zero", e.position);
      return evaluate(*e.lhs, alg, params) * (Coeff(1) / c);
    }
    case K::Negate:
      return -evaluate(*e.lhs, alg, params);
    case K::Power:
      return power(evaluate(*e.lhs, alg, params), e.exponent);
  }
  throw ParseError("unknown expression node", e.position);
}

/// Parses and normal-orders a polynomial expression such as "(x^2+p^2)^2" or "a*L_z^2".
inline OperatorPoly parse_expression(const std::string& src, const AlgebraPtr& alg,
                                     const std::map<std::string, Rational>& params = {}) {
  return evaluate(*parse_ast(src), alg, params);
}

}  // namespace qreach
