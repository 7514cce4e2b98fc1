#pragma once

#include "qreach/dynamics.hpp"

#include <cctype>
#include <memory>
#include <string>
#include <vector>

namespace qreach {

/// Nested bracket/sum word over control Hamiltonians H1..Hm and ad_{H0}.
///   word := Hk | [word, word] | (word + word) | ad(word)
struct BracketWord {
  enum class Kind { Control, Bracket, Sum, AdH0 };
  Kind kind = Kind::Control;
  int control = 0;  // zero-based control index for Kind::Control
  std::shared_ptr<const BracketWord> lhs;
  std::shared_ptr<const BracketWord> rhs;

  static BracketWord control_word(int j) { return {Kind::Control, j, nullptr, nullptr}; }
  static BracketWord bracket(BracketWord a, BracketWord b) {
    return {Kind::Bracket, 0, std::make_shared<const BracketWord>(std::move(a)), std::make_shared<const BracketWord>(std::move(b))};
  }
  static BracketWord sum(BracketWord a, BracketWord b) {
    return {Kind::Sum, 0, std::make_shared<const BracketWord>(std::move(a)), std::make_shared<const BracketWord>(std::move(b))};
  }
  static BracketWord ad_h0(BracketWord a) {
    return {Kind::AdH0, 0, std::make_shared<const BracketWord>(std::move(a)), nullptr};
  }

  int depth() const {
    switch (kind) {
      case Kind::Control:
        return 0;
      case Kind::AdH0:
        return 1 + lhs->depth();
      default:
        return 1 + std::max(lhs->depth(), rhs->depth());
    }
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Control:
        return "H" + std::to_string(control + 1);
      case Kind::Bracket:
        return "[" + lhs->to_string() + "," + rhs->to_string() + "]";
      case Kind::Sum:
        return "(" + lhs->to_string() + "+" + rhs->to_string() + ")";
      case Kind::AdH0:
        return "ad(" + lhs->to_string() + ")";
    }
    return "";
  }
};

class SynthesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxWordDepth = 3;

namespace detail {

class WordParser {
 public:
  explicit WordParser(std::string src) : src_(std::move(src)) {}

  BracketWord parse() {
    BracketWord w = word();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return w;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SynthesisError("word syntax error at position " + std::to_string(pos_) + ": " + msg);
  }
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= src_.size() || src_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  BracketWord word() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '[') {
      ++pos_;
      BracketWord a = word();
      expect(',');
      BracketWord b = word();
      expect(']');
      return BracketWord::bracket(std::move(a), std::move(b));
    }
    if (c == '(') {
      ++pos_;
      BracketWord a = word();
      expect('+');
      BracketWord b = word();
      expect(')');
      return BracketWord::sum(std::move(a), std::move(b));
    }
    if (src_.compare(pos_, 2, "ad") == 0) {
      pos_ += 2;
      expect('(');
      BracketWord a = word();
      expect(')');
      return BracketWord::ad_h0(std::move(a));
    }
    if (c == 'H') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("expected control index after 'H'");
      int k = std::stoi(src_.substr(start, pos_ - start));
      if (k < 1) fail("control indices start at 1");
      return BracketWord::control_word(k - 1);
    }
    fail("unexpected character");
  }

  std::string src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline BracketWord parse_word(const std::string& src) {
  return detail::WordParser(src).parse();
}

/// The Lie algebra element the word denotes.
inline OperatorPoly word_generator(const BracketWord& w, const OperatorPoly& h0, const std::vector<OperatorPoly>& controls) {
  switch (w.kind) {
    case BracketWord::Kind::Control:
      if (w.control < 0 || w.control >= static_cast<int>(controls.size()))
        throw SynthesisError("word references H" + std::to_string(w.control + 1) + " but the system has " +
                             std::to_string(controls.size()) + " controls");
      return controls[static_cast<std::size_t>(w.control)];
    case BracketWord::Kind::Bracket:
      return commutator(word_generator(*w.lhs, h0, controls), word_generator(*w.rhs, h0, controls));
    case BracketWord::Kind::Sum:
      return word_generator(*w.lhs, h0, controls) + word_generator(*w.rhs, h0, controls);
    case BracketWord::Kind::AdH0:
      return commutator(h0, word_generator(*w.lhs, h0, controls));
  }
  throw SynthesisError("unknown word node");
}

struct SynthesisOptions {
  int refinement = 16;        // n for bracket and sum product formulas
  double amplitude = 64.0;    // u for dominated control segments
  double conjugation = 8.0;   // T for ad_{H0} conjugations
};

struct Synthesis {
  BracketWord word;
  OperatorPoly generator;
  double s = 0.0;
  ControlSchedule schedule;
};

namespace detail {

/// Appends segments whose propagator approximates exp(tau * G(word)).
inline void compile_word(const BracketWord& w, double tau, const SynthesisOptions& opt, std::size_t m, ControlSchedule& out) {
  if (tau == 0.0) return;
  switch (w.kind) {
    case BracketWord::Kind::Control: {
      // exp((|tau|/u)(H0 + sign(tau) u Hj)) -> exp(tau Hj) as u grows.
      ControlSegment seg{std::abs(tau) / opt.amplitude, std::vector<double>(m, 0.0)};
      seg.controls[static_cast<std::size_t>(w.control)] = tau > 0 ? opt.amplitude : -opt.amplitude;
      out.segments.push_back(std::move(seg));
      return;
    }
    case BracketWord::Kind::Sum: {
      const double dt = tau / opt.refinement;
      for (int k = 0; k < opt.refinement; ++k) {
        compile_word(*w.rhs, dt, opt, m, out);
        compile_word(*w.lhs, dt, opt, m, out);
      }
      return;
    }
    case BracketWord::Kind::Bracket: {
      // exp(tau[X,Y]) for tau < 0 is exp(|tau|[Y,X]).
      const BracketWord& x = tau > 0 ? *w.lhs : *w.rhs;
      const BracketWord& y = tau > 0 ? *w.rhs : *w.lhs;
      const double h = std::sqrt(std::abs(tau) / opt.refinement);
      for (int k = 0; k < opt.refinement; ++k) {
        compile_word(y, -h, opt, m, out);
        compile_word(x, -h, opt, m, out);
        compile_word(y, h, opt, m, out);
        compile_word(x, h, opt, m, out);
      }
      return;
    }
    case BracketWord::Kind::AdH0: {
      // exp(cA) exp(sigma H0) exp(-cA) = exp(sigma H0 - sigma c [H0, A] + O(sigma c^2)),
      // with sigma = |tau|/T and c = -sign(tau) T.
      const double sigma = std::abs(tau) / opt.conjugation;
      const double c = tau > 0 ? -opt.conjugation : opt.conjugation;
      compile_word(*w.lhs, -c, opt, m, out);
      out.segments.push_back({sigma, std::vector<double>(m, 0.0)});
      compile_word(*w.lhs, c, opt, m, out);
      return;
    }
  }
}

}  // namespace detail

/// Compiles exp(s * G(word)) into forward-time piecewise-constant controls. Control flows use
/// dominated segments, brackets the group-commutator formula, sums the product formula, and
/// ad_{H0} a conjugation of a free-evolution segment.
inline Synthesis synthesize(const BracketWord& word, double s, const OperatorPoly& h0, const std::vector<OperatorPoly>& controls,
                            const SynthesisOptions& opt = {}) {
  if (word.depth() > kMaxWordDepth) throw SynthesisError("word depth " + std::to_string(word.depth()) + " exceeds 3");
  if (opt.refinement < 1 || !(opt.amplitude > 0.0) || !(opt.conjugation > 0.0)) throw SynthesisError("invalid synthesis options");
  OperatorPoly g = word_generator(word, h0, controls);
  if (!g.is_zero() && !is_skew_hermitian(g)) throw SynthesisError("word does not denote a skew-Hermitian element");
  Synthesis out{word, g, s, {}};
  detail::compile_word(word, s, opt, controls.size(), out.schedule);
  return out;
}

}  // namespace qreach
