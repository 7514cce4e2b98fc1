#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qreach {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Exact Gaussian rational a + b i used for every symbolic coefficient.
struct Coeff {
  Rational re{0};
  Rational im{0};

  Coeff() = default;
  Coeff(Rational r) : re(std::move(r)) {}
  Coeff(long long r) : re(r) {}
  Coeff(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  static Coeff imag_unit() { return Coeff(Rational(0), Rational(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  Coeff conj() const { return Coeff(re, -im); }

  Coeff operator-() const { return Coeff(-re, -im); }
  Coeff& operator+=(const Coeff& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Coeff& operator-=(const Coeff& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Coeff& operator*=(const Coeff& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  Coeff& operator/=(const Coeff& o) {
    Rational den = o.re * o.re + o.im * o.im;
    if (den == 0) throw std::domain_error("division by zero coefficient");
    Rational r = (re * o.re + im * o.im) / den;
    Rational i = (im * o.re - re * o.im) / den;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }

  friend Coeff operator+(Coeff a, const Coeff& b) { return a += b; }
  friend Coeff operator-(Coeff a, const Coeff& b) { return a -= b; }
  friend Coeff operator*(Coeff a, const Coeff& b) { return a *= b; }
  friend Coeff operator/(Coeff a, const Coeff& b) { return a /= b; }
  friend bool operator==(const Coeff& a, const Coeff& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const Coeff& a, const Coeff& b) { return !(a == b); }

  std::complex<double> to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
};

inline std::string rational_to_string(const Rational& r) {
  return r.str();
}

/// Parses a plain decimal literal ("12", "0.25", "1e-3") into an exact rational.
inline Rational parse_decimal(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty numeric literal");
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  long long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed numeric literal '" + std::string(text) + "'");
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E')
      throw std::invalid_argument("malformed numeric literal '" + std::string(text) + "'");
    ++pos;
    long long e = 0;
    auto tail = text.substr(pos);
    if (!tail.empty() && tail.front() == '+') tail.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), e);
    if (ec != std::errc{} || ptr != tail.data() + tail.size())
      throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
    exponent += e;
  }
  boost::multiprecision::cpp_int mantissa(digits);
  boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                    static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  Rational value = exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
  return negative ? Rational(-value) : value;
}

/// Converts a double via its shortest round-trip decimal form, so 0.1 maps to 1/10.
inline Rational rational_from_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::invalid_argument("cannot format double");
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

}  // namespace qreach
