#include "ldw/rational.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "ldw/error.hpp"

namespace ldw {

namespace {

Rational ten_power(long exponent) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  return exponent >= 0 ? Rational(p) : Rational(mpz_class(1), p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ConfigError("empty rational literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
    Rational q = num / den;
    q.canonicalize();
    return q;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (; pos < s.size() && s[pos] != 'e' && s[pos] != 'E'; ++pos) {
    char c = s[pos];
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else {
      throw ConfigError("malformed rational literal '" + s + "'");
    }
  }
  if (digits.empty()) throw ConfigError("malformed rational literal '" + s + "'");
  long exponent = 0;
  if (pos < s.size()) {
    std::string exp_text = s.substr(pos + 1);
    try {
      std::size_t used = 0;
      exponent = std::stol(exp_text, &used);
      if (used != exp_text.size()) throw ConfigError("bad exponent");
    } catch (const std::exception&) {
      throw ConfigError("malformed exponent in '" + s + "'");
    }
  }
  Rational q{mpz_class(digits, 10)};
  q *= ten_power(exponent - frac_digits);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  Rational b = base;
  while (exponent) {
    if (exponent & 1u) result *= b;
    b *= b;
    exponent >>= 1u;
  }
  return result;
}

Surd::Surd(Rational a, Rational b, std::uint64_t radicand)
    : a_(std::move(a)), b_(std::move(b)), d_(radicand) {
  require(radicand >= 1, "surd radicand must be positive");
  normalize();
}

Surd Surd::sqrt_of(std::uint64_t n) {
  require(n >= 1, "sqrt_of requires n >= 1");
  std::uint64_t k = 1, d = 1, m = n;
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    while (m % (p * p) == 0) {
      m /= p * p;
      k *= p;
    }
    if (m % p == 0) {
      m /= p;
      d *= p;
    }
  }
  d *= m;
  return Surd(Rational(0), Rational(static_cast<unsigned long>(k)), d);
}

void Surd::normalize() {
  a_.canonicalize();
  b_.canonicalize();
  if (d_ == 1) {
    a_ += b_;
    b_ = 0;
  }
  if (b_ == 0) d_ = 1;
}

int Surd::sign() const {
  int sa = sgn(a_), sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: compare a^2 against b^2 d.
  Rational lhs = a_ * a_;
  Rational rhs = b_ * b_ * Rational(static_cast<unsigned long>(d_));
  int c = cmp(lhs, rhs);
  return c == 0 ? 0 : (c > 0 ? sa : sb);
}

double Surd::to_double() const {
  return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(d_));
}

std::string Surd::to_string() const {
  if (d_ == 1) return ldw::to_string(a_);
  std::ostringstream out;
  if (sgn(a_) == 0)
    out << (sgn(b_) < 0 ? "-" : "");
  else
    out << ldw::to_string(a_) << (sgn(b_) < 0 ? " - " : " + ");
  out << ldw::to_string(abs(b_)) << "*sqrt(" << d_ << ")";
  return out.str();
}

namespace {

std::uint64_t common_radicand(const Surd& x, const Surd& y) {
  if (x.radicand() == 1) return y.radicand();
  if (y.radicand() == 1 || x.radicand() == y.radicand()) return x.radicand();
  throw ConfigError("surd arithmetic across different radicands");
}

}  // namespace

Surd Surd::operator-() const { return Surd(-a_, -b_, d_); }

Surd operator+(const Surd& x, const Surd& y) {
  return Surd(x.a_ + y.a_, x.b_ + y.b_, common_radicand(x, y));
}

Surd operator-(const Surd& x, const Surd& y) {
  return Surd(x.a_ - y.a_, x.b_ - y.b_, common_radicand(x, y));
}

Surd operator*(const Surd& x, const Surd& y) {
  std::uint64_t d = common_radicand(x, y);
  Rational dq(static_cast<unsigned long>(d));
  return Surd(x.a_ * y.a_ + x.b_ * y.b_ * dq, x.a_ * y.b_ + x.b_ * y.a_, d);
}

bool operator==(const Surd& x, const Surd& y) { return (x - y).sign() == 0; }

}  // namespace ldw
