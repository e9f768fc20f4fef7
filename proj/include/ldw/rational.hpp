#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace ldw {

using Rational = mpq_class;

// Parses "3", "-7/20", "0.125" or "1.5e-3" into an exact rational.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

Rational pow(const Rational& base, unsigned exponent);

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational abs(const Rational& q) { return Rational(::abs(q)); }

// Element a + b*sqrt(d) of Q[sqrt(d)] with d a squarefree positive integer.
// d == 1 is the rational case and keeps b == 0.
class Surd {
 public:
  Surd() = default;
  Surd(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  Surd(Rational a, Rational b, std::uint64_t radicand);

  // sqrt(n) written as k*sqrt(d) with d squarefree.
  static Surd sqrt_of(std::uint64_t n);

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  std::uint64_t radicand() const { return d_; }

  // Exact sign: -1, 0 or +1.
  int sign() const;
  double to_double() const;
  std::string to_string() const;

  Surd operator-() const;
  friend Surd operator+(const Surd& x, const Surd& y);
  friend Surd operator-(const Surd& x, const Surd& y);
  friend Surd operator*(const Surd& x, const Surd& y);
  friend bool operator==(const Surd& x, const Surd& y);

  Surd& operator+=(const Surd& y) { return *this = *this + y; }
  Surd& operator*=(const Surd& y) { return *this = *this * y; }

 private:
  void normalize();

  Rational a_{0};
  Rational b_{0};
  std::uint64_t d_ = 1;
};

inline bool operator<(const Surd& x, const Surd& y) { return (x - y).sign() < 0; }
inline bool operator<=(const Surd& x, const Surd& y) { return (x - y).sign() <= 0; }

}  // namespace ldw
