#include "ldw/matching.hpp"

#include <cmath>

#include "ldw/error.hpp"
#include "ldw/rng.hpp"

namespace ldw {

Surd DiscreteLaw::moment(unsigned k) const {
  Surd total;
  for (std::size_t a = 0; a < atoms.size(); ++a) total += probs[a] * Surd(pow(atoms[a], k));
  return total;
}

Surd DiscreteLaw::total_mass() const {
  Surd total;
  for (const auto& p : probs) total += p;
  return total;
}

std::vector<double> DiscreteLaw::probabilities() const {
  std::vector<double> out;
  for (const auto& p : probs) out.push_back(p.to_double());
  return out;
}

namespace {

Rational floor_ratio(const Rational& num, const Rational& den) {
  Rational q = num / den;
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(f);
}

std::uint64_t to_count(const Rational& q) {
  require(q.get_den() == 1 && sgn(q) >= 0 && q.get_num().fits_ulong_p(),
          "selected n is out of range");
  return q.get_num().get_ui();
}

bool feasible(const std::vector<Surd>& probs) {
  for (const auto& p : probs)
    if (p.sign() < 0 || (Surd(Rational(1)) - p).sign() < 0) return false;
  return true;
}

}  // namespace

DiscreteLaw four_point_law(const Rational& beta) {
  require(abs(beta) <= 1, "beta = " + to_string(beta) + " is outside the construction regime |beta| <= 1");
  DiscreteLaw law;
  law.atoms = {Rational(-3, 2), Rational(-1, 2), Rational(1, 2), Rational(3, 2)};
  law.c2 = Rational(1, 4);
  Surd x;  // sqrt(n) beta
  if (sgn(beta) != 0) {
    Rational n = floor_ratio(law.c2, beta * beta);
    if (sgn(n) == 0)
      throw ConfigError("beta = " + to_string(beta) + " gives n = 0; the construction needs |beta| <= 1/2");
    law.n_selected = to_count(n);
    x = Surd::sqrt_of(*law.n_selected) * Surd(beta);
  }
  law.probs = {Surd(Rational(3, 16)) - x * Surd(Rational(1, 6)),
               Surd(Rational(5, 16)) + x * Surd(Rational(1, 2)),
               Surd(Rational(5, 16)) - x * Surd(Rational(1, 2)),
               Surd(Rational(3, 16)) + x * Surd(Rational(1, 6))};
  if (!feasible(law.probs)) throw NumericalError("four-point law is not a probability distribution");
  return law;
}

DiscreteLaw five_point_law(const Rational& kappa3, const Rational& kappa4) {
  DiscreteLaw law;
  law.atoms = {Rational(-2), Rational(-1), Rational(0), Rational(1), Rational(2)};
  auto build = [&](const Surd& x, const Surd& y) {
    auto r = [](long num, long den) { return Surd(Rational(num, den)); };
    return std::vector<Surd>{r(1, 12) + (r(-2, 1) * x + y) * r(1, 24),
                             r(1, 6) + (x - y) * r(1, 6),
                             r(1, 2) + y * r(1, 4),
                             r(1, 6) - (x + y) * r(1, 6),
                             r(1, 12) + (r(2, 1) * x + y) * r(1, 24)};
  };
  if (sgn(kappa3) == 0 && sgn(kappa4) == 0) {
    law.c2 = Rational(1, 10);
    law.probs = build(Surd(), Surd());
    return law;
  }
  const Rational floor_c(1, 1000000);
  for (Rational c(1, 10); c >= floor_c; c /= 2) {
    std::optional<Rational> n;
    if (sgn(kappa3) != 0) n = floor_ratio(c, kappa3 * kappa3);
    if (sgn(kappa4) != 0) {
      Rational n4 = floor_ratio(c, abs(kappa4));
      if (!n || n4 < *n) n = n4;
    }
    if (sgn(*n) == 0)
      throw ConfigError("cumulants (" + to_string(kappa3) + ", " + to_string(kappa4) +
                        ") give n = 0; they are outside the construction regime");
    std::uint64_t count = to_count(*n);
    Surd x = Surd::sqrt_of(count) * Surd(kappa3);
    Surd y(Rational(*n * kappa4));
    auto probs = build(x, y);
    if (feasible(probs)) {
      law.c2 = c;
      law.n_selected = count;
      law.probs = std::move(probs);
      return law;
    }
  }
  throw NumericalError("five-point law infeasible for every c2 down to 1e-6");
}

LawCumulants law_cumulants(const DiscreteLaw& law, int max_order) {
  require(max_order >= 1 && max_order <= 4, "law cumulants are available up to order 4");
  Surd m1 = law.moment(1), m2 = law.moment(2), m3 = law.moment(3), m4 = law.moment(4);
  LawCumulants c;
  c.mean = m1;
  c.variance = m2 - m1 * m1;
  c.kappa3 = m3 - Surd(Rational(3)) * m1 * m2 + Surd(Rational(2)) * m1 * m1 * m1;
  c.kappa4 = m4 - Surd(Rational(4)) * m3 * m1 - Surd(Rational(3)) * m2 * m2 +
             Surd(Rational(12)) * m2 * m1 * m1 - Surd(Rational(6)) * m1 * m1 * m1 * m1;
  if (max_order < 4) c.kappa4 = Surd();
  if (max_order < 3) c.kappa3 = Surd();
  return c;
}

EmpiricalSample sample_vn(const DiscreteLaw& law, std::size_t draws, std::uint64_t seed) {
  std::vector<double> values(draws);
  if (!law.n_selected) {
    for (std::size_t r = 0; r < draws; ++r) {
      Rng rng(seed, r);
      values[r] = rng.normal();
    }
    return EmpiricalSample(std::move(values), {seed, "normal"});
  }
  std::vector<double> atoms, cumulative;
  double running = 0.0;
  for (std::size_t a = 0; a < law.atoms.size(); ++a) {
    atoms.push_back(law.atoms[a].get_d());
    running += law.probs[a].to_double();
    cumulative.push_back(running);
  }
  cumulative.back() = 1.0;
  const std::uint64_t n = *law.n_selected;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < draws; ++r) {
    Rng rng(seed, r);
    double total = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      double u = rng.uniform();
      std::size_t a = 0;
      while (a + 1 < cumulative.size() && u >= cumulative[a]) ++a;
      total += atoms[a];
    }
    values[r] = scale * total;
  }
  return EmpiricalSample(std::move(values), {seed, "matching-law"});
}

}  // namespace ldw
