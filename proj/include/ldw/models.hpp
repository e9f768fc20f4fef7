#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ldw/graph.hpp"
#include "ldw/local_model.hpp"
#include "ldw/matching.hpp"

namespace ldw {

// Law of the i.i.d. noise feeding a model: a finite law, or N(0,1) when
// `finite` is empty.
struct BaseLaw {
  std::string name;
  std::optional<FiniteLaw> finite;

  static BaseLaw rademacher();
  static BaseLaw centered_bernoulli(const Rational& q);  // B - q
  static BaseLaw normal();
  static BaseLaw from_finite(std::string name, FiniteLaw law);
  // "rademacher", "normal" or "bernoulli:<q>".
  static BaseLaw parse(const std::string& text);

  std::function<double(Rng&)> sampler() const;
  double variance() const;
};

// Default declared neighborhood depth: enough for R_1..R_3.
inline constexpr int kDefaultDepth = 4;

// Model X_i = phi_i(factors) from an exact support; A_i = summands sharing a
// factor with X_i, higher levels by union. Standardized exactly.
LocalModel factor_model(std::string name, ExactSupport support, int depth = kDefaultDepth);

// n i.i.d. copies of the base law, A_i = {i}. Standardized.
LocalModel iid_model(std::size_t n, const BaseLaw& base, int depth = kDefaultDepth);

// W exactly N(0,1): a single standard normal summand.
LocalModel gaussian_surrogate_model(int depth = kDefaultDepth);

// X_i = sum_{r=0}^m c_r eps_{i-r}, i = 0..n-1, A_i = {j : |i - j| <= m}.
// Standardized.
LocalModel mdep_model(std::size_t n, int m, const BaseLaw& base,
                      const std::vector<Rational>& coefficients, int depth = kDefaultDepth);

struct UStatSpec {
  std::size_t n = 0;
  int m = 2;
  // mean: sum x / m; product: prod x; mixed: sum x / m + weight (prod x - rho),
  // rho = (E X)^m.
  std::string kernel = "mean";
  Rational weight{1, 10};
  BaseLaw base = BaseLaw::rademacher();
};

// Index set: m-subsets of {0..n-1}; A_i = subsets meeting subset i. The
// kernel is centered exactly (finite base) or by its known mean, rejected if
// g(x) = E(h | X_1 = x) has sample variance below 5 standard errors.
// Standardized: exactly through the zeta_c decomposition of Var for a finite
// base, else by Monte Carlo.
LocalModel ustat_model(const UStatSpec& spec, std::uint64_t seed = 1, int depth = kDefaultDepth);

struct GraphSpec {
  Motif motif;
  int n = 0;
  Rational p;
};

// Index set: copies of G in K_n; X_i = (Y_i - p^e)/sigma; A_i = copies
// sharing an edge with copy i. Standardized by the exact subgraph variance.
LocalModel erg_model(const GraphSpec& spec, int depth = kDefaultDepth);

// Finite law with rational probabilities from a matching construction.
FiniteLaw to_finite_law(const DiscreteLaw& law);

}  // namespace ldw
