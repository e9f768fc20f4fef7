#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ldw/distances.hpp"
#include "ldw/rational.hpp"

namespace ldw {

// Finite law with rational atoms and probabilities in Q[sqrt(n)]. The
// matching constructions carry sqrt(n) symbolically so their moment
// identities hold exactly.
struct DiscreteLaw {
  std::vector<Rational> atoms;
  std::vector<Surd> probs;
  // Number of i.i.d. copies V_n averages over; empty on the degenerate path
  // where V_n is taken to be exactly N(0,1).
  std::optional<std::uint64_t> n_selected;
  Rational c2;

  Surd moment(unsigned k) const;
  Surd total_mass() const;
  std::vector<double> probabilities() const;
};

struct LawCumulants {
  Surd mean, variance, kappa3, kappa4;
};

// Four-point law on {-3/2, -1/2, 1/2, 3/2} with n = floor(beta^{-2}/4) and
// E xi^3 = sqrt(n) beta. Requires |beta| <= 1 and n >= 1 (|beta| <= 1/2).
DiscreteLaw four_point_law(const Rational& beta);

// Five-point law on {-2, ..., 2} with n = floor(c/k3^2) min floor(c/|k4|),
// c = 1/10 halved until every probability lies in [0, 1]; kappa3(xi) =
// sqrt(n) k3 and kappa4(xi) = n k4.
DiscreteLaw five_point_law(const Rational& kappa3, const Rational& kappa4);

LawCumulants law_cumulants(const DiscreteLaw& law, int max_order = 4);

// `draws` i.i.d. values of V_n = n^{-1/2} sum xi_i (standard normal draws on
// the degenerate path).
EmpiricalSample sample_vn(const DiscreteLaw& law, std::size_t draws, std::uint64_t seed);

}  // namespace ldw
