#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ldw/moments.hpp"

namespace ldw {

// Constant-free bound terms. Every functional below is the quantity the
// corresponding normal-approximation bound multiplies by an unspecified
// universal constant; no constant is ever applied here.
struct BoundReport {
  Mode mode = Mode::exact;
  MomentEstimate beta;
  MomentEstimate gamma1, gamma2, gamma3;
  std::map<int, MomentEstimate> r_m;
  double functional_w2 = 0.0;
  std::optional<double> functional_wp;
  std::uint64_t term_count = 0;  // index tuples summed for beta and the gammas
};

// beta over chains i, j in A_i, k in A_i (plus twice k in A_ij \ A_i), and
// the gammas over chains i, j in A_i, k in A_ij, l in A_ijk:
//   gamma1 = sum E|X_i X_j X_k X_l|
//   gamma2 = sum E|X_i X_j| E|X_k X_l|
//   gamma3 = sum E|X_i X_j X_k| E|X_l|
// Needs neighborhoods to depth 3. MC mode draws the second factor of gamma2
// and gamma3 from an independent stream.
BoundReport theorem1_terms(const LocalModel& model, Mode mode, const McOptions& mc = {});

// |beta| + (gamma1 + gamma2 + gamma3)^{1/2}.
double w2_bound_functional(const BoundReport& report);

// m^2 sum E|X_i|^3 + m^{3/2} (sum E X_i^4)^{1/2}, for m >= 1.
double mdep_bound_functional(std::span<const double> third_moments,
                             std::span<const double> fourth_moments, int m);

// Expectation breaks in a product of m + 2 absolute factors at 0-based
// positions 0..m+1. The leading expectation always covers positions 0 and 1;
// each break b opens a new expectation at position b; breaks lie in {2..m+1}
// and consecutive breaks differ by at least 2.
struct EPlacement {
  int m = 1;
  std::vector<int> breaks;
};

// All placements for 1 <= m <= 12, ordered by number of breaks and then
// lexicographically. There are Fib(m + 2) of them.
std::vector<EPlacement> enumerate_e_placements(int m);

// Sum over chains i1 in I, i2 in A_{i1}, ..., i_{m+2} in A_{i1..i_{m+1}} and
// over placements of the product of per-segment absolute moments.
MomentEstimate compute_Rm(const LocalModel& model, int m, Mode mode, const McOptions& mc = {});

// sum_{m=1}^p R_m^{1/m}, 1 <= p <= 4.
double wp_conjecture_functional(const LocalModel& model, int p, Mode mode,
                                const McOptions& mc = {});

// (sum E|xi_i|^{p+2})^{1/p} for independent summands.
double iid_wp_bound(std::span<const double> abs_moments_p_plus_2, double p);

}  // namespace ldw
