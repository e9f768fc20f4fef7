#pragma once

#include <vector>

namespace ldw {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);
// Phi^{-1}(p) for 0 < p < 1.
double normal_quantile(double p);

// Gauss-Hermite rule for E f(Z), Z ~ N(0,1): sum_k weights[k] f(nodes[k]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached per order (Golub-Welsch on the probabilists' Hermite recurrence).
const GaussHermiteRule& gauss_hermite(int order);

}  // namespace ldw
