#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldw/stein.hpp"

namespace ldw {

// Where a sample came from: a seeded model run or an external file.
struct Provenance {
  std::optional<std::uint64_t> seed;
  std::string source = "external";
};

// Sorted sample of at least two finite values.
class EmpiricalSample {
 public:
  EmpiricalSample(std::vector<double> values, Provenance provenance = {});

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Provenance& provenance() const { return provenance_; }

 private:
  std::vector<double> values_;
  Provenance provenance_;
};

// i.i.d. N(0,1) control sample of size s (stream `stream` of `seed`).
EmpiricalSample normal_control_sample(std::size_t s, std::uint64_t seed, std::uint64_t stream);

// Phi^{-1}((i - 1/2)/s), i = 1..s.
std::vector<double> normal_quantile_grid(std::size_t s);

// Order-statistic coupling; a and b must have the same size.
double empirical_wp(const EmpiricalSample& a, const EmpiricalSample& b, double p);

// Order statistics against the midpoint normal quantiles; needs s >= 100.
double wp_vs_normal(const EmpiricalSample& a, double p);

double kolmogorov_vs_normal(const EmpiricalSample& a);

// max over the family of |mean of f over a - Nf|; every member must be
// declared in Lambda_p.
double zolotarev_lower_bound(const EmpiricalSample& a, int p,
                             const std::vector<TestFunction>& family);

// Exact W_p between a finite law (atoms ascending or not) and N(0,1), by
// integrating |atom - z|^p against the normal density over each atom's
// quantile interval.
double wp_law_vs_normal(std::span<const std::pair<double, double>> law, double p);

}  // namespace ldw
