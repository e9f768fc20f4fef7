#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ldw/local_model.hpp"

namespace ldw {

// Exact value in raw units: the scaled value is raw * scale^degree, so
// identities between terms of equal degree can be checked on `raw` alone.
struct ExactValue {
  Rational raw;
  unsigned degree = 0;
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 in exact mode
  Mode mode = Mode::exact;
  std::uint64_t n_replicates = 0;
  std::optional<ExactValue> exact;
};

struct McOptions {
  std::uint64_t seed = 1;
  std::uint64_t replicates = 100000;
};

// scale^degree applied to an exact raw value.
MomentEstimate from_exact(const LocalModel& model, Rational raw, unsigned degree);

// E[prod X_i] or E[prod |X_i|] over the listed indices (repeats allowed).
MomentEstimate mixed_moment(const LocalModel& model, std::span<const Index> indices, bool absolute,
                            Mode mode, const McOptions& mc = {});

struct SumCumulants {
  MomentEstimate kappa3;
  std::optional<MomentEstimate> kappa4;
};

// kappa3 = E W^3 and kappa4 = E W^4 - 3 of a standardized model.
SumCumulants cumulants_of_sum(const LocalModel& model, int max_order, Mode mode,
                              const McOptions& mc = {});

// Memoized exact moments keyed by the sorted index multiset.
class ExactMomentCache {
 public:
  explicit ExactMomentCache(const ExactSupport& support) : support_(&support) {}

  const Rational& get(std::span<const Index> indices, bool absolute);

 private:
  const ExactSupport* support_;
  std::map<std::pair<bool, std::vector<Index>>, Rational> cache_;
  std::vector<Index> key_;
};

}  // namespace ldw
