#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldw/neighborhood.hpp"
#include "ldw/rational.hpp"
#include "ldw/rng.hpp"

namespace ldw {

enum class Mode { exact, mc };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

// Finitely supported law with rational atoms and probabilities.
struct FiniteLaw {
  std::vector<Rational> atoms;
  std::vector<Rational> probs;

  // Validates sizes, nonnegativity and that the probabilities sum to one.
  static FiniteLaw make(std::vector<Rational> atoms, std::vector<Rational> probs);
  static FiniteLaw rademacher();
  static FiniteLaw bernoulli(const Rational& q);  // atoms {0, 1}

  std::size_t size() const noexcept { return atoms.size(); }
  Rational moment(unsigned k) const;
  Rational absolute_moment(unsigned k) const;
  Rational mean() const { return moment(1); }
  FiniteLaw centered() const;
};

// Double-precision sampler for a FiniteLaw. Fair two-point laws consume one
// random bit per draw; everything else uses inverse-CDF on a 53-bit uniform.
class FiniteLawSampler {
 public:
  explicit FiniteLawSampler(const FiniteLaw& law);
  double operator()(Rng& rng) const;

 private:
  std::vector<double> atoms_;
  std::vector<double> cumulative_;
  bool fair_coin_ = false;
};

// Exact description of a model: independent finite factors, and each summand
// X_i (before scaling) a rational function of the factors it depends on.
struct ExactSupport {
  using Summand = std::function<Rational(Index i, std::span<const Rational> factor_values)>;

  std::vector<FiniteLaw> factors;
  // dependencies[i]: sorted factor ids that summand i reads, in the order its
  // values are passed to `summand`.
  std::vector<std::vector<std::uint32_t>> dependencies;
  Summand summand;

  double log2_joint_outcomes() const;
  double log2_outcomes(std::span<const std::uint32_t> factor_ids) const;
};

// Enumeration caps: at most 2^25 outcomes per expectation.
inline constexpr double kMaxLog2Outcomes = 25.0;

// E[prod X_{indices}] (or of |X|) in raw units, enumerating only the factors
// that the listed summands depend on.
Rational exact_expectation(const ExactSupport& support, std::span<const Index> indices,
                           bool absolute);

// Calls visit(probability, raw summand values) for every joint outcome.
void for_each_joint_outcome(const ExactSupport& support,
                            const std::function<void(const Rational&, std::span<const Rational>)>& visit);

using Sampler = std::function<void(Rng& rng, std::span<double> raw)>;
using SumSampler = std::function<double(Rng& rng)>;

// Finite locally dependent field {X_i} with W = sum X_i. Values are stored raw
// and multiplied by scale() on output; standardize() picks the scale that
// makes Var(W) = 1. Immutable and cheap to copy.
class LocalModel {
 public:
  struct Parts {
    std::string name;
    std::size_t size = 0;
    NeighborhoodSystem neighborhoods;
    Sampler sampler;
    SumSampler sum_sampler;               // optional fast path for raw W
    std::optional<ExactSupport> exact;
  };

  explicit LocalModel(Parts parts);

  const std::string& name() const { return core_->name; }
  IndexSet index_set() const { return IndexSet(core_->size); }
  std::size_t size() const { return core_->size; }
  const NeighborhoodSystem& neighborhoods() const { return neighborhoods_; }
  bool has_exact_support() const { return core_->exact.has_value(); }
  const ExactSupport& exact_support() const;

  double scale() const { return scale_; }
  bool standardized() const { return standardized_; }
  Mode scale_mode() const { return scale_mode_; }
  double scale_std_error() const { return scale_std_error_; }
  // Raw Var(W) when the scale was set by exact enumeration.
  const std::optional<Rational>& raw_variance() const { return raw_variance_; }

  void sample_raw(Rng& rng, std::span<double> raw) const;
  void sample(Rng& rng, std::span<double> x) const;
  double sample_sum(Rng& rng) const;

  LocalModel with_neighborhoods(NeighborhoodSystem system) const;
  LocalModel with_scale(double scale, Mode mode, double std_error,
                        std::optional<Rational> raw_variance) const;

 private:
  struct Core {
    std::string name;
    std::size_t size;
    Sampler sampler;
    SumSampler sum_sampler;
    std::optional<ExactSupport> exact;
  };

  std::shared_ptr<const Core> core_;
  NeighborhoodSystem neighborhoods_;
  double scale_ = 1.0;
  bool standardized_ = false;
  Mode scale_mode_ = Mode::mc;
  double scale_std_error_ = 0.0;
  std::optional<Rational> raw_variance_;
};

// Raw Var(W) = sum over pairs of summands sharing a factor of E[X_i X_j].
// Throws if some summand is not exactly centered.
Rational exact_raw_variance(const ExactSupport& support);

// Sets the scale so that Var(W) = 1. Exact mode enumerates the exact support;
// mc mode draws batches until the scale's standard error is below `precision`.
LocalModel standardize(const LocalModel& model, Mode mode, double precision = 1e-3,
                       std::uint64_t seed = 0x5eed);

struct IndependenceCheck {
  std::optional<double> z;   // studentized covariance; empty when degenerate
  bool degenerate = false;   // X_i has zero sample variance
  double covariance = 0.0;
  double std_error = 0.0;
};

// Studentized sample covariance between X_i and sum_{j not in A_i} X_j.
IndependenceCheck empirical_independence_check(const LocalModel& model, Index i,
                                               std::uint64_t replicates, std::uint64_t seed);

// Exact Cov(X_i, sum_{j not in A_i} X_j) in raw units.
Rational exact_outside_covariance(const LocalModel& model, Index i);

// Law of raw W as sorted (value, probability) atoms. Models whose summands
// each read a single factor are convolved factor by factor; others are
// enumerated jointly (subject to the outcome cap).
std::vector<std::pair<Rational, Rational>> exact_sum_law(const ExactSupport& support);

}  // namespace ldw
