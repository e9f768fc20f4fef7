#include "ldw/local_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ldw/error.hpp"
#include "ldw/summary.hpp"

namespace ldw {

std::string to_string(Mode mode) { return mode == Mode::exact ? "exact" : "mc"; }

Mode parse_mode(const std::string& text) {
  if (text == "exact") return Mode::exact;
  if (text == "mc") return Mode::mc;
  throw ConfigError("unknown estimation mode '" + text + "' (expected exact|mc)");
}

FiniteLaw FiniteLaw::make(std::vector<Rational> atoms, std::vector<Rational> probs) {
  require(!atoms.empty(), "finite law needs at least one atom");
  require(atoms.size() == probs.size(), "finite law atoms/probabilities size mismatch");
  Rational total(0);
  for (const auto& p : probs) {
    require(sgn(p) >= 0, "finite law probability is negative");
    total += p;
  }
  require(total == 1, "finite law probabilities sum to " + to_string(total) + ", not 1");
  return FiniteLaw{std::move(atoms), std::move(probs)};
}

FiniteLaw FiniteLaw::rademacher() {
  return make({Rational(-1), Rational(1)}, {Rational(1, 2), Rational(1, 2)});
}

FiniteLaw FiniteLaw::bernoulli(const Rational& q) {
  require(sgn(q) >= 0 && q <= 1, "Bernoulli parameter outside [0,1]");
  return make({Rational(0), Rational(1)}, {Rational(1 - q), q});
}

Rational FiniteLaw::moment(unsigned k) const {
  Rational m(0);
  for (std::size_t a = 0; a < atoms.size(); ++a) m += probs[a] * pow(atoms[a], k);
  return m;
}

Rational FiniteLaw::absolute_moment(unsigned k) const {
  Rational m(0);
  for (std::size_t a = 0; a < atoms.size(); ++a) m += probs[a] * pow(abs(atoms[a]), k);
  return m;
}

FiniteLaw FiniteLaw::centered() const {
  Rational mu = mean();
  FiniteLaw out = *this;
  for (auto& a : out.atoms) a -= mu;
  return out;
}

FiniteLawSampler::FiniteLawSampler(const FiniteLaw& law) {
  double running = 0.0;
  for (std::size_t a = 0; a < law.size(); ++a) {
    atoms_.push_back(law.atoms[a].get_d());
    running += law.probs[a].get_d();
    cumulative_.push_back(running);
  }
  cumulative_.back() = 1.0;
  fair_coin_ = law.size() == 2 && law.probs[0] == Rational(1, 2);
}

double FiniteLawSampler::operator()(Rng& rng) const {
  if (fair_coin_) return atoms_[rng.rademacher() > 0 ? 1 : 0];
  double u = rng.uniform();
  std::size_t a = 0;
  while (a + 1 < cumulative_.size() && u >= cumulative_[a]) ++a;
  return atoms_[a];
}

double ExactSupport::log2_outcomes(std::span<const std::uint32_t> factor_ids) const {
  double bits = 0.0;
  for (auto f : factor_ids) bits += std::log2(static_cast<double>(factors.at(f).size()));
  return bits;
}

double ExactSupport::log2_joint_outcomes() const {
  double bits = 0.0;
  for (const auto& f : factors) bits += std::log2(static_cast<double>(f.size()));
  return bits;
}

namespace {

void check_outcome_cap(double log2_outcomes) {
  if (log2_outcomes > kMaxLog2Outcomes + 1e-9)
    throw NumericalError("exact enumeration needs 2^" + std::to_string(log2_outcomes) +
                         " outcomes, above the 2^25 cap");
}

}  // namespace

Rational exact_expectation(const ExactSupport& support, std::span<const Index> indices,
                           bool absolute) {
  require(!indices.empty(), "expectation of an empty product");
  std::vector<std::pair<Index, unsigned>> terms;
  {
    std::vector<Index> sorted(indices.begin(), indices.end());
    std::sort(sorted.begin(), sorted.end());
    for (Index i : sorted) {
      require(i < support.dependencies.size(), "summand index out of range");
      if (!terms.empty() && terms.back().first == i)
        ++terms.back().second;
      else
        terms.push_back({i, 1});
    }
  }
  std::vector<std::uint32_t> factors;
  for (const auto& [i, mult] : terms) {
    const auto& deps = support.dependencies[i];
    factors.insert(factors.end(), deps.begin(), deps.end());
  }
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  check_outcome_cap(support.log2_outcomes(factors));

  const std::size_t depth = factors.size();
  std::vector<std::vector<std::size_t>> positions(terms.size());
  std::vector<std::vector<Rational>> args(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (auto f : support.dependencies[terms[t].first])
      positions[t].push_back(static_cast<std::size_t>(
          std::lower_bound(factors.begin(), factors.end(), f) - factors.begin()));
    args[t].resize(positions[t].size());
  }

  std::vector<std::size_t> state(depth, 0);
  std::vector<Rational> prefix(depth + 1);
  prefix[0] = 1;
  for (std::size_t d = 0; d < depth; ++d)
    prefix[d + 1] = prefix[d] * support.factors[factors[d]].probs[0];

  Rational total(0), product, value;
  while (true) {
    if (sgn(prefix[depth]) != 0) {
      product = prefix[depth];
      for (std::size_t t = 0; t < terms.size(); ++t) {
        for (std::size_t r = 0; r < positions[t].size(); ++r) {
          std::size_t d = positions[t][r];
          args[t][r] = support.factors[factors[d]].atoms[state[d]];
        }
        value = support.summand(terms[t].first, args[t]);
        if (absolute && sgn(value) < 0) value = -value;
        for (unsigned m = 0; m < terms[t].second; ++m) product *= value;
        if (sgn(product) == 0) break;
      }
      total += product;
    }
    std::size_t d = depth;
    while (d > 0) {
      --d;
      if (++state[d] < support.factors[factors[d]].size()) break;
      state[d] = 0;
      if (d == 0) {
        d = depth + 1;
        break;
      }
    }
    if (d > depth || depth == 0) break;
    for (std::size_t e = d; e < depth; ++e)
      prefix[e + 1] = prefix[e] * support.factors[factors[e]].probs[state[e]];
  }
  return total;
}

void for_each_joint_outcome(
    const ExactSupport& support,
    const std::function<void(const Rational&, std::span<const Rational>)>& visit) {
  check_outcome_cap(support.log2_joint_outcomes());
  const std::size_t depth = support.factors.size();
  const std::size_t n = support.dependencies.size();
  std::vector<std::size_t> state(depth, 0);
  std::vector<Rational> prefix(depth + 1);
  prefix[0] = 1;
  for (std::size_t d = 0; d < depth; ++d) prefix[d + 1] = prefix[d] * support.factors[d].probs[0];
  std::vector<std::vector<Rational>> args(n);
  for (std::size_t i = 0; i < n; ++i) args[i].resize(support.dependencies[i].size());
  std::vector<Rational> values(n);
  while (true) {
    if (sgn(prefix[depth]) != 0) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& deps = support.dependencies[i];
        for (std::size_t r = 0; r < deps.size(); ++r)
          args[i][r] = support.factors[deps[r]].atoms[state[deps[r]]];
        values[i] = support.summand(static_cast<Index>(i), args[i]);
      }
      visit(prefix[depth], values);
    }
    std::size_t d = depth;
    bool done = depth == 0;
    while (!done) {
      --d;
      if (++state[d] < support.factors[d].size()) break;
      state[d] = 0;
      if (d == 0) done = true;
    }
    if (done) break;
    for (std::size_t e = d; e < depth; ++e)
      prefix[e + 1] = prefix[e] * support.factors[e].probs[state[e]];
  }
}

LocalModel::LocalModel(Parts parts)
    : neighborhoods_(std::move(parts.neighborhoods)) {
  require(parts.size > 0, "model needs a nonempty index set");
  require(neighborhoods_.size() == parts.size, "neighborhood system size does not match model");
  require(static_cast<bool>(parts.sampler), "model sampler is empty");
  if (parts.exact) {
    require(parts.exact->dependencies.size() == parts.size,
            "exact support must describe every summand");
    require(static_cast<bool>(parts.exact->summand), "exact support summand map is empty");
    for (const auto& deps : parts.exact->dependencies)
      for (auto f : deps) require(f < parts.exact->factors.size(), "dependency on unknown factor");
  }
  core_ = std::make_shared<const Core>(Core{std::move(parts.name), parts.size, std::move(parts.sampler),
                                            std::move(parts.sum_sampler), std::move(parts.exact)});
}

const ExactSupport& LocalModel::exact_support() const {
  if (!core_->exact) throw ConfigError("model '" + core_->name + "' has no exact support");
  return *core_->exact;
}

void LocalModel::sample_raw(Rng& rng, std::span<double> raw) const {
  require(raw.size() == core_->size, "sample buffer has the wrong size");
  core_->sampler(rng, raw);
}

void LocalModel::sample(Rng& rng, std::span<double> x) const {
  sample_raw(rng, x);
  for (double& v : x) v *= scale_;
}

double LocalModel::sample_sum(Rng& rng) const {
  if (core_->sum_sampler) return scale_ * core_->sum_sampler(rng);
  thread_local std::vector<double> buffer;
  buffer.resize(core_->size);
  core_->sampler(rng, buffer);
  double total = 0.0;
  for (double v : buffer) total += v;
  return scale_ * total;
}

LocalModel LocalModel::with_neighborhoods(NeighborhoodSystem system) const {
  require(system.size() == core_->size, "neighborhood system size does not match model");
  LocalModel copy = *this;
  copy.neighborhoods_ = std::move(system);
  return copy;
}

LocalModel LocalModel::with_scale(double scale, Mode mode, double std_error,
                                  std::optional<Rational> raw_variance) const {
  require(std::isfinite(scale) && scale > 0, "scale must be positive and finite");
  LocalModel copy = *this;
  copy.scale_ = scale;
  copy.standardized_ = true;
  copy.scale_mode_ = mode;
  copy.scale_std_error_ = std_error;
  copy.raw_variance_ = std::move(raw_variance);
  return copy;
}

Rational exact_raw_variance(const ExactSupport& support) {
  const std::size_t n = support.dependencies.size();
  std::vector<std::vector<Index>> users(support.factors.size());
  for (std::size_t i = 0; i < n; ++i)
    for (auto f : support.dependencies[i]) users[f].push_back(static_cast<Index>(i));

  Rational total(0);
  std::vector<Index> partners;
  for (Index i = 0; i < n; ++i) {
    Index single[] = {i};
    if (exact_expectation(support, single, false) != 0)
      throw ConfigError("summand " + std::to_string(i) + " is not centered");
    partners.clear();
    for (auto f : support.dependencies[i])
      for (Index j : users[f])
        if (j >= i) partners.push_back(j);
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    for (Index j : partners) {
      Index pair[] = {i, j};
      Rational term = exact_expectation(support, pair, false);
      total += (j == i) ? term : Rational(2 * term);
    }
  }
  return total;
}

LocalModel standardize(const LocalModel& model, Mode mode, double precision, std::uint64_t seed) {
  if (mode == Mode::exact) {
    Rational variance = exact_raw_variance(model.exact_support());
    if (sgn(variance) <= 0) throw NumericalError("degenerate sum: Var(W) = 0");
    return model.with_scale(1.0 / std::sqrt(variance.get_d()), Mode::exact, 0.0, variance);
  }
  require(precision > 0, "standardize precision must be positive");
  constexpr std::uint64_t kMaxReplicates = std::uint64_t{1} << 22;
  // Squares of W at the model's current scale, appended batch by batch.
  std::vector<double> squares;
  double current = model.scale();
  std::uint64_t target = 4096;
  while (true) {
    std::uint64_t start = squares.size();
    squares.resize(target);
    for (std::uint64_t r = start; r < target; ++r) {
      Rng rng(seed, stream_id(r, 7));
      double w = model.sample_sum(rng);
      squares[r] = w * w;
    }
    Summary s = summarize(squares);
    if (s.mean <= 0.0) throw NumericalError("degenerate sum: Var(W) = 0");
    double scale = current / std::sqrt(s.mean);
    double scale_se = scale * s.std_error / (2.0 * s.mean);
    if (scale_se <= precision || target >= kMaxReplicates)
      return model.with_scale(scale, Mode::mc, scale_se, std::nullopt);
    target *= 2;
  }
}

IndependenceCheck empirical_independence_check(const LocalModel& model, Index i,
                                               std::uint64_t replicates, std::uint64_t seed) {
  require(replicates >= 100, "independence check needs at least 100 replicates");
  require(i < model.size(), "index out of range");
  IndexList inside = model.neighborhoods().neighborhood({i});
  std::vector<double> products(replicates), own(replicates);
  std::vector<double> x(model.size());
  for (std::uint64_t r = 0; r < replicates; ++r) {
    Rng rng(seed, stream_id(r, 0));
    model.sample(rng, x);
    double outside = 0.0;
    for (Index j = 0; j < x.size(); ++j)
      if (!std::binary_search(inside.begin(), inside.end(), j)) outside += x[j];
    products[r] = x[i] * outside;
    own[r] = x[i];
  }
  IndependenceCheck check;
  Summary xi = summarize(own);
  if (xi.variance <= 0.0) {
    check.degenerate = true;
    return check;
  }
  Summary cov = summarize(products);
  check.covariance = cov.mean;
  check.std_error = cov.std_error;
  check.z = cov.std_error > 0 ? cov.mean / cov.std_error : 0.0;
  return check;
}

Rational exact_outside_covariance(const LocalModel& model, Index i) {
  const auto& support = model.exact_support();
  IndexList inside = model.neighborhoods().neighborhood({i});
  Rational total(0);
  for (Index j = 0; j < model.size(); ++j) {
    if (std::binary_search(inside.begin(), inside.end(), j)) continue;
    Index pair[] = {i, j};
    total += exact_expectation(support, pair, false);
  }
  return total;
}

std::vector<std::pair<Rational, Rational>> exact_sum_law(const ExactSupport& support) {
  std::map<Rational, Rational> law;
  bool separable = std::all_of(support.dependencies.begin(), support.dependencies.end(),
                               [](const auto& deps) { return deps.size() <= 1; });
  if (separable) {
    // g_f(a) = sum of the summands that read only factor f.
    std::vector<std::vector<Index>> users(support.factors.size());
    Rational constant(0);
    for (Index i = 0; i < support.dependencies.size(); ++i) {
      if (support.dependencies[i].empty())
        constant += support.summand(i, {});
      else
        users[support.dependencies[i][0]].push_back(i);
    }
    law[constant] = 1;
    for (std::size_t f = 0; f < support.factors.size(); ++f) {
      if (users[f].empty()) continue;
      const FiniteLaw& factor = support.factors[f];
      std::map<Rational, Rational> next;
      for (std::size_t a = 0; a < factor.size(); ++a) {
        if (sgn(factor.probs[a]) == 0) continue;
        Rational shift(0);
        Rational arg[] = {factor.atoms[a]};
        for (Index i : users[f]) shift += support.summand(i, arg);
        for (const auto& [w, p] : law) next[w + shift] += p * factor.probs[a];
      }
      law.swap(next);
    }
  } else {
    for_each_joint_outcome(support, [&](const Rational& p, std::span<const Rational> values) {
      Rational w(0);
      for (const auto& v : values) w += v;
      law[w] += p;
    });
  }
  return {law.begin(), law.end()};
}

}  // namespace ldw
