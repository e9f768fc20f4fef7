#include "ldw/moments.hpp"

#include <algorithm>
#include <cmath>

#include "ldw/error.hpp"
#include "ldw/parallel.hpp"
#include "ldw/summary.hpp"

namespace ldw {

MomentEstimate from_exact(const LocalModel& model, Rational raw, unsigned degree) {
  MomentEstimate m;
  m.mode = Mode::exact;
  m.value = raw.get_d() * std::pow(model.scale(), static_cast<double>(degree));
  m.exact = ExactValue{std::move(raw), degree};
  return m;
}

const Rational& ExactMomentCache::get(std::span<const Index> indices, bool absolute) {
  key_.assign(indices.begin(), indices.end());
  std::sort(key_.begin(), key_.end());
  auto key = std::make_pair(absolute, key_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Rational value = exact_expectation(*support_, key_, absolute);
  return cache_.emplace(std::move(key), std::move(value)).first->second;
}

namespace {

// Mean and standard error of stat(rng, r) over independent replicates.
template <class Stat>
MomentEstimate mc_estimate(const McOptions& mc, Stat&& stat) {
  require(mc.replicates >= 2, "Monte Carlo needs at least 2 replicates");
  std::vector<double> values(mc.replicates);
  parallel_for(mc.replicates, [&](std::size_t r) { values[r] = stat(r); });
  Summary s = summarize(values);
  MomentEstimate m;
  m.mode = Mode::mc;
  m.value = s.mean;
  m.std_error = s.std_error;
  m.n_replicates = mc.replicates;
  return m;
}

}  // namespace

MomentEstimate mixed_moment(const LocalModel& model, std::span<const Index> indices, bool absolute,
                            Mode mode, const McOptions& mc) {
  require(!indices.empty(), "mixed moment needs at least one index");
  for (Index i : indices) require(i < model.size(), "moment index out of range");
  if (mode == Mode::exact) {
    Rational raw = exact_expectation(model.exact_support(), indices, absolute);
    return from_exact(model, std::move(raw), static_cast<unsigned>(indices.size()));
  }
  std::vector<Index> idx(indices.begin(), indices.end());
  return mc_estimate(mc, [&](std::size_t r) {
    thread_local std::vector<double> x;
    x.resize(model.size());
    Rng rng(mc.seed, stream_id(r, 0));
    model.sample(rng, x);
    double product = 1.0;
    for (Index i : idx) product *= absolute ? std::abs(x[i]) : x[i];
    return product;
  });
}

SumCumulants cumulants_of_sum(const LocalModel& model, int max_order, Mode mode,
                              const McOptions& mc) {
  require(max_order == 3 || max_order == 4, "cumulant order must be 3 or 4");
  require(model.standardized(), "cumulants_of_sum needs a standardized model");
  SumCumulants out;
  if (mode == Mode::exact) {
    auto law = exact_sum_law(model.exact_support());
    Rational m3(0), m4(0);
    for (const auto& [w, p] : law) {
      Rational w2 = w * w;
      m3 += p * w2 * w;
      m4 += p * w2 * w2;
    }
    out.kappa3 = from_exact(model, m3, 3);
    if (max_order == 4) {
      if (model.raw_variance()) {
        const Rational& v = *model.raw_variance();
        out.kappa4 = from_exact(model, Rational(m4 - 3 * v * v), 4);
      } else {
        MomentEstimate k4 = from_exact(model, m4, 4);
        k4.value -= 3.0;
        k4.exact.reset();
        out.kappa4 = k4;
      }
    }
    return out;
  }
  // One pass over common replicates: the third and fourth powers of the same W.
  require(mc.replicates >= 2, "Monte Carlo needs at least 2 replicates");
  std::vector<double> cubes(mc.replicates), quartics(mc.replicates);
  parallel_for(mc.replicates, [&](std::size_t r) {
    Rng rng(mc.seed, stream_id(r, 0));
    double w = model.sample_sum(rng);
    cubes[r] = w * w * w;
    quartics[r] = cubes[r] * w - 3.0;
  });
  auto to_estimate = [&](std::span<const double> v) {
    Summary s = summarize(v);
    MomentEstimate m;
    m.mode = Mode::mc;
    m.value = s.mean;
    m.std_error = s.std_error;
    m.n_replicates = mc.replicates;
    return m;
  };
  out.kappa3 = to_estimate(cubes);
  if (max_order == 4) out.kappa4 = to_estimate(quartics);
  return out;
}

}  // namespace ldw
