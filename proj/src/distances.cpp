#include "ldw/distances.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "ldw/error.hpp"
#include "ldw/normal.hpp"
#include "ldw/rng.hpp"
#include "ldw/summary.hpp"

namespace ldw {

EmpiricalSample::EmpiricalSample(std::vector<double> values, Provenance provenance)
    : values_(std::move(values)), provenance_(std::move(provenance)) {
  require(values_.size() >= 2, "empirical sample needs at least 2 values");
  for (double v : values_) require(std::isfinite(v), "empirical sample contains a non-finite value");
  std::sort(values_.begin(), values_.end());
}

EmpiricalSample normal_control_sample(std::size_t s, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  std::vector<double> values(s);
  for (double& v : values) v = rng.normal();
  return EmpiricalSample(std::move(values), {seed, "normal-control"});
}

std::vector<double> normal_quantile_grid(std::size_t s) {
  std::vector<double> grid(s);
  for (std::size_t i = 0; i < s; ++i)
    grid[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(s));
  return grid;
}

namespace {

double coupling_cost(std::span<const double> a, std::span<const double> b, double p) {
  CompensatedSum total;
  for (std::size_t i = 0; i < a.size(); ++i) total.add(std::pow(std::abs(a[i] - b[i]), p));
  return std::pow(total.value() / static_cast<double>(a.size()), 1.0 / p);
}

}  // namespace

double empirical_wp(const EmpiricalSample& a, const EmpiricalSample& b, double p) {
  require(p >= 1.0, "W_p needs p >= 1");
  require(a.size() == b.size(), "empirical W_p needs equal sample sizes");
  return coupling_cost(a.values(), b.values(), p);
}

double wp_vs_normal(const EmpiricalSample& a, double p) {
  require(p >= 1.0, "W_p needs p >= 1");
  require(a.size() >= 100, "W_p against the normal needs at least 100 values");
  return coupling_cost(a.values(), normal_quantile_grid(a.size()), p);
}

double kolmogorov_vs_normal(const EmpiricalSample& a) {
  auto v = a.values();
  const double s = static_cast<double>(v.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double phi = normal_cdf(v[i]);
    worst = std::max({worst, std::abs((i + 1) / s - phi), std::abs(i / s - phi)});
  }
  return worst;
}

double zolotarev_lower_bound(const EmpiricalSample& a, int p,
                             const std::vector<TestFunction>& family) {
  require(!family.empty(), "Zolotarev lower bound needs a nonempty test-function family");
  double best = 0.0;
  for (const auto& f : family) {
    require(f.in_class(p), "test function '" + f.name + "' is not declared in Lambda_" +
                               std::to_string(p));
    CompensatedSum mean;
    for (double v : a.values()) mean.add(f(v));
    double gap = std::abs(mean.value() / static_cast<double>(a.size()) - normal_functional(f));
    best = std::max(best, gap);
  }
  return best;
}

double wp_law_vs_normal(std::span<const std::pair<double, double>> law, double p) {
  require(p >= 1.0, "W_p needs p >= 1");
  require(!law.empty(), "W_p needs a nonempty law");
  std::vector<std::pair<double, double>> atoms;
  for (const auto& [x, q] : law) {
    require(std::isfinite(x) && q >= 0.0, "law atoms must be finite with nonnegative mass");
    if (q > 0.0) atoms.emplace_back(x, q);
  }
  std::sort(atoms.begin(), atoms.end());
  const std::size_t k = atoms.size();
  require(k > 0, "law has no mass");
  // Quantile-interval endpoints in z, from whichever tail keeps precision.
  std::vector<double> below(k + 1, 0.0), above(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) below[i + 1] = below[i] + atoms[i].second;
  for (std::size_t i = k; i-- > 0;) above[i] = above[i + 1] + atoms[i].second;
  const double total = below[k];
  constexpr double kEdge = 38.0;
  auto endpoint = [&](std::size_t i) {
    if (i == 0) return -kEdge;
    if (i == k) return kEdge;
    double lo = below[i] / total, hi = above[i] / total;
    if (lo <= 0.0) return -kEdge;
    if (hi <= 0.0) return kEdge;
    return lo < 0.5 ? normal_quantile(lo) : -normal_quantile(hi);
  };
  CompensatedSum cost;
  double left = endpoint(0);
  for (std::size_t i = 0; i < k; ++i) {
    double right = endpoint(i + 1);
    double x = atoms[i].first;
    auto piece = [&](double a, double b) {
      if (b <= a) return 0.0;
      // Extra cuts keep the adaptive rule from skipping the bulk on long tail intervals.
      std::vector<double> cuts{a};
      for (double c : {-8.0, -3.0, 3.0, 8.0})
        if (c > a && c < b) cuts.push_back(c);
      cuts.push_back(b);
      double sum = 0.0;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double z) { return std::pow(std::abs(x - z), p) * normal_pdf(z); }, cuts[c],
            cuts[c + 1], 15, 1e-12);
      return sum;
    };
    if (x > left && x < right)
      cost.add(piece(left, x) + piece(x, right));
    else
      cost.add(piece(left, right));
    left = right;
  }
  return std::pow(cost.value(), 1.0 / p);
}

}  // namespace ldw
