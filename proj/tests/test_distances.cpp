#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ldw/distances.hpp"
#include "ldw/error.hpp"
#include "ldw/models.hpp"
#include "ldw/rng.hpp"
#include "ldw/stein.hpp"
#include "ldw/summary.hpp"

namespace {

using namespace ldw;

std::vector<double> shifted_normal(std::size_t s, double mu, std::uint64_t seed) {
  std::vector<double> v(s);
  for (std::size_t k = 0; k < s; ++k) {
    Rng rng(seed, k);
    v[k] = mu + rng.normal();
  }
  return v;
}

TEST(EmpiricalSample, Invariants) {
  EmpiricalSample a({3.0, -1.0, 2.0}, {7, "test"});
  EXPECT_TRUE(std::is_sorted(a.values().begin(), a.values().end()));
  EXPECT_EQ(*a.provenance().seed, 7u);
  EXPECT_EQ(EmpiricalSample({1.0, 2.0}).provenance().source, "external");
  EXPECT_THROW(EmpiricalSample({1.0}), ConfigError);
  EXPECT_THROW(EmpiricalSample({1.0, NAN}), ConfigError);
}

TEST(EmpiricalWp, HandExamples) {
  EmpiricalSample a({0.0, 2.0}), b({1.0, 3.0});
  EXPECT_EQ(empirical_wp(a, a, 2), 0.0);
  EXPECT_DOUBLE_EQ(empirical_wp(EmpiricalSample({0.0, 0.0}), EmpiricalSample({1.0, 1.0}), 1), 1.0);
  EXPECT_DOUBLE_EQ(empirical_wp(a, b, 2), 1.0);
  EXPECT_THROW(empirical_wp(a, EmpiricalSample({1.0, 2.0, 3.0}), 1), ConfigError);
  EXPECT_THROW(empirical_wp(a, b, 0.5), ConfigError);
}

TEST(EmpiricalWp, MetricAxiomsAndMonotoneInP) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  for (int t = 0; t < 200; ++t) {
    std::size_t s = 2 + t % 30;
    std::vector<double> x(s), y(s), w(s);
    for (std::size_t k = 0; k < s; ++k) {
      x[k] = z(gen);
      y[k] = 2 * z(gen) + 1;
      w[k] = z(gen) * z(gen);
    }
    EmpiricalSample a(x), b(y), c(w);
    for (double p : {1.0, 2.0, 3.0}) {
      double ab = empirical_wp(a, b, p), ba = empirical_wp(b, a, p);
      EXPECT_DOUBLE_EQ(ab, ba);
      EXPECT_EQ(empirical_wp(a, a, p), 0.0);
      EXPECT_GT(ab, 0.0);
      EXPECT_LE(ab, empirical_wp(a, c, p) + empirical_wp(c, b, p) + 1e-12);
    }
    EXPECT_LE(empirical_wp(a, b, 1), empirical_wp(a, b, 2) + 1e-12);
    EXPECT_LE(empirical_wp(a, b, 2), empirical_wp(a, b, 3) + 1e-12);
  }
}

TEST(WpVsNormal, QuantileGridIsZero) {
  EmpiricalSample grid(normal_quantile_grid(1000));
  EXPECT_LT(wp_vs_normal(grid, 2), 1e-12);
  EXPECT_LE(kolmogorov_vs_normal(grid), 1.0 / 2000 + 1e-12);
  EXPECT_THROW(wp_vs_normal(EmpiricalSample(std::vector<double>(50, 0.0)), 2), ConfigError);
}

TEST(WpVsNormal, ShiftedNormal) {
  EmpiricalSample a(shifted_normal(100000, 0.5, 3));
  for (double p : {1.0, 2.0}) {
    double d = wp_vs_normal(a, p);
    EXPECT_GE(d, 0.45);
    EXPECT_LE(d, 0.55);
  }
  // sup |Phi(x - 1/2) - Phi(x)| = Phi(1/4) - Phi(-1/4) = erf(1/(4 sqrt 2)).
  EXPECT_NEAR(kolmogorov_vs_normal(a), std::erf(0.25 / std::sqrt(2.0)), 0.01);
}

TEST(WpVsNormal, ShiftConvergesWithS) {
  auto error_at = [](std::size_t s) {
    double total = 0;
    for (std::uint64_t r = 0; r < 5; ++r) total += std::abs(wp_vs_normal(EmpiricalSample(shifted_normal(s, 0.5, 10 + r)), 2) - 0.5);
    return total / 5;
  };
  EXPECT_LT(error_at(100000), error_at(1000));
}

TEST(WpVsNormal, BaselineFloorShrinks) {
  auto floor_at = [](std::size_t s) {
    double total = 0;
    for (std::uint64_t r = 0; r < 5; ++r) total += wp_vs_normal(normal_control_sample(s, 21, r), 2);
    return total / 5;
  };
  double b3 = floor_at(1000), b4 = floor_at(10000), b5 = floor_at(100000);
  EXPECT_GT(b5, 0.0);
  EXPECT_LT(b4, b3);
  EXPECT_LT(b5, b4);
}

TEST(Kolmogorov, DegenerateMassAtInfinity) {
  EXPECT_NEAR(kolmogorov_vs_normal(EmpiricalSample(std::vector<double>(10, 50.0))), 1.0, 1e-15);
}

TEST(Zolotarev, GridAndShift) {
  auto family = test_functions::family(2);
  // The midpoint grid integrates each smooth member to O(log s / s).
  EXPECT_LE(zolotarev_lower_bound(EmpiricalSample(normal_quantile_grid(100000)), 2, family), 1e-3);
  auto values = shifted_normal(100000, 0.5, 4);
  std::vector<double> half_sq(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) half_sq[k] = values[k] * values[k] / 2;
  double se = summarize(half_sq).std_error;
  EXPECT_GE(zolotarev_lower_bound(EmpiricalSample(values), 2, family), 0.125 - 4 * se);
  EXPECT_THROW(zolotarev_lower_bound(EmpiricalSample(values), 2, {}), ConfigError);
  EXPECT_THROW(zolotarev_lower_bound(EmpiricalSample(values), 2, {test_functions::absolute()}), ConfigError);
}

TEST(LawVsNormal, PointMassAndTwoPoint) {
  std::vector<std::pair<double, double>> delta{{0.0, 1.0}};
  EXPECT_NEAR(wp_law_vs_normal(delta, 1), std::sqrt(2 / M_PI), 1e-10);
  EXPECT_NEAR(wp_law_vs_normal(delta, 2), 1.0, 1e-10);
  // +-1 coupled by sign: W_1 = E| |Z| - 1 |.
  std::vector<std::pair<double, double>> coin{{1.0, 0.5}, {-1.0, 0.5}};
  TestFunction f{"||w|-1|", [](double w) { return std::abs(std::abs(w) - 1); }, {}, 1.0, {-1, 0, 1}};
  EXPECT_NEAR(wp_law_vs_normal(coin, 1), normal_functional(f), 1e-9);
}

TEST(LawVsNormal, AgreesWithSampledEstimate) {
  LocalModel model = iid_model(30, BaseLaw::rademacher());
  auto law = exact_sum_law(model.exact_support());
  std::vector<std::pair<double, double>> scaled;
  for (const auto& [w, p] : law) scaled.emplace_back(w.get_d() * model.scale(), p.get_d());
  double exact = wp_law_vs_normal(scaled, 2);
  std::vector<double> draws(200000);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    Rng rng(6, k);
    draws[k] = model.sample_sum(rng);
  }
  double sampled = wp_vs_normal(EmpiricalSample(draws), 2);
  double floor = wp_vs_normal(normal_control_sample(draws.size(), 6, 99), 2);
  EXPECT_NEAR(sampled, exact, 3 * floor);
}

}  // namespace
