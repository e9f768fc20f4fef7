#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "ldw/bounds.hpp"
#include "ldw/error.hpp"
#include "ldw/matching.hpp"
#include "ldw/moments.hpp"
#include "ldw/models.hpp"
#include "oracles.hpp"

namespace {

using namespace ldw;

Rational raw(const MomentEstimate& e) {
  EXPECT_TRUE(e.exact.has_value());
  return e.exact ? e.exact->raw : Rational(0);
}

// X_0 = X_1 = eps_0, X_2 = X_3 = eps_1 with Rademacher eps.
LocalModel duplicated_pairs(int depth = 4) {
  ExactSupport s;
  s.factors = {FiniteLaw::rademacher(), FiniteLaw::rademacher()};
  s.dependencies = {{0}, {0}, {1}, {1}};
  s.summand = [](Index, std::span<const Rational> v) { return v[0]; };
  return factor_model("duplicated-pairs", s, depth);
}

TEST(MixedMoment, RademacherExamples) {
  const std::size_t n = 16;
  LocalModel model = iid_model(n, BaseLaw::rademacher());
  std::vector<Index> ii{3, 3}, ij{3, 5};
  MomentEstimate a = mixed_moment(model, ii, true, Mode::exact);
  EXPECT_EQ(raw(a), Rational(1));
  EXPECT_EQ(a.exact->degree, 2u);
  EXPECT_DOUBLE_EQ(a.value, 1.0 / n);
  EXPECT_EQ(a.std_error, 0.0);
  EXPECT_EQ(raw(mixed_moment(model, ij, false, Mode::exact)), Rational(0));
}

TEST(MixedMoment, CenteredBernoulliThirdMoment) {
  const double q = 0.2, n = 100;
  LocalModel model = iid_model(100, BaseLaw::centered_bernoulli(Rational(1, 5)));
  std::vector<Index> iii{7, 7, 7};
  MomentEstimate m = mixed_moment(model, iii, false, Mode::exact);
  EXPECT_NEAR(m.value, (1 - 2 * q) / (std::pow(n, 1.5) * std::sqrt(q * (1 - q))), 1e-17);
  EXPECT_NEAR(m.value, 0.0015, 1e-17);
}

TEST(MixedMoment, PermutationInvariantAndMcAgrees) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    LocalModel model = oracle::random_factor_model(gen);
    Index last = static_cast<Index>(model.size() - 1);
    std::vector<Index> idx{0, last, 0}, perm{last, 0, 0};
    EXPECT_EQ(raw(mixed_moment(model, idx, false, Mode::exact)),
              raw(mixed_moment(model, perm, false, Mode::exact)));
    MomentEstimate exact = mixed_moment(model, idx, true, Mode::exact);
    MomentEstimate mc = mixed_moment(model, idx, true, Mode::mc, {static_cast<std::uint64_t>(trial), 20000});
    EXPECT_EQ(mc.mode, Mode::mc);
    EXPECT_EQ(mc.n_replicates, 20000u);
    EXPECT_NEAR(mc.value, exact.value, 4 * mc.std_error + 1e-15);
  }
}

TEST(MixedMoment, ExactNeedsSupport) {
  LocalModel model = iid_model(4, BaseLaw::normal());
  std::vector<Index> idx{0, 0};
  EXPECT_THROW(mixed_moment(model, idx, false, Mode::exact), ConfigError);
  EXPECT_THROW(mixed_moment(model, std::vector<Index>{}, false, Mode::mc), ConfigError);
  MomentEstimate mc = mixed_moment(model, idx, false, Mode::mc, {1, 50000});
  EXPECT_NEAR(mc.value, 0.25, 4 * mc.std_error);
}

TEST(Cumulants, Examples) {
  // Symmetric four-point law as a single summand: kappa3 = 0.
  LocalModel sym = iid_model(1, BaseLaw::from_finite("four-point-0", to_finite_law(four_point_law(Rational(0)))));
  EXPECT_EQ(raw(cumulants_of_sum(sym, 3, Mode::exact).kappa3), Rational(0));
  // Rademacher n = 4: kappa4 = -2/n = -1/2.
  SumCumulants r = cumulants_of_sum(iid_model(4, BaseLaw::rademacher()), 4, Mode::exact);
  ASSERT_TRUE(r.kappa4);
  EXPECT_DOUBLE_EQ(r.kappa4->value, -0.5);
  // Single four-point draw with beta = 1/10: kappa3 = E xi^3 = 1/2.
  DiscreteLaw law = four_point_law(Rational(1, 10));
  LocalModel one = iid_model(1, BaseLaw::from_finite("four-point", to_finite_law(law)));
  SumCumulants c = cumulants_of_sum(one, 4, Mode::exact);
  LawCumulants lc = law_cumulants(law);
  EXPECT_EQ(Surd(raw(c.kappa3)), lc.kappa3);
  EXPECT_EQ(raw(c.kappa3), Rational(1, 2));
  EXPECT_NEAR(c.kappa4->value, lc.kappa4.to_double(), 1e-15);
}

TEST(Cumulants, RequiresStandardizedModel) {
  LocalModel model(LocalModel::Parts{"raw", 1, NeighborhoodSystem::singletons(1, 3),
                                     [](Rng& rng, std::span<double> x) { x[0] = rng.normal(); }, {}, {}});
  EXPECT_THROW(cumulants_of_sum(model, 3, Mode::mc), ConfigError);
  EXPECT_THROW(cumulants_of_sum(iid_model(2, BaseLaw::rademacher()), 5, Mode::exact), ConfigError);
}

TEST(Cumulants, McMatchesExact) {
  LocalModel model = mdep_model(6, 1, BaseLaw::centered_bernoulli(Rational(1, 5)), {Rational(1), Rational(1)});
  SumCumulants exact = cumulants_of_sum(model, 4, Mode::exact);
  SumCumulants mc = cumulants_of_sum(model, 4, Mode::mc, {3, 200000});
  EXPECT_NEAR(mc.kappa3.value, exact.kappa3.value, 4 * mc.kappa3.std_error);
  EXPECT_NEAR(mc.kappa4->value, exact.kappa4->value, 4 * mc.kappa4->std_error);
}

TEST(BoundTerms, IidRademacher) {
  for (std::size_t n : {1u, 5u, 12u}) {
    LocalModel model = iid_model(n, BaseLaw::rademacher());
    BoundReport r = theorem1_terms(model, Mode::exact);
    EXPECT_EQ(raw(r.beta), Rational(0));
    for (const auto* g : {&r.gamma1, &r.gamma2, &r.gamma3}) {
      EXPECT_EQ(raw(*g), Rational(static_cast<long>(n)));
      EXPECT_NEAR(g->value, 1.0 / n, 1e-16);
    }
    EXPECT_NEAR(r.functional_w2, std::sqrt(3.0 / n), 1e-15);
  }
}

TEST(BoundTerms, CenteredBernoulliBeta) {
  BoundReport r = theorem1_terms(iid_model(100, BaseLaw::centered_bernoulli(Rational(1, 5))), Mode::exact);
  // raw beta = 100 E(B - q)^3 = 100 * 0.096
  EXPECT_EQ(raw(r.beta), Rational(48, 5));
  EXPECT_NEAR(r.beta.value, 0.15, 1e-15);
}

TEST(BoundTerms, DuplicatedPairsMatchBruteForce) {
  LocalModel model = duplicated_pairs();
  BoundReport r = theorem1_terms(model, Mode::exact);
  oracle::NaiveTheorem1 o = oracle::naive_theorem1(model);
  EXPECT_EQ(raw(r.beta), o.beta);
  EXPECT_EQ(raw(r.gamma1), o.gamma1);
  EXPECT_EQ(raw(r.gamma2), o.gamma2);
  EXPECT_EQ(raw(r.gamma3), o.gamma3);
  // Chains i, j, k, l all inside one block: 2 blocks * 2^4.
  EXPECT_EQ(o.gamma1, Rational(32));
  EXPECT_EQ(raw(compute_Rm(model, 3, Mode::exact)), oracle::naive_rm(model, 3));
}

TEST(BoundTerms, RandomModelsMatchBruteForce) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    LocalModel model = oracle::random_factor_model(gen);
    BoundReport r = theorem1_terms(model, Mode::exact);
    oracle::NaiveTheorem1 o = oracle::naive_theorem1(model);
    EXPECT_EQ(raw(r.beta), o.beta);
    EXPECT_EQ(raw(r.gamma1), o.gamma1);
    EXPECT_EQ(raw(r.gamma2), o.gamma2);
    EXPECT_EQ(raw(r.gamma3), o.gamma3);
    Rational gsum = o.gamma1 + o.gamma2 + o.gamma3;
    EXPECT_EQ(raw(compute_Rm(model, 2, Mode::exact)), gsum);
    EXPECT_EQ(raw(cumulants_of_sum(model, 3, Mode::exact).kappa3), o.beta);
    EXPECT_EQ(raw(compute_Rm(model, 1, Mode::exact)), oracle::naive_rm(model, 1));
    if (trial < 15) EXPECT_EQ(raw(compute_Rm(model, 3, Mode::exact)), oracle::naive_rm(model, 3));
    EXPECT_GE(wp_conjecture_functional(model, 2, Mode::exact), r.functional_w2 - 1e-12);
  }
}

TEST(BoundTerms, McMatchesExact) {
  LocalModel model = mdep_model(6, 1, BaseLaw::rademacher(), {Rational(1), Rational(1)});
  BoundReport e = theorem1_terms(model, Mode::exact);
  BoundReport m = theorem1_terms(model, Mode::mc, {7, 100000});
  EXPECT_NEAR(m.beta.value, e.beta.value, 4 * m.beta.std_error + 1e-12);
  EXPECT_NEAR(m.gamma1.value, e.gamma1.value, 4 * m.gamma1.std_error + 1e-12);
  EXPECT_NEAR(m.gamma2.value, e.gamma2.value, 4 * m.gamma2.std_error + 1e-12);
  EXPECT_NEAR(m.gamma3.value, e.gamma3.value, 4 * m.gamma3.std_error + 1e-12);
  EXPECT_EQ(e.term_count, m.term_count);
}

TEST(BoundTerms, Monotone) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    LocalModel model = oracle::random_factor_model(gen);
    const std::size_t n = model.size();
    // Add one random extra element to every level-1 neighborhood.
    std::vector<Index> extra(n);
    for (auto& e : extra) e = std::uniform_int_distribution<Index>(0, static_cast<Index>(n - 1))(gen);
    const auto base = model.neighborhoods();
    auto bigger = NeighborhoodSystem::union_closure(n, base.depth(), [base, extra](Index i) {
      IndexList a = base.neighborhood({i});
      a.push_back(extra[i]);
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      return a;
    });
    LocalModel wide = model.with_neighborhoods(bigger);
    BoundReport a = theorem1_terms(model, Mode::exact), b = theorem1_terms(wide, Mode::exact);
    EXPECT_LE(raw(a.gamma1), raw(b.gamma1));
    EXPECT_LE(raw(a.gamma2), raw(b.gamma2));
    EXPECT_LE(raw(a.gamma3), raw(b.gamma3));
    for (int m = 1; m <= 3; ++m)
      EXPECT_LE(raw(compute_Rm(model, m, Mode::exact)), raw(compute_Rm(wide, m, Mode::exact)));
  }
}

TEST(BoundTerms, NeedsDepthThree) {
  LocalModel model = iid_model(3, BaseLaw::rademacher(), 2);
  EXPECT_THROW(theorem1_terms(model, Mode::exact), ConfigError);
  EXPECT_THROW(compute_Rm(model, 2, Mode::exact), ConfigError);
  EXPECT_NO_THROW(compute_Rm(model, 1, Mode::exact));
  EXPECT_THROW(compute_Rm(iid_model(3, BaseLaw::rademacher(), 6), 5, Mode::exact), ConfigError);
}

TEST(Functionals, Arithmetic) {
  BoundReport r;
  r.gamma1.value = r.gamma2.value = r.gamma3.value = 1.0 / 8;
  EXPECT_DOUBLE_EQ(w2_bound_functional(r), std::sqrt(3.0 / 8));
  r.beta.value = 0.15;
  r.gamma1.value = 0.04;
  r.gamma2.value = r.gamma3.value = 0;
  EXPECT_DOUBLE_EQ(w2_bound_functional(r), 0.35);
  EXPECT_EQ(w2_bound_functional(BoundReport{}), 0.0);

  std::vector<double> third(100, 1e-3), fourth(100, 1e-4);
  EXPECT_NEAR(mdep_bound_functional(third, fourth, 1), 0.2, 1e-15);
  EXPECT_NEAR(mdep_bound_functional(third, fourth, 2), 0.4 + std::pow(2.0, 1.5) * 0.1, 1e-15);
  EXPECT_NEAR(mdep_bound_functional(third, fourth, 2), 0.683, 1e-3);
  EXPECT_THROW(mdep_bound_functional(third, fourth, 0), ConfigError);
  third[3] = -1;
  EXPECT_THROW(mdep_bound_functional(third, fourth, 1), ConfigError);

  const int n = 50;
  std::vector<double> m4(n, 1.0 / (n * n)), m3(n, std::pow(n, -1.5));
  EXPECT_NEAR(iid_wp_bound(m4, 2), 1 / std::sqrt(double(n)), 1e-15);
  EXPECT_NEAR(iid_wp_bound(m3, 1), 1 / std::sqrt(double(n)), 1e-15);
  EXPECT_EQ(iid_wp_bound(std::vector<double>{0.0}, 2), 0.0);
  EXPECT_THROW(iid_wp_bound(std::vector<double>{}, 2), ConfigError);
}

TEST(EPlacements, SmallCases) {
  auto breaks = [](int m) {
    std::vector<std::vector<int>> out;
    for (const auto& p : enumerate_e_placements(m)) out.push_back(p.breaks);
    return out;
  };
  using V = std::vector<std::vector<int>>;
  EXPECT_EQ(breaks(1), (V{{}, {2}}));
  EXPECT_EQ(breaks(2), (V{{}, {2}, {3}}));
  EXPECT_EQ(breaks(3), (V{{}, {2}, {3}, {4}, {2, 4}}));
  EXPECT_THROW(enumerate_e_placements(0), ConfigError);
  EXPECT_THROW(enumerate_e_placements(13), ConfigError);
}

TEST(EPlacements, FibonacciAndPowerSetOracle) {
  std::vector<std::size_t> fib{0, 1, 1};
  while (fib.size() < 16) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  for (int m = 1; m <= 12; ++m) {
    auto placements = enumerate_e_placements(m);
    EXPECT_EQ(placements.size(), fib[m + 2]) << m;
    std::set<std::vector<int>> got;
    for (std::size_t k = 0; k < placements.size(); ++k) {
      got.insert(placements[k].breaks);
      EXPECT_EQ(placements[k].m, m);
      if (k > 0) {
        const auto& a = placements[k - 1].breaks;
        const auto& b = placements[k].breaks;
        EXPECT_TRUE(a.size() < b.size() || (a.size() == b.size() && a < b));
      }
    }
    auto naive = oracle::naive_placements(m);
    EXPECT_EQ(got, std::set<std::vector<int>>(naive.begin(), naive.end()));
  }
}

TEST(Rm, IidRademacher) {
  const std::size_t n = 9;
  LocalModel model = iid_model(n, BaseLaw::rademacher());
  double rn = std::sqrt(double(n));
  EXPECT_NEAR(compute_Rm(model, 1, Mode::exact).value, 2 / rn, 1e-15);
  EXPECT_NEAR(compute_Rm(model, 2, Mode::exact).value, 3.0 / n, 1e-15);
  EXPECT_NEAR(wp_conjecture_functional(model, 1, Mode::exact), 2 / rn, 1e-15);
  EXPECT_NEAR(wp_conjecture_functional(model, 2, Mode::exact), 2 / rn + std::sqrt(3.0 / n), 1e-15);
  EXPECT_THROW(wp_conjecture_functional(model, 5, Mode::exact), ConfigError);
}

TEST(Rm, McMatchesExact) {
  LocalModel model = duplicated_pairs();
  for (int m = 1; m <= 3; ++m) {
    MomentEstimate e = compute_Rm(model, m, Mode::exact), mc = compute_Rm(model, m, Mode::mc, {2, 20000});
    EXPECT_NEAR(mc.value, e.value, 4 * mc.std_error + 1e-12) << m;
  }
  LocalModel bern = mdep_model(5, 1, BaseLaw::centered_bernoulli(Rational(3, 10)), {Rational(1), Rational(-1, 2)});
  for (int m = 1; m <= 3; ++m) {
    MomentEstimate e = compute_Rm(bern, m, Mode::exact), mc = compute_Rm(bern, m, Mode::mc, {3, 50000});
    EXPECT_NEAR(mc.value, e.value, 4 * mc.std_error) << m;
  }
}

TEST(Mdep, MZeroIsIndependent) {
  LocalModel model = mdep_model(8, 0, BaseLaw::centered_bernoulli(Rational(1, 5)), {Rational(1)});
  BoundReport r = theorem1_terms(model, Mode::exact);
  Rational third(0), fourth(0);
  for (Index i = 0; i < 8; ++i) {
    std::vector<Index> t(3, i), f(4, i);
    third += exact_expectation(model.exact_support(), t, false);
    fourth += exact_expectation(model.exact_support(), f, false);
  }
  EXPECT_EQ(raw(r.beta), third);
  EXPECT_EQ(raw(r.gamma1), fourth);
}

}  // namespace
