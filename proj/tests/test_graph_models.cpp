#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "ldw/bounds.hpp"
#include "ldw/error.hpp"
#include "ldw/graph.hpp"
#include "ldw/models.hpp"
#include "ldw/moments.hpp"
#include "oracles.hpp"

namespace {

using namespace ldw;

// Edge-preserving injective maps from the motif's vertices into the graph.
std::uint64_t brute_force_embeddings(const Motif& motif, int n,
                                     const std::function<bool(int, int)>& adjacent) {
  std::vector<int> image(motif.vertices, -1);
  std::vector<bool> used(n, false);
  std::uint64_t count = 0;
  std::function<void(int)> place = [&](int v) {
    if (v == motif.vertices) {
      for (auto [a, b] : motif.edges)
        if (!adjacent(image[a], image[b])) return;
      ++count;
      return;
    }
    for (int x = 0; x < n; ++x) {
      if (used[x]) continue;
      used[x] = true;
      image[v] = x;
      place(v + 1);
      used[x] = false;
    }
  };
  place(0);
  return count;
}

std::uint64_t brute_force_aut(const Motif& motif) {
  return brute_force_embeddings(motif, motif.vertices, [&](int a, int b) {
    for (auto [u, v] : motif.edges)
      if ((u == a && v == b) || (u == b && v == a)) return true;
    return false;
  });
}

Graph random_graph(std::mt19937_64& gen, int n, double p) {
  Graph g(n);
  std::bernoulli_distribution coin(p);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(gen)) g.add_edge(u, v);
  return g;
}

Rational binomial(long n, long k) {
  Rational r(1);
  for (long j = 0; j < k; ++j) r = r * Rational(n - j, j + 1);
  r.canonicalize();
  return r;
}

TEST(Motif, ParseAndErrors) {
  Motif m = parse_motif("# comment\n0 1\n\n1 2 # trailing\n");
  EXPECT_EQ(m.vertices, 3);
  EXPECT_EQ(m.edge_count(), 2);
  EXPECT_THROW(parse_motif("0 1 2"), ConfigError);
  EXPECT_THROW(parse_motif("0"), ConfigError);
  EXPECT_THROW(parse_motif("1 1"), ConfigError);
  EXPECT_THROW(parse_motif("0 1\n1 0"), ConfigError);
  EXPECT_THROW(parse_motif("0 2"), ConfigError);
  EXPECT_THROW(parse_motif("# nothing"), ConfigError);
  EXPECT_THROW(load_motif("no-such-motif"), ConfigError);
  EXPECT_TRUE(is_triangle(load_motif("triangle")));
  EXPECT_FALSE(is_triangle(load_motif("path3")));
}

TEST(Motif, Automorphisms) {
  for (auto [name, expected] : std::vector<std::pair<std::string, std::size_t>>{
           {"edge", 2}, {"triangle", 6}, {"path3", 2}, {"star3", 6}, {"cycle4", 8}, {"k4", 24}}) {
    Motif m = load_motif(name);
    EXPECT_EQ(automorphisms(m).size(), expected) << name;
    EXPECT_EQ(brute_force_aut(m), expected) << name;
  }
}

TEST(CountCopies, SmallCases) {
  Graph k4(4);
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) k4.add_edge(u, v);
  EXPECT_EQ(count_copies(k4, load_motif("triangle")), 4u);
  EXPECT_EQ(count_copies(k4, load_motif("cycle4")), 3u);
  Graph empty(10);
  for (const char* name : {"edge", "triangle", "path3", "k4"})
    EXPECT_EQ(count_copies(empty, load_motif(name)), 0u);
}

TEST(CountCopies, PathsAreWedges) {
  std::mt19937_64 gen(4);
  Graph g = random_graph(gen, 30, 0.2);
  std::uint64_t wedges = 0;
  for (int v = 0; v < 30; ++v) wedges += static_cast<std::uint64_t>(g.degree(v)) * (g.degree(v) - 1) / 2;
  EXPECT_EQ(count_copies(g, load_motif("path3")), wedges);
}

TEST(CountCopies, TrianglesMatchTripleEnumeration) {
  std::mt19937_64 gen(5);
  Motif tri = load_motif("triangle");
  for (int t = 0; t < 100; ++t) {
    int n = std::uniform_int_distribution<int>(3, 25)(gen);
    double p = std::uniform_real_distribution<double>(0.05, 0.9)(gen);
    Graph g = random_graph(gen, n, p);
    std::uint64_t triples = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c)
          triples += g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c);
    EXPECT_EQ(count_copies(g, tri), triples);
  }
}

TEST(CountCopies, GeneralMotifsMatchEmbeddings) {
  std::mt19937_64 gen(6);
  for (const char* name : {"cycle4", "star3", "k4", "path3"}) {
    Motif m = load_motif(name);
    for (int t = 0; t < 10; ++t) {
      int n = std::uniform_int_distribution<int>(4, 11)(gen);
      Graph g = random_graph(gen, n, 0.5);
      std::uint64_t embeddings = brute_force_embeddings(m, n, [&](int a, int b) { return g.has_edge(a, b); });
      EXPECT_EQ(count_copies(g, m), embeddings / brute_force_aut(m)) << name;
    }
  }
}

TEST(Copies, EnumerationMatchesCount) {
  for (const char* name : {"edge", "triangle", "path3", "star3", "cycle4", "k4"}) {
    Motif m = load_motif(name);
    for (int n : {4, 6, 8}) {
      Rational expected(static_cast<long>(brute_force_embeddings(m, n, [](int, int) { return true; }) /
                                          brute_force_aut(m)));
      auto copies = enumerate_copies(n, m);
      EXPECT_EQ(Rational(static_cast<long>(copies.size())), expected) << name << " n=" << n;
      EXPECT_EQ(copies_in_complete(n, m), expected);
      std::set<Copy> distinct(copies.begin(), copies.end());
      EXPECT_EQ(distinct.size(), copies.size());
    }
  }
  EXPECT_THROW(enumerate_copies(200, load_motif("triangle")), ConfigError);
}

TEST(Psi, Examples) {
  Motif tri = load_motif("triangle");
  EXPECT_NEAR(psi(100, 0.05, tri), 125.0, 1e-9);
  EXPECT_NEAR(psi(100, 0.3, tri), 3000.0, 1e-9);
  for (double p : {0.01, 0.3, 0.9}) EXPECT_NEAR(psi(50, p, load_motif("edge")), 2500 * p, 1e-9);
  EXPECT_NEAR(graph_bound_functional(100, 0.05, tri), 1 / std::sqrt(125.0), 1e-12);
  EXPECT_NEAR(graph_bound_functional(100, 0.05, tri), 0.0894, 5e-5);
  EXPECT_NEAR(graph_bound_functional(100, 0.75, tri), 0.02, 1e-15);
  EXPECT_THROW(graph_bound_functional(100, 1.0, tri), ConfigError);
}

TEST(SubgraphVariance, EdgeIsBinomial) {
  for (int n : {3, 10, 40}) {
    Rational p(2, 7);
    auto v = subgraph_variance(n, p, load_motif("edge"), Mode::exact);
    ASSERT_TRUE(v.exact);
    EXPECT_EQ(*v.exact, binomial(n, 2) * p * (1 - p));
  }
}

TEST(SubgraphVariance, TriangleClosedForm) {
  // Two triangles in K_n share at most one edge; each shares one with 3(n-3).
  Motif tri = load_motif("triangle");
  for (int n : {6, 20, 90, 160}) {
    Rational p(1, 5);
    auto v = subgraph_variance(n, p, tri, Mode::exact);
    Rational p3 = p * p * p, p5 = p3 * p * p, p6 = p3 * p3;
    Rational expected = binomial(n, 3) * (p3 - p6) + binomial(n, 3) * Rational(3 * (n - 3)) * (p5 - p6);
    ASSERT_TRUE(v.exact);
    EXPECT_EQ(*v.exact, expected) << "n=" << n;
  }
}

TEST(SubgraphVariance, ExactMatchesMonteCarlo) {
  Motif tri = load_motif("triangle");
  auto exact = subgraph_variance(6, Rational(1, 2), tri, Mode::exact);
  auto mc = subgraph_variance(6, Rational(1, 2), tri, Mode::mc, 3, 100000);
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_NEAR(mc.value, exact.value, 4 * mc.std_error);
}

TEST(SubgraphVariance, LowerBoundRatioStaysBounded) {
  // sigma^2 against (1 - p) n^{2v} p^{2e} / psi over a grid.
  Motif tri = load_motif("triangle");
  double lo = INFINITY, hi = 0;
  for (int n : {10, 20, 40, 80, 160})
    for (long pn : {2L, 5L, 10L, 30L, 50L, 70L}) {
      Rational p(pn, 100);
      double pd = p.get_d();
      double sigma2 = subgraph_variance(n, p, tri, Mode::exact).value;
      double reference = (1 - pd) * std::pow(n, 6) * std::pow(pd, 6) / psi(n, pd, tri);
      double ratio = sigma2 / reference;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  EXPECT_GT(lo, 1e-3);
  EXPECT_LT(hi / lo, 1e3);
}

TEST(ErgModel, EdgeIsStandardizedBinomial) {
  Rational p(3, 10);
  LocalModel model = erg_model(GraphSpec{load_motif("edge"), 5, p});
  EXPECT_EQ(model.size(), 10u);
  BoundReport report = theorem1_terms(model, Mode::exact);
  double q = 1 - p.get_d(), npq = 10 * p.get_d() * q;
  double kappa3 = (1 - 2 * p.get_d()) / std::sqrt(npq);
  EXPECT_NEAR(report.beta.value, kappa3, 1e-12);
  EXPECT_NEAR(cumulants_of_sum(model, 3, Mode::exact).kappa3.value, kappa3, 1e-12);
}

TEST(ErgModel, TriangleNeighborhoods) {
  LocalModel model = erg_model(GraphSpec{load_motif("triangle"), 6, Rational(1, 2)});
  EXPECT_EQ(model.size(), 20u);
  for (Index i = 0; i < 20; ++i) EXPECT_EQ(model.neighborhoods().neighborhood({i}).size(), 10u);
  EXPECT_TRUE(validate_neighborhoods(model.neighborhoods()).ok());
  auto law = oracle::joint_law(model.exact_support());
  EXPECT_NEAR(oracle::sum_moment(law, 2).get_d() * model.scale() * model.scale(), 1.0, 1e-12);
  EXPECT_THROW(erg_model(GraphSpec{load_motif("triangle"), 6, Rational(1)}), ConfigError);
}

TEST(UStat, DegenerateKernelRejected) {
  UStatSpec spec{8, 2, "product", Rational(0), BaseLaw::normal()};
  EXPECT_THROW(ustat_model(spec), ConfigError);
  UStatSpec mean{8, 2, "mean", Rational(0), BaseLaw::rademacher()};
  EXPECT_NO_THROW(ustat_model(mean));
  EXPECT_THROW(ustat_model(UStatSpec{3, 2, "mean", Rational(0), BaseLaw::rademacher()}), ConfigError);
  EXPECT_THROW(ustat_model(UStatSpec{8, 2, "cubic", Rational(0), BaseLaw::rademacher()}), ConfigError);
}

TEST(UStat, ExactVarianceAgainstEnumeration) {
  LocalModel model = ustat_model(UStatSpec{6, 2, "mean", Rational(0), BaseLaw::rademacher()});
  EXPECT_EQ(model.size(), 15u);
  ASSERT_TRUE(model.has_exact_support());
  auto law = oracle::joint_law(model.exact_support());
  EXPECT_EQ(law.probs.size(), 64u);
  EXPECT_NEAR(oracle::sum_moment(law, 2).get_d() * model.scale() * model.scale(), 1.0, 1e-12);
  // A_i: pairs meeting {a, b}: 1 + 2 (n - 2).
  for (Index i = 0; i < 15; ++i) EXPECT_EQ(model.neighborhoods().neighborhood({i}).size(), 9u);
}

TEST(UStat, NeighborhoodGrowthIsLinearForPairs) {
  double lo = INFINITY, hi = 0;
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    LocalModel model = ustat_model(UStatSpec{n, 2, "mean", Rational(0), BaseLaw::rademacher()});
    double ratio = static_cast<double>(model.neighborhoods().neighborhood({0}).size()) / n;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_GT(lo, 0.5);
  EXPECT_LT(hi, 2.0);
}

TEST(MDep, Errors) {
  std::vector<Rational> c{Rational(1), Rational(1)};
  EXPECT_THROW(mdep_model(1, 1, BaseLaw::rademacher(), c), ConfigError);
  EXPECT_THROW(mdep_model(10, 2, BaseLaw::rademacher(), c), ConfigError);
  EXPECT_THROW(mdep_model(10, 1, BaseLaw::from_finite("raw", FiniteLaw::bernoulli(Rational(1, 3))), c),
               ConfigError);
}

TEST(MDep, ExactMatchesMonteCarlo) {
  LocalModel model = mdep_model(6, 1, BaseLaw::rademacher(), {Rational(1), Rational(1)});
  EXPECT_NEAR(model.exact_support().log2_joint_outcomes(), 7.0, 1e-12);
  BoundReport exact = theorem1_terms(model, Mode::exact);
  BoundReport mc = theorem1_terms(model, Mode::mc, {11, 200000});
  auto close = [](const MomentEstimate& e, const MomentEstimate& m) {
    EXPECT_NEAR(m.value, e.value, 4 * m.std_error + 1e-12);
  };
  close(exact.beta, mc.beta);
  close(exact.gamma1, mc.gamma1);
  close(exact.gamma2, mc.gamma2);
  close(exact.gamma3, mc.gamma3);
  oracle::NaiveTheorem1 naive = oracle::naive_theorem1(model);
  EXPECT_EQ(exact.gamma1.exact->raw, naive.gamma1);
}

TEST(MDep, FunctionalMatchesHandComputation) {
  // MA(2) with unit coefficients on Rademacher noise: every X_i is a sum of
  // three signs, E|X|^3 = 15/2, E X^4 = 21, raw Var W = 9n - 8.
  const std::size_t n = 1024;
  LocalModel model = mdep_model(n, 2, BaseLaw::rademacher(), {Rational(1), Rational(1), Rational(1)});
  const double s = 1 / std::sqrt(9.0 * n - 8);
  EXPECT_NEAR(model.scale(), s, 1e-15);
  std::vector<double> third(n), fourth(n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> three(3, i), four(4, i);
    third[i] = mixed_moment(model, three, true, Mode::exact).value;
    fourth[i] = mixed_moment(model, four, false, Mode::exact).value;
  }
  double expected = 4 * n * 7.5 * s * s * s + std::pow(2.0, 1.5) * std::sqrt(n * 21.0) * s * s;
  EXPECT_NEAR(mdep_bound_functional(third, fourth, 2), expected, 1e-12 * expected);
  EXPECT_THROW(mdep_bound_functional(third, fourth, 0), ConfigError);
}

TEST(MatchingLaw, ConvertsToFiniteLaw) {
  FiniteLaw law = to_finite_law(four_point_law(Rational(1, 10)));
  EXPECT_EQ(law.size(), 4u);
  EXPECT_EQ(law.moment(2), Rational(1));
  EXPECT_THROW(to_finite_law(four_point_law(Rational(1, 7))), ConfigError);
}

}  // namespace
