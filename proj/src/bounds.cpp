#include "ldw/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ldw/error.hpp"
#include "ldw/parallel.hpp"
#include "ldw/summary.hpp"

namespace ldw {

namespace {

// Chains of the given length, flattened.
std::vector<Index> collect_chains(const NeighborhoodSystem& system, int length) {
  std::vector<Index> flat;
  for_each_chain(system, length, [&](std::span<const Index> chain) {
    flat.insert(flat.end(), chain.begin(), chain.end());
  });
  return flat;
}

// Segment boundaries [0, b1, ..., bk, length] of a placement.
std::vector<int> segment_bounds(const EPlacement& placement) {
  std::vector<int> bounds{0};
  bounds.insert(bounds.end(), placement.breaks.begin(), placement.breaks.end());
  bounds.push_back(placement.m + 2);
  return bounds;
}

// Triples (i, j, k) contributing to beta with their multiplicity 1 or 2.
struct BetaTerms {
  std::vector<Index> triples;
  std::vector<int> weights;
};

BetaTerms collect_beta_terms(const NeighborhoodSystem& system) {
  BetaTerms terms;
  IndexList a_i, a_ij;
  for (Index i = 0; i < system.size(); ++i) {
    Index t1[] = {i};
    system.neighborhood_into(t1, a_i);
    for (Index j : a_i) {
      for (Index k : a_i) {
        terms.triples.insert(terms.triples.end(), {i, j, k});
        terms.weights.push_back(1);
      }
      Index t2[] = {i, j};
      system.neighborhood_into(t2, a_ij);
      for (Index k : a_ij) {
        if (std::binary_search(a_i.begin(), a_i.end(), k)) continue;
        terms.triples.insert(terms.triples.end(), {i, j, k});
        terms.weights.push_back(2);
      }
    }
  }
  return terms;
}

MomentEstimate summarize_mc(std::span<const double> values) {
  Summary s = summarize(values);
  MomentEstimate m;
  m.mode = Mode::mc;
  m.value = s.mean;
  m.std_error = s.std_error;
  m.n_replicates = values.size();
  return m;
}

}  // namespace

BoundReport theorem1_terms(const LocalModel& model, Mode mode, const McOptions& mc) {
  const auto& system = model.neighborhoods();
  require(system.depth() >= 3, "theorem1_terms needs neighborhoods to depth 3");
  BetaTerms beta_terms = collect_beta_terms(system);
  std::vector<Index> quads = collect_chains(system, 4);
  const std::size_t n_triples = beta_terms.weights.size();
  const std::size_t n_quads = quads.size() / 4;

  BoundReport report;
  report.mode = mode;
  report.term_count = n_triples + n_quads;

  if (mode == Mode::exact) {
    ExactMomentCache cache(model.exact_support());
    Rational beta(0), g1(0), g2(0), g3(0);
    for (std::size_t t = 0; t < n_triples; ++t) {
      const Rational& v = cache.get(std::span(&beta_terms.triples[3 * t], 3), false);
      if (beta_terms.weights[t] == 1)
        beta += v;
      else
        beta += 2 * v;
    }
    for (std::size_t q = 0; q < n_quads; ++q) {
      const Index* c = &quads[4 * q];
      g1 += cache.get(std::span(c, 4), true);
      g2 += cache.get(std::span(c, 2), true) * cache.get(std::span(c + 2, 2), true);
      g3 += cache.get(std::span(c, 3), true) * cache.get(std::span(c + 3, 1), true);
    }
    report.beta = from_exact(model, beta, 3);
    report.gamma1 = from_exact(model, g1, 4);
    report.gamma2 = from_exact(model, g2, 4);
    report.gamma3 = from_exact(model, g3, 4);
  } else {
    require(mc.replicates >= 2, "Monte Carlo needs at least 2 replicates");
    const std::size_t reps = mc.replicates;
    std::vector<double> beta(reps), g1(reps), g2(reps), g3(reps);
    parallel_for(reps, [&](std::size_t r) {
      thread_local std::vector<double> x, y;
      x.resize(model.size());
      y.resize(model.size());
      Rng rx(mc.seed, stream_id(r, 0)), ry(mc.seed, stream_id(r, 1));
      model.sample(rx, x);
      model.sample(ry, y);
      CompensatedSum b, s1, s2, s3;
      for (std::size_t t = 0; t < n_triples; ++t) {
        const Index* c = &beta_terms.triples[3 * t];
        b.add(beta_terms.weights[t] * x[c[0]] * x[c[1]] * x[c[2]]);
      }
      for (std::size_t q = 0; q < n_quads; ++q) {
        const Index* c = &quads[4 * q];
        double xij = std::abs(x[c[0]] * x[c[1]]);
        double xijk = xij * std::abs(x[c[2]]);
        s1.add(xijk * std::abs(x[c[3]]));
        s2.add(xij * std::abs(y[c[2]] * y[c[3]]));
        s3.add(xijk * std::abs(y[c[3]]));
      }
      beta[r] = b.value();
      g1[r] = s1.value();
      g2[r] = s2.value();
      g3[r] = s3.value();
    });
    report.beta = summarize_mc(beta);
    report.gamma1 = summarize_mc(g1);
    report.gamma2 = summarize_mc(g2);
    report.gamma3 = summarize_mc(g3);
  }
  report.functional_w2 = w2_bound_functional(report);
  return report;
}

double w2_bound_functional(const BoundReport& report) {
  double gammas = report.gamma1.value + report.gamma2.value + report.gamma3.value;
  return std::abs(report.beta.value) + std::sqrt(std::max(0.0, gammas));
}

double mdep_bound_functional(std::span<const double> third_moments,
                             std::span<const double> fourth_moments, int m) {
  require(third_moments.size() == fourth_moments.size(),
          "third and fourth moment lists differ in length");
  require(m >= 1, "m-dependent bound needs m >= 1 (m = 0 is the independent case)");
  double third = 0.0, fourth = 0.0;
  for (double v : third_moments) {
    require(v >= 0.0, "negative absolute third moment");
    third += v;
  }
  for (double v : fourth_moments) {
    require(v >= 0.0, "negative fourth moment");
    fourth += v;
  }
  double md = static_cast<double>(m);
  return md * md * third + std::pow(md, 1.5) * std::sqrt(fourth);
}

std::vector<EPlacement> enumerate_e_placements(int m) {
  require(m >= 1 && m <= 12, "E-placements are enumerated for 1 <= m <= 12");
  std::vector<EPlacement> out;
  std::vector<int> current;
  std::function<void(int)> extend = [&](int next) {
    out.push_back(EPlacement{m, current});
    for (int b = next; b <= m + 1; ++b) {
      current.push_back(b);
      extend(b + 2);
      current.pop_back();
    }
  };
  extend(2);
  std::stable_sort(out.begin(), out.end(), [](const EPlacement& a, const EPlacement& b) {
    if (a.breaks.size() != b.breaks.size()) return a.breaks.size() < b.breaks.size();
    return a.breaks < b.breaks;
  });
  return out;
}

MomentEstimate compute_Rm(const LocalModel& model, int m, Mode mode, const McOptions& mc) {
  require(m >= 1 && m <= 12, "R_m needs 1 <= m <= 12");
  const auto& system = model.neighborhoods();
  require(system.depth() >= m + 1,
          "R_" + std::to_string(m) + " needs neighborhoods to depth " + std::to_string(m + 1));
  const int length = m + 2;
  std::vector<std::vector<int>> patterns;
  for (const auto& placement : enumerate_e_placements(m)) patterns.push_back(segment_bounds(placement));
  std::vector<Index> chains = collect_chains(system, length);
  const std::size_t n_chains = chains.size() / length;

  if (mode == Mode::exact) {
    require(m <= 4, "exact R_m is limited to m <= 4");
    ExactMomentCache cache(model.exact_support());
    Rational total(0), product;
    for (std::size_t c = 0; c < n_chains; ++c) {
      const Index* chain = &chains[c * length];
      for (const auto& bounds : patterns) {
        product = 1;
        for (std::size_t s = 0; s + 1 < bounds.size() && sgn(product) != 0; ++s)
          product *= cache.get(std::span(chain + bounds[s], chain + bounds[s + 1]), true);
        total += product;
      }
    }
    return from_exact(model, total, static_cast<unsigned>(length));
  }

  require(mc.replicates >= 2, "Monte Carlo needs at least 2 replicates");
  // |prod over a segment| = prod of |x|, so each placement's product is a
  // product over chain positions with the stream role set by the segment.
  // Chains come in lexicographic order; only positions after the first one
  // that differs from the previous chain are recomputed.
  const std::size_t n_patterns = patterns.size();
  std::size_t roles = 0;
  std::vector<std::uint32_t> role(n_patterns * length);
  for (std::size_t p = 0; p < n_patterns; ++p) {
    const auto& bounds = patterns[p];
    roles = std::max(roles, bounds.size() - 1);
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s)
      for (int q = bounds[s]; q < bounds[s + 1]; ++q) role[p * length + q] = static_cast<std::uint32_t>(s);
  }
  std::vector<std::uint8_t> first_change(n_chains, 0);
  for (std::size_t c = 1; c < n_chains; ++c) {
    int q = 0;
    while (q < length && chains[c * length + q] == chains[(c - 1) * length + q]) ++q;
    first_change[c] = static_cast<std::uint8_t>(q);
  }
  std::vector<double> values(mc.replicates);
  parallel_for(mc.replicates, [&](std::size_t r) {
    thread_local std::vector<std::vector<double>> x;
    thread_local std::vector<double> prefix;
    x.resize(roles);
    for (std::size_t t = 0; t < roles; ++t) {
      x[t].resize(model.size());
      Rng rng(mc.seed, stream_id(r, static_cast<std::uint32_t>(t)));
      model.sample(rng, x[t]);
      for (double& v : x[t]) v = std::abs(v);
    }
    // prefix[p * (length + 1) + q]: product over positions < q.
    const std::size_t stride = length + 1;
    prefix.assign(n_patterns * stride, 1.0);
    CompensatedSum total;
    for (std::size_t c = 0; c < n_chains; ++c) {
      const Index* chain = &chains[c * length];
      for (std::size_t p = 0; p < n_patterns; ++p) {
        double* acc = &prefix[p * stride];
        const std::uint32_t* rp = &role[p * length];
        for (int q = first_change[c]; q < length; ++q) acc[q + 1] = acc[q] * x[rp[q]][chain[q]];
        total.add(acc[length]);
      }
    }
    values[r] = total.value();
  });
  return summarize_mc(values);
}

double wp_conjecture_functional(const LocalModel& model, int p, Mode mode, const McOptions& mc) {
  require(p >= 1 && p <= 4, "R_m functional is defined for 1 <= p <= 4");
  double total = 0.0;
  for (int m = 1; m <= p; ++m)
    total += std::pow(std::max(0.0, compute_Rm(model, m, mode, mc).value), 1.0 / m);
  return total;
}

double iid_wp_bound(std::span<const double> abs_moments_p_plus_2, double p) {
  require(!abs_moments_p_plus_2.empty(), "iid bound needs at least one moment");
  require(p >= 1.0, "iid bound needs p >= 1");
  double total = 0.0;
  for (double v : abs_moments_p_plus_2) {
    require(v >= 0.0, "negative absolute moment");
    total += v;
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace ldw
