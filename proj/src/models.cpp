#include "ldw/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ldw/error.hpp"
#include "ldw/summary.hpp"

namespace ldw {

BaseLaw BaseLaw::rademacher() { return {"rademacher", FiniteLaw::rademacher()}; }

BaseLaw BaseLaw::centered_bernoulli(const Rational& q) {
  return {"bernoulli:" + to_string(q), FiniteLaw::bernoulli(q).centered()};
}

BaseLaw BaseLaw::normal() { return {"normal", std::nullopt}; }

BaseLaw BaseLaw::from_finite(std::string name, FiniteLaw law) { return {std::move(name), std::move(law)}; }

BaseLaw BaseLaw::parse(const std::string& text) {
  if (text == "rademacher") return rademacher();
  if (text == "normal") return normal();
  if (text.rfind("bernoulli:", 0) == 0) return centered_bernoulli(parse_rational(text.substr(10)));
  throw ConfigError("unknown base law '" + text + "' (rademacher|normal|bernoulli:<q>)");
}

std::function<double(Rng&)> BaseLaw::sampler() const {
  if (!finite) return [](Rng& rng) { return rng.normal(); };
  FiniteLawSampler draw(*finite);
  return [draw](Rng& rng) { return draw(rng); };
}

double BaseLaw::variance() const {
  if (!finite) return 1.0;
  return Rational(finite->moment(2) - finite->mean() * finite->mean()).get_d();
}

namespace {

// Exact variance of the noise, 1 for N(0,1).
Rational base_variance(const BaseLaw& base) {
  if (!base.finite) return Rational(1);
  return Rational(base.finite->moment(2) - base.finite->mean() * base.finite->mean());
}

void require_centered(const BaseLaw& base) {
  if (base.finite)
    require(sgn(base.finite->mean()) == 0, "base law '" + base.name + "' is not centered");
}

LocalModel scaled_exactly(const LocalModel& model, const Rational& raw_variance) {
  if (sgn(raw_variance) <= 0) throw NumericalError("degenerate sum: Var(W) = 0");
  return model.with_scale(1.0 / std::sqrt(raw_variance.get_d()), Mode::exact, 0.0, raw_variance);
}

// Inverse-CDF index draw.
class IndexSampler {
 public:
  explicit IndexSampler(const FiniteLaw& law) {
    double running = 0.0;
    for (const auto& p : law.probs) cumulative_.push_back(running += p.get_d());
    cumulative_.back() = 1.0;
  }
  std::size_t operator()(Rng& rng) const {
    double u = rng.uniform();
    std::size_t a = 0;
    while (a + 1 < cumulative_.size() && u >= cumulative_[a]) ++a;
    return a;
  }

 private:
  std::vector<double> cumulative_;
};

// Sum of n Rademacher signs from packed random bits.
double rademacher_sum(Rng& rng, std::size_t n) {
  long total = 0;
  std::size_t left = n;
  while (left >= 64) {
    total += 2L * std::popcount(rng.next_u64()) - 64;
    left -= 64;
  }
  if (left > 0) {
    std::uint64_t bits = rng.next_u64() & ((std::uint64_t{1} << left) - 1);
    total += 2L * std::popcount(bits) - static_cast<long>(left);
  }
  return static_cast<double>(total);
}

bool is_rademacher(const BaseLaw& base) {
  return base.finite && base.finite->size() == 2 && base.finite->atoms[0] == -1 &&
         base.finite->atoms[1] == 1 && base.finite->probs[0] == Rational(1, 2);
}

}  // namespace

LocalModel factor_model(std::string name, ExactSupport support, int depth) {
  const std::size_t n = support.dependencies.size();
  require(n > 0, "factor model needs at least one summand");
  auto shared = std::make_shared<const ExactSupport>(support);
  std::vector<std::vector<Index>> users(support.factors.size());
  for (Index i = 0; i < n; ++i)
    for (auto f : support.dependencies[i]) {
      require(f < support.factors.size(), "dependency on unknown factor");
      users[f].push_back(i);
    }
  auto level1 = [shared, users](Index i) {
    IndexList out{i};
    for (auto f : shared->dependencies[i]) out.insert(out.end(), users[f].begin(), users[f].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  std::vector<IndexSampler> draws;
  for (const auto& f : support.factors) draws.emplace_back(f);
  Sampler sampler = [shared, draws](Rng& rng, std::span<double> raw) {
    std::vector<std::size_t> state(draws.size());
    for (std::size_t f = 0; f < draws.size(); ++f) state[f] = draws[f](rng);
    std::vector<Rational> args;
    for (Index i = 0; i < raw.size(); ++i) {
      const auto& deps = shared->dependencies[i];
      args.resize(deps.size());
      for (std::size_t r = 0; r < deps.size(); ++r) args[r] = shared->factors[deps[r]].atoms[state[deps[r]]];
      raw[i] = shared->summand(i, args).get_d();
    }
  };
  LocalModel model(LocalModel::Parts{std::move(name), n,
                                     NeighborhoodSystem::union_closure(n, depth, level1),
                                     std::move(sampler), nullptr, std::move(support)});
  return scaled_exactly(model, exact_raw_variance(model.exact_support()));
}

LocalModel iid_model(std::size_t n, const BaseLaw& base, int depth) {
  require(n >= 1, "iid model needs n >= 1");
  require_centered(base);
  auto draw = base.sampler();
  Sampler sampler = [draw](Rng& rng, std::span<double> raw) {
    for (double& x : raw) x = draw(rng);
  };
  SumSampler sum_sampler;
  if (is_rademacher(base))
    sum_sampler = [n](Rng& rng) { return rademacher_sum(rng, n); };
  std::optional<ExactSupport> exact;
  if (base.finite) {
    ExactSupport support;
    support.factors.assign(n, *base.finite);
    support.dependencies.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) support.dependencies[i] = {i};
    support.summand = [](Index, std::span<const Rational> v) { return v[0]; };
    exact = std::move(support);
  }
  LocalModel model(LocalModel::Parts{"iid-" + base.name, n, NeighborhoodSystem::singletons(n, depth),
                                     std::move(sampler), std::move(sum_sampler), std::move(exact)});
  return scaled_exactly(model, Rational(base_variance(base) * static_cast<unsigned long>(n)));
}

LocalModel gaussian_surrogate_model(int depth) { return iid_model(1, BaseLaw::normal(), depth); }

LocalModel mdep_model(std::size_t n, int m, const BaseLaw& base,
                      const std::vector<Rational>& coefficients, int depth) {
  require(m >= 0, "m must be nonnegative");
  require(static_cast<std::size_t>(m) < n, "m-dependent model needs m < n");
  require(coefficients.size() == static_cast<std::size_t>(m) + 1,
          "moving average needs m + 1 coefficients");
  require_centered(base);
  const std::size_t factors = n + m;
  // Factor f holds eps_{f - m}; X_i reads factors i..i+m, factor i+m-r with coefficient c_r.
  std::vector<Rational> weights(factors, Rational(0));
  for (std::size_t i = 0; i < n; ++i)
    for (int r = 0; r <= m; ++r) weights[i + m - r] += coefficients[r];
  Rational raw_variance(0);
  for (const auto& w : weights) raw_variance += w * w;
  raw_variance *= base_variance(base);

  std::vector<double> c;
  for (const auto& q : coefficients) c.push_back(q.get_d());
  std::vector<double> w;
  for (const auto& q : weights) w.push_back(q.get_d());
  auto draw = base.sampler();
  Sampler sampler = [draw, c, m, factors](Rng& rng, std::span<double> raw) {
    thread_local std::vector<double> eps;
    eps.resize(factors);
    for (double& e : eps) e = draw(rng);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      double x = 0.0;
      for (int r = 0; r <= m; ++r) x += c[r] * eps[i + m - r];
      raw[i] = x;
    }
  };
  SumSampler sum_sampler;
  if (is_rademacher(base)) {
    sum_sampler = [w](Rng& rng) {
      double total = 0.0;
      std::uint64_t bits = 0;
      for (std::size_t f = 0; f < w.size(); ++f) {
        if (f % 64 == 0) bits = rng.next_u64();
        total += (bits & 1u) ? w[f] : -w[f];
        bits >>= 1;
      }
      return total;
    };
  } else {
    sum_sampler = [w, draw](Rng& rng) {
      double total = 0.0;
      for (double wf : w) total += wf * draw(rng);
      return total;
    };
  }
  std::optional<ExactSupport> exact;
  if (base.finite) {
    ExactSupport support;
    support.factors.assign(factors, *base.finite);
    support.dependencies.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
      for (int q = 0; q <= m; ++q) support.dependencies[i].push_back(i + q);
    support.summand = [coefficients, m](Index, std::span<const Rational> v) {
      Rational x(0);
      for (int q = 0; q <= m; ++q) x += coefficients[m - q] * v[q];
      return x;
    };
    exact = std::move(support);
  }
  auto level1 = [n, m](Index i) {
    IndexList out;
    std::size_t lo = i >= static_cast<Index>(m) ? i - m : 0;
    std::size_t hi = std::min<std::size_t>(n - 1, static_cast<std::size_t>(i) + m);
    for (std::size_t j = lo; j <= hi; ++j) out.push_back(static_cast<Index>(j));
    return out;
  };
  LocalModel model(LocalModel::Parts{"mdep-" + std::to_string(m) + "-" + base.name, n,
                                     NeighborhoodSystem::union_closure(n, depth, level1),
                                     std::move(sampler), std::move(sum_sampler), std::move(exact)});
  return scaled_exactly(model, raw_variance);
}

namespace {

struct Kernel {
  std::function<double(std::span<const double>)> value;
  std::function<Rational(std::span<const Rational>)> exact;
};

Kernel make_kernel(const UStatSpec& spec) {
  const int m = spec.m;
  if (spec.kernel == "mean")
    return {[m](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / m; },
            [m](std::span<const Rational> x) {
              Rational s(0);
              for (const auto& v : x) s += v;
              return Rational(s / m);
            }};
  if (spec.kernel == "product")
    return {[](std::span<const double> x) {
              return std::accumulate(x.begin(), x.end(), 1.0, std::multiplies<>());
            },
            [](std::span<const Rational> x) {
              Rational s(1);
              for (const auto& v : x) s *= v;
              return s;
            }};
  if (spec.kernel == "mixed") {
    // rho = (E X)^m keeps the product part centered.
    Rational rho = spec.base.finite ? pow(spec.base.finite->mean(), m) : Rational(0);
    const Rational weight = spec.weight;
    const double rho_d = rho.get_d(), weight_d = weight.get_d();
    return {[m, rho_d, weight_d](std::span<const double> x) {
              double sum = 0.0, product = 1.0;
              for (double v : x) sum += v, product *= v;
              return sum / m + weight_d * (product - rho_d);
            },
            [m, rho, weight](std::span<const Rational> x) {
              Rational sum(0), product(1);
              for (const auto& v : x) sum += v, product *= v;
              return Rational(sum / m + weight * (product - rho));
            }};
  }
  throw ConfigError("unknown U-statistic kernel '" + spec.kernel + "' (mean|product|mixed)");
}

// Calls visit(atom indices) for every tuple in atoms^length.
void for_each_tuple(std::size_t atoms, int length, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> t(length, 0);
  while (true) {
    visit(t);
    int d = length - 1;
    while (d >= 0 && ++t[d] == atoms) t[d--] = 0;
    if (d < 0) return;
  }
}

Rational binomial(std::size_t n, std::size_t k) {
  if (k > n) return Rational(0);
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return Rational(out);
}

}  // namespace

LocalModel ustat_model(const UStatSpec& spec, std::uint64_t seed, int depth) {
  const int m = spec.m;
  const std::size_t n = spec.n;
  require(m >= 1 && m <= 4, "kernel order must be in 1..4");
  require(n >= 2 * static_cast<std::size_t>(m), "U-statistic needs n >= 2m");
  Rational subset_count = binomial(n, m);
  require(subset_count <= 20000000, "too many kernel subsets (C(n, m) > 2e7)");
  Kernel kernel = make_kernel(spec);
  const BaseLaw& base = spec.base;

  // Kernel mean, exact for a finite base; N(0,1) means are zero for every
  // shipped kernel.
  Rational center(0);
  if (base.finite) {
    const auto& law = *base.finite;
    std::vector<Rational> args(m);
    for_each_tuple(law.size(), m, [&](const std::vector<std::size_t>& t) {
      Rational prob(1);
      for (int r = 0; r < m; ++r) prob *= law.probs[t[r]], args[r] = law.atoms[t[r]];
      center += prob * kernel.exact(args);
    });
  }
  const double center_d = center.get_d();
  auto h = [kernel, center_d](std::span<const double> x) { return kernel.value(x) - center_d; };

  // Non-degeneracy: E[h(X_1, Y) h(X_1, Y')] = E g(X_1)^2.
  {
    auto draw = base.sampler();
    constexpr std::size_t kDraws = 10000;
    std::vector<double> products(kDraws);
    std::vector<double> a(m), b(m);
    for (std::size_t r = 0; r < kDraws; ++r) {
      Rng rng(seed, derive_stream({0x6e6f6e64, r}));
      a[0] = b[0] = draw(rng);
      for (int q = 1; q < m; ++q) a[q] = draw(rng), b[q] = draw(rng);
      products[r] = h(a) * h(b);
    }
    Summary s = summarize(products);
    if (!(s.mean >= 5.0 * s.std_error) || s.mean <= 0.0)
      throw ConfigError("U-statistic kernel looks degenerate: estimated E g(X)^2 = " +
                        std::to_string(s.mean) + " with standard error " + std::to_string(s.std_error));
  }

  // m-subsets in lexicographic order and the element -> subsets index.
  const std::size_t count = subset_count.get_num().get_ui();
  auto subsets = std::make_shared<std::vector<Index>>();
  subsets->reserve(count * m);
  {
    std::vector<Index> s(m);
    std::iota(s.begin(), s.end(), 0);
    while (true) {
      subsets->insert(subsets->end(), s.begin(), s.end());
      int d = m - 1;
      while (d >= 0 && s[d] == n - m + d) --d;
      if (d < 0) break;
      ++s[d];
      for (int q = d + 1; q < m; ++q) s[q] = s[q - 1] + 1;
    }
  }
  auto members = std::make_shared<std::vector<std::vector<Index>>>(n);
  for (Index i = 0; i < count; ++i)
    for (int q = 0; q < m; ++q) (*members)[(*subsets)[i * m + q]].push_back(i);
  auto level1 = [subsets, members, m](Index i) {
    IndexList out;
    for (int q = 0; q < m; ++q) {
      const auto& list = (*members)[(*subsets)[i * m + q]];
      out.insert(out.end(), list.begin(), list.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  Rational neighborhood_size = subset_count - binomial(n - m, m);
  std::size_t eager = subset_count * neighborhood_size <= 20000000 ? NeighborhoodSystem::kEagerLimit : 0;

  auto draw = base.sampler();
  Sampler sampler = [draw, subsets, h, m, n](Rng& rng, std::span<double> raw) {
    thread_local std::vector<double> x;
    x.resize(n);
    for (double& v : x) v = draw(rng);
    std::vector<double> args(m);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      for (int q = 0; q < m; ++q) args[q] = x[(*subsets)[i * m + q]];
      raw[i] = h(args);
    }
  };

  SumSampler sum_sampler;
  std::optional<ExactSupport> exact;
  Rational raw_variance(0);
  bool exact_variance = false;
  if (base.finite) {
    const FiniteLaw law = *base.finite;
    const std::size_t k = law.size();
    // Sum over multisets of atom types: prod_a C(count_a, mult_a) h(atoms).
    struct Pattern {
      std::vector<int> multiplicity;
      double value;
    };
    std::vector<Pattern> patterns;
    for_each_tuple(k, m, [&](const std::vector<std::size_t>& t) {
      if (!std::is_sorted(t.begin(), t.end())) return;
      Pattern pattern{std::vector<int>(k, 0), 0.0};
      std::vector<double> args(m);
      for (int q = 0; q < m; ++q) ++pattern.multiplicity[t[q]], args[q] = law.atoms[t[q]].get_d();
      pattern.value = h(args);
      patterns.push_back(std::move(pattern));
    });
    IndexSampler atom_draw(law);
    sum_sampler = [patterns, atom_draw, n, k](Rng& rng) {
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[atom_draw(rng)];
      double total = 0.0;
      for (const auto& pattern : patterns) {
        double ways = 1.0;
        for (std::size_t a = 0; a < k && ways != 0.0; ++a)
          for (int j = 0; j < pattern.multiplicity[a]; ++j)
            ways *= static_cast<double>(counts[a] - j) / (j + 1);
        total += ways * pattern.value;
      }
      return total;
    };

    // zeta_c = E[h(X_1..X_c, Y) h(X_1..X_c, Y')] by enumeration over 2m - c draws.
    for (int c = 1; c <= m; ++c) {
      Rational zeta(0);
      std::vector<Rational> a(m), b(m);
      for_each_tuple(k, 2 * m - c, [&](const std::vector<std::size_t>& t) {
        Rational prob(1);
        for (auto idx : t) prob *= law.probs[idx];
        if (sgn(prob) == 0) return;
        for (int q = 0; q < c; ++q) a[q] = b[q] = law.atoms[t[q]];
        for (int q = c; q < m; ++q) a[q] = law.atoms[t[q]], b[q] = law.atoms[t[q + m - c]];
        zeta += prob * (kernel.exact(a) - center) * (kernel.exact(b) - center);
      });
      raw_variance += binomial(m, c) * binomial(n - m, m - c) * zeta;
    }
    raw_variance *= subset_count;
    exact_variance = true;

    ExactSupport support;
    support.factors.assign(n, law);
    support.dependencies.resize(count);
    for (Index i = 0; i < count; ++i)
      support.dependencies[i].assign(subsets->begin() + i * m, subsets->begin() + (i + 1) * m);
    support.summand = [kernel, center](Index, std::span<const Rational> v) {
      return Rational(kernel.exact(v) - center);
    };
    exact = std::move(support);
  }
  LocalModel model(LocalModel::Parts{"ustat-" + spec.kernel + "-" + base.name, count,
                                     NeighborhoodSystem::union_closure(count, depth, level1, eager),
                                     std::move(sampler), std::move(sum_sampler), std::move(exact)});
  if (exact_variance) return scaled_exactly(model, raw_variance);
  return standardize(model, Mode::mc, 1e-3, seed);
}

LocalModel erg_model(const GraphSpec& spec, int depth) {
  require(sgn(spec.p) > 0 && spec.p < 1, "edge probability must be in (0, 1)");
  const int n = spec.n;
  const Motif& motif = spec.motif;
  auto copies = std::make_shared<const std::vector<Copy>>(enumerate_copies(n, motif));
  require(!copies->empty(), "K_n contains no copy of the motif");
  const std::size_t count = copies->size();
  const std::size_t edges = static_cast<std::size_t>(n) * (n - 1) / 2;
  auto users = std::make_shared<std::vector<std::vector<Index>>>(edges);
  for (Index c = 0; c < count; ++c)
    for (auto id : (*copies)[c]) (*users)[id].push_back(c);
  auto level1 = [copies, users](Index i) {
    IndexList out;
    for (auto id : (*copies)[i]) out.insert(out.end(), (*users)[id].begin(), (*users)[id].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  std::size_t neighborhood_size = level1(0).size();
  std::size_t eager = count * neighborhood_size <= 20000000 ? NeighborhoodSystem::kEagerLimit : 0;

  const int e = motif.edge_count();
  const Rational pe = pow(spec.p, e);
  const double pe_d = pe.get_d();
  const double threshold = spec.p.get_d() * 4294967296.0;
  Sampler sampler = [copies, edges, threshold, pe_d](Rng& rng, std::span<double> raw) {
    thread_local std::vector<unsigned char> present;
    present.resize(edges);
    for (auto& b : present) b = static_cast<double>(rng.next_u32()) < threshold;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      double y = 1.0;
      for (auto id : (*copies)[i]) y *= present[id];
      raw[i] = y - pe_d;
    }
  };
  const double p_d = spec.p.get_d();
  const double offset = static_cast<double>(count) * pe_d;
  SumSampler sum_sampler = [n, p_d, motif, offset](Rng& rng) {
    return static_cast<double>(count_copies(sample_gnp(n, p_d, rng), motif)) - offset;
  };

  ExactSupport support;
  support.factors.assign(edges, FiniteLaw::bernoulli(spec.p));
  support.dependencies.resize(count);
  for (Index c = 0; c < count; ++c) support.dependencies[c] = (*copies)[c];
  support.summand = [pe](Index, std::span<const Rational> v) {
    Rational y(1);
    for (const auto& b : v) y *= b;
    return Rational(y - pe);
  };

  SubgraphVariance variance = subgraph_variance(n, spec.p, motif, Mode::exact);
  LocalModel model(LocalModel::Parts{"erg-" + motif.name, count,
                                     NeighborhoodSystem::union_closure(count, depth, level1, eager),
                                     std::move(sampler), std::move(sum_sampler), std::move(support)});
  return scaled_exactly(model, *variance.exact);
}

FiniteLaw to_finite_law(const DiscreteLaw& law) {
  std::vector<Rational> probs;
  for (const auto& p : law.probs) {
    require(p.surd_part() == 0, "law probabilities are irrational (sqrt(n) not an integer)");
    probs.push_back(p.rational_part());
  }
  return FiniteLaw::make(law.atoms, std::move(probs));
}

}  // namespace ldw
