#include "ldw/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "ldw/error.hpp"
#include "ldw/summary.hpp"

namespace ldw {

Motif parse_motif(std::string_view text, std::string name) {
  Motif motif;
  motif.name = std::move(name);
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long u, v;
    if (!(fields >> u)) continue;
    std::string rest;
    if (!(fields >> v) || (fields >> rest))
      throw ConfigError("motif line " + std::to_string(line_no) + ": expected \"u v\"");
    require(u >= 0 && v >= 0 && u < 64 && v < 64, "motif vertex ids must be in [0, 64)");
    require(u != v, "motif line " + std::to_string(line_no) + ": self-loop");
    std::pair<int, int> edge{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
    require(std::find(motif.edges.begin(), motif.edges.end(), edge) == motif.edges.end(),
            "motif line " + std::to_string(line_no) + ": duplicate edge");
    motif.edges.push_back(edge);
    motif.vertices = std::max({motif.vertices, edge.first + 1, edge.second + 1});
  }
  require(!motif.edges.empty(), "motif has no edges");
  std::vector<bool> touched(motif.vertices, false);
  for (auto [u, v] : motif.edges) touched[u] = touched[v] = true;
  require(std::all_of(touched.begin(), touched.end(), [](bool t) { return t; }),
          "motif vertex ids must be contiguous (every vertex on an edge)");
  return motif;
}

Motif load_motif(const std::string& name_or_path) {
  static const std::map<std::string, std::string> named = {
      {"edge", "0 1"},
      {"path3", "0 1\n1 2"},
      {"triangle", "0 1\n1 2\n0 2"},
      {"star3", "0 1\n0 2\n0 3"},
      {"cycle4", "0 1\n1 2\n2 3\n0 3"},
      {"k4", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3"},
  };
  if (auto it = named.find(name_or_path); it != named.end())
    return parse_motif(it->second, it->first);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("unknown motif '" + name_or_path + "' (not a name or a readable file)");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_motif(buffer.str(), name_or_path);
}

bool is_triangle(const Motif& motif) { return motif.vertices == 3 && motif.edge_count() == 3; }

namespace {

std::vector<std::vector<bool>> adjacency(const Motif& motif) {
  std::vector<std::vector<bool>> adj(motif.vertices, std::vector<bool>(motif.vertices, false));
  for (auto [u, v] : motif.edges) adj[u][v] = adj[v][u] = true;
  return adj;
}

// Calls visit(map) for one injective map K_v -> K_n per copy: the map that is
// lexicographically smallest among its compositions with automorphisms.
void for_each_canonical_map(int n, const Motif& motif,
                            const std::function<void(const std::vector<int>&)>& visit) {
  const int v = motif.vertices;
  auto autos = automorphisms(motif);
  std::vector<int> map(v);
  std::vector<bool> used(n, false);
  std::function<void(int)> extend = [&](int depth) {
    if (depth == v) {
      for (const auto& sigma : autos) {
        for (int x = 0; x < v; ++x) {
          int other = map[sigma[x]];
          if (other < map[x]) return;
          if (other > map[x]) break;
        }
      }
      visit(map);
      return;
    }
    for (int a = 0; a < n; ++a) {
      if (used[a]) continue;
      used[a] = true;
      map[depth] = a;
      extend(depth + 1);
      used[a] = false;
    }
  };
  extend(0);
}

Copy image_edges(int n, const Motif& motif, const std::vector<int>& map) {
  Copy copy;
  copy.reserve(motif.edges.size());
  for (auto [u, v] : motif.edges) copy.push_back(pair_id(n, map[u], map[v]));
  std::sort(copy.begin(), copy.end());
  return copy;
}

Rational binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return Rational(0);
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return Rational(out);
}

}  // namespace

std::vector<std::vector<int>> automorphisms(const Motif& motif) {
  auto adj = adjacency(motif);
  std::vector<int> perm(motif.vertices);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    for (auto [u, v] : motif.edges)
      if (!adj[perm[u]][perm[v]]) {
        ok = false;
        break;
      }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Graph::Graph(int n) : n_(n), words_((n + 63) / 64), rows_(static_cast<std::size_t>(n) * words_, 0) {
  require(n >= 1, "graph needs at least one vertex");
}

void Graph::add_edge(int u, int v) {
  require(u != v && u >= 0 && v >= 0 && u < n_ && v < n_, "invalid graph edge");
  rows_[u * words_ + v / 64] |= std::uint64_t{1} << (v % 64);
  rows_[v * words_ + u / 64] |= std::uint64_t{1} << (u % 64);
}

int Graph::degree(int v) const {
  int d = 0;
  for (int w = 0; w < words_; ++w) d += std::popcount(rows_[v * words_ + w]);
  return d;
}

std::uint64_t Graph::edge_count() const {
  std::uint64_t total = 0;
  for (int v = 0; v < n_; ++v) total += degree(v);
  return total / 2;
}

Graph sample_gnp(int n, double p, Rng& rng) {
  require(p >= 0.0 && p <= 1.0, "edge probability outside [0, 1]");
  Graph g(n);
  const double threshold = p * 4294967296.0;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (static_cast<double>(rng.next_u32()) < threshold) g.add_edge(u, v);
  return g;
}

std::uint32_t pair_id(int n, int u, int v) {
  if (u > v) std::swap(u, v);
  auto a = static_cast<std::uint64_t>(u), b = static_cast<std::uint64_t>(v);
  return static_cast<std::uint32_t>(a * (2 * static_cast<std::uint64_t>(n) - a - 1) / 2 + (b - a - 1));
}

Rational copies_in_complete(int n, const Motif& motif) {
  if (n < motif.vertices) return Rational(0);
  mpz_class falling = 1;
  for (int k = 0; k < motif.vertices; ++k) falling *= n - k;
  Rational count(falling, static_cast<unsigned long>(automorphisms(motif).size()));
  count.canonicalize();
  return count;
}

std::vector<Copy> enumerate_copies(int n, const Motif& motif, std::size_t cap) {
  require(n >= 1, "ambient graph needs at least one vertex");
  Rational total = copies_in_complete(n, motif);
  if (total > Rational(static_cast<unsigned long>(cap)))
    throw ConfigError("K_" + std::to_string(n) + " has " + to_string(total) + " copies of " +
                      motif.name + ", above the materialization cap of " + std::to_string(cap) +
                      "; use the sum-only sampler (triangle fast path) for copy counts");
  std::vector<Copy> copies;
  copies.reserve(total.get_num().get_ui());
  for_each_canonical_map(n, motif, [&](const std::vector<int>& map) {
    copies.push_back(image_edges(n, motif, map));
  });
  std::sort(copies.begin(), copies.end());
  return copies;
}

std::uint64_t count_copies(const Graph& graph, const Motif& motif) {
  const int n = graph.size();
  const int words = graph.words();
  if (is_triangle(motif)) {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> mask(words);
    for (int u = 0; u < n; ++u) {
      const std::uint64_t* ru = graph.row(u);
      for (int w = u / 64; w < words; ++w) {
        std::uint64_t bits = ru[w];
        if (w == u / 64) bits &= (u % 64 == 63) ? 0 : (~std::uint64_t{0} << (u % 64 + 1));
        while (bits) {
          int v = w * 64 + std::countr_zero(bits);
          bits &= bits - 1;
          const std::uint64_t* rv = graph.row(v);
          // Common neighbours above v.
          int first = v / 64;
          std::uint64_t head = ru[first] & rv[first];
          head &= (v % 64 == 63) ? 0 : (~std::uint64_t{0} << (v % 64 + 1));
          total += std::popcount(head);
          for (int x = first + 1; x < words; ++x) total += std::popcount(ru[x] & rv[x]);
        }
      }
    }
    return total;
  }
  // Injective edge-preserving maps, divided by |Aut G|.
  const int v = motif.vertices;
  auto adj = adjacency(motif);
  std::vector<int> order{0};
  std::vector<bool> placed(v, false);
  placed[0] = true;
  while (static_cast<int>(order.size()) < v) {
    int best = -1, best_links = -1;
    for (int x = 0; x < v; ++x) {
      if (placed[x]) continue;
      int links = 0;
      for (int y : order) links += adj[x][y];
      if (links > best_links) best = x, best_links = links;
    }
    placed[best] = true;
    order.push_back(best);
  }
  std::vector<int> map(v, -1);
  std::vector<bool> used(n, false);
  std::uint64_t maps = 0;
  std::function<void(int)> extend = [&](int depth) {
    if (depth == v) {
      ++maps;
      return;
    }
    int x = order[depth];
    int anchor = -1;
    for (int d = 0; d < depth; ++d)
      if (adj[x][order[d]]) {
        anchor = map[order[d]];
        break;
      }
    for (int a = 0; a < n; ++a) {
      if (used[a] || (anchor >= 0 && !graph.has_edge(anchor, a))) continue;
      bool ok = true;
      for (int d = 0; d < depth && ok; ++d)
        if (adj[x][order[d]] && !graph.has_edge(map[order[d]], a)) ok = false;
      if (!ok) continue;
      used[a] = true;
      map[x] = a;
      extend(depth + 1);
      used[a] = false;
    }
  };
  extend(0);
  return maps / automorphisms(motif).size();
}

double psi(int n, double p, const Motif& motif) {
  require(motif.vertices <= 8, "psi enumerates motifs with at most 8 vertices");
  // For a fixed vertex set the induced edges give the smallest p^{e(H)}, so
  // minimizing over vertex subsets equals minimizing over edge subsets.
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << motif.vertices); ++mask) {
    int edges = 0;
    for (auto [u, v] : motif.edges)
      if ((mask >> u & 1u) && (mask >> v & 1u)) ++edges;
    if (edges == 0) continue;
    double value = std::pow(static_cast<double>(n), std::popcount(mask)) * std::pow(p, edges);
    best = std::min(best, value);
  }
  return best;
}

double graph_bound_functional(int n, double p, const Motif& motif) {
  require(p > 0.0 && p < 1.0, "graph bound needs 0 < p < 1");
  if (p <= 0.5) return 1.0 / std::sqrt(psi(n, p, motif));
  return 1.0 / (static_cast<double>(n) * std::sqrt(1.0 - p));
}

namespace {

// sum_k count[k] (p^{2e-k} - p^{2e}).
Rational overlap_sum(const std::map<int, Rational>& overlaps, const Rational& p, int e) {
  Rational total(0);
  Rational base = pow(p, 2 * e);
  for (const auto& [k, count] : overlaps) total += count * (pow(p, 2 * e - k) - base);
  return total;
}

}  // namespace

SubgraphVariance subgraph_variance(int n, const Rational& p, const Motif& motif, Mode mode,
                                   std::uint64_t seed, std::uint64_t replicates) {
  require(sgn(p) > 0 && p < 1, "edge probability must be in (0, 1)");
  require(n >= motif.vertices, "ambient graph smaller than the motif");
  const int e = motif.edge_count();
  SubgraphVariance out;
  out.mode = mode;
  if (mode == Mode::mc) {
    require(replicates >= 2, "Monte Carlo needs at least 2 replicates");
    std::vector<double> counts(replicates);
    for (std::uint64_t r = 0; r < replicates; ++r) {
      Rng rng(seed, stream_id(r, 0));
      counts[r] = static_cast<double>(count_copies(sample_gnp(n, p.get_d(), rng), motif));
    }
    Summary s = summarize(counts);
    std::vector<double> squares(replicates);
    for (std::uint64_t r = 0; r < replicates; ++r) squares[r] = (counts[r] - s.mean) * (counts[r] - s.mean);
    out.value = s.variance;
    out.std_error = summarize(squares).std_error;
    return out;
  }

  Rational total_copies = copies_in_complete(n, motif);
  std::map<int, Rational> overlaps;
  if (total_copies <= 100000) {
    auto copies = enumerate_copies(n, motif, 100000);
    std::size_t edges = static_cast<std::size_t>(n) * (n - 1) / 2;
    std::vector<std::vector<std::uint32_t>> users(edges);
    for (std::uint32_t c = 0; c < copies.size(); ++c)
      for (auto id : copies[c]) users[id].push_back(c);
    std::vector<int> shared(copies.size(), 0);
    std::vector<std::uint32_t> touched;
    std::map<int, std::uint64_t> counts;
    for (std::uint32_t c = 0; c < copies.size(); ++c) {
      touched.clear();
      for (auto id : copies[c])
        for (auto d : users[id])
          if (shared[d]++ == 0) touched.push_back(d);
      for (auto d : touched) {
        ++counts[shared[d]];
        shared[d] = 0;
      }
    }
    for (auto [k, count] : counts) overlaps[k] = Rational(static_cast<unsigned long>(count));
  } else {
    require(motif.vertices <= 7, "exact variance beyond 1e5 copies needs a motif with <= 7 vertices");
    // Copies meeting the fixed copy on vertices 0..v-1 in at least one edge use
    // at least two of its vertices, so v - 2 outside vertices suffice.
    const int v = motif.vertices;
    const int universe = 2 * v - 2;
    std::vector<int> identity(v);
    std::iota(identity.begin(), identity.end(), 0);
    Copy fixed = image_edges(universe, motif, identity);
    std::map<std::pair<int, int>, std::uint64_t> tally;  // (outside vertices, shared edges)
    for_each_canonical_map(universe, motif, [&](const std::vector<int>& map) {
      Copy copy = image_edges(universe, motif, map);
      std::vector<std::uint32_t> common;
      std::set_intersection(copy.begin(), copy.end(), fixed.begin(), fixed.end(),
                            std::back_inserter(common));
      if (common.empty()) return;
      int outside = static_cast<int>(std::count_if(map.begin(), map.end(), [&](int a) { return a >= v; }));
      ++tally[{outside, static_cast<int>(common.size())}];
    });
    for (const auto& [key, count] : tally) {
      auto [t, k] = key;
      overlaps[k] += Rational(static_cast<unsigned long>(count)) * binomial(n - v, t) / binomial(v - 2, t);
    }
    for (auto& [k, count] : overlaps) count *= total_copies;
  }
  Rational variance = overlap_sum(overlaps, p, e);
  out.value = variance.get_d();
  out.exact = variance;
  return out;
}

}  // namespace ldw
