#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ldw/local_model.hpp"
#include "ldw/rational.hpp"
#include "ldw/rng.hpp"

namespace ldw {

// Small pattern graph G. Every vertex must touch an edge.
struct Motif {
  std::string name;
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

// Edge list, one "u v" pair per line, 0-indexed; '#' starts a comment.
Motif parse_motif(std::string_view text, std::string name = "custom");
// edge, path3, triangle, star3, cycle4, k4 or a path to an edge-list file.
Motif load_motif(const std::string& name_or_path);
bool is_triangle(const Motif& motif);

// Vertex permutations preserving the edge set.
std::vector<std::vector<int>> automorphisms(const Motif& motif);

// Simple undirected graph with packed bitset rows.
class Graph {
 public:
  explicit Graph(int n);

  int size() const { return n_; }
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const {
    return (rows_[u * words_ + v / 64] >> (v % 64)) & 1u;
  }
  int degree(int v) const;
  std::uint64_t edge_count() const;
  const std::uint64_t* row(int v) const { return &rows_[v * words_]; }
  int words() const { return words_; }

 private:
  int n_;
  int words_;
  std::vector<std::uint64_t> rows_;
};

// K(n, p): each pair independently present, one 32-bit draw per pair.
Graph sample_gnp(int n, double p, Rng& rng);

// Id of pair {u, v} of K_n in lexicographic order.
std::uint32_t pair_id(int n, int u, int v);

// A copy of G in K_n: its sorted edge ids.
using Copy = std::vector<std::uint32_t>;

// All copies of G in K_n (distinct edge sets), at most `cap` of them.
std::vector<Copy> enumerate_copies(int n, const Motif& motif, std::size_t cap = 1000000);

// Number of copies of K_n^{motif} in K_n: n!/((n - v)! |Aut G|).
Rational copies_in_complete(int n, const Motif& motif);

// Non-induced copies of G in the graph. Triangles use bitset intersections.
std::uint64_t count_copies(const Graph& graph, const Motif& motif);

// min over subgraphs H with e(H) >= 1 of n^{v(H)} p^{e(H)}.
double psi(int n, double p, const Motif& motif);

// psi^{-1/2} for p <= 1/2, else n^{-1} (1 - p)^{-1/2}.
double graph_bound_functional(int n, double p, const Motif& motif);

struct SubgraphVariance {
  double value = 0.0;
  double std_error = 0.0;
  Mode mode = Mode::exact;
  std::optional<Rational> exact;
};

// Var of the copy count S. Exact mode sums p^{2e - k} - p^{2e} over ordered
// pairs of copies sharing k >= 1 edges: directly for up to 1e5 copies, else by
// counting the overlaps of one fixed copy (all copies are equivalent under
// vertex relabelling). mc mode is the sample variance over replicates.
SubgraphVariance subgraph_variance(int n, const Rational& p, const Motif& motif, Mode mode,
                                   std::uint64_t seed = 1, std::uint64_t replicates = 100000);

}  // namespace ldw
