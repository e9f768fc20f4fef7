#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ldw {

using Index = std::uint32_t;
// Sorted, duplicate-free list of indices.
using IndexList = std::vector<Index>;

class IndexSet {
 public:
  explicit IndexSet(std::size_t size);
  std::size_t size() const noexcept { return size_; }
  bool contains(Index i) const noexcept { return i < size_; }

 private:
  std::size_t size_;
};

// Nested neighborhoods A_i, A_ij, A_ijk, ... over an index set. A neighborhood
// is addressed by the chain tuple (i1, ..., ik) that defines it, 1 <= k <= depth.
class NeighborhoodSystem {
 public:
  using Rule = std::function<void(std::span<const Index> tuple, IndexList& out)>;
  using Level1 = std::function<IndexList(Index)>;

  // Level-1 maps are materialized eagerly up to this many indices.
  static constexpr std::size_t kEagerLimit = 100000;

  NeighborhoodSystem(std::size_t size, int depth, Rule rule);

  // A_{i1..ik} = A_{i1} ∪ ... ∪ A_{ik}: the closure used by every shipped model.
  // Level-1 sets are tabulated when size <= eager_limit, else recomputed per query.
  static NeighborhoodSystem union_closure(std::size_t size, int depth, Level1 level1,
                                          std::size_t eager_limit = kEagerLimit);
  // Explicit tuple -> set table. Missing tuples map to the empty set.
  static NeighborhoodSystem from_table(std::size_t size, int depth,
                                       std::map<std::vector<Index>, IndexList> table);
  // A_{i1..ik} = {i1, ..., ik}.
  static NeighborhoodSystem singletons(std::size_t size, int depth);

  std::size_t size() const noexcept { return size_; }
  int depth() const noexcept { return depth_; }

  IndexList neighborhood(std::span<const Index> tuple) const;
  void neighborhood_into(std::span<const Index> tuple, IndexList& out) const;
  IndexList neighborhood(std::initializer_list<Index> tuple) const {
    return neighborhood(std::span<const Index>(tuple.begin(), tuple.size()));
  }

  // Same system truncated or extended to another declared depth (the rule is
  // unchanged).
  NeighborhoodSystem with_depth(int depth) const;

 private:
  std::size_t size_;
  int depth_;
  Rule rule_;
};

struct NeighborhoodViolation {
  enum class Kind {
    out_of_range,  // an element >= |I|
    malformed,     // neighborhood not sorted or has duplicates
    missing_self,  // i not in A_i
    not_nested,    // A_{t} not contained in A_{t,k}
  };
  Kind kind;
  std::vector<Index> tuple;
  Index element;  // offending element (for not_nested: the missing one)

  std::string describe() const;
};

struct ValidationReport {
  std::vector<NeighborhoodViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Walks every chain up to the declared depth and records each membership or
// nesting violation. Violations are data; this never throws for a populated
// system.
ValidationReport validate_neighborhoods(const NeighborhoodSystem& system);

// Calls visit(chain) for every chain i1 ∈ I, i2 ∈ A_{i1}, ..., i_len ∈
// A_{i1..i_{len-1}}. Requires len - 1 <= depth.
void for_each_chain(const NeighborhoodSystem& system, int length,
                    const std::function<void(std::span<const Index>)>& visit);

}  // namespace ldw
