#include "ldw/neighborhood.hpp"

#include <algorithm>
#include <sstream>

#include "ldw/error.hpp"

namespace ldw {

IndexSet::IndexSet(std::size_t size) : size_(size) {
  require(size > 0, "index set must be nonempty");
}

NeighborhoodSystem::NeighborhoodSystem(std::size_t size, int depth, Rule rule)
    : size_(size), depth_(depth), rule_(std::move(rule)) {
  require(size > 0, "neighborhood system over an empty index set");
  require(depth >= 1, "neighborhood depth must be >= 1");
  require(static_cast<bool>(rule_), "neighborhood rule is empty");
}

NeighborhoodSystem NeighborhoodSystem::union_closure(std::size_t size, int depth, Level1 level1,
                                                     std::size_t eager_limit) {
  require(static_cast<bool>(level1), "level-1 neighborhood map is empty");
  std::function<const IndexList*(Index, IndexList&)> lookup;
  if (size <= eager_limit) {
    auto table = std::make_shared<std::vector<IndexList>>(size);
    for (Index i = 0; i < size; ++i) (*table)[i] = level1(i);
    lookup = [table](Index i, IndexList&) -> const IndexList* { return &(*table)[i]; };
  } else {
    lookup = [level1](Index i, IndexList& scratch) -> const IndexList* {
      scratch = level1(i);
      return &scratch;
    };
  }
  Rule rule = [lookup](std::span<const Index> tuple, IndexList& out) {
    IndexList scratch, merged;
    out.clear();
    for (std::size_t r = 0; r < tuple.size(); ++r) {
      if (std::find(tuple.begin(), tuple.begin() + r, tuple[r]) != tuple.begin() + r) continue;
      const IndexList* next = lookup(tuple[r], scratch);
      if (out.empty()) {
        out = *next;
        continue;
      }
      merged.clear();
      std::set_union(out.begin(), out.end(), next->begin(), next->end(), std::back_inserter(merged));
      out.swap(merged);
    }
  };
  return NeighborhoodSystem(size, depth, std::move(rule));
}

NeighborhoodSystem NeighborhoodSystem::from_table(std::size_t size, int depth,
                                                  std::map<std::vector<Index>, IndexList> table) {
  auto shared = std::make_shared<const std::map<std::vector<Index>, IndexList>>(std::move(table));
  Rule rule = [shared](std::span<const Index> tuple, IndexList& out) {
    auto it = shared->find(std::vector<Index>(tuple.begin(), tuple.end()));
    if (it == shared->end())
      out.clear();
    else
      out = it->second;
  };
  return NeighborhoodSystem(size, depth, std::move(rule));
}

NeighborhoodSystem NeighborhoodSystem::singletons(std::size_t size, int depth) {
  return union_closure(size, depth, [](Index i) { return IndexList{i}; });
}

IndexList NeighborhoodSystem::neighborhood(std::span<const Index> tuple) const {
  IndexList out;
  neighborhood_into(tuple, out);
  return out;
}

void NeighborhoodSystem::neighborhood_into(std::span<const Index> tuple, IndexList& out) const {
  if (tuple.empty() || static_cast<int>(tuple.size()) > depth_)
    throw ConfigError("neighborhood requested for a tuple of length " +
                      std::to_string(tuple.size()) + " (depth " + std::to_string(depth_) + ")");
  rule_(tuple, out);
}

NeighborhoodSystem NeighborhoodSystem::with_depth(int depth) const {
  return NeighborhoodSystem(size_, depth, rule_);
}

std::string NeighborhoodViolation::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::out_of_range: out << "out-of-range element "; break;
    case Kind::malformed: out << "unsorted or duplicate element "; break;
    case Kind::missing_self: out << "missing own index "; break;
    case Kind::not_nested: out << "nesting broken, missing element "; break;
  }
  out << element << " at tuple (";
  for (std::size_t r = 0; r < tuple.size(); ++r) out << (r ? "," : "") << tuple[r];
  out << ")";
  return out.str();
}

namespace {

void check_chain(const NeighborhoodSystem& system, std::vector<Index>& tuple,
                 const IndexList& parent, ValidationReport& report) {
  using Kind = NeighborhoodViolation::Kind;
  IndexList here = system.neighborhood(tuple);
  bool well_formed = true;
  for (std::size_t r = 0; r < here.size(); ++r) {
    if (here[r] >= system.size()) {
      report.violations.push_back({Kind::out_of_range, tuple, here[r]});
      well_formed = false;
    }
    if (r > 0 && here[r] <= here[r - 1]) {
      report.violations.push_back({Kind::malformed, tuple, here[r]});
      well_formed = false;
    }
  }
  if (!well_formed) {
    std::sort(here.begin(), here.end());
    here.erase(std::unique(here.begin(), here.end()), here.end());
  }
  if (tuple.size() == 1) {
    if (!std::binary_search(here.begin(), here.end(), tuple[0]))
      report.violations.push_back({Kind::missing_self, tuple, tuple[0]});
  } else {
    for (Index k : parent)
      if (!std::binary_search(here.begin(), here.end(), k))
        report.violations.push_back({Kind::not_nested, tuple, k});
  }
  if (static_cast<int>(tuple.size()) == system.depth()) return;
  for (Index next : here) {
    if (next >= system.size()) continue;
    tuple.push_back(next);
    check_chain(system, tuple, here, report);
    tuple.pop_back();
  }
}

void chain_walk(const NeighborhoodSystem& system, int length, std::vector<Index>& chain,
                IndexList& scratch,
                const std::function<void(std::span<const Index>)>& visit) {
  if (static_cast<int>(chain.size()) == length) {
    visit(chain);
    return;
  }
  IndexList next;
  system.neighborhood_into(chain, next);
  for (Index k : next) {
    chain.push_back(k);
    chain_walk(system, length, chain, scratch, visit);
    chain.pop_back();
  }
}

}  // namespace

ValidationReport validate_neighborhoods(const NeighborhoodSystem& system) {
  ValidationReport report;
  std::vector<Index> tuple;
  const IndexList none;
  for (Index i = 0; i < system.size(); ++i) {
    tuple.assign(1, i);
    check_chain(system, tuple, none, report);
  }
  return report;
}

void for_each_chain(const NeighborhoodSystem& system, int length,
                    const std::function<void(std::span<const Index>)>& visit) {
  require(length >= 1, "chain length must be >= 1");
  require(length - 1 <= system.depth(),
          "chains of length " + std::to_string(length) + " need neighborhoods to depth " +
              std::to_string(length - 1) + ", system has depth " + std::to_string(system.depth()));
  std::vector<Index> chain;
  IndexList scratch;
  for (Index i = 0; i < system.size(); ++i) {
    chain.assign(1, i);
    chain_walk(system, length, chain, scratch, visit);
  }
}

}  // namespace ldw
