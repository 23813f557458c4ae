#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "coreselect/sample.hpp"

namespace coreselect {

// One residual cover problem: pick the fewest candidates so every target
// lies within `radius` of a pick, no pick representing more than `capacity`
// targets. Targets index into `candidates` and must be strictly ascending.
struct CoverInstance {
  std::vector<Eigen::VectorXd> candidates;
  std::vector<std::size_t> targets;
  double radius = 0.0;
  Capacity capacity = Capacity::unbounded();
};

// assignment[k] is the candidate index representing targets[k]; loads is
// parallel to selected and counts assigned targets per pick.
struct CoverSolution {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> assignment;
  std::vector<std::uint32_t> loads;
};

// Unit-capacity bipartite flow network deciding whether a fixed selection
// can absorb every target. Node layout: 0 = source, 1..|Q| = targets,
// |Q|+1..|Q|+n = candidates, last = sink.
struct FlowNetwork {
  struct Arc {
    std::size_t to = 0;
    std::size_t rev = 0;   // index of the reverse arc in adj[to]
    std::int64_t cap = 0;  // residual capacity
  };

  std::size_t source = 0;
  std::size_t sink = 0;
  std::vector<std::vector<Arc>> adj;

  void add_arc(std::size_t from, std::size_t to, std::int64_t cap);
};

FlowNetwork build_flow_network(const CoverInstance& instance,
                               const std::vector<std::size_t>& alpha);

// Shortest-augmenting-path max flow; integral because capacities are.
std::int64_t max_flow(FlowNetwork& net);

// Tests whether selecting exactly `alpha` absorbs every target; on success
// the assignment is read off the saturated unit arcs. Loads of selected
// candidates that absorb nothing stay 0.
std::optional<CoverSolution> feasibility_maxflow(
    const CoverInstance& instance, const std::vector<std::size_t>& alpha);

inline constexpr std::size_t kDefaultExactLimit = 20;

// Minimum selection by enumerating index sets in increasing cardinality,
// lexicographic within a cardinality, returning the first feasible one.
// Throws std::invalid_argument when the candidate count exceeds `limit`.
CoverSolution solve_exact(const CoverInstance& instance,
                          std::size_t limit = kDefaultExactLimit);

// Greedy maximum-coverage heuristic; requires unbounded capacity. Each
// round picks the candidate covering the most uncovered targets, ties to
// the smallest index; targets are assigned to the round that first covered
// them.
CoverSolution solve_greedy_msc(const CoverInstance& instance);

// Dispatch: exact when the instance is small enough, greedy otherwise.
// Finite capacity above the exact limit runs greedy ignoring capacity and
// then repairs overloads by adding picks until the flow check passes.
CoverSolution solve_cover(const CoverInstance& instance,
                          std::size_t exact_limit = kDefaultExactLimit);

// Re-checks a solution against the instance from scratch: every target
// assigned exactly once within radius, loads consistent and within
// capacity. Throws std::logic_error on any violation.
void validate_solution(const CoverInstance& instance,
                       const CoverSolution& solution);

}  // namespace coreselect
