#include "coreselect/cover.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

#include "coreselect/geometry.hpp"

namespace coreselect {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_index_set(const std::vector<std::size_t>& indices, std::size_t n,
                     const char* what) {
  std::size_t prev_plus1 = 0;
  for (const std::size_t idx : indices) {
    if (idx >= n) {
      throw std::invalid_argument(std::string(what) + " index out of range");
    }
    if (idx + 1 <= prev_plus1) {
      throw std::invalid_argument(std::string(what) +
                                  " indices must be strictly ascending");
    }
    prev_plus1 = idx + 1;
  }
}

void check_instance(const CoverInstance& instance) {
  if (instance.radius < 0.0) {
    throw std::invalid_argument("cover radius must be >= 0");
  }
  check_index_set(instance.targets, instance.candidates.size(), "target");
}

// reach[k][j]: candidate j may represent targets[k].
std::vector<std::vector<char>> reach_matrix(const CoverInstance& instance) {
  const std::size_t q = instance.targets.size();
  const std::size_t n = instance.candidates.size();
  std::vector<std::vector<char>> reach(q, std::vector<char>(n, 0));
  for (std::size_t k = 0; k < q; ++k) {
    const Eigen::VectorXd& target = instance.candidates[instance.targets[k]];
    for (std::size_t j = 0; j < n; ++j) {
      reach[k][j] =
          within_radius(distance(target, instance.candidates[j]),
                        instance.radius)
              ? 1
              : 0;
    }
  }
  return reach;
}

std::int64_t sink_arc_capacity(const CoverInstance& instance, std::size_t q) {
  if (!instance.capacity.finite()) return static_cast<std::int64_t>(q);
  return std::min<std::int64_t>(instance.capacity.value(),
                                static_cast<std::int64_t>(q));
}

FlowNetwork build_network(const CoverInstance& instance,
                          const std::vector<std::vector<char>>& reach,
                          const std::vector<std::size_t>& alpha) {
  const std::size_t q = instance.targets.size();
  const std::size_t n = instance.candidates.size();
  FlowNetwork net;
  net.source = 0;
  net.sink = q + n + 1;
  net.adj.resize(q + n + 2);

  std::vector<char> selected(n, 0);
  for (const std::size_t j : alpha) selected[j] = 1;

  for (std::size_t k = 0; k < q; ++k) net.add_arc(net.source, 1 + k, 1);
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      if (selected[j] && reach[k][j]) net.add_arc(1 + k, 1 + q + j, 1);
    }
  }
  const std::int64_t cap = sink_arc_capacity(instance, q);
  for (std::size_t j = 0; j < n; ++j) {
    net.add_arc(1 + q + j, net.sink, selected[j] ? cap : 0);
  }
  return net;
}

std::optional<CoverSolution> feasible_with_reach(
    const CoverInstance& instance, const std::vector<std::vector<char>>& reach,
    const std::vector<std::size_t>& alpha) {
  const std::size_t q = instance.targets.size();
  const std::size_t n = instance.candidates.size();
  FlowNetwork net = build_network(instance, reach, alpha);
  if (max_flow(net) != static_cast<std::int64_t>(q)) return std::nullopt;

  std::vector<std::size_t> position(n, kNone);
  for (std::size_t p = 0; p < alpha.size(); ++p) position[alpha[p]] = p;

  CoverSolution solution;
  solution.selected = alpha;
  solution.assignment.resize(q, kNone);
  solution.loads.assign(alpha.size(), 0);
  for (std::size_t k = 0; k < q; ++k) {
    for (const FlowNetwork::Arc& arc : net.adj[1 + k]) {
      // Saturated unit arc into a candidate node carries this target.
      if (arc.to > q && arc.to <= q + n && arc.cap == 0) {
        const std::size_t j = arc.to - 1 - q;
        solution.assignment[k] = j;
        ++solution.loads[position[j]];
        break;
      }
    }
    if (solution.assignment[k] == kNone) {
      throw std::logic_error("max flow saturated source yet left a target "
                             "without a carrying arc");
    }
  }
  return solution;
}

// Round-ordered greedy picks, capacity ignored; covered targets remember
// the pick that first reached them.
struct GreedyRounds {
  std::vector<std::size_t> picks;
  std::vector<std::size_t> assignment;
};

GreedyRounds greedy_rounds(const CoverInstance& instance,
                           const std::vector<std::vector<char>>& reach) {
  const std::size_t q = instance.targets.size();
  const std::size_t n = instance.candidates.size();
  GreedyRounds rounds;
  rounds.assignment.assign(q, kNone);
  std::size_t remaining = q;
  while (remaining > 0) {
    std::size_t best = kNone;
    std::size_t best_count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t count = 0;
      for (std::size_t k = 0; k < q; ++k) {
        if (rounds.assignment[k] == kNone && reach[k][j]) ++count;
      }
      if (count > best_count) {
        best = j;
        best_count = count;
      }
    }
    if (best == kNone) {
      throw std::logic_error("uncovered target out of reach of every "
                             "candidate despite self-coverage");
    }
    for (std::size_t k = 0; k < q; ++k) {
      if (rounds.assignment[k] == kNone && reach[k][best]) {
        rounds.assignment[k] = best;
      }
    }
    rounds.picks.push_back(best);
    remaining -= best_count;
  }
  return rounds;
}

CoverSolution solution_from_rounds(const GreedyRounds& rounds) {
  CoverSolution solution;
  solution.selected = rounds.picks;
  std::sort(solution.selected.begin(), solution.selected.end());
  solution.assignment = rounds.assignment;
  solution.loads.assign(solution.selected.size(), 0);
  for (const std::size_t j : rounds.assignment) {
    const auto it = std::lower_bound(solution.selected.begin(),
                                     solution.selected.end(), j);
    ++solution.loads[static_cast<std::size_t>(
        it - solution.selected.begin())];
  }
  return solution;
}

// Greedy selection, then extra picks until the flow check accepts the
// capacity-feasible assignment. Heuristic path for large finite-capacity
// windows; makes no optimality claim.
CoverSolution repair_capacity(const CoverInstance& instance,
                              const std::vector<std::vector<char>>& reach) {
  const std::size_t q = instance.targets.size();
  const std::size_t n = instance.candidates.size();
  std::vector<std::size_t> selection = greedy_rounds(instance, reach).picks;
  std::sort(selection.begin(), selection.end());
  std::vector<char> in_selection(n, 0);
  for (const std::size_t j : selection) in_selection[j] = 1;

  for (;;) {
    if (auto solution = feasible_with_reach(instance, reach, selection)) {
      // Repair picks the flow ends up not using carry no targets; drop
      // them so every returned pick has load >= 1.
      CoverSolution trimmed;
      for (std::size_t p = 0; p < solution->selected.size(); ++p) {
        if (solution->loads[p] == 0) continue;
        trimmed.selected.push_back(solution->selected[p]);
        trimmed.loads.push_back(solution->loads[p]);
      }
      trimmed.assignment = std::move(solution->assignment);
      return trimmed;
    }
    std::size_t best = kNone;
    std::size_t best_count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_selection[j]) continue;
      std::size_t count = 0;
      for (std::size_t k = 0; k < q; ++k) {
        if (reach[k][j]) ++count;
      }
      if (count > best_count) {
        best = j;
        best_count = count;
      }
    }
    if (best == kNone) {
      throw std::logic_error("capacity repair exhausted candidates; full "
                             "selection should always be feasible");
    }
    in_selection[best] = 1;
    selection.insert(
        std::lower_bound(selection.begin(), selection.end(), best), best);
  }
}

}  // namespace

void FlowNetwork::add_arc(std::size_t from, std::size_t to,
                          std::int64_t cap) {
  adj[from].push_back(Arc{to, adj[to].size(), cap});
  adj[to].push_back(Arc{from, adj[from].size() - 1, 0});
}

FlowNetwork build_flow_network(const CoverInstance& instance,
                               const std::vector<std::size_t>& alpha) {
  check_instance(instance);
  check_index_set(alpha, instance.candidates.size(), "alpha");
  return build_network(instance, reach_matrix(instance), alpha);
}

std::int64_t max_flow(FlowNetwork& net) {
  std::int64_t total = 0;
  const std::size_t nodes = net.adj.size();
  std::vector<std::size_t> prev_node(nodes);
  std::vector<std::size_t> prev_arc(nodes);
  for (;;) {
    std::vector<char> seen(nodes, 0);
    std::deque<std::size_t> queue;
    queue.push_back(net.source);
    seen[net.source] = 1;
    while (!queue.empty() && !seen[net.sink]) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (std::size_t a = 0; a < net.adj[node].size(); ++a) {
        const FlowNetwork::Arc& arc = net.adj[node][a];
        if (arc.cap <= 0 || seen[arc.to]) continue;
        seen[arc.to] = 1;
        prev_node[arc.to] = node;
        prev_arc[arc.to] = a;
        queue.push_back(arc.to);
        if (arc.to == net.sink) break;
      }
    }
    if (!seen[net.sink]) break;

    std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
    for (std::size_t v = net.sink; v != net.source; v = prev_node[v]) {
      bottleneck =
          std::min(bottleneck, net.adj[prev_node[v]][prev_arc[v]].cap);
    }
    for (std::size_t v = net.sink; v != net.source; v = prev_node[v]) {
      FlowNetwork::Arc& arc = net.adj[prev_node[v]][prev_arc[v]];
      arc.cap -= bottleneck;
      net.adj[arc.to][arc.rev].cap += bottleneck;
    }
    total += bottleneck;
  }
  return total;
}

std::optional<CoverSolution> feasibility_maxflow(
    const CoverInstance& instance, const std::vector<std::size_t>& alpha) {
  check_instance(instance);
  check_index_set(alpha, instance.candidates.size(), "alpha");
  return feasible_with_reach(instance, reach_matrix(instance), alpha);
}

CoverSolution solve_exact(const CoverInstance& instance, std::size_t limit) {
  check_instance(instance);
  const std::size_t n = instance.candidates.size();
  const std::size_t q = instance.targets.size();
  if (q == 0) return CoverSolution{};
  if (n > limit) {
    throw std::invalid_argument(
        "instance exceeds the exact-solver limit; use the greedy path");
  }

  const auto reach = reach_matrix(instance);
  const std::size_t max_k = std::min(n, q);
  for (std::size_t k = 1; k <= max_k; ++k) {
    if (instance.capacity.finite() &&
        static_cast<std::uint64_t>(instance.capacity.value()) * k < q) {
      continue;  // total capacity cannot absorb all targets
    }
    std::vector<std::size_t> alpha(k);
    for (std::size_t i = 0; i < k; ++i) alpha[i] = i;
    for (;;) {
      bool plausible = true;
      for (std::size_t t = 0; t < q && plausible; ++t) {
        bool reached = false;
        for (const std::size_t j : alpha) {
          if (reach[t][j]) {
            reached = true;
            break;
          }
        }
        plausible = reached;
      }
      if (plausible) {
        if (auto solution = feasible_with_reach(instance, reach, alpha)) {
          return *solution;
        }
      }
      // Next k-combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && alpha[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++alpha[i - 1];
      for (std::size_t j = i; j < k; ++j) alpha[j] = alpha[j - 1] + 1;
    }
  }
  throw std::logic_error("exhausted subsets without a feasible cover; "
                         "self-assignment should always be feasible");
}

CoverSolution solve_greedy_msc(const CoverInstance& instance) {
  check_instance(instance);
  if (instance.capacity.finite()) {
    throw std::invalid_argument("greedy cover requires unbounded capacity");
  }
  if (instance.targets.empty()) return CoverSolution{};
  const auto reach = reach_matrix(instance);
  return solution_from_rounds(greedy_rounds(instance, reach));
}

CoverSolution solve_cover(const CoverInstance& instance,
                          std::size_t exact_limit) {
  check_instance(instance);
  if (instance.targets.empty()) return CoverSolution{};
  if (instance.candidates.size() <= exact_limit) {
    return solve_exact(instance, exact_limit);
  }
  if (!instance.capacity.finite()) return solve_greedy_msc(instance);
  return repair_capacity(instance, reach_matrix(instance));
}

void validate_solution(const CoverInstance& instance,
                       const CoverSolution& solution) {
  check_instance(instance);
  const std::size_t n = instance.candidates.size();
  const std::size_t q = instance.targets.size();
  if (solution.assignment.size() != q) {
    throw std::logic_error("assignment size does not match target count");
  }
  if (solution.loads.size() != solution.selected.size()) {
    throw std::logic_error("loads size does not match selection size");
  }
  std::size_t prev_plus1 = 0;
  for (const std::size_t j : solution.selected) {
    if (j >= n) throw std::logic_error("selected index out of range");
    if (j + 1 <= prev_plus1) {
      throw std::logic_error("selected indices must be strictly ascending");
    }
    prev_plus1 = j + 1;
  }

  std::vector<std::uint32_t> recount(solution.selected.size(), 0);
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t j = solution.assignment[k];
    const auto it = std::lower_bound(solution.selected.begin(),
                                     solution.selected.end(), j);
    if (it == solution.selected.end() || *it != j) {
      throw std::logic_error("target assigned to an unselected candidate");
    }
    const double dist = distance(instance.candidates[instance.targets[k]],
                                 instance.candidates[j]);
    if (!within_radius(dist, instance.radius)) {
      throw std::logic_error("assignment exceeds the coverage radius");
    }
    ++recount[static_cast<std::size_t>(it - solution.selected.begin())];
  }
  for (std::size_t p = 0; p < recount.size(); ++p) {
    if (recount[p] != solution.loads[p]) {
      throw std::logic_error("stored load disagrees with assignment count");
    }
    if (!instance.capacity.within(recount[p])) {
      throw std::logic_error("load exceeds capacity");
    }
  }
}

}  // namespace coreselect
