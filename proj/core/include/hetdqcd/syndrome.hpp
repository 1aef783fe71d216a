#ifndef HETDQCD_SYNDROME_HPP
#define HETDQCD_SYNDROME_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "hetdqcd/network.hpp"

namespace hetdqcd {

// Relative tolerance for all weighted-sum threshold comparisons.
inline constexpr double kWeightTol = 1e-12;

// x >= m up to relative tolerance.
inline bool weight_at_least(double x, double m) {
  return x >= m - kWeightTol * std::max(1.0, std::abs(m));
}

// Group-count canonical form of a syndrome: counts[l-1] sensors taken from
// group l, always the lowest-indexed prefix (canonical form; groups are exchangeable).
using CountVector = std::vector<int>;

struct CountSyndrome {
  CountVector counts;
  int cardinality() const;
  friend bool operator==(const CountSyndrome&, const CountSyndrome&) = default;
};

// a contained in b as sensor sets of canonical syndromes.
bool contains(const CountVector& outer, const CountVector& inner);

double weight_sum(const CountVector& counts, const NetworkConfig& config);
double kld_sum(const CountVector& counts, const NetworkConfig& config);

// Count vector of an explicit bitset over flat sensor indices.
CountVector counts_of_mask(std::uint32_t mask, const NetworkConfig& config);

// Upward-closed family of syndromes represented by its antichain of
// critical (minimal) syndromes, in count form when the family is
// group-exchangeable or in explicit bitset form otherwise.
struct SyndromeFamily {
  bool count_form = true;
  std::vector<CountSyndrome> count_criticals;
  std::vector<std::uint32_t> bit_criticals;  // bitset form, N <= 32

  bool empty() const { return count_criticals.empty() && bit_criticals.empty(); }
  std::size_t size() const {
    return count_form ? count_criticals.size() : bit_criticals.size();
  }

  bool member_counts(const CountVector& counts) const;  // count form only
  bool member_mask(std::uint32_t mask, const NetworkConfig& config) const;
};

// Weighted M voting membership: sum of group weights over counts >= M.
bool weighted_member(const CountVector& counts, const NetworkConfig& config, double M);

// Exact minimal elements of a monotone membership predicate over bitsets,
// by 2^N enumeration (N <= 22). Monotonicity is validated and a violation
// raises ContractViolation.
SyndromeFamily criticals_bruteforce(const std::function<bool(std::uint32_t)>& member,
                                    const NetworkConfig& config);

// Critical syndromes of the weighted M voting rule in count form:
// weight sum >= M and every single decrement drops below M.
SyndromeFamily criticals_weighted(const NetworkConfig& config, double M);

struct FamilyStats {
  int m_omega = 0;       // min critical cardinality
  double i_omega = 0.0;  // min critical KLD sum
};

FamilyStats family_stats(const SyndromeFamily& family, const NetworkConfig& config);

// Fact-1 top selection: smallest m whose top-m weight sum reaches M, with
// the witnessing critical syndrome (heaviest groups first).
struct TopSelectResult {
  int m_bar = 0;
  CountSyndrome omega_top;
};
TopSelectResult bar_m_topselect(const NetworkConfig& config, double M);

// Fact-1 low-sum bound: smallest m whose ascending-weight prefix sum
// reaches M; an upper bound on the maximum critical cardinality.
int bar_M_lowsum_bound(const NetworkConfig& config, double M);

// Pruning search over canonical count syndromes for the maximum critical
// cardinality of the weighted rule. Nodes are visited largest-first; each
// node spawns one child per group used by its top selection, cut down just
// below that selection's take so no child contains the parent's critical.
struct PruningResult {
  int M_bar = 0;
  CountSyndrome omega_M_bar;
  long parent_iterations = 0;
};
PruningResult bar_M_pruning(const NetworkConfig& config, double M);

// Combinatorial cap on pruning parent iterations: binom(L-1+ceil(N/2), L-1).
double pruning_iteration_bound(const NetworkConfig& config);

// omega* = minimum-KLD-sum critical of cardinality M_bar (lexicographic
// tie-break on count vectors) and D-bar = omega* plus every sensor whose
// group is >= the largest group present in omega*. Validates that every
// M_bar-subset of D-bar has KLD sum >= M * I_L.
struct DbarResult {
  CountSyndrome omega_star;
  CountVector dbar_counts;  // sensors of D-bar per group (prefix form)
  int dbar_size = 0;
};
DbarResult omega_star_and_dbar(const SyndromeFamily& family, const NetworkConfig& config,
                               int M_bar, double M);

}  // namespace hetdqcd

#endif
