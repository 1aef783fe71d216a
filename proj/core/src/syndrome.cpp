#include "hetdqcd/syndrome.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <utility>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

namespace {

double total_weight(const NetworkConfig& config) {
  double s = 0.0;
  for (const auto& g : config.groups) s += g.count * g.weight;
  return s;
}

void check_threshold_range(const NetworkConfig& config, double M) {
  if (!(M > 0.0)) throw InvalidParameter("weighted threshold M must be > 0");
  if (!weight_at_least(total_weight(config), M))
    throw InvalidParameter("weighted threshold M exceeds the total network weight");
}

// Top selection restricted to the sensors of a canonical syndrome:
// take weights from the heaviest group down until the sum reaches M.
// The result is always a critical syndrome of the weighted rule.
CountSyndrome topselect_within(const CountVector& counts, const NetworkConfig& config,
                               double M) {
  CountSyndrome out;
  out.counts.assign(config.num_groups, 0);
  double sum = 0.0;
  for (int l = config.num_groups - 1; l >= 0; --l) {
    double alpha = config.groups[l].weight;
    for (int k = 0; k < counts[l]; ++k) {
      if (weight_at_least(sum, M)) return out;
      sum += alpha;
      out.counts[l] += 1;
    }
  }
  if (!weight_at_least(sum, M))
    throw ContractViolation("top selection ran out of weight below M");
  return out;
}

// Low-sum bound restricted to the sensors of a canonical syndrome:
// smallest m whose ascending-weight prefix sum reaches M.
int lowsum_within(const CountVector& counts, const NetworkConfig& config, double M) {
  double sum = 0.0;
  int m = 0;
  for (int l = 0; l < config.num_groups; ++l) {
    double alpha = config.groups[l].weight;
    for (int k = 0; k < counts[l]; ++k) {
      sum += alpha;
      m += 1;
      if (weight_at_least(sum, M)) return m;
    }
  }
  throw ContractViolation("low-sum scan ran out of weight below M");
}

}  // namespace

int CountSyndrome::cardinality() const {
  int c = 0;
  for (int n : counts) c += n;
  return c;
}

bool contains(const CountVector& outer, const CountVector& inner) {
  for (std::size_t l = 0; l < outer.size(); ++l)
    if (inner[l] > outer[l]) return false;
  return true;
}

double weight_sum(const CountVector& counts, const NetworkConfig& config) {
  double s = 0.0;
  for (int l = 0; l < config.num_groups; ++l) s += counts[l] * config.groups[l].weight;
  return s;
}

double kld_sum(const CountVector& counts, const NetworkConfig& config) {
  double s = 0.0;
  for (int l = 0; l < config.num_groups; ++l) s += counts[l] * config.groups[l].kld;
  return s;
}

CountVector counts_of_mask(std::uint32_t mask, const NetworkConfig& config) {
  CountVector counts(config.num_groups, 0);
  while (mask != 0) {
    int flat = std::countr_zero(mask);
    counts[config.group_of_flat(flat) - 1] += 1;
    mask &= mask - 1;
  }
  return counts;
}

bool SyndromeFamily::member_counts(const CountVector& counts) const {
  if (!count_form) throw InvalidParameter("count membership on a bitset family");
  for (const auto& c : count_criticals)
    if (contains(counts, c.counts)) return true;
  return false;
}

bool SyndromeFamily::member_mask(std::uint32_t mask, const NetworkConfig& config) const {
  if (count_form) return member_counts(counts_of_mask(mask, config));
  for (std::uint32_t c : bit_criticals)
    if ((mask & c) == c) return true;
  return false;
}

bool weighted_member(const CountVector& counts, const NetworkConfig& config, double M) {
  return weight_at_least(weight_sum(counts, config), M);
}

SyndromeFamily criticals_bruteforce(const std::function<bool(std::uint32_t)>& member,
                                    const NetworkConfig& config) {
  int n = config.total_sensors;
  if (n > 22) throw CapacityError("brute-force enumeration limited to N <= 22");
  std::uint64_t size = 1ULL << n;
  std::vector<char> table(size);
  for (std::uint64_t m = 0; m < size; ++m) table[m] = member(static_cast<std::uint32_t>(m));

  if (table[0]) throw ContractViolation("empty syndrome must not be a member");
  if (!table[size - 1]) throw ContractViolation("full sensor set must be a member");
  for (std::uint64_t m = 0; m < size; ++m) {
    if (!table[m]) continue;
    for (int b = 0; b < n; ++b) {
      std::uint64_t super = m | (1ULL << b);
      if (!table[super]) throw ContractViolation("membership predicate is not monotone");
    }
  }

  SyndromeFamily family;
  family.count_form = false;
  for (std::uint64_t m = 1; m < size; ++m) {
    if (!table[m]) continue;
    bool minimal = true;
    std::uint64_t rest = m;
    while (rest != 0) {
      std::uint64_t bit = rest & (~rest + 1);
      if (table[m & ~bit]) {
        minimal = false;
        break;
      }
      rest &= rest - 1;
    }
    if (minimal) family.bit_criticals.push_back(static_cast<std::uint32_t>(m));
  }
  return family;
}

SyndromeFamily criticals_weighted(const NetworkConfig& config, double M) {
  check_threshold_range(config, M);
  SyndromeFamily family;
  family.count_form = true;
  int L = config.num_groups;
  CountVector counts(L, 0);
  // odometer over all count vectors, lexicographic ascending
  while (true) {
    double sum = weight_sum(counts, config);
    if (weight_at_least(sum, M)) {
      bool critical = true;
      for (int l = 0; l < L && critical; ++l)
        if (counts[l] > 0 && weight_at_least(sum - config.groups[l].weight, M))
          critical = false;
      if (critical) family.count_criticals.push_back(CountSyndrome{counts});
    }
    int l = L - 1;
    while (l >= 0 && counts[l] == config.groups[l].count) counts[l--] = 0;
    if (l < 0) break;
    counts[l] += 1;
  }
  return family;
}

FamilyStats family_stats(const SyndromeFamily& family, const NetworkConfig& config) {
  if (family.empty()) throw InvalidParameter("family has no critical syndromes");
  FamilyStats stats;
  stats.m_omega = config.total_sensors + 1;
  stats.i_omega = std::numeric_limits<double>::infinity();
  if (family.count_form) {
    for (const auto& c : family.count_criticals) {
      stats.m_omega = std::min(stats.m_omega, c.cardinality());
      stats.i_omega = std::min(stats.i_omega, kld_sum(c.counts, config));
    }
  } else {
    for (std::uint32_t mask : family.bit_criticals) {
      CountVector counts = counts_of_mask(mask, config);
      stats.m_omega = std::min(stats.m_omega, std::popcount(mask));
      stats.i_omega = std::min(stats.i_omega, kld_sum(counts, config));
    }
  }
  return stats;
}

TopSelectResult bar_m_topselect(const NetworkConfig& config, double M) {
  check_threshold_range(config, M);
  CountVector full(config.num_groups);
  for (int l = 0; l < config.num_groups; ++l) full[l] = config.groups[l].count;
  TopSelectResult r;
  r.omega_top = topselect_within(full, config, M);
  r.m_bar = r.omega_top.cardinality();
  return r;
}

int bar_M_lowsum_bound(const NetworkConfig& config, double M) {
  check_threshold_range(config, M);
  CountVector full(config.num_groups);
  for (int l = 0; l < config.num_groups; ++l) full[l] = config.groups[l].count;
  return lowsum_within(full, config, M);
}

PruningResult bar_M_pruning(const NetworkConfig& config, double M) {
  check_threshold_range(config, M);
  int L = config.num_groups;
  CountVector full(L);
  for (int l = 0; l < L; ++l) full[l] = config.groups[l].count;

  PruningResult result;
  // Nodes ordered by descending cardinality so the first time the frontier
  // falls to the best cardinality found, nothing deeper can improve on it.
  auto deeper = [](const std::pair<int, CountVector>& a,
                   const std::pair<int, CountVector>& b) { return a < b; };
  std::priority_queue<std::pair<int, CountVector>, std::vector<std::pair<int, CountVector>>,
                      decltype(deeper)>
      frontier(deeper);
  std::set<CountVector> seen;
  frontier.emplace(config.total_sensors, full);
  seen.insert(full);

  while (!frontier.empty()) {
    auto [card, c] = frontier.top();
    frontier.pop();
    if (card <= result.M_bar) break;  // discoveries below c are subsets of c
    // The low-sum bound restricted to c caps every critical inside c.
    if (lowsum_within(c, config, M) <= result.M_bar) continue;
    result.parent_iterations += 1;

    CountSyndrome ts = topselect_within(c, config, M);
    int ts_card = ts.cardinality();
    if (ts_card > result.M_bar) {
      result.M_bar = ts_card;
      result.omega_M_bar = ts;
    }
    // One child per group the top selection draws from: drop that group's
    // largest-indexed sensors until the parent's top selection no longer
    // fits, i.e. down to one short of its take. Milder drops still contain
    // the parent's critical, and children below weight M host none at all.
    for (int j = 0; j < L; ++j) {
      if (ts.counts[j] == 0) continue;
      CountVector child = c;
      child[j] = ts.counts[j] - 1;
      if (!weight_at_least(weight_sum(child, config), M)) continue;
      if (seen.insert(child).second)
        frontier.emplace(card - (c[j] - child[j]), child);
    }
  }
  return result;
}

double pruning_iteration_bound(const NetworkConfig& config) {
  int L = config.num_groups;
  int half = (config.total_sensors + 1) / 2;
  double bound = 1.0;
  for (int j = 1; j <= L - 1; ++j) bound *= static_cast<double>(half + j) / j;
  return bound;
}

DbarResult omega_star_and_dbar(const SyndromeFamily& family, const NetworkConfig& config,
                               int M_bar, double M) {
  if (!family.count_form)
    throw InvalidParameter("omega_star_and_dbar needs a count-form family");
  const CountSyndrome* best = nullptr;
  double best_kld = std::numeric_limits<double>::infinity();
  for (const auto& c : family.count_criticals) {
    if (c.cardinality() != M_bar) continue;
    double k = kld_sum(c.counts, config);
    if (best == nullptr || k < best_kld - kWeightTol ||
        (std::abs(k - best_kld) <= kWeightTol && c.counts < best->counts)) {
      best = &c;
      best_kld = k;
    }
  }
  if (best == nullptr)
    throw InvalidParameter("family has no critical syndrome of cardinality M_bar");

  DbarResult r;
  r.omega_star = *best;
  int lmax = 0;  // largest group present in omega*, 1-based
  for (int l = 0; l < config.num_groups; ++l)
    if (best->counts[l] > 0) lmax = l + 1;
  r.dbar_counts.assign(config.num_groups, 0);
  for (int l = 0; l < config.num_groups; ++l)
    r.dbar_counts[l] = (l + 1 >= lmax) ? config.groups[l].count : best->counts[l];
  for (int n : r.dbar_counts) r.dbar_size += n;

  // Defining property: every M_bar-subset of D-bar reaches M * I_L, so it
  // suffices to check the lightest one (ascending weights within D-bar).
  double lightest = 0.0;
  int taken = 0;
  for (int l = 0; l < config.num_groups && taken < M_bar; ++l)
    for (int k = 0; k < r.dbar_counts[l] && taken < M_bar; ++k, ++taken)
      lightest += config.groups[l].weight;
  if (taken < M_bar || !weight_at_least(lightest, M))
    throw ContractViolation("D-bar violates the M_bar-subset weight condition");
  return r;
}

}  // namespace hetdqcd
