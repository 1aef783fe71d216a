#ifndef HETDQCD_TESTS_FIXTURES_HPP
#define HETDQCD_TESTS_FIXTURES_HPP

#include <random>

#include "hetdqcd/network.hpp"
#include "hetdqcd/syndrome.hpp"

// The two simulation networks used throughout the tests: L = 3 groups with
// counts (4, 3, 3), standard-normal pre-change, mean shifts per group.
inline hetdqcd::NetworkConfig case1_network() {
  return hetdqcd::build_network({hetdqcd::gaussian_group(0.35, 4),
                                 hetdqcd::gaussian_group(0.75, 3),
                                 hetdqcd::gaussian_group(1.0, 3)});
}

inline hetdqcd::NetworkConfig case2_network() {
  return hetdqcd::build_network({hetdqcd::gaussian_group(0.75, 4),
                                 hetdqcd::gaussian_group(0.85, 3),
                                 hetdqcd::gaussian_group(1.0, 3)});
}

// Random small network for oracle-equivalence property tests.
inline hetdqcd::NetworkConfig random_network(std::mt19937_64& rng, int max_groups = 4,
                                             int max_sensors = 12) {
  std::uniform_int_distribution<int> group_count(1, max_groups);
  std::uniform_real_distribution<double> shift(0.2, 2.0);
  int L = group_count(rng);
  std::vector<hetdqcd::GroupSpec> groups;
  int budget = max_sensors - L;  // at least one sensor per group
  for (int l = 0; l < L; ++l) {
    std::uniform_int_distribution<int> extra(0, budget);
    int e = (l == L - 1) ? budget : extra(rng);
    budget -= e;
    groups.push_back(hetdqcd::gaussian_group(shift(rng), 1 + e));
  }
  return hetdqcd::build_network(std::move(groups));
}

// A random weighted threshold inside (0, total weight].
inline double random_threshold(std::mt19937_64& rng, const hetdqcd::NetworkConfig& net) {
  double total = 0.0;
  for (const auto& g : net.groups) total += g.count * g.weight;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  return u(rng) * total;
}

#endif
