#include <doctest.h>

#include <bit>
#include <set>

#include "fixtures.hpp"
#include "hetdqcd/errors.hpp"
#include "hetdqcd/syndrome.hpp"

using namespace hetdqcd;

namespace {

// Independent oracle: count-vector set of the brute-force bitset criticals.
std::set<CountVector> brute_critical_counts(const NetworkConfig& net, double M) {
  auto member = [&](std::uint32_t mask) {
    return weight_at_least(weight_sum(counts_of_mask(mask, net), net), M);
  };
  SyndromeFamily brute = criticals_bruteforce(member, net);
  std::set<CountVector> out;
  for (std::uint32_t mask : brute.bit_criticals) out.insert(counts_of_mask(mask, net));
  return out;
}

std::set<CountVector> weighted_critical_counts(const NetworkConfig& net, double M) {
  std::set<CountVector> out;
  for (const auto& c : criticals_weighted(net, M).count_criticals) out.insert(c.counts);
  return out;
}

int brute_min_cardinality(const NetworkConfig& net, double M) {
  int best = net.total_sensors + 1;
  for (const auto& c : brute_critical_counts(net, M)) {
    int card = 0;
    for (int n : c) card += n;
    best = std::min(best, card);
  }
  return best;
}

int brute_max_cardinality(const NetworkConfig& net, double M) {
  int best = 0;
  for (const auto& c : brute_critical_counts(net, M)) {
    int card = 0;
    for (int n : c) card += n;
    best = std::max(best, card);
  }
  return best;
}

}  // namespace

TEST_CASE("anonymous voting criticals are the M-subsets") {
  NetworkConfig net = build_network({gaussian_group(1.0, 5)});
  auto member = [](std::uint32_t mask) { return std::popcount(mask) >= 3; };
  SyndromeFamily family = criticals_bruteforce(member, net);
  CHECK(family.bit_criticals.size() == 10);
  for (std::uint32_t c : family.bit_criticals) CHECK(std::popcount(c) == 3);
}

TEST_CASE("nonempty-set family has singleton criticals") {
  NetworkConfig net = build_network({gaussian_group(1.0, 5)});
  auto member = [](std::uint32_t mask) { return mask != 0; };
  SyndromeFamily family = criticals_bruteforce(member, net);
  CHECK(family.bit_criticals.size() == 5);
  for (std::uint32_t c : family.bit_criticals) CHECK(std::popcount(c) == 1);
}

TEST_CASE("bruteforce rejects bad predicates") {
  NetworkConfig net = build_network({gaussian_group(1.0, 5)});
  // nonmonotone: XOR-parity membership
  auto parity = [](std::uint32_t mask) { return std::popcount(mask) % 2 == 1; };
  CHECK_THROWS_AS(criticals_bruteforce(parity, net), ContractViolation);
  // empty set as member
  auto always = [](std::uint32_t) { return true; };
  CHECK_THROWS_AS(criticals_bruteforce(always, net), ContractViolation);
  // capacity limit
  NetworkConfig big = build_network({gaussian_group(1.0, 23)});
  auto any = [](std::uint32_t mask) { return mask != 0; };
  CHECK_THROWS_AS(criticals_bruteforce(any, big), CapacityError);
}

TEST_CASE("weighted membership thresholds") {
  NetworkConfig net = case1_network();
  CHECK(weighted_member({0, 0, 2}, net, 2.0));           // sum = 2.0
  CHECK(weighted_member({0, 2, 1}, net, 2.0));           // 2.125
  CHECK_FALSE(weighted_member({0, 1, 1}, net, 2.0));     // 1.5625
  CHECK_FALSE(weighted_member({4, 0, 0}, net, 2.0));     // 0.49
  CHECK_FALSE(weighted_member({0, 0, 0}, net, 0.001));   // empty never triggers
}

TEST_CASE("case-1 weighted criticals at M=2") {
  NetworkConfig net = case1_network();
  std::set<CountVector> expected = {{0, 0, 2}, {0, 2, 1}, {4, 1, 1}, {3, 3, 0}};
  CHECK(weighted_critical_counts(net, 2.0) == expected);
  CHECK(brute_critical_counts(net, 2.0) == expected);
}

TEST_CASE("degenerate weighted families") {
  NetworkConfig net = case1_network();
  double total = 4 * 0.1225 + 3 * 0.5625 + 3 * 1.0;  // 5.1775
  std::set<CountVector> full_only = {{4, 3, 3}};
  CHECK(weighted_critical_counts(net, total) == full_only);
  CHECK_THROWS_AS(criticals_weighted(net, total + 0.01), InvalidParameter);
  CHECK_THROWS_AS(criticals_weighted(net, 0.0), InvalidParameter);

  // M=1 family agrees with brute force; spot checks from the weights
  auto m1 = weighted_critical_counts(net, 1.0);
  CHECK(m1 == brute_critical_counts(net, 1.0));
  CHECK(m1.count({0, 0, 1}) == 1);
  CHECK(m1.count({0, 2, 0}) == 1);  // 1.125 and decrement 0.5625 < 1
}

TEST_CASE("family_stats minima") {
  NetworkConfig net = case1_network();
  SyndromeFamily weighted = criticals_weighted(net, 2.0);
  FamilyStats stats = family_stats(weighted, net);
  CHECK(stats.m_omega == 2);
  CHECK(stats.i_omega == doctest::Approx(1.0));

  // anonymous M=3: three smallest KLDs
  auto member = [&](std::uint32_t mask) { return std::popcount(mask) >= 3; };
  SyndromeFamily anon = criticals_bruteforce(member, net);
  FamilyStats astats = family_stats(anon, net);
  CHECK(astats.m_omega == 3);
  CHECK(astats.i_omega == doctest::Approx(3 * 0.061250));

  // singleton family {full set}
  SyndromeFamily full;
  full.count_form = true;
  full.count_criticals.push_back(CountSyndrome{{4, 3, 3}});
  FamilyStats fstats = family_stats(full, net);
  CHECK(fstats.m_omega == 10);
  CHECK(fstats.i_omega == doctest::Approx(4 * 0.061250 + 3 * 0.28125 + 3 * 0.5));
}

TEST_CASE("top selection and low-sum bounds") {
  NetworkConfig net = case1_network();
  TopSelectResult top = bar_m_topselect(net, 2.0);
  CHECK(top.m_bar == 2);
  CHECK(top.omega_top.counts == CountVector{0, 0, 2});

  TopSelectResult top1 = bar_m_topselect(net, 1.0);
  CHECK(top1.m_bar == 1);
  CHECK(top1.omega_top.counts == CountVector{0, 0, 1});

  NetworkConfig net2 = case2_network();
  CHECK(bar_m_topselect(net2, 2.0).m_bar == 2);

  CHECK(bar_M_lowsum_bound(net, 2.0) == 7);
  CHECK(bar_M_lowsum_bound(net, 5.0) == 10);
  CHECK(bar_M_lowsum_bound(net, 0.12) == 1);  // below the smallest weight
}

TEST_CASE("pruning BFS finds the maximum critical cardinality") {
  NetworkConfig net = case1_network();
  PruningResult pr = bar_M_pruning(net, 2.0);
  CHECK(pr.M_bar == 6);
  bool witness_ok = pr.omega_M_bar.counts == CountVector{4, 1, 1} ||
                    pr.omega_M_bar.counts == CountVector{3, 3, 0};
  CHECK(witness_ok);
  CHECK(pr.parent_iterations <= 21);  // binom(7, 2) with L=3, N=10
  CHECK(pruning_iteration_bound(net) == doctest::Approx(21.0));

  // homogeneous network: the weighted rule degenerates to anonymous voting
  NetworkConfig hom = build_network(
      {gaussian_group(1.0, 3), gaussian_group(1.0, 4), gaussian_group(1.0, 3)});
  for (int M : {1, 3, 7, 10}) {
    PruningResult hpr = bar_M_pruning(hom, static_cast<double>(M));
    CHECK(hpr.M_bar == M);
    CHECK(bar_m_topselect(hom, M).m_bar == M);
  }
}

TEST_CASE("omega star and D-bar for case 1") {
  NetworkConfig net = case1_network();
  SyndromeFamily family = criticals_weighted(net, 2.0);
  DbarResult r = omega_star_and_dbar(family, net, 6, 2.0);
  CHECK(r.omega_star.counts == CountVector{4, 1, 1});  // KLD 1.02625 < 1.0275
  CHECK(r.dbar_counts == CountVector{4, 1, 3});
  CHECK(r.dbar_size == 8);

  // D-bar defining condition, checked the hard way over all C(8,6) subsets:
  // every 6-subset of D-bar must reach weight 2.
  std::vector<double> weights;
  for (int l = 0; l < net.num_groups; ++l)
    for (int k = 0; k < r.dbar_counts[l]; ++k) weights.push_back(net.groups[l].weight);
  int n = static_cast<int>(weights.size());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != 6) continue;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += weights[i];
    CHECK(weight_at_least(sum, 2.0));
  }

  CHECK_THROWS_AS(omega_star_and_dbar(family, net, 5, 2.0), InvalidParameter);
}

TEST_CASE("D-bar degenerate shapes") {
  // omega* containing a group-L sensor pulls in all of group L
  NetworkConfig net = case1_network();
  DbarResult r = omega_star_and_dbar(criticals_weighted(net, 2.0), net, 6, 2.0);
  CHECK(r.dbar_counts.back() == net.groups.back().count);

  // single-group network: D-bar is the whole group
  NetworkConfig single = build_network({gaussian_group(1.0, 5)});
  SyndromeFamily family = criticals_weighted(single, 3.0);
  PruningResult pr = bar_M_pruning(single, 3.0);
  DbarResult rs = omega_star_and_dbar(family, single, pr.M_bar, 3.0);
  CHECK(rs.dbar_counts == CountVector{5});
}

TEST_CASE("oracle equivalence on random networks") {
  std::mt19937_64 rng(2027);
  for (int rep = 0; rep < 60; ++rep) {
    NetworkConfig net = random_network(rng);
    double M = random_threshold(rng, net);
    auto expected = brute_critical_counts(net, M);
    auto got = weighted_critical_counts(net, M);
    REQUIRE(got == expected);

    // antichain property
    std::vector<CountVector> crits(got.begin(), got.end());
    for (std::size_t a = 0; a < crits.size(); ++a)
      for (std::size_t b = 0; b < crits.size(); ++b)
        if (a != b) CHECK_FALSE(contains(crits[a], crits[b]));

    // Fact-1 and pruning agree with brute-force extremes
    TopSelectResult top = bar_m_topselect(net, M);
    PruningResult pr = bar_M_pruning(net, M);
    CHECK(top.m_bar == brute_min_cardinality(net, M));
    CHECK(pr.M_bar == brute_max_cardinality(net, M));
    CHECK(top.m_bar <= pr.M_bar);
    CHECK(pr.M_bar <= bar_M_lowsum_bound(net, M));
    CHECK(static_cast<double>(pr.parent_iterations) <= pruning_iteration_bound(net));
  }
}

TEST_CASE("membership is monotone under set growth") {
  std::mt19937_64 rng(11);
  NetworkConfig net = case1_network();
  SyndromeFamily family = criticals_weighted(net, 1.7);
  for (int rep = 0; rep < 500; ++rep) {
    CountVector small(net.num_groups), large(net.num_groups);
    for (int l = 0; l < net.num_groups; ++l) {
      std::uniform_int_distribution<int> d(0, net.groups[l].count);
      large[l] = d(rng);
      std::uniform_int_distribution<int> s(0, large[l]);
      small[l] = s(rng);
    }
    if (family.member_counts(small)) CHECK(family.member_counts(large));
  }
}
