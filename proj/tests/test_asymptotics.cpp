#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hetdqcd/asymptotics.hpp"
#include "hetdqcd/errors.hpp"
#include "hetdqcd/fusion.hpp"

using namespace hetdqcd;

TEST_CASE("xi matches closed forms for small populations") {
  OrderStatSpec one;
  one.variances = {1.0};
  one.rank = 1;
  one.samples = 400000;
  one.seed = 17;
  MeanEstimate e1 = xi(one);
  CHECK(std::abs(e1.mean) < 3.0 * e1.stderr_);

  OrderStatSpec two = one;
  two.variances = {1.0, 1.0};
  MeanEstimate emin = xi(two);
  double expected_min = -1.0 / std::sqrt(M_PI);  // E[min of two std normals]
  CHECK(std::abs(emin.mean - expected_min) < 3.0 * emin.stderr_);

  two.rank = 2;
  MeanEstimate emax = xi(two);
  CHECK(std::abs(emin.mean + emax.mean) < 3.0 * (emin.stderr_ + emax.stderr_));
}

TEST_CASE("xi is nondecreasing in rank") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> var(0.2, 8.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::uniform_int_distribution<int> size(2, 6);
    int n = size(rng);
    OrderStatSpec spec;
    for (int i = 0; i < n; ++i) spec.variances.push_back(var(rng));
    spec.samples = 50000;
    spec.seed = derive_seed(rep, 1);
    double prev = -1e18;
    for (int rank = 1; rank <= n; ++rank) {
      spec.rank = rank;
      double m = xi(spec).mean;
      CHECK(m >= prev);
      prev = m;
    }
  }
}

TEST_CASE("xi is deterministic per seed and thread-stable") {
  OrderStatSpec spec;
  spec.variances = {1.0, 2.0, 5.0};
  spec.rank = 2;
  spec.samples = 100000;
  spec.seed = 9;
  MeanEstimate a = xi(spec, 1);
  MeanEstimate b = xi(spec, 1);
  MeanEstimate c = xi(spec, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);  // block reduction is order-fixed

  spec.rank = 0;
  CHECK_THROWS_AS(xi(spec), InvalidParameter);
}

TEST_CASE("variance list per sensor") {
  NetworkConfig net = case1_network();
  std::vector<double> v = variance_list(net, std::vector<char>(net.total_sensors, 1));
  REQUIRE(v.size() == 10);
  for (int i = 0; i < 4; ++i) CHECK(v[i] == doctest::Approx(4.0 / (0.35 * 0.35)));
  for (int i = 4; i < 7; ++i) CHECK(v[i] == doctest::Approx(4.0 / (0.75 * 0.75)));
  for (int i = 7; i < 10; ++i) CHECK(v[i] == doctest::Approx(4.0));

  NetworkConfig sharp = build_network({gaussian_group(2.0, 1)});
  CHECK(variance_list(sharp, {1})[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(variance_list(net, std::vector<char>(net.total_sensors, 0)),
                  InvalidParameter);
}

TEST_CASE("anonymous threshold asymptote") {
  NetworkConfig net = case1_network();
  CHECK(h_gamma_anonymous(net, 3, domain_all(net), 1000.0) ==
        doctest::Approx(std::log(1000.0) / 0.18375));
  CHECK(h_gamma_anonymous(net, 2, domain_group(net, 3), 1000.0) ==
        doctest::Approx(std::log(1000.0) / 1.0));
  NetworkConfig unit = build_network({gaussian_group(std::sqrt(2.0), 1)});
  CHECK(h_gamma_anonymous(unit, 1, {1}, std::exp(1.0)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(h_gamma_anonymous(net, 11, domain_all(net), 1000.0),
                  InvalidParameter);
  CHECK_THROWS_AS(h_gamma_anonymous(net, 1, domain_all(net), 1.0), InvalidParameter);
}

TEST_CASE("h_gamma is monotone in M and in strengthening the domain") {
  NetworkConfig net = case1_network();
  double prev = 1e18;
  for (int M = 1; M <= net.total_sensors; ++M) {
    double h = h_gamma_anonymous(net, M, domain_all(net), 1000.0);
    CHECK(h <= prev);
    prev = h;
  }
  CHECK(h_gamma_anonymous(net, 2, domain_group(net, 3), 1000.0) <=
        h_gamma_anonymous(net, 2, domain_group(net, 1), 1000.0));
}

TEST_CASE("weighted bounds for case 1") {
  NetworkConfig net = case1_network();
  WeightedBounds b = weighted_bounds(net, 2.0, 1000.0, 200000, 5);
  CHECK(b.h_upper == doctest::Approx(std::log(1000.0) / 1.0));  // 6.9078
  CHECK(b.m_bar == 2);
  CHECK(b.M_bar == 6);
  CHECK(b.dbar_size == 8);
  CHECK(b.edd_lower.value <= b.edd_upper.value);
  CHECK(b.edd_lower.value == doctest::Approx(b.h_upper + b.edd_lower.xi_term.mean *
                                                             std::sqrt(b.h_upper)));
}

TEST_CASE("sandwich collapses on a homogeneous network") {
  NetworkConfig hom = build_network({gaussian_group(1.0, 5)});
  WeightedBounds b = weighted_bounds(hom, 3.0, 1000.0, 200000, 5);
  CHECK(b.m_bar == b.M_bar);
  CHECK(b.dbar_size == 5);
  // same rank, same variances: estimates differ only by Monte Carlo error
  CHECK(std::abs(b.edd_lower.value - b.edd_upper.value) <
        3.0 * (b.edd_lower.xi_term.stderr_ + b.edd_upper.xi_term.stderr_) *
            std::sqrt(b.h_upper));
}

TEST_CASE("generic family bounds validate the (M, D) pair") {
  NetworkConfig net = case1_network();
  SyndromeFamily family = criticals_weighted(net, 2.0);
  // consensus of 6 within D-bar lies inside the family
  DbarResult dbar = omega_star_and_dbar(family, net, 6, 2.0);
  std::vector<char> dmask(net.total_sensors, 0);
  int flat = 0;
  for (int l = 0; l < net.num_groups; ++l)
    for (int k = 0; k < net.groups[l].count; ++k, ++flat)
      if (k < dbar.dbar_counts[l]) dmask[flat] = 1;
  GenericBounds g = generic_bounds(family, net, 6, dmask, 1000.0, 50000, 3);
  CHECK(g.stats.m_omega == 2);
  CHECK(g.h_gamma == doctest::Approx(std::log(1000.0) / 1.0));
  CHECK(g.edd_lower.value <= g.edd_upper.value + 1e-9);

  // a pair whose syndromes leave the family must be rejected:
  // 2 alarms within group 1 only reach weight 0.245 < 2
  CHECK_THROWS_AS(generic_bounds(family, net, 2, domain_group(net, 1), 1000.0,
                                 10000, 3),
                  ContractViolation);
}

TEST_CASE("candidate thresholds are the distinct subset sums") {
  NetworkConfig tiny = build_network({gaussian_group(1.0, 2)});
  CHECK(candidate_thresholds(tiny) == std::vector<double>{1.0, 2.0});

  NetworkConfig net = case1_network();
  std::vector<double> cands = candidate_thresholds(net);
  CHECK(cands.front() > 0.0);
  CHECK(cands.back() == doctest::Approx(5.1775));
  for (std::size_t i = 1; i < cands.size(); ++i) CHECK(cands[i] > cands[i - 1]);
}

TEST_CASE("design_M minimizes the second-order objective") {
  NetworkConfig net = case1_network();
  DesignResult d = design_M(net, 1000.0, {}, 50000, 11);
  REQUIRE_FALSE(d.table.empty());
  // brute-force re-evaluation of the same objective over the same table
  double best = 1e18;
  double best_M = 0.0;
  for (const auto& row : d.table) {
    CHECK(row.objective ==
          doctest::Approx(row.h_upper + row.xi_upper.mean * std::sqrt(row.h_upper)));
    if (row.objective < best) {
      best = row.objective;
      best_M = row.M;
    }
  }
  CHECK(d.M_star == best_M);
  // the minimizer is interior: better than both the smallest and largest M
  CHECK(best < d.table.front().objective);
  CHECK(best < d.table.back().objective);

  NetworkConfig single = build_network({gaussian_group(1.0, 1)});
  DesignResult ds = design_M(single, 1000.0, {}, 20000, 3);
  CHECK(ds.M_star == doctest::Approx(1.0));
}

TEST_CASE("combinatorics are invariant under common KLD scaling") {
  NetworkConfig base = case1_network();
  NetworkConfig scaled = build_network({gaussian_group(0.35 * 2, 4),
                                        gaussian_group(0.75 * 2, 3),
                                        gaussian_group(1.0 * 2, 3)});
  for (int l = 0; l < 3; ++l)
    CHECK(scaled.groups[l].weight == doctest::Approx(base.groups[l].weight));
  for (double M : {1.0, 2.0, 3.0}) {
    CHECK(bar_m_topselect(base, M).m_bar == bar_m_topselect(scaled, M).m_bar);
    CHECK(bar_M_pruning(base, M).M_bar == bar_M_pruning(scaled, M).M_bar);
    auto fb = criticals_weighted(base, M);
    auto fs = criticals_weighted(scaled, M);
    REQUIRE(fb.count_criticals.size() == fs.count_criticals.size());
    for (std::size_t i = 0; i < fb.count_criticals.size(); ++i)
      CHECK(fb.count_criticals[i].counts == fs.count_criticals[i].counts);
    DbarResult db = omega_star_and_dbar(fb, base, bar_M_pruning(base, M).M_bar, M);
    DbarResult dsc = omega_star_and_dbar(fs, scaled, bar_M_pruning(scaled, M).M_bar, M);
    CHECK(db.dbar_counts == dsc.dbar_counts);
  }
}
