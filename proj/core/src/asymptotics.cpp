#include "hetdqcd/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "hetdqcd/cusum.hpp"
#include "hetdqcd/errors.hpp"

namespace hetdqcd {

namespace {

constexpr long kXiBlock = 16384;

struct BlockMoments {
  double sum = 0.0;
  double sumsq = 0.0;
};

BlockMoments xi_block(const OrderStatSpec& spec, long block_index, long count) {
  std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(block_index)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t n = spec.variances.size();
  std::vector<double> draw(n), sd(n);
  for (std::size_t i = 0; i < n; ++i) sd[i] = std::sqrt(spec.variances[i]);
  BlockMoments m;
  for (long s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < n; ++i) draw[i] = sd[i] * gauss(rng);
    std::nth_element(draw.begin(), draw.begin() + (spec.rank - 1), draw.end());
    double v = draw[spec.rank - 1];
    m.sum += v;
    m.sumsq += v * v;
  }
  return m;
}

SecondOrderApprox second_order(double h, MeanEstimate xi_term, double gamma) {
  SecondOrderApprox a;
  a.h = h;
  a.xi_term = xi_term;
  a.value = h + xi_term.mean * std::sqrt(h);
  a.gamma = gamma;
  return a;
}

}  // namespace

MeanEstimate xi(const OrderStatSpec& spec, int threads) {
  if (spec.variances.empty()) throw InvalidParameter("xi needs a nonempty variance list");
  if (spec.rank < 1 || spec.rank > static_cast<int>(spec.variances.size()))
    throw InvalidParameter("xi rank out of range");
  if (spec.samples < 1) throw InvalidParameter("xi needs samples >= 1");
  for (double v : spec.variances)
    if (!(v > 0.0)) throw InvalidParameter("xi variances must be > 0");

  long blocks = (spec.samples + kXiBlock - 1) / kXiBlock;
  std::vector<BlockMoments> results(blocks);
  auto worker = [&](int id, int stride) {
    for (long b = id; b < blocks; b += stride) {
      long count = std::min<long>(kXiBlock, spec.samples - b * kXiBlock);
      results[b] = xi_block(spec, b, count);
    }
  };
  int t = std::max(1, threads);
  if (t == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker, i, t);
    for (auto& th : pool) th.join();
  }

  // in-order Kahan reduction: identical result regardless of thread count
  double sum = 0.0, c = 0.0, sumsq = 0.0, c2 = 0.0;
  for (const auto& m : results) {
    double y = m.sum - c;
    double tt = sum + y;
    c = (tt - sum) - y;
    sum = tt;
    double y2 = m.sumsq - c2;
    double t2 = sumsq + y2;
    c2 = (t2 - sumsq) - y2;
    sumsq = t2;
  }
  MeanEstimate e;
  e.n = spec.samples;
  e.mean = sum / spec.samples;
  double var = std::max(0.0, sumsq / spec.samples - e.mean * e.mean);
  e.stderr_ = std::sqrt(var / spec.samples);
  return e;
}

std::vector<double> variance_list(const NetworkConfig& config,
                                  const std::vector<char>& domain) {
  if (static_cast<int>(domain.size()) != config.total_sensors)
    throw InvalidParameter("domain size does not match network");
  std::vector<double> out;
  for (int i = 0; i < config.total_sensors; ++i) {
    if (!domain[i]) continue;
    const auto& g = config.groups[config.group_of_flat(i) - 1];
    out.push_back(g.llr_variance / (g.kld * g.kld));
  }
  if (out.empty()) throw InvalidParameter("domain is empty");
  return out;
}

double h_gamma_anonymous(const NetworkConfig& config, int M,
                         const std::vector<char>& domain, double gamma) {
  if (!(gamma > 1.0)) throw InvalidParameter("gamma must be > 1");
  std::vector<double> klds;
  for (int i = 0; i < config.total_sensors; ++i)
    if (domain[i]) klds.push_back(config.groups[config.group_of_flat(i) - 1].kld);
  if (M < 1 || M > static_cast<int>(klds.size()))
    throw InvalidParameter("M exceeds the domain size");
  std::sort(klds.begin(), klds.end());
  double denom = 0.0;
  for (int m = 0; m < M; ++m) denom += klds[m];
  return std::log(gamma) / denom;
}

WeightedBounds weighted_bounds(const NetworkConfig& config, double M, double gamma,
                               long xi_samples, std::uint64_t seed, int threads) {
  if (!(gamma > 1.0)) throw InvalidParameter("gamma must be > 1");
  WeightedBounds b;
  TopSelectResult top = bar_m_topselect(config, M);
  PruningResult pr = bar_M_pruning(config, M);
  SyndromeFamily family = criticals_weighted(config, M);
  DbarResult dbar = omega_star_and_dbar(family, config, pr.M_bar, M);
  b.m_bar = top.m_bar;
  b.M_bar = pr.M_bar;
  b.dbar_counts = dbar.dbar_counts;
  b.dbar_size = dbar.dbar_size;
  b.h_upper = std::log(gamma) / (M * config.groups.back().kld);

  OrderStatSpec lower_spec;
  lower_spec.variances = variance_list(config, std::vector<char>(config.total_sensors, 1));
  lower_spec.rank = b.m_bar;
  lower_spec.samples = xi_samples;
  lower_spec.seed = seed;
  b.edd_lower = second_order(b.h_upper, xi(lower_spec, threads), gamma);

  std::vector<char> dmask(config.total_sensors, 0);
  int flat = 0;
  for (int l = 0; l < config.num_groups; ++l)
    for (int k = 0; k < config.groups[l].count; ++k, ++flat)
      if (k < b.dbar_counts[l]) dmask[flat] = 1;
  OrderStatSpec upper_spec;
  upper_spec.variances = variance_list(config, dmask);
  upper_spec.rank = b.M_bar;
  upper_spec.samples = xi_samples;
  upper_spec.seed = derive_seed(seed, 0x5eed);
  b.edd_upper = second_order(b.h_upper, xi(upper_spec, threads), gamma);
  return b;
}

GenericBounds generic_bounds(const SyndromeFamily& family, const NetworkConfig& config,
                             int M_omega, const std::vector<char>& d_omega, double gamma,
                             long xi_samples, std::uint64_t seed) {
  if (!(gamma > 1.0)) throw InvalidParameter("gamma must be > 1");
  GenericBounds b;
  b.stats = family_stats(family, config);

  // Validate: every M_omega-subset of D_omega must lie in the family.
  std::vector<int> members;
  for (int i = 0; i < config.total_sensors; ++i)
    if (d_omega[i]) members.push_back(i);
  int d = static_cast<int>(members.size());
  if (M_omega < 1 || M_omega > d)
    throw InvalidParameter("M_omega out of range for D_omega");
  double combos = 1.0;
  for (int j = 1; j <= M_omega; ++j) combos *= static_cast<double>(d - M_omega + j) / j;
  if (combos > 2e6) throw CapacityError("too many subsets to validate (M_omega, D_omega)");
  std::vector<int> pick(M_omega);
  for (int j = 0; j < M_omega; ++j) pick[j] = j;
  while (true) {
    CountVector counts(config.num_groups, 0);
    for (int j : pick) counts[config.group_of_flat(members[j]) - 1] += 1;
    bool in = family.count_form
                  ? family.member_counts(counts)
                  : [&] {
                      std::uint32_t mask = 0;
                      for (int j : pick) mask |= (1u << members[j]);
                      return family.member_mask(mask, config);
                    }();
    if (!in)
      throw ContractViolation("a consensus syndrome of (M_omega, D_omega) is outside the family");
    int j = M_omega - 1;
    while (j >= 0 && pick[j] == d - M_omega + j) --j;
    if (j < 0) break;
    pick[j] += 1;
    for (int k = j + 1; k < M_omega; ++k) pick[k] = pick[k - 1] + 1;
  }

  b.h_gamma = std::log(gamma) / b.stats.i_omega;
  OrderStatSpec lower_spec;
  lower_spec.variances = variance_list(config, std::vector<char>(config.total_sensors, 1));
  lower_spec.rank = b.stats.m_omega;
  lower_spec.samples = xi_samples;
  lower_spec.seed = seed;
  b.edd_lower = second_order(b.h_gamma, xi(lower_spec), gamma);
  OrderStatSpec upper_spec;
  upper_spec.variances = variance_list(config, d_omega);
  upper_spec.rank = M_omega;
  upper_spec.samples = xi_samples;
  upper_spec.seed = derive_seed(seed, 0x5eed);
  b.edd_upper = second_order(b.h_gamma, xi(upper_spec), gamma);
  return b;
}

std::vector<double> candidate_thresholds(const NetworkConfig& config) {
  std::vector<double> sums{0.0};
  for (const auto& g : config.groups) {
    std::vector<double> next;
    next.reserve(sums.size() * (g.count + 1));
    for (double s : sums)
      for (int n = 0; n <= g.count; ++n) next.push_back(s + n * g.weight);
    sums = std::move(next);
  }
  std::sort(sums.begin(), sums.end());
  std::vector<double> out;
  for (double s : sums) {
    if (!(s > 0.0)) continue;
    if (out.empty() || s - out.back() > kWeightTol * std::max(1.0, s)) out.push_back(s);
  }
  return out;
}

DesignResult design_M(const NetworkConfig& config, double gamma,
                      std::vector<double> candidates, long xi_samples,
                      std::uint64_t seed, int threads) {
  if (!(gamma > 1.0)) throw InvalidParameter("gamma must be > 1");
  if (candidates.empty()) candidates = candidate_thresholds(config);
  if (candidates.empty()) throw InvalidParameter("no candidate thresholds");
  std::sort(candidates.begin(), candidates.end());

  DesignResult result;
  result.table.reserve(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double M = candidates[i];
    WeightedBounds b =
        weighted_bounds(config, M, gamma, xi_samples, derive_seed(seed, i), threads);
    DesignRow row;
    row.M = M;
    row.h_upper = b.h_upper;
    row.m_bar = b.m_bar;
    row.M_bar = b.M_bar;
    row.dbar_size = b.dbar_size;
    row.xi_upper = b.edd_upper.xi_term;
    row.objective = b.edd_upper.value;
    result.table.push_back(row);
    if (row.objective < best) {
      best = row.objective;
      result.M_star = M;
      result.star_index = i;
    }
  }
  return result;
}

}  // namespace hetdqcd
