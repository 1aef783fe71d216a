#include "hetdqcd/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

int NetworkConfig::flat_index(SensorId id) const {
  if (id.group < 1 || id.group > num_groups)
    throw InvalidParameter("sensor group out of range");
  if (id.index < 1 || id.index > groups[id.group - 1].count)
    throw InvalidParameter("sensor index out of range");
  int base = id.group >= 2 ? cumulative[id.group - 2] : 0;
  return base + id.index - 1;
}

SensorId NetworkConfig::sensor_at(int flat) const {
  if (flat < 0 || flat >= total_sensors)
    throw InvalidParameter("flat sensor index out of range");
  int l = group_of_flat(flat);
  int base = l >= 2 ? cumulative[l - 2] : 0;
  return SensorId{l, flat - base + 1};
}

int NetworkConfig::group_of_flat(int flat) const {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), flat);
  return static_cast<int>(it - cumulative.begin()) + 1;
}

GroupSpec gaussian_group(double mean_shift, int count) {
  if (!(mean_shift > 0.0)) throw InvalidParameter("mean_shift must be > 0");
  if (count < 1) throw InvalidParameter("count must be >= 1");
  GroupSpec g;
  g.dist.kind = DistributionPair::Kind::GaussianMeanShift;
  g.dist.mean_shift = mean_shift;
  g.count = count;
  g.kld = mean_shift * mean_shift / 2.0;
  g.llr_variance = mean_shift * mean_shift;
  return g;
}

GroupSpec custom_group(DistributionPair::LogDensity log_pre,
                       DistributionPair::LogDensity log_post,
                       DistributionPair::Sampler sample_pre,
                       DistributionPair::Sampler sample_post, int count,
                       long moment_samples, std::uint64_t seed) {
  if (count < 1) throw InvalidParameter("count must be >= 1");
  if (!log_pre || !log_post || !sample_pre || !sample_post)
    throw InvalidParameter("custom group needs densities and samplers");
  if (moment_samples < 1000) throw InvalidParameter("moment_samples too small");
  GroupSpec g;
  g.dist.kind = DistributionPair::Kind::Custom;
  g.dist.log_pre = std::move(log_pre);
  g.dist.log_post = std::move(log_post);
  g.dist.sample_pre = std::move(sample_pre);
  g.dist.sample_post = std::move(sample_post);
  g.count = count;
  g.estimated_moments = true;

  // kld = E_g[log g - log f], llr_variance = E_g[(Z - kld)^2], both by MC.
  std::mt19937_64 rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < moment_samples; ++i) {
    double x = g.dist.sample_post(rng);
    double z = g.dist.log_post(x) - g.dist.log_pre(x);
    if (!std::isfinite(z)) throw InvalidParameter("density zero/invalid on a post-change sample");
    sum += z;
    sumsq += z * z;
  }
  double n = static_cast<double>(moment_samples);
  g.kld = sum / n;
  g.llr_variance = std::max(0.0, sumsq / n - g.kld * g.kld);
  if (!(g.kld > 0.0)) throw InvalidParameter("estimated KLD is not positive");
  return g;
}

NetworkConfig build_network(std::vector<GroupSpec> groups) {
  if (groups.empty()) throw InvalidParameter("network needs at least one group");
  for (const auto& g : groups) {
    if (g.count < 1) throw InvalidParameter("group count must be >= 1");
    if (!(g.kld > 0.0)) throw InvalidParameter("group kld must be > 0");
    if (!(g.llr_variance >= 0.0) || !std::isfinite(g.llr_variance))
      throw InvalidParameter("group llr_variance must be finite and >= 0");
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const GroupSpec& a, const GroupSpec& b) { return a.kld < b.kld; });
  NetworkConfig cfg;
  cfg.num_groups = static_cast<int>(groups.size());
  double top_kld = groups.back().kld;
  for (auto& g : groups) g.weight = g.kld / top_kld;
  cfg.groups = std::move(groups);
  cfg.cumulative.resize(cfg.num_groups);
  int running = 0;
  for (int l = 0; l < cfg.num_groups; ++l) {
    running += cfg.groups[l].count;
    cfg.cumulative[l] = running;
  }
  cfg.total_sensors = running;
  return cfg;
}

int lambda_map(const NetworkConfig& config, int m) {
  if (m < 1 || m > config.total_sensors)
    throw InvalidParameter("lambda_map: m out of [1, N]");
  // half-open reading: sum_{j<l} N_j < m <= sum_{j<=l} N_j
  return config.group_of_flat(m - 1);
}

}  // namespace hetdqcd
