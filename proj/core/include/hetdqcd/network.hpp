#ifndef HETDQCD_NETWORK_HPP
#define HETDQCD_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace hetdqcd {

// Pre/post-change observation model of one sensor group. Gaussian mean
// shifts N(0,1) -> N(m,1) are handled analytically; anything else goes
// through user-supplied log-densities and samplers with estimated moments.
struct DistributionPair {
  enum class Kind { GaussianMeanShift, Custom };
  Kind kind = Kind::GaussianMeanShift;
  double mean_shift = 0.0;  // GaussianMeanShift only

  using LogDensity = std::function<double(double)>;
  using Sampler = std::function<double(std::mt19937_64&)>;
  LogDensity log_pre, log_post;  // Custom only
  Sampler sample_pre, sample_post;
};

struct GroupSpec {
  DistributionPair dist;
  int count = 0;              // N_l
  double kld = 0.0;           // I_l, nats
  double llr_variance = 0.0;  // sigma_l^2 = E_0[(Z - I_l)^2]
  double weight = 1.0;        // alpha_l = I_l / I_L, set by build_network
  bool estimated_moments = false;  // kld/llr_variance came from sampling
};

// 1-based (group, index) pair, matching the (l,k) convention of all
// file formats produced by the toolkit.
struct SensorId {
  int group = 1;
  int index = 1;
  friend bool operator==(const SensorId&, const SensorId&) = default;
};

struct NetworkConfig {
  std::vector<GroupSpec> groups;  // sorted by nondecreasing kld
  int num_groups = 0;             // L
  int total_sensors = 0;          // N
  std::vector<int> cumulative;    // cumulative[l] = N_1 + ... + N_l, 1-based slot l

  // Flat sensor ordering: group 1 sensors first, then group 2, ...
  int flat_index(SensorId id) const;
  SensorId sensor_at(int flat) const;  // flat in [0, N)
  int group_of_flat(int flat) const;   // 1-based group
};

// Gaussian mean-shift group: kld = m^2/2, llr_variance = m^2.
GroupSpec gaussian_group(double mean_shift, int count);

// Group with arbitrary densities; kld and llr_variance are estimated from
// `moment_samples` post-change draws and flagged as estimated.
GroupSpec custom_group(DistributionPair::LogDensity log_pre,
                       DistributionPair::LogDensity log_post,
                       DistributionPair::Sampler sample_pre,
                       DistributionPair::Sampler sample_post, int count,
                       long moment_samples = 200000, std::uint64_t seed = 1);

// Sorts groups by ascending kld (stable), assigns weights alpha_l = I_l/I_L.
NetworkConfig build_network(std::vector<GroupSpec> groups);

// lambda(m): the group owning the m-th sensor in flat order, i.e. the group
// of the m-th smallest per-sensor KLD. m is 1-based.
int lambda_map(const NetworkConfig& config, int m);

}  // namespace hetdqcd

#endif
