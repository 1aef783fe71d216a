#include "hetdqcd/cusum.hpp"

#include <cmath>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

ThresholdVector make_thresholds(const NetworkConfig& config, double h_base) {
  if (!(h_base > 0.0)) throw InvalidParameter("threshold base must be > 0");
  ThresholdVector tv;
  tv.base = h_base;
  tv.per_group.reserve(config.num_groups);
  for (const auto& g : config.groups) tv.per_group.push_back(g.kld * h_base);
  return tv;
}

CusumState make_state(const NetworkConfig& config) {
  CusumState s;
  s.w.assign(config.total_sensors, 0.0);
  s.latched.assign(config.total_sensors, 0);
  s.t = 0;
  return s;
}

double llr(double sample, const GroupSpec& group) {
  if (group.dist.kind == DistributionPair::Kind::GaussianMeanShift) {
    double m = group.dist.mean_shift;
    return m * sample - m * m / 2.0;
  }
  double lp = group.dist.log_post(sample);
  double lf = group.dist.log_pre(sample);
  double z = lp - lf;
  if (!std::isfinite(z)) throw std::domain_error("LLR undefined at sample (zero density)");
  return z;
}

FeedbackFrame step(CusumState& state, std::span<const double> llrs,
                   const NetworkConfig& config, const ThresholdVector& thresholds) {
  if (static_cast<int>(llrs.size()) != config.total_sensors)
    throw InvalidParameter("llr vector length does not match network");
  FeedbackFrame frame;
  frame.bits.resize(config.total_sensors);
  int flat = 0;
  for (int l = 0; l < config.num_groups; ++l) {
    double hl = thresholds.per_group[l];
    int count = config.groups[l].count;
    for (int k = 0; k < count; ++k, ++flat) {
      double w = std::max(0.0, state.w[flat]) + llrs[flat];
      state.w[flat] = w;
      bool bit = w > hl;
      frame.bits[flat] = bit;
      if (bit) state.latched[flat] = 1;
    }
  }
  state.t += 1;
  frame.t = state.t;
  return frame;
}

FeedbackFrame latched_frame(const CusumState& state) {
  FeedbackFrame frame;
  frame.bits = state.latched;
  frame.t = state.t;
  return frame;
}

LlrStream::LlrStream(const NetworkConfig& config, Regime regime, std::uint64_t seed)
    : config_(&config), regime_(regime), rng_(seed) {
  for (const auto& g : config.groups) {
    if (g.dist.kind == DistributionPair::Kind::Custom &&
        (!g.dist.sample_pre || !g.dist.sample_post))
      throw InvalidParameter("custom group lacks samplers for simulation");
  }
}

void LlrStream::next(std::vector<double>& out) {
  out.resize(config_->total_sensors);
  int flat = 0;
  for (const auto& g : config_->groups) {
    if (g.dist.kind == DistributionPair::Kind::GaussianMeanShift) {
      double m = g.dist.mean_shift;
      double half = m * m / 2.0;
      double shift = regime_ == Regime::PostChange ? m : 0.0;
      for (int k = 0; k < g.count; ++k, ++flat) {
        double x = gauss_(rng_) + shift;
        out[flat] = m * x - half;
      }
    } else {
      const auto& sample =
          regime_ == Regime::PostChange ? g.dist.sample_post : g.dist.sample_pre;
      for (int k = 0; k < g.count; ++k, ++flat) out[flat] = llr(sample(rng_), g);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  // splitmix64 over the combined key
  std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hetdqcd
