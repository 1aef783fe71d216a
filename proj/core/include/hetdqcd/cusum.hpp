#ifndef HETDQCD_CUSUM_HPP
#define HETDQCD_CUSUM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hetdqcd/network.hpp"

namespace hetdqcd {

// Per-group thresholds h_l = I_l * h.
struct ThresholdVector {
  double base = 0.0;               // h
  std::vector<double> per_group;   // h_l, indexed by group - 1
};

ThresholdVector make_thresholds(const NetworkConfig& config, double h_base);

// Running CUSUM statistics for all sensors of a network, flat-indexed.
struct CusumState {
  std::vector<double> w;       // W_t^{l,k}
  std::vector<char> latched;   // max_{s<=t} W_s^{l,k} > h_l ever held
  long t = 0;
};

CusumState make_state(const NetworkConfig& config);

// 1-bit feedback of all sensors at one time step, flat-indexed.
struct FeedbackFrame {
  std::vector<char> bits;
  long t = 0;
};

// log(g_l(x)/f_l(x)); for a Gaussian mean shift m this is m*x - m^2/2.
double llr(double sample, const GroupSpec& group);

// One step of the recursion W_t = max(0, W_{t-1}) + Z_t for every sensor.
// Returns the instantaneous feedback frame (bit = W_t > h_l) and updates
// the latched flags.
FeedbackFrame step(CusumState& state, std::span<const double> llrs,
                   const NetworkConfig& config, const ThresholdVector& thresholds);

FeedbackFrame latched_frame(const CusumState& state);

enum class Regime { PreChange, PostChange };

// Lazy i.i.d. stream of per-step LLR vectors; deterministic given the seed.
class LlrStream {
 public:
  LlrStream(const NetworkConfig& config, Regime regime, std::uint64_t seed);

  // Fills `out` (resized to N) with the next step's LLRs.
  void next(std::vector<double>& out);

 private:
  const NetworkConfig* config_;
  Regime regime_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

// Derives a decorrelated child seed for trial `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace hetdqcd

#endif
