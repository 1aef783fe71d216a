#ifndef HETDQCD_ASYMPTOTICS_HPP
#define HETDQCD_ASYMPTOTICS_HPP

#include <cstdint>
#include <vector>

#include "hetdqcd/network.hpp"
#include "hetdqcd/syndrome.hpp"

namespace hetdqcd {

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
};

// The M-th (ascending) order statistic expectation of independent centered
// Gaussians with the given variances.
struct OrderStatSpec {
  std::vector<double> variances;  // sigma_l^2 / I_l^2 per sensor
  int rank = 1;                   // M, 1-based ascending
  long samples = 1000000;
  std::uint64_t seed = 1;
};

// Monte Carlo estimate of xi for the spec; deterministic per seed.
// Sampling runs in fixed-size blocks reduced in order, so results are
// reproducible under block-parallel execution too.
MeanEstimate xi(const OrderStatSpec& spec, int threads = 1);

// sigma_l^2 / I_l^2 for every sensor of D (flat-indexed membership mask).
std::vector<double> variance_list(const NetworkConfig& config,
                                  const std::vector<char>& domain);

// Asymptotic threshold log(gamma) / sum of the M smallest KLDs in D.
double h_gamma_anonymous(const NetworkConfig& config, int M,
                         const std::vector<char>& domain, double gamma);

struct SecondOrderApprox {
  double h = 0.0;
  MeanEstimate xi_term;
  double value = 0.0;  // h + xi * sqrt(h)
  double gamma = 0.0;
};

// Sandwich bounds for the weighted M voting rule: threshold upper bound
// and the second-order EDD sandwich evaluated at it.
struct WeightedBounds {
  double h_upper = 0.0;
  SecondOrderApprox edd_lower;  // xi_{m_bar} over the full network
  SecondOrderApprox edd_upper;  // xi_{M_bar, D_bar}
  int m_bar = 0;
  int M_bar = 0;
  CountVector dbar_counts;
  int dbar_size = 0;
};

WeightedBounds weighted_bounds(const NetworkConfig& config, double M, double gamma,
                               long xi_samples = 1000000, std::uint64_t seed = 1,
                               int threads = 1);

// Second-order bounds of an arbitrary
// syndrome family, with a caller-supplied (M_omega, D_omega) pair whose
// consensus syndromes must all lie inside the family (validated
// exhaustively; |D| choose M_omega is capped).
struct GenericBounds {
  double h_gamma = 0.0;  // log(gamma) / I_omega
  SecondOrderApprox edd_lower;
  SecondOrderApprox edd_upper;
  FamilyStats stats;
};

GenericBounds generic_bounds(const SyndromeFamily& family, const NetworkConfig& config,
                             int M_omega, const std::vector<char>& d_omega, double gamma,
                             long xi_samples = 1000000, std::uint64_t seed = 1);

// One design-curve row for a candidate weighted threshold M.
struct DesignRow {
  double M = 0.0;
  double h_upper = 0.0;
  int m_bar = 0;
  int M_bar = 0;
  int dbar_size = 0;
  MeanEstimate xi_upper;
  double objective = 0.0;  // h_upper + xi_upper * sqrt(h_upper)
};

struct DesignResult {
  double M_star = 0.0;
  std::size_t star_index = 0;
  std::vector<DesignRow> table;
};

// Distinct achievable weighted subset sums in (0, total]; the weighted rule
// is constant between these breakpoints.
std::vector<double> candidate_thresholds(const NetworkConfig& config);

// Design of M: minimize h_upper + xi_{M_bar,D_bar} sqrt(h_upper) over
// the candidates (empty candidates = all breakpoints). Ties pick smaller M.
DesignResult design_M(const NetworkConfig& config, double gamma,
                      std::vector<double> candidates = {}, long xi_samples = 200000,
                      std::uint64_t seed = 1, int threads = 1);

}  // namespace hetdqcd

#endif
