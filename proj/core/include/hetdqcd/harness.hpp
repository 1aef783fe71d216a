#ifndef HETDQCD_HARNESS_HPP
#define HETDQCD_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hetdqcd/asymptotics.hpp"
#include "hetdqcd/fusion.hpp"

namespace hetdqcd {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
  double censored_fraction = 0.0;
};

struct TrialConfig {
  const NetworkConfig* network = nullptr;
  FusionRule rule;
  double h_base = 1.0;
  Regime regime = Regime::PreChange;
  long trials = 10000;
  long cap = 100000;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

// Mean stopping time under pre-change streams. Censored trials contribute
// the cap (a downward-biased ARL) and inflate censored_fraction.
Estimate simulate_arl(const TrialConfig& cfg);

// Mean stopping time under post-change-at-zero streams.
Estimate simulate_edd(const TrialConfig& cfg);

struct CalibrationResult {
  double h = 0.0;
  Estimate achieved_arl;
  double target_gamma = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CalibrationOptions {
  double rel_tol = 0.1;
  long trials = 4000;
  int max_iterations = 40;
  std::uint64_t master_seed = 1;
  int threads = 1;
  double h_seed = 0.0;  // 0 = derive from the rule's asymptotic threshold
};

// Monotone bisection on h_base until the simulated ARL is within rel_tol
// of gamma (stderr-aware). The initial bracket grows from the asymptotic
// threshold seed.
CalibrationResult calibrate_h(const NetworkConfig& config, const FusionRule& rule,
                              double gamma, const CalibrationOptions& options);

struct CompareRow {
  double gamma = 0.0;
  std::string rule_spec;   // resolved spec, e.g. "anon:M=3,D=all"
  std::string rule_label;  // requested spec, e.g. "anon:best"
  double M = 0.0;
  double h = 0.0;
  Estimate arl;
  Estimate edd;
  long trials = 0;
  std::uint64_t seed = 0;
};

struct CompareOptions {
  long edd_trials = 20000;
  long arl_trials = 4000;
  // Searched specs ("anon:best", "weighted:design") are resolved by a coarse
  // scan at these trial counts (capped at the full counts above); only the
  // winner is then evaluated at full resolution.
  long select_edd_trials = 2000;
  long select_arl_trials = 1000;
  // When > 0, "weighted:design" picks its M once at this ARL target and
  // reuses it across the whole gamma sweep; 0 redesigns at every gamma.
  double design_gamma = 0.0;
  double rel_tol = 0.1;
  std::uint64_t master_seed = 1;
  int threads = 1;
  long xi_samples = 200000;  // for weighted:design
};

// Calibrates and evaluates each rule spec at each gamma; rows within one
// gamma share EDD random numbers. Specs may be concrete
// ("weighted:M=2", "anon:M=3,D=all") or searched ("anon:best",
// "anon:best@group<l>" — integer-M sweep by EDD at matched ARL — and
// "weighted:design" — all weighted-sum breakpoints ranked by simulated EDD
// at matched ARL, seeded from the asymptotic design table; the asymptotic
// objective alone misranks candidates at desk-scale ARL targets, so the
// final pick is always simulation-based).
std::vector<CompareRow> compare_rules(const NetworkConfig& config,
                                      const std::vector<double>& gammas,
                                      const std::vector<std::string>& rule_specs,
                                      const CompareOptions& options);

// Seed of the bisection: asymptotic threshold of the rule.
double asymptotic_h_seed(const NetworkConfig& config, const FusionRule& rule, double gamma);

}  // namespace hetdqcd

#endif
