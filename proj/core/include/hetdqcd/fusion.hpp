#ifndef HETDQCD_FUSION_HPP
#define HETDQCD_FUSION_HPP

#include <string>
#include <variant>
#include <vector>

#include "hetdqcd/cusum.hpp"
#include "hetdqcd/network.hpp"
#include "hetdqcd/syndrome.hpp"

namespace hetdqcd {

// Stop at the first step with at least M instantaneous alarms inside D.
struct AnonymousVote {
  int M = 1;
  std::vector<char> domain;  // flat-indexed membership of D
};

// Stop when the weighted sum of instantaneous alarms reaches M.
struct WeightedVote {
  double M = 1.0;
  std::vector<double> weights;  // per sensor, flat-indexed
};

// Stop when the set of instantaneous alarms contains a critical syndrome.
struct SyndromeRule {
  SyndromeFamily family;
};

// Stop once M sensors of D have ever alarmed (latched feedback).
struct MthAlarmLatched {
  int M = 1;
  std::vector<char> domain;
};

using FusionRule = std::variant<AnonymousVote, WeightedVote, SyndromeRule, MthAlarmLatched>;

// Whether the rule reads latched frames instead of instantaneous ones.
bool uses_latched_feedback(const FusionRule& rule);

// Trigger decision on one feedback frame (latched rules expect the
// latched frame). Throws on a dimension mismatch.
bool triggers(const FusionRule& rule, const FeedbackFrame& frame,
              const NetworkConfig& config);

struct StoppingOutcome {
  bool stopped = false;
  long time = 0;      // first triggering t, or the cap when censored
  bool censored = false;
};

// Runs the CUSUM recursion on the stream until the rule triggers or the
// cap is reached.
StoppingOutcome run_until_stop(const FusionRule& rule, const NetworkConfig& config,
                               const ThresholdVector& thresholds, LlrStream& stream,
                               long cap);

// Builders / validation.
FusionRule make_anonymous_vote(const NetworkConfig& config, int M,
                               const std::vector<char>& domain);
FusionRule make_weighted_vote(const NetworkConfig& config, double M);
FusionRule make_syndrome_rule(const NetworkConfig& config, SyndromeFamily family);
FusionRule make_mth_alarm_latched(const NetworkConfig& config, int M,
                                  const std::vector<char>& domain);

// Convenience domains.
std::vector<char> domain_all(const NetworkConfig& config);
std::vector<char> domain_group(const NetworkConfig& config, int group);

// Parses rule spec strings of the grammar documented in the README:
//   anon:M=<int>[,D=all|group<l>]
//   weighted:M=<real>
//   syndrome:M=<real>            (weighted criticals, explicit family)
//   mth-alarm:M=<int>[,D=all|group<l>]
FusionRule parse_rule_spec(const std::string& spec, const NetworkConfig& config);

std::string describe_rule(const FusionRule& rule);

}  // namespace hetdqcd

#endif
