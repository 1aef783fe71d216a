#include "hetdqcd/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

namespace {

int domain_size(const std::vector<char>& domain) {
  return static_cast<int>(std::count(domain.begin(), domain.end(), char(1)));
}

void check_frame(const FeedbackFrame& frame, const NetworkConfig& config) {
  if (static_cast<int>(frame.bits.size()) != config.total_sensors)
    throw InvalidParameter("feedback frame size does not match network");
}

}  // namespace

bool uses_latched_feedback(const FusionRule& rule) {
  return std::holds_alternative<MthAlarmLatched>(rule);
}

bool triggers(const FusionRule& rule, const FeedbackFrame& frame,
              const NetworkConfig& config) {
  check_frame(frame, config);
  if (const auto* anon = std::get_if<AnonymousVote>(&rule)) {
    int fired = 0;
    for (int i = 0; i < config.total_sensors; ++i)
      fired += anon->domain[i] && frame.bits[i];
    return fired >= anon->M;
  }
  if (const auto* wv = std::get_if<WeightedVote>(&rule)) {
    double sum = 0.0;
    for (int i = 0; i < config.total_sensors; ++i)
      if (frame.bits[i]) sum += wv->weights[i];
    return weight_at_least(sum, wv->M);
  }
  if (const auto* sr = std::get_if<SyndromeRule>(&rule)) {
    if (sr->family.count_form) {
      CountVector counts(config.num_groups, 0);
      for (int i = 0; i < config.total_sensors; ++i)
        if (frame.bits[i]) counts[config.group_of_flat(i) - 1] += 1;
      return sr->family.member_counts(counts);
    }
    std::uint32_t mask = 0;
    for (int i = 0; i < config.total_sensors; ++i)
      if (frame.bits[i]) mask |= (1u << i);
    return sr->family.member_mask(mask, config);
  }
  const auto& mth = std::get<MthAlarmLatched>(rule);
  int fired = 0;
  for (int i = 0; i < config.total_sensors; ++i)
    fired += mth.domain[i] && frame.bits[i];
  return fired >= mth.M;
}

StoppingOutcome run_until_stop(const FusionRule& rule, const NetworkConfig& config,
                               const ThresholdVector& thresholds, LlrStream& stream,
                               long cap) {
  if (cap < 1) throw InvalidParameter("cap must be >= 1");
  bool latched = uses_latched_feedback(rule);
  CusumState state = make_state(config);
  std::vector<double> llrs;
  for (long t = 1; t <= cap; ++t) {
    stream.next(llrs);
    FeedbackFrame frame = step(state, llrs, config, thresholds);
    if (latched) frame.bits = state.latched;
    if (triggers(rule, frame, config)) return StoppingOutcome{true, t, false};
  }
  return StoppingOutcome{false, cap, true};
}

FusionRule make_anonymous_vote(const NetworkConfig& config, int M,
                               const std::vector<char>& domain) {
  if (static_cast<int>(domain.size()) != config.total_sensors)
    throw InvalidParameter("domain size does not match network");
  int d = domain_size(domain);
  if (M < 1 || M > d) throw InvalidParameter("anonymous vote requires 1 <= M <= |D|");
  return AnonymousVote{M, domain};
}

FusionRule make_weighted_vote(const NetworkConfig& config, double M) {
  double total = 0.0;
  std::vector<double> weights(config.total_sensors);
  for (int i = 0; i < config.total_sensors; ++i) {
    weights[i] = config.groups[config.group_of_flat(i) - 1].weight;
    total += weights[i];
  }
  if (!(M > 0.0) || !weight_at_least(total, M))
    throw InvalidParameter("weighted vote requires 0 < M <= total weight");
  return WeightedVote{M, std::move(weights)};
}

FusionRule make_syndrome_rule(const NetworkConfig& config, SyndromeFamily family) {
  if (family.empty()) throw InvalidParameter("syndrome rule needs a nonempty family");
  if (!family.count_form && config.total_sensors > 32)
    throw CapacityError("bitset families limited to N <= 32");
  return SyndromeRule{std::move(family)};
}

FusionRule make_mth_alarm_latched(const NetworkConfig& config, int M,
                                  const std::vector<char>& domain) {
  if (static_cast<int>(domain.size()) != config.total_sensors)
    throw InvalidParameter("domain size does not match network");
  int d = domain_size(domain);
  if (M < 1 || M > d) throw InvalidParameter("m-th alarm requires 1 <= M <= |D|");
  return MthAlarmLatched{M, domain};
}

std::vector<char> domain_all(const NetworkConfig& config) {
  return std::vector<char>(config.total_sensors, 1);
}

std::vector<char> domain_group(const NetworkConfig& config, int group) {
  if (group < 1 || group > config.num_groups)
    throw InvalidParameter("domain group out of range");
  std::vector<char> d(config.total_sensors, 0);
  for (int i = 0; i < config.total_sensors; ++i)
    if (config.group_of_flat(i) == group) d[i] = 1;
  return d;
}

namespace {

struct SpecFields {
  std::string kind;
  double M = 0.0;
  bool has_M = false;
  std::string domain = "all";
};

SpecFields parse_fields(const std::string& spec) {
  SpecFields f;
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidParameter("rule spec missing ':' in " + spec);
  f.kind = spec.substr(0, colon);
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidParameter("bad rule spec field: " + item);
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "M") {
      try {
        f.M = std::stod(value);
      } catch (const std::exception&) {
        throw InvalidParameter("bad M value in rule spec: " + value);
      }
      f.has_M = true;
    } else if (key == "D") {
      f.domain = value;
    } else {
      throw InvalidParameter("unknown rule spec key: " + key);
    }
  }
  if (!f.has_M) throw InvalidParameter("rule spec missing M= in " + spec);
  return f;
}

std::vector<char> parse_domain(const std::string& name, const NetworkConfig& config) {
  if (name == "all") return domain_all(config);
  if (name.rfind("group", 0) == 0) {
    int g = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 5, name.data() + name.size(), g);
    if (ec != std::errc() || ptr != name.data() + name.size())
      throw InvalidParameter("bad domain spec: " + name);
    return domain_group(config, g);
  }
  throw InvalidParameter("bad domain spec: " + name);
}

int as_integer_M(double M) {
  int m = static_cast<int>(std::lround(M));
  if (std::abs(M - m) > 1e-9) throw InvalidParameter("rule requires an integer M");
  return m;
}

}  // namespace

FusionRule parse_rule_spec(const std::string& spec, const NetworkConfig& config) {
  SpecFields f = parse_fields(spec);
  if (f.kind == "anon")
    return make_anonymous_vote(config, as_integer_M(f.M), parse_domain(f.domain, config));
  if (f.kind == "mth-alarm")
    return make_mth_alarm_latched(config, as_integer_M(f.M), parse_domain(f.domain, config));
  if (f.kind == "weighted") return make_weighted_vote(config, f.M);
  if (f.kind == "syndrome")
    return make_syndrome_rule(config, criticals_weighted(config, f.M));
  throw InvalidParameter("unknown rule kind: " + f.kind);
}

std::string describe_rule(const FusionRule& rule) {
  std::ostringstream out;
  if (const auto* anon = std::get_if<AnonymousVote>(&rule)) {
    out << "anon:M=" << anon->M << ",|D|=" << domain_size(anon->domain);
  } else if (const auto* wv = std::get_if<WeightedVote>(&rule)) {
    out << "weighted:M=" << wv->M;
  } else if (const auto* sr = std::get_if<SyndromeRule>(&rule)) {
    out << "syndrome:criticals=" << sr->family.size();
  } else {
    const auto& mth = std::get<MthAlarmLatched>(rule);
    out << "mth-alarm:M=" << mth.M << ",|D|=" << domain_size(mth.domain);
  }
  return out.str();
}

}  // namespace hetdqcd
