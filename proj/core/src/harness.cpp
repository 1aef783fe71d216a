#include "hetdqcd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <utility>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

namespace {

Estimate run_trials(const TrialConfig& cfg) {
  if (cfg.network == nullptr) throw InvalidParameter("trial config lacks a network");
  if (cfg.trials < 1) throw InvalidParameter("trials must be >= 1");
  if (cfg.cap < 1) throw InvalidParameter("cap must be >= 1");
  const NetworkConfig& net = *cfg.network;
  ThresholdVector thresholds = make_thresholds(net, cfg.h_base);

  std::vector<long> times(cfg.trials);
  std::vector<char> censored(cfg.trials);
  auto worker = [&](long first, long stride) {
    for (long i = first; i < cfg.trials; i += stride) {
      LlrStream stream(net, cfg.regime, derive_seed(cfg.master_seed, i));
      StoppingOutcome out = run_until_stop(cfg.rule, net, thresholds, stream, cfg.cap);
      times[i] = out.time;
      censored[i] = out.censored;
    }
  };
  int t = std::max(1, cfg.threads);
  if (t == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker, i, t);
    for (auto& th : pool) th.join();
  }

  // Welford over the trial-ordered results: bit-identical for any thread count.
  Estimate e;
  e.n = cfg.trials;
  double mean = 0.0, m2 = 0.0;
  long censored_count = 0;
  for (long i = 0; i < cfg.trials; ++i) {
    double x = static_cast<double>(times[i]);
    double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
    censored_count += censored[i];
  }
  e.mean = mean;
  e.stderr_ = cfg.trials > 1 ? std::sqrt(m2 / (cfg.trials - 1) / cfg.trials) : 0.0;
  e.censored_fraction = static_cast<double>(censored_count) / cfg.trials;
  return e;
}

}  // namespace

Estimate simulate_arl(const TrialConfig& cfg) {
  if (cfg.regime != Regime::PreChange)
    throw InvalidParameter("simulate_arl requires the pre-change regime");
  return run_trials(cfg);
}

Estimate simulate_edd(const TrialConfig& cfg) {
  if (cfg.regime != Regime::PostChange)
    throw InvalidParameter("simulate_edd requires the post-change regime");
  return run_trials(cfg);
}

double asymptotic_h_seed(const NetworkConfig& config, const FusionRule& rule, double gamma) {
  if (const auto* anon = std::get_if<AnonymousVote>(&rule))
    return h_gamma_anonymous(config, anon->M, anon->domain, gamma);
  if (const auto* mth = std::get_if<MthAlarmLatched>(&rule))
    return h_gamma_anonymous(config, mth->M, mth->domain, gamma);
  if (const auto* wv = std::get_if<WeightedVote>(&rule))
    return std::log(gamma) / (wv->M * config.groups.back().kld);
  const auto& sr = std::get<SyndromeRule>(rule);
  return std::log(gamma) / family_stats(sr.family, config).i_omega;
}

CalibrationResult calibrate_h(const NetworkConfig& config, const FusionRule& rule,
                              double gamma, const CalibrationOptions& options) {
  if (!(gamma > 1.0)) throw InvalidParameter("gamma must be > 1");
  if (!(options.rel_tol > 0.0) || options.rel_tol >= 0.5)
    throw InvalidParameter("rel_tol must lie in (0, 0.5)");

  TrialConfig trial;
  trial.network = &config;
  trial.rule = rule;
  trial.regime = Regime::PreChange;
  trial.trials = options.trials;
  trial.cap = static_cast<long>(20.0 * gamma);
  trial.master_seed = options.master_seed;
  trial.threads = options.threads;

  CalibrationResult result;
  result.target_gamma = gamma;

  // Matched seeds across evaluations: the streams are identical for every h,
  // so the simulated ARL is pathwise nondecreasing in h and bisection is
  // well posed even at modest trial counts.
  auto eval = [&](double h) {
    trial.h_base = h;
    result.iterations += 1;
    return simulate_arl(trial);
  };
  auto good = [&](const Estimate& arl) {
    return std::abs(arl.mean - gamma) <= options.rel_tol * gamma + arl.stderr_ &&
           arl.censored_fraction < 0.01;
  };

  double h = options.h_seed > 0.0 ? options.h_seed : asymptotic_h_seed(config, rule, gamma);
  Estimate arl = eval(h);
  if (good(arl)) {
    result.h = h;
    result.achieved_arl = arl;
    result.converged = true;
    return result;
  }

  // widen to a bracket [lo, hi] with ARL(lo) < gamma < ARL(hi)
  double lo = h, hi = h;
  Estimate arl_lo = arl, arl_hi = arl;
  while (arl_lo.mean > gamma && result.iterations < options.max_iterations) {
    lo *= 0.6;
    arl_lo = eval(lo);
  }
  while (arl_hi.mean < gamma && result.iterations < options.max_iterations) {
    hi *= 1.6;
    arl_hi = eval(hi);
  }

  Estimate best = arl;
  double best_h = h;
  while (result.iterations < options.max_iterations) {
    double mid = 0.5 * (lo + hi);
    Estimate arl_mid = eval(mid);
    if (std::abs(arl_mid.mean - gamma) < std::abs(best.mean - gamma)) {
      best = arl_mid;
      best_h = mid;
    }
    if (good(arl_mid)) {
      result.h = mid;
      result.achieved_arl = arl_mid;
      result.converged = true;
      return result;
    }
    if (arl_mid.mean < gamma)
      lo = mid;
    else
      hi = mid;
  }
  result.h = best_h;
  result.achieved_arl = best;
  result.converged = false;
  return result;
}

namespace {

struct ResolvedRule {
  FusionRule rule;
  std::string spec;
  double M = 0.0;
};

CompareRow evaluate_rule(const NetworkConfig& config, const ResolvedRule& rr, double gamma,
                         const CompareOptions& options, std::uint64_t edd_seed) {
  CalibrationOptions cal;
  cal.rel_tol = options.rel_tol;
  cal.trials = options.arl_trials;
  cal.master_seed = derive_seed(options.master_seed, 0xca1);
  cal.threads = options.threads;
  CalibrationResult calres = calibrate_h(config, rr.rule, gamma, cal);

  TrialConfig edd;
  edd.network = &config;
  edd.rule = rr.rule;
  edd.h_base = calres.h;
  edd.regime = Regime::PostChange;
  edd.trials = options.edd_trials;
  edd.cap = std::max<long>(1000, static_cast<long>(50.0 * calres.h));
  edd.master_seed = edd_seed;
  edd.threads = options.threads;

  CompareRow row;
  row.gamma = gamma;
  row.rule_spec = rr.spec;
  row.M = rr.M;
  row.h = calres.h;
  row.arl = calres.achieved_arl;
  row.edd = simulate_edd(edd);
  row.trials = options.edd_trials;
  row.seed = edd_seed;
  return row;
}

}  // namespace

std::vector<CompareRow> compare_rules(const NetworkConfig& config,
                                      const std::vector<double>& gammas,
                                      const std::vector<std::string>& rule_specs,
                                      const CompareOptions& options) {
  if (gammas.empty() || rule_specs.empty())
    throw InvalidParameter("compare needs at least one gamma and one rule spec");

  CompareOptions scan = options;
  scan.edd_trials = std::min(options.edd_trials, std::max<long>(1, options.select_edd_trials));
  scan.arl_trials = std::min(options.arl_trials, std::max<long>(1, options.select_arl_trials));
  const bool scan_is_full =
      scan.edd_trials == options.edd_trials && scan.arl_trials == options.arl_trials;

  // Picks the candidate with the smallest scanned EDD (ties break toward the
  // earliest, i.e. smallest-M, candidate). All candidates share edd_seed, so
  // the ranking rides on common random numbers. When the coarse budget is
  // below the full one, the top candidates are re-ranked at a 4x finer budget
  // so that near-ties are not decided by scan noise.
  auto scan_best = [&](const std::vector<ResolvedRule>& candidates, double gamma,
                       std::uint64_t edd_seed, CompareRow& out) -> const ResolvedRule* {
    std::vector<double> coarse(candidates.size());
    const ResolvedRule* best = nullptr;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      CompareRow row = evaluate_rule(config, candidates[i], gamma, scan, edd_seed);
      coarse[i] = row.edd.mean;
      if (best == nullptr || row.edd.mean < out.edd.mean) {
        best = &candidates[i];
        out = std::move(row);
      }
    }
    if (scan_is_full || candidates.size() < 2) return best;

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return coarse[a] != coarse[b] ? coarse[a] < coarse[b] : a < b;
    });
    order.resize(std::min<std::size_t>(order.size(), 6));
    std::sort(order.begin(), order.end());  // smaller-M tie preference

    CompareOptions fine = options;
    fine.edd_trials = std::min(options.edd_trials, 4 * scan.edd_trials);
    fine.arl_trials = std::min(options.arl_trials, 4 * scan.arl_trials);
    best = nullptr;
    for (std::size_t i : order) {
      CompareRow row = evaluate_rule(config, candidates[i], gamma, fine, edd_seed);
      if (best == nullptr || row.edd.mean < out.edd.mean) {
        best = &candidates[i];
        out = std::move(row);
      }
    }
    return best;
  };

  // "weighted:design" candidates: every achievable weighted-sum breakpoint,
  // taken from the asymptotic design table.
  std::vector<ResolvedRule> design_candidates;
  auto make_design_candidates = [&](double gamma) {
    DesignResult design = design_M(config, gamma, {}, options.xi_samples,
                                   derive_seed(options.master_seed, 0xde5), options.threads);
    std::vector<ResolvedRule> cands;
    cands.reserve(design.table.size());
    for (const DesignRow& row : design.table)
      cands.push_back(ResolvedRule{make_weighted_vote(config, row.M),
                                   "weighted:M=" + std::to_string(row.M), row.M});
    return cands;
  };
  // Resolved once up front when the design gamma is pinned.
  const ResolvedRule* pinned_design = nullptr;
  CompareRow pinned_design_row;
  if (options.design_gamma > 0.0) {
    bool wanted = false;
    for (const std::string& spec : rule_specs) wanted = wanted || spec == "weighted:design";
    if (wanted) {
      design_candidates = make_design_candidates(options.design_gamma);
      pinned_design = scan_best(design_candidates, options.design_gamma,
                                derive_seed(options.master_seed, 0xde5e), pinned_design_row);
    }
  }

  std::vector<CompareRow> rows;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    double gamma = gammas[gi];
    // one EDD seed per gamma row: common random numbers across rules
    std::uint64_t edd_seed = derive_seed(options.master_seed, 0xedd0 + gi);
    for (const std::string& spec : rule_specs) {
      CompareRow row;
      if (spec == "weighted:design") {
        if (pinned_design != nullptr) {
          row = evaluate_rule(config, *pinned_design, gamma, options, edd_seed);
        } else {
          std::vector<ResolvedRule> cands = make_design_candidates(gamma);
          CompareRow scanned;
          const ResolvedRule* best = scan_best(cands, gamma, edd_seed, scanned);
          row = scan_is_full ? std::move(scanned)
                             : evaluate_rule(config, *best, gamma, options, edd_seed);
        }
      } else if (spec == "anon:best" || spec.rfind("anon:best@group", 0) == 0) {
        std::vector<char> domain;
        std::string dname;
        if (spec == "anon:best") {
          domain = domain_all(config);
          dname = "all";
        } else {
          int g = std::stoi(spec.substr(std::string("anon:best@group").size()));
          domain = domain_group(config, g);
          dname = "group" + std::to_string(g);
        }
        int dsize = static_cast<int>(std::count(domain.begin(), domain.end(), char(1)));
        std::vector<ResolvedRule> cands;
        for (int m = 1; m <= dsize; ++m)
          cands.push_back(ResolvedRule{make_anonymous_vote(config, m, domain),
                                       "anon:M=" + std::to_string(m) + ",D=" + dname,
                                       static_cast<double>(m)});
        CompareRow scanned;
        const ResolvedRule* best = scan_best(cands, gamma, edd_seed, scanned);
        row = scan_is_full ? std::move(scanned)
                           : evaluate_rule(config, *best, gamma, options, edd_seed);
      } else {
        FusionRule rule = parse_rule_spec(spec, config);
        ResolvedRule rr{rule, spec, 0.0};
        if (const auto* anon = std::get_if<AnonymousVote>(&rule)) rr.M = anon->M;
        if (const auto* wv = std::get_if<WeightedVote>(&rule)) rr.M = wv->M;
        if (const auto* mth = std::get_if<MthAlarmLatched>(&rule)) rr.M = mth->M;
        row = evaluate_rule(config, rr, gamma, options, edd_seed);
      }
      row.rule_label = spec;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace hetdqcd
