// hetdqcd command-line tool: analysis, threshold design, calibration,
// simulation and rule comparison over sensor-network configs.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "hetdqcd/asymptotics.hpp"
#include "hetdqcd/config_io.hpp"
#include "hetdqcd/cusum.hpp"
#include "hetdqcd/errors.hpp"
#include "hetdqcd/fusion.hpp"
#include "hetdqcd/harness.hpp"
#include "hetdqcd/network.hpp"
#include "hetdqcd/syndrome.hpp"

using namespace hetdqcd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitContract = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_path;  // empty = stdout
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all cores
};

int effective_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Writes to --out or stdout; throws ios_base::failure on write errors.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::ios_base::failure("cannot open output file: " + out_path);
  f << text;
  if (!f) throw std::ios_base::failure("write failed: " + out_path);
}

std::string counts_str(const CountVector& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i)
    s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

// "a:b:step" or a single value.
std::vector<double> parse_m_range(const std::string& text) {
  std::vector<double> out;
  auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    out.push_back(std::stod(text));
    return out;
  }
  auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw InvalidParameter("--M-range expects start:stop:step, got " + text);
  double start = std::stod(text.substr(0, c1));
  double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  double step = std::stod(text.substr(c2 + 1));
  if (step <= 0.0 || stop < start)
    throw InvalidParameter("--M-range expects start <= stop and step > 0");
  for (double m = start; m <= stop + 1e-12; m += step) out.push_back(m);
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string header_for(const std::string& subcommand, const CommonArgs& args,
                       const std::string& extra) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_path = args.config_path;
  m.output = args.out_path.empty() ? "-" : args.out_path;
  m.master_seed = args.seed;
  m.extra = extra;
  return manifest_header(m);
}

int cmd_analyze(const CommonArgs& args, const std::string& m_range) {
  ToolConfig cfg = load_config(args.config_path);
  const NetworkConfig& net = cfg.network;
  std::vector<double> ms = parse_m_range(m_range);
  std::ostringstream os;
  os << header_for("analyze", args, "M-range=" + m_range);
  os << "M,count_vector,cardinality,kld_sum\n";
  for (double M : ms) {
    SyndromeFamily family = criticals_weighted(net, M);
    for (const CountSyndrome& c : family.count_criticals)
      os << M << "," << counts_str(c.counts) << "," << c.cardinality() << ","
         << kld_sum(c.counts, net) << "\n";
    TopSelectResult top = bar_m_topselect(net, M);
    PruningResult pr = bar_M_pruning(net, M);
    DbarResult d = omega_star_and_dbar(family, net, pr.M_bar, M);
    os << "# M=" << M << " m_bar=" << top.m_bar << " M_bar=" << pr.M_bar
       << " omega_star=" << counts_str(d.omega_star.counts)
       << " D_bar_size=" << d.dbar_size
       << " parent_iterations=" << pr.parent_iterations
       << " iteration_bound=" << pruning_iteration_bound(net) << "\n";
  }
  emit(args.out_path, os.str());
  return kExitOk;
}

int cmd_design(const CommonArgs& args, double gamma) {
  ToolConfig cfg = load_config(args.config_path);
  if (gamma <= 0.0) gamma = cfg.gamma;
  if (gamma <= 1.0)
    throw InvalidParameter("design needs --gamma > 1 (or gamma in the config)");
  DesignResult d = design_M(cfg.network, gamma, {}, 200000, args.seed,
                            effective_threads(args.threads));
  std::ostringstream os;
  os << header_for("design", args, "gamma=" + std::to_string(gamma));
  os << "M,h_upper,m_bar,M_bar,D_bar_size,xi_upper,xi_upper_stderr,objective\n";
  for (const DesignRow& row : d.table)
    os << row.M << "," << row.h_upper << "," << row.m_bar << "," << row.M_bar << ","
       << row.dbar_size << "," << row.xi_upper.mean << "," << row.xi_upper.stderr_
       << "," << row.objective << "\n";
  os << "# M_star=" << d.M_star << "\n";
  emit(args.out_path, os.str());
  return kExitOk;
}

int cmd_calibrate(const CommonArgs& args, const std::string& rule_spec, double gamma,
                  long trials) {
  ToolConfig cfg = load_config(args.config_path);
  if (gamma <= 0.0) gamma = cfg.gamma;
  if (gamma <= 1.0)
    throw InvalidParameter("calibrate needs --gamma > 1 (or gamma in the config)");
  FusionRule rule = parse_rule_spec(rule_spec, cfg.network);
  CalibrationOptions opt;
  opt.trials = trials;
  opt.master_seed = args.seed;
  opt.threads = effective_threads(args.threads);
  CalibrationResult r = calibrate_h(cfg.network, rule, gamma, opt);
  std::ostringstream os;
  os << header_for("calibrate", args,
                   "rule=" + rule_spec + " gamma=" + std::to_string(gamma));
  os << "rule,gamma,h,arl_mean,arl_stderr,censored_fraction,iterations,converged\n";
  os << rule_spec << "," << gamma << "," << r.h << "," << r.achieved_arl.mean << ","
     << r.achieved_arl.stderr_ << "," << r.achieved_arl.censored_fraction << ","
     << r.iterations << "," << (r.converged ? 1 : 0) << "\n";
  emit(args.out_path, os.str());
  return r.converged ? kExitOk : kExitContract;
}

// One full path dumped sensor by sensor: t, group, index, w, bit.
void write_trace(const std::string& path, const NetworkConfig& net,
                 const FusionRule& rule, const ThresholdVector& th, Regime regime,
                 std::uint64_t seed, long cap, const std::string& header) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot open trace file: " + path);
  f << header << "t,group,index,w,bit\n";
  CusumState state = make_state(net);
  LlrStream stream(net, regime, seed);
  std::vector<double> z;
  bool latched = uses_latched_feedback(rule);
  for (long t = 1; t <= cap; ++t) {
    stream.next(z);
    FeedbackFrame frame = step(state, z, net, th);
    for (int i = 0; i < net.total_sensors; ++i) {
      SensorId id = net.sensor_at(i);
      f << t << "," << id.group << "," << id.index << "," << state.w[i] << ","
        << int(frame.bits[i]) << "\n";
    }
    if (triggers(rule, latched ? latched_frame(state) : frame, net)) break;
  }
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

int cmd_simulate(const CommonArgs& args, const std::string& rule_spec, double h,
                 const std::string& regime_name, long trials, long cap,
                 const std::string& trace_path) {
  ToolConfig cfg = load_config(args.config_path);
  if (h <= 0.0) throw InvalidParameter("simulate needs --h > 0");
  Regime regime;
  if (regime_name == "pre")
    regime = Regime::PreChange;
  else if (regime_name == "post")
    regime = Regime::PostChange;
  else
    throw InvalidParameter("--regime must be pre or post");
  FusionRule rule = parse_rule_spec(rule_spec, cfg.network);

  TrialConfig tc;
  tc.network = &cfg.network;
  tc.rule = rule;
  tc.h_base = h;
  tc.regime = regime;
  tc.trials = trials;
  tc.cap = cap;
  tc.master_seed = args.seed;
  tc.threads = effective_threads(args.threads);
  Estimate e = regime == Regime::PreChange ? simulate_arl(tc) : simulate_edd(tc);

  std::string header = header_for(
      "simulate", args, "rule=" + rule_spec + " h=" + std::to_string(h) +
                            " regime=" + regime_name);
  std::ostringstream os;
  os << header;
  os << "rule,h,regime,mean,stderr,trials,censored_fraction\n";
  os << rule_spec << "," << h << "," << regime_name << "," << e.mean << ","
     << e.stderr_ << "," << e.n << "," << e.censored_fraction << "\n";
  emit(args.out_path, os.str());

  if (!trace_path.empty())
    write_trace(trace_path, cfg.network, rule, make_thresholds(cfg.network, h), regime,
                derive_seed(args.seed, 0), cap, header);
  return kExitOk;
}

// gnuplot companion: EDD vs log10(ARL) per rule label.
std::string plot_script(const std::string& csv_path) {
  std::ostringstream os;
  os << "# gnuplot script: EDD against the false-alarm period per rule\n"
     << "set datafile separator ','\n"
     << "set key top left\n"
     << "set logscale x\n"
     << "set xlabel 'average run length to false alarm'\n"
     << "set ylabel 'expected detection delay'\n"
     << "csv = '" << csv_path << "'\n"
     << "rules = system(\"awk -F, '!/^#/ && NR>1 {print $2}' \" . csv . \" | sort -u\")\n"
     << "plot for [r in rules] csv using 5:(stringcolumn(2) eq r ? $7 : 1/0) \\\n"
     << "  with linespoints title r\n";
  return os.str();
}

int cmd_compare(const CommonArgs& args, const std::string& gammas_text,
                const std::string& rules_text, long edd_trials, long arl_trials,
                long select_trials, double design_gamma) {
  ToolConfig cfg = load_config(args.config_path);
  std::vector<double> gammas;
  for (const std::string& g : split_commas(gammas_text)) gammas.push_back(std::stod(g));
  if (gammas.empty() && cfg.gamma > 1.0) gammas.push_back(cfg.gamma);
  if (gammas.empty())
    throw InvalidParameter("compare needs --gamma (or gamma in the config)");
  std::vector<std::string> rules = split_commas(rules_text);
  if (rules.empty()) throw InvalidParameter("compare needs --rules");

  CompareOptions opt;
  opt.edd_trials = edd_trials;
  opt.arl_trials = arl_trials;
  opt.select_edd_trials = select_trials;
  opt.select_arl_trials = std::max<long>(1, select_trials / 2);
  opt.design_gamma = design_gamma;
  opt.master_seed = args.seed;
  opt.threads = effective_threads(args.threads);
  std::vector<CompareRow> rows = compare_rules(cfg.network, gammas, rules, opt);

  std::ostringstream os;
  os << header_for("compare", args, "gammas=" + gammas_text + " rules=" + rules_text);
  os << "gamma,rule,M,h,arl_mean,arl_stderr,edd_mean,edd_stderr,trials,"
        "censored_fraction,seed\n";
  for (const CompareRow& r : rows)
    os << r.gamma << "," << r.rule_spec << "," << r.M << "," << r.h << ","
       << r.arl.mean << "," << r.arl.stderr_ << "," << r.edd.mean << ","
       << r.edd.stderr_ << "," << r.trials << "," << r.edd.censored_fraction << ","
       << r.seed << "\n";
  emit(args.out_path, os.str());
  if (!args.out_path.empty())
    emit(args.out_path + ".gp", plot_script(args.out_path));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous distributed quickest change detection toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    sub->add_option("--config", args.config_path, "network config (JSON)")
        ->required(config_required);
    sub->add_option("--out", args.out_path, "output CSV path (default stdout)");
    sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("--threads", args.threads, "worker threads (0 = all cores)");
  };

  std::string m_range = "1";
  CLI::App* analyze = app.add_subcommand("analyze", "critical syndromes per M");
  add_common(analyze);
  auto* m_opt = analyze->add_option("--M", m_range, "weighted vote threshold");
  analyze->add_option("--M-range", m_range, "start:stop:step sweep")->excludes(m_opt);

  double gamma = 0.0;
  CLI::App* design = app.add_subcommand("design", "second-order design curve and M*");
  add_common(design);
  design->add_option("--gamma", gamma, "target false-alarm period");

  std::string rule_spec = "weighted:M=1";
  long trials = 4000;
  CLI::App* calibrate = app.add_subcommand("calibrate", "fit h to a target ARL");
  add_common(calibrate);
  calibrate->add_option("--rule", rule_spec, "fusion rule spec")->required();
  calibrate->add_option("--gamma", gamma, "target false-alarm period");
  calibrate->add_option("--trials", trials, "ARL trials per bisection step");

  double h = 0.0;
  std::string regime = "post";
  long cap = 1000000;
  std::string trace_path;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo ARL/EDD at fixed h");
  add_common(simulate);
  simulate->add_option("--rule", rule_spec, "fusion rule spec")->required();
  simulate->add_option("--threshold", h, "base threshold h")->required();
  simulate->add_option("--regime", regime, "pre (ARL) or post (EDD)");
  simulate->add_option("--trials", trials, "Monte Carlo trials");
  simulate->add_option("--cap", cap, "per-trial step cap");
  simulate->add_option("--trace", trace_path, "dump one path's per-sensor trace CSV");

  std::string gammas_text, rules_text;
  long edd_trials = 20000;
  long select_trials = 2000;
  double design_gamma = 0.0;
  CLI::App* compare = app.add_subcommand("compare", "calibrated rule comparison");
  add_common(compare);
  compare->add_option("--gamma", gammas_text, "comma-separated target ARLs");
  compare->add_option("--rules", rules_text, "comma-separated rule specs")->required();
  compare->add_option("--trials", edd_trials, "EDD trials per rule");
  compare->add_option("--arl-trials", trials, "ARL trials per bisection step");
  compare->add_option("--select-trials", select_trials,
                      "EDD trials while scanning searched specs (anon:best, weighted:design)");
  compare->add_option("--design-gamma", design_gamma,
                      "pin weighted:design to this ARL target (0 = redesign per gamma)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze) return cmd_analyze(args, m_range);
    if (*design) return cmd_design(args, gamma);
    if (*calibrate) return cmd_calibrate(args, rule_spec, gamma, trials);
    if (*simulate)
      return cmd_simulate(args, rule_spec, h, regime, trials, cap, trace_path);
    if (*compare)
      return cmd_compare(args, gammas_text, rules_text, edd_trials, trials, select_trials,
                         design_gamma);
  } catch (const InvalidParameter& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitUsage;
}
