// keyrate: secret-key rate bounds for one-way QKD post-processing.
//
//   keyrate rate --protocol bb84 --qber 0.05 --bound lower
//   keyrate threshold --protocol six-state --bound lower --no-preprocessing
//   keyrate sweep --protocol bb84 --start 0 --stop 0.15 --step 0.01 --bound both
//   keyrate feasible-set --protocol bb84 --qber 0.1 --samples 10000 --seed 7
//   keyrate reproduce-paper            (also: keyrate --reproduce-paper)
//
// Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "keyrate/protocol.hpp"
#include "keyrate/rates.hpp"
#include "keyrate/reference.hpp"
#include "render.hpp"

namespace {

using namespace keyrate;
using keyrate::cli::Cell;
using keyrate::cli::Table;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string protocol;
  std::optional<double> qber;
  std::optional<double> delta;
  std::optional<double> noise;
  std::string bound = "lower";
  bool no_preprocessing = false;
  std::optional<double> overlap;
  std::size_t overlap_points = 21;
  std::optional<double> bracket_min;
  std::optional<double> bracket_max;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  std::size_t samples = 10000;
  std::size_t curve_points = 17;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string output;
  bool timing = false;
  OptimizerSettings settings;
};

ProtocolSpec make_protocol(const RunConfig& cfg) {
  std::string name = cfg.protocol;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name == "bb84") return bb84();
  if (name == "six-state" || name == "six_state" || name == "sixstate" || name == "6-state") return six_state();
  if (name == "b92") return b92(cfg.overlap.value_or(kDefaultB92Overlap));
  throw DomainError("unknown protocol '" + cfg.protocol + "' (expected bb84, six-state or b92)");
}

double single_noise(const RunConfig& cfg, const ProtocolSpec& spec) {
  const int given = static_cast<int>(cfg.qber.has_value()) + static_cast<int>(cfg.delta.has_value()) +
                    static_cast<int>(cfg.noise.has_value());
  if (given != 1) throw DomainError("give exactly one of --qber, --delta, --noise");
  if (spec.kind == ProtocolKind::kB92 && cfg.qber) throw DomainError("b92 is parametrized by --delta");
  if (spec.kind != ProtocolKind::kB92 && cfg.delta) throw DomainError(spec.name + " is parametrized by --qber");
  const double v = cfg.qber ? *cfg.qber : cfg.delta ? *cfg.delta : *cfg.noise;
  spec.check_noise(v);
  return v;
}

BoundKind parse_bound(const std::string& s) {
  if (s == "lower") return BoundKind::kLower;
  if (s == "upper") return BoundKind::kUpper;
  throw DomainError("--bound must be lower or upper");
}

void emit(const RunConfig& cfg, const Table& t) {
  std::ostringstream buf;
  if (cfg.format == "json") {
    cli::write_json(buf, t);
  } else {
    cli::write_csv(buf, t);
  }
  if (cfg.output.empty()) {
    std::cout << buf.str();
    std::cout.flush();
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw DomainError("cannot open output file " + cfg.output);
    f << buf.str();
  }
}

Cell optional_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

int cmd_rate(const RunConfig& cfg) {
  const ProtocolSpec spec = make_protocol(cfg);
  const double noise = single_noise(cfg, spec);
  const RateReport r = evaluate_bound(spec, noise, parse_bound(cfg.bound), !cfg.no_preprocessing, cfg.settings);
  Table t{{"protocol", "noise_name", "noise", "bound", "preprocessing", "rate", "q_opt", "lambda1", "lambda2",
           "lambda3", "lambda4", "attack_parameter", "evaluations", "overlap", "p_pass"},
          {}};
  std::vector<Cell> row{r.protocol, r.noise_name, r.noise, std::string(to_string(r.bound)), r.preprocessing,
                        r.rate, r.q_opt, r.worst[0], r.worst[1], r.worst[2], r.worst[3], r.worst_parameter,
                        static_cast<std::int64_t>(r.evaluations), optional_cell(r.overlap),
                        optional_cell(r.p_pass)};
  if (cfg.timing) {
    t.columns.push_back("wall_seconds");
    row.push_back(r.wall_seconds);
  }
  t.rows.push_back(std::move(row));
  emit(cfg, t);
  return 0;
}

int cmd_threshold(const RunConfig& cfg) {
  const ProtocolSpec base = make_protocol(cfg);
  const BoundKind kind = parse_bound(cfg.bound);
  const bool pre = !cfg.no_preprocessing;
  Table t{{"protocol", "noise_name", "bound", "preprocessing", "overlap", "threshold", "bracket_width"}, {}};
  auto add_row = [&](const ThresholdReport& r) {
    t.rows.push_back({r.protocol, r.noise_name, std::string(to_string(r.bound)), r.preprocessing,
                      optional_cell(r.overlap), r.threshold, r.bracket_width});
  };
  std::optional<std::pair<double, double>> bracket;
  if (cfg.bracket_min || cfg.bracket_max) {
    const auto def = threshold_bracket(base);
    bracket = std::pair{cfg.bracket_min.value_or(def.first), cfg.bracket_max.value_or(def.second)};
  }
  if (base.kind == ProtocolKind::kB92 && !cfg.overlap) {
    // No overlap given: one record per grid overlap.
    for (double c : b92_overlap_grid(cfg.overlap_points)) {
      add_row(threshold(b92(c), kind, pre, cfg.settings, bracket));
    }
  } else {
    add_row(threshold(base, kind, pre, cfg.settings, bracket));
  }
  emit(cfg, t);
  return 0;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KEYRATE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::min(n, std::max<std::size_t>(jobs, 1));
}

int cmd_sweep(const RunConfig& cfg) {
  const ProtocolSpec spec = make_protocol(cfg);
  if (!(cfg.step > 0.0)) throw DomainError("--step must be positive");
  if (!(cfg.start <= cfg.stop)) throw DomainError("--start must not exceed --stop");
  const bool want_lower = cfg.bound == "lower" || cfg.bound == "both";
  const bool want_upper = cfg.bound == "upper" || cfg.bound == "both";
  if (!want_lower && !want_upper) throw DomainError("--bound must be lower, upper or both");

  const auto count = static_cast<std::size_t>(std::floor((cfg.stop - cfg.start) / cfg.step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = cfg.start + cfg.step * static_cast<double>(i);
  for (double x : grid) spec.check_noise(x);

  struct Row {
    std::optional<RateReport> lower, upper;
  };
  std::vector<Row> rows(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        if (want_lower) rows[i].lower = lower_bound(spec, grid[i], !cfg.no_preprocessing, cfg.settings);
        if (want_upper) rows[i].upper = upper_bound_bitwise(spec, grid[i], !cfg.no_preprocessing, cfg.settings);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < worker_count(count); ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  Table t{{"protocol", "noise_name", "noise", "q_opt", "lambda1", "lambda2", "lambda3", "lambda4", "rate_lower",
           "rate_upper"},
          {}};
  for (std::size_t i = 0; i < count; ++i) {
    const RateReport& main = rows[i].lower ? *rows[i].lower : *rows[i].upper;
    t.rows.push_back({spec.name, spec.noise_name, grid[i], main.q_opt, main.worst[0], main.worst[1], main.worst[2],
                      main.worst[3], rows[i].lower ? Cell{rows[i].lower->rate} : Cell{},
                      rows[i].upper ? Cell{rows[i].upper->rate} : Cell{}});
  }
  emit(cfg, t);
  return 0;
}

int cmd_feasible_set(const RunConfig& cfg) {
  const ProtocolSpec spec = make_protocol(cfg);
  const double noise = single_noise(cfg, spec);
  // Sampling is conditioned on the QBER; B92's delta maps to one.
  const double qber = spec.kind == ProtocolKind::kB92 ? spec.family.at(noise).qber() : noise;
  const auto samples = sample_feasible_set(spec, qber, cfg.samples, cfg.seed);
  if (samples.empty()) std::cerr << "warning: no sampled state matched QBER " << qber << '\n';

  Table t{{"source", "protocol", "noise", "lambda1", "lambda2", "lambda3", "lambda4", "qber"}, {}};
  auto add = [&](const char* source, const BellSpectrum& l) {
    t.rows.push_back({std::string(source), spec.name, noise, l[0], l[1], l[2], l[3], l.qber()});
  };
  for (const auto& l : samples) add("sample", l);
  const auto [lo, hi] = spec.family.bounds(noise);
  const std::size_t n = std::max<std::size_t>(cfg.curve_points, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t_param = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    add("analytic", spec.family.at(noise, t_param));
  }
  emit(cfg, t);
  return 0;
}

int cmd_reproduce(const RunConfig& cfg) {
  const auto checks = reference_checks(cfg.seed, cfg.settings);
  Table t{{"item", "expected", "tolerance", "computed", "status", "note"}, {}};
  bool ok = true;
  for (const auto& c : checks) {
    t.rows.push_back({c.item, c.expected, c.tolerance, c.computed, std::string(to_string(c.status)), c.note});
    ok = ok && c.status != CheckStatus::kFail;
  }
  emit(cfg, t);
  if (!ok) std::cerr << "one or more reference checks failed\n";
  return ok ? 0 : kExitNumerical;
}

void add_common(CLI::App* app, RunConfig& cfg) {
  app->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("-o,--output", cfg.output, "Output file (default: standard output)");
  app->add_option("--q-grid", cfg.settings.q_grid, "Grid points for the preprocessing search");
  app->add_option("--param-grid", cfg.settings.parameter_grid, "Grid points for the attack-parameter search");
  app->add_option("--tol", cfg.settings.golden_tol, "Golden-section interval width");
  app->add_option("--bisection-width", cfg.settings.bisection_width, "Threshold bracket width");
}

void add_protocol(CLI::App* app, RunConfig& cfg) {
  app->add_option("-p,--protocol", cfg.protocol, "bb84, six-state or b92")->required();
  app->add_option("--overlap", cfg.overlap, "B92 signal overlap <phi0|phi1> in (0,1)");
}

void add_noise(CLI::App* app, RunConfig& cfg) {
  app->add_option("--qber", cfg.qber, "Quantum bit error rate (bb84, six-state)");
  app->add_option("--delta", cfg.delta, "Depolarizing parameter (b92)");
  app->add_option("--noise", cfg.noise, "Noise parameter of the chosen protocol");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Secret-key rate bounds for one-way QKD protocols under collective attacks"};
  app.require_subcommand(0, 1);
  bool reproduce_flag = false;
  app.add_flag("--reproduce-paper", reproduce_flag, "Recompute the reference threshold table");
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  add_common(&app, cfg);

  auto* rate_cmd = app.add_subcommand("rate", "Evaluate one bound at one noise value");
  add_protocol(rate_cmd, cfg);
  add_noise(rate_cmd, cfg);
  add_common(rate_cmd, cfg);
  rate_cmd->add_option("--bound", cfg.bound, "lower or upper");
  rate_cmd->add_flag("--no-preprocessing", cfg.no_preprocessing, "Pin the flip probability to 0");
  rate_cmd->add_flag("--timing", cfg.timing, "Include wall time in the record");

  auto* thr_cmd = app.add_subcommand("threshold", "Largest noise with a positive bound");
  add_protocol(thr_cmd, cfg);
  add_common(thr_cmd, cfg);
  thr_cmd->add_option("--bound", cfg.bound, "lower or upper");
  thr_cmd->add_flag("--no-preprocessing", cfg.no_preprocessing, "Pin the flip probability to 0");
  thr_cmd->add_option("--bracket-min", cfg.bracket_min, "Lower end of the noise bracket");
  thr_cmd->add_option("--bracket-max", cfg.bracket_max, "Upper end of the noise bracket");
  thr_cmd->add_option("--overlap-points", cfg.overlap_points, "B92 overlap grid size when --overlap is absent");

  auto* sweep_cmd = app.add_subcommand("sweep", "Bounds on a uniform noise grid");
  add_protocol(sweep_cmd, cfg);
  add_common(sweep_cmd, cfg);
  sweep_cmd->add_option("--start", cfg.start)->required();
  sweep_cmd->add_option("--stop", cfg.stop)->required();
  sweep_cmd->add_option("--step", cfg.step)->required();
  sweep_cmd->add_option("--bound", cfg.bound, "lower, upper or both");
  sweep_cmd->add_flag("--no-preprocessing", cfg.no_preprocessing, "Pin the flip probability to 0");

  auto* fs_cmd = app.add_subcommand("feasible-set", "Sampled D2(D1(Gamma_Q)) spectra next to the analytic family");
  add_protocol(fs_cmd, cfg);
  add_noise(fs_cmd, cfg);
  add_common(fs_cmd, cfg);
  fs_cmd->add_option("--samples", cfg.samples, "Random states to draw");
  fs_cmd->add_option("--seed", cfg.seed, "Random seed");
  fs_cmd->add_option("--curve-points", cfg.curve_points, "Analytic family grid size");

  auto* repro_cmd = app.add_subcommand("reproduce-paper", "Recompute the reference threshold table");
  repro_cmd->add_option("--seed", cfg.seed, "Random seed");
  add_common(repro_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    cfg.settings.validate();
    if (*rate_cmd) return cmd_rate(cfg);
    if (*thr_cmd) return cmd_threshold(cfg);
    if (*sweep_cmd) return cmd_sweep(cfg);
    if (*fs_cmd) return cmd_feasible_set(cfg);
    if (*repro_cmd || reproduce_flag) return cmd_reproduce(cfg);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
