// franson: command-line front end for the simulator.
//
//   franson run --scenario attack --p 0.1464 --sigma calibrated --out results
//   franson analyze results/records.csv
//   franson sweep p 0 0.25 6
//   franson bounds 2 10
//   franson report results/records.csv

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "franson/analysis.h"
#include "franson/harness.h"
#include "franson/lhv.h"
#include "franson/quantum.h"

namespace fs = std::filesystem;
using namespace franson;

namespace {

constexpr double kDefaultClickTarget = 0.976;

struct Options {
  std::string config_path;
  std::string scenario = "attack";
  double p = 0.0;
  double beta = 0.95;
  std::string sigma = "0";
  double click_target = kDefaultClickTarget;
  double visibility = 1.0;
  double eta_d = 1.0;
  std::uint64_t trials = 135000;
  std::uint64_t window = 5000;
  std::uint64_t seed = 1;
  bool store_hidden = true;
  std::string multiclick = "earliest";
  unsigned workers = 0;
  int chain_n = 2;
  int n_min = 2;
  int n_max = 10;
};

double parse_real(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument(what + ": expected a number, got '" + text + "'");
  return value;
}

std::string fixed(double x, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

void add_scenario_options(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_path, "JSON file with option values; flags override it")
      ->check(CLI::ExistingFile);
  app->add_option("--scenario", o.scenario, "attack, honest or bounds")
      ->check(CLI::IsMember({"attack", "honest", "bounds"}));
  app->add_option("--p", o.p, "LHV noise parameter in [0, 1/4]");
  app->add_option("--beta", o.beta, "blinding level in (1/2, 1)");
  app->add_option("--sigma", o.sigma, "detector jitter, a number or 'calibrated'");
  app->add_option("--click-target", o.click_target, "click fraction used by --sigma calibrated");
  app->add_option("--visibility", o.visibility, "honest source visibility");
  app->add_option("--eta-d", o.eta_d, "honest detector efficiency");
  app->add_option("--trials", o.trials, "number of emissions");
  app->add_option("--window", o.window, "trials per window");
  app->add_option("--seed", o.seed, "64-bit seed");
  app->add_option("--store-hidden", o.store_hidden, "keep the hidden variable in records (true/false)");
  app->add_option("--multiclick", o.multiclick, "multi-click policy")
      ->check(CLI::IsMember({"discard", "earliest", "random"}));
  app->add_option("--workers", o.workers, "worker threads, 0 = all cores");
  app->add_option("--chain-n", o.chain_n, "settings per party for the honest source");
  app->add_option("--n-min", o.n_min, "smallest N for the bounds scenario");
  app->add_option("--n-max", o.n_max, "largest N for the bounds scenario");
}

// Fills options not given on the command line from the JSON config file.
void apply_config(CLI::App* app, Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse " + o.config_path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(o.config_path + ": expected a JSON object");

  const std::vector<std::string> known{"scenario", "p",       "beta",         "sigma",      "click_target",
                                       "visibility", "eta_d", "trials",       "window",     "seed",
                                       "store_hidden", "multiclick", "workers", "chain_n", "n_min",
                                       "n_max"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument(o.config_path + ": unknown key '" + key + "'");

  auto take = [&](const char* key, const char* flag, auto& field) {
    if (!j.contains(key) || app->count(flag) > 0) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(o.config_path + ": bad value for '" + key + "'");
    }
  };
  take("scenario", "--scenario", o.scenario);
  take("p", "--p", o.p);
  take("beta", "--beta", o.beta);
  if (j.contains("sigma") && app->count("--sigma") == 0) {
    const auto& s = j.at("sigma");
    if (s.is_number()) o.sigma = harness::format_double(s.get<double>());
    else if (s.is_string()) o.sigma = s.get<std::string>();
    else throw std::invalid_argument(o.config_path + ": bad value for 'sigma'");
  }
  take("click_target", "--click-target", o.click_target);
  take("visibility", "--visibility", o.visibility);
  take("eta_d", "--eta-d", o.eta_d);
  take("trials", "--trials", o.trials);
  take("window", "--window", o.window);
  take("seed", "--seed", o.seed);
  take("store_hidden", "--store-hidden", o.store_hidden);
  take("multiclick", "--multiclick", o.multiclick);
  take("workers", "--workers", o.workers);
  take("chain_n", "--chain-n", o.chain_n);
  take("n_min", "--n-min", o.n_min);
  take("n_max", "--n-max", o.n_max);
  if (o.scenario != "attack" && o.scenario != "honest" && o.scenario != "bounds")
    throw std::invalid_argument("unknown scenario '" + o.scenario + "'");
}

double resolve_sigma(const Options& o) {
  if (o.sigma == "calibrated") {
    harness::CalibrationOptions cal;
    cal.p = o.p;
    const double sigma = harness::calibrate_sigma(o.click_target, o.beta, cal);
    std::cerr << "calibrated sigma = " << harness::format_double(sigma) << " for click fraction "
              << harness::format_double(o.click_target) << '\n';
    return sigma;
  }
  return parse_real(o.sigma, "--sigma");
}

harness::ScenarioConfig build_config(const Options& o) {
  harness::ScenarioConfig c;
  if (o.scenario == "attack") {
    harness::AttackScenario s;
    s.p = o.p;
    s.detector.beta = o.beta;
    s.policy = detector::parse_policy(o.multiclick);
    s.detector.jitter_sigma = 0.0;
    c.kind = s;
    c.validate();  // reject bad ranges before any calibration work
    s.detector.jitter_sigma = resolve_sigma(o);
    c.kind = s;
  } else if (o.scenario == "honest") {
    c.kind = harness::HonestScenario{o.visibility, o.eta_d, o.chain_n};
  } else {
    c.kind = harness::BoundsScenario{o.n_min, o.n_max};
  }
  c.trials = o.trials;
  c.window_size = o.window;
  c.seed = o.seed;
  c.store_hidden = o.store_hidden;
  c.workers = o.workers;
  c.validate();
  return c;
}

std::string summary_text(const harness::Summary& s) {
  std::ostringstream out;
  harness::write_summary(out, s);
  return out.str();
}

std::string series_text(const std::vector<analysis::WindowPoint>& series) {
  std::ostringstream out;
  harness::write_series(out, series);
  return out.str();
}

std::string bounds_text(const std::vector<harness::BoundsRow>& rows) {
  std::ostringstream out;
  harness::write_bounds(out, rows);
  return out.str();
}

int infer_chain_n(const std::vector<analysis::TrialRecord>& records) {
  int n = 2;
  for (const auto& r : records) n = std::max({n, r.setting_a + 1, r.setting_b + 1});
  return n;
}

int cmd_run(const Options& o, const std::string& out_dir) {
  const auto config = build_config(o);
  const auto result = harness::run_scenario(config);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (std::holds_alternative<harness::BoundsScenario>(config.kind)) {
    const std::string table = bounds_text(result.summary.bounds_table);
    harness::write_file(dir / "bounds.csv", table);
    std::cout << table;
    return 0;
  }
  harness::write_records(dir / "records.csv", result.records);
  const std::string summary = summary_text(result.summary);
  harness::write_file(dir / "summary.csv", summary);
  harness::write_file(dir / "series.csv", series_text(result.summary.series));
  std::cout << summary;
  return 0;
}

int cmd_analyze(const std::string& path, std::optional<int> chain_n, std::uint64_t window,
                const std::string& out_dir) {
  const auto records = harness::read_records(fs::path(path));
  const int n = chain_n.value_or(infer_chain_n(records));
  const auto summary = harness::summarize(records, "analyze", n, window);
  const std::string text = summary_text(summary);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    harness::write_file(fs::path(out_dir) / "summary.csv", text);
    harness::write_file(fs::path(out_dir) / "series.csv", series_text(summary.series));
  }
  std::cout << text;
  return 0;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(std::isfinite(lo) && std::isfinite(hi)) || hi < lo)
    throw std::invalid_argument("sweep range must satisfy lo <= hi");
  if (steps == 1) return {lo};
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) v.push_back(lo + (hi - lo) * i / (steps - 1));
  return v;
}

std::string estimate_cells(const std::optional<analysis::Estimate>& e) {
  return e ? fixed(e->value) + "," + fixed(e->standard_error) : std::string(",");
}

int cmd_sweep(Options o, const std::string& param, double lo, double hi, int steps,
              const std::string& out_file) {
  std::ostringstream out;
  if (param == "p") {
    o.scenario = "attack";
    out << "p,S2_exact,S2_mc,SE\n";
    for (double p : linspace(lo, hi, steps)) {
      o.p = p;
      const auto r = harness::run_scenario(build_config(o));
      out << fixed(p, 4) << ',' << fixed(lhv::exact_stats(lhv::NoiseParam{p}).s2) << ','
          << estimate_cells(r.summary.value) << '\n';
    }
  } else if (param == "sigma") {
    o.scenario = "attack";
    out << "sigma,S2,SE,click_frac_A,click_frac_B\n";
    for (double s : linspace(lo, hi, steps)) {
      o.sigma = harness::format_double(s);
      const auto r = harness::run_scenario(build_config(o));
      out << fixed(s) << ',' << estimate_cells(r.summary.value) << ','
          << fixed(r.summary.efficiency->click_fraction_a) << ','
          << fixed(r.summary.efficiency->click_fraction_b) << '\n';
    }
  } else if (param == "V") {
    o.scenario = "honest";
    out << "V,S_predicted,S_mc,SE,bound_fast_switch\n";
    for (double v : linspace(lo, hi, steps)) {
      o.visibility = v;
      const auto r = harness::run_scenario(build_config(o));
      out << fixed(v, 4) << ',' << fixed(quantum::chained_prediction(o.chain_n, v)) << ','
          << estimate_cells(r.summary.value) << ','
          << fixed(analysis::chained_bounds(o.chain_n).franson_fast_switch, 1) << '\n';
    }
  } else if (param == "N") {
    o.scenario = "honest";
    out << "N,S_predicted,S_mc,SE,bound_fast_switch\n";
    int last = -1;
    for (double x : linspace(lo, hi, steps)) {
      const int n = static_cast<int>(std::lround(x));
      if (n == last) continue;
      last = n;
      o.chain_n = n;
      const auto r = harness::run_scenario(build_config(o));
      out << n << ',' << fixed(quantum::chained_prediction(n, o.visibility)) << ','
          << estimate_cells(r.summary.value) << ','
          << fixed(analysis::chained_bounds(n).franson_fast_switch, 1) << '\n';
    }
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + param + "'");
  }
  if (!out_file.empty()) harness::write_file(out_file, out.str());
  std::cout << out.str();
  return 0;
}

int cmd_bounds(int n_min, int n_max, const std::string& out_file) {
  const std::string table = bounds_text(harness::bounds_table(n_min, n_max));
  if (!out_file.empty()) harness::write_file(out_file, table);
  std::cout << table;
  return 0;
}

const char* verdict(bool violated) { return violated ? "VIOLATED" : "holds   "; }

int cmd_report(const std::string& path, std::optional<int> chain_n, std::uint64_t window) {
  const auto records = harness::read_records(fs::path(path));
  const int n = chain_n.value_or(infer_chain_n(records));
  const auto s = harness::summarize(records, "report", n, window);
  std::cout << "records        " << path << '\n';
  if (!s.efficiency) {
    std::cout << "no trials\n";
    return 0;
  }
  const auto& e = *s.efficiency;
  std::cout << "trials         " << e.trials << '\n'
            << "coincidences   " << fixed(e.coincidence_fraction, 4) << " of trials\n"
            << "click fraction A " << fixed(e.click_fraction_a, 4) << ", B "
            << fixed(e.click_fraction_b, 4) << '\n'
            << "efficiency     eta_A " << fixed(e.eta_a, 4) << ", eta_B " << fixed(e.eta_b, 4) << '\n';
  if (!s.value) {
    std::cout << "Bell value     undefined (a settings pair has no coincidences)\n";
    return 0;
  }
  const double v = s.value->value;
  std::cout << (n == 2 ? "S2             " : "chained value  ") << fixed(v, 4) << " +- "
            << fixed(s.value->standard_error, 4) << " (window sd " << fixed(s.window_sd, 4) << ", "
            << s.series.size() << " windows)\n\n";
  if (n == 2) {
    std::cout << "[" << verdict(v > 2.0) << "] local realism, S2 <= 2\n";
    if (s.efficiency_bound)
      std::cout << "[" << verdict(v > *s.efficiency_bound) << "] detection-loophole bound 4/eta - 2 = "
                << fixed(*s.efficiency_bound, 4) << " at eta = "
                << fixed(std::min(e.eta_a, e.eta_b), 4) << '\n';
  } else {
    std::cout << "[" << verdict(v > s.bounds.lhv) << "] local realism, value <= " << fixed(s.bounds.lhv, 1)
              << '\n';
  }
  std::cout << "[" << verdict(v > s.bounds.franson_fast_switch)
            << "] postselection local models with fast switching, value <= "
            << fixed(s.bounds.franson_fast_switch, 1) << '\n'
            << "[" << verdict(v > s.bounds.quantum) << "] quantum maximum "
            << fixed(s.bounds.quantum, 4) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Franson interferometer Bell test and blinding attack simulator"};
  app.require_subcommand(1, 1);

  Options run_opts;
  std::string run_out = "out";
  auto* run = app.add_subcommand("run", "run a scenario and write records, summary and series");
  add_scenario_options(run, run_opts);
  run->add_option("--out", run_out, "output directory");

  std::string analyze_path, analyze_out;
  std::optional<int> analyze_chain;
  std::uint64_t analyze_window = 5000;
  auto* analyze = app.add_subcommand("analyze", "summarize an existing records file");
  analyze->add_option("records", analyze_path, "records file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--chain-n", analyze_chain, "settings per party (default: from records)");
  analyze->add_option("--window", analyze_window, "trials per window");
  analyze->add_option("--out", analyze_out, "directory for summary.csv and series.csv");

  Options sweep_opts;
  std::string sweep_param, sweep_out;
  double sweep_lo = 0.0, sweep_hi = 0.0;
  int sweep_steps = 0;
  auto* sweep = app.add_subcommand("sweep", "sweep p, sigma, V or N and tabulate the Bell value");
  sweep->add_option("parameter", sweep_param, "p, sigma, V or N")
      ->required()
      ->check(CLI::IsMember({"p", "sigma", "V", "N"}));
  sweep->add_option("lo", sweep_lo, "first value")->required();
  sweep->add_option("hi", sweep_hi, "last value")->required();
  sweep->add_option("steps", sweep_steps, "number of points")->required();
  add_scenario_options(sweep, sweep_opts);
  sweep->add_option("--out", sweep_out, "CSV file for the table");

  int bounds_min = 2, bounds_max = 10;
  std::string bounds_out;
  auto* bounds = app.add_subcommand("bounds", "table of chained-inequality bounds");
  bounds->add_option("n_min", bounds_min, "smallest N");
  bounds->add_option("n_max", bounds_max, "largest N");
  bounds->add_option("--out", bounds_out, "CSV file for the table");

  std::string report_path;
  std::optional<int> report_chain;
  std::uint64_t report_window = 5000;
  auto* report = app.add_subcommand("report", "pass/fail of a records file against each bound");
  report->add_option("records", report_path, "records file")->required()->check(CLI::ExistingFile);
  report->add_option("--chain-n", report_chain, "settings per party (default: from records)");
  report->add_option("--window", report_window, "trials per window");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      apply_config(run, run_opts);
      return cmd_run(run_opts, run_out);
    }
    if (analyze->parsed()) return cmd_analyze(analyze_path, analyze_chain, analyze_window, analyze_out);
    if (sweep->parsed()) {
      apply_config(sweep, sweep_opts);
      return cmd_sweep(sweep_opts, sweep_param, sweep_lo, sweep_hi, sweep_steps, sweep_out);
    }
    if (bounds->parsed()) return cmd_bounds(bounds_min, bounds_max, bounds_out);
    if (report->parsed()) return cmd_report(report_path, report_chain, report_window);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
