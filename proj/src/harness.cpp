#include "franson/harness.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "franson/faker.h"
#include "franson/optics.h"
#include "franson/quantum.h"

namespace franson::harness {

namespace {

using analysis::TrialRecord;
using detector::ResolvedOutcome;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ResolvedOutcome run_station(const optics::PulseTrain& train, const optics::Phase& phi,
                            const AttackScenario& s, CounterRng& noise, CounterRng& resolve) {
  const auto intensities = optics::propagate(train, phi);
  const auto clicks =
      detector::gate(detector::detect(intensities, s.detector, noise), kEarlySlot, kLateSlot);
  return detector::resolve_multiclick(clicks, s.policy, resolve);
}

unsigned worker_count(unsigned requested, std::uint64_t trials) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(trials, 1)));
}

}  // namespace

void ScenarioConfig::validate() const {
  std::visit(overloaded{
                 [](const AttackScenario& s) {
                   lhv::NoiseParam{s.p}.validate();
                   s.detector.validate();
                 },
                 [](const HonestScenario& s) {
                   quantum::QuantumSourceParams{s.visibility, s.eta_d,
                                                quantum::Settings::chained(s.chain_n)}
                       .validate();
                 },
                 [](const BoundsScenario& s) {
                   if (s.n_min < 2 || s.n_max < s.n_min)
                     throw std::invalid_argument("bounds range must satisfy 2 <= min <= max");
                 },
             },
             kind);
  if (!std::holds_alternative<BoundsScenario>(kind)) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (window_size < 1) throw std::invalid_argument("window size must be at least 1");
  }
}

std::string ScenarioConfig::name() const {
  return std::visit(overloaded{
                        [](const AttackScenario&) { return std::string("attack"); },
                        [](const HonestScenario&) { return std::string("honest"); },
                        [](const BoundsScenario&) { return std::string("bounds"); },
                    },
                    kind);
}

int ScenarioConfig::settings_per_party() const {
  if (const auto* h = std::get_if<HonestScenario>(&kind)) return h->chain_n;
  return lhv::kSettings;
}

TrialRecord attack_trial(const AttackScenario& scenario, std::uint64_t seed, std::uint64_t index,
                         bool store_hidden) {
  CounterRng source(seed, index, CounterRng::Purpose::Source);
  std::uniform_int_distribution<int> setting(0, lhv::kSettings - 1);
  TrialRecord record;
  record.index = index;
  record.setting_a = setting(source);
  record.setting_b = setting(source);
  const lhv::HiddenVariable hv = lhv::sample_hidden(source);
  const lhv::NoiseParam p{scenario.p};

  const double intensity = scenario.detector.pulse_intensity();
  const auto train_a = faker::plan_to_alice_train(lhv::alice_plan(hv, p), intensity);
  const auto train_b = faker::plan_to_bob_train(lhv::bob_plan(hv, p), intensity);

  CounterRng noise_a(seed, index, CounterRng::Purpose::DetectorA);
  CounterRng noise_b(seed, index, CounterRng::Purpose::DetectorB);
  CounterRng resolve_a(seed, index, CounterRng::Purpose::ResolveA);
  CounterRng resolve_b(seed, index, CounterRng::Purpose::ResolveB);
  record.a = run_station(train_a, lhv::alice_phase(record.setting_a), scenario, noise_a, resolve_a);
  record.b = run_station(train_b, lhv::bob_phase(record.setting_b), scenario, noise_b, resolve_b);
  if (store_hidden) record.hidden = hv;
  return record;
}

TrialRecord honest_trial(const HonestScenario& scenario, std::uint64_t seed, std::uint64_t index) {
  // Settings lists are rebuilt per call; cheap next to the sampling itself.
  const quantum::QuantumSourceParams params{scenario.visibility, scenario.eta_d,
                                            quantum::Settings::chained(scenario.chain_n)};
  CounterRng source(seed, index, CounterRng::Purpose::Source);
  std::uniform_int_distribution<int> setting(0, scenario.chain_n - 1);
  TrialRecord record;
  record.index = index;
  record.setting_a = setting(source);
  record.setting_b = setting(source);
  const auto [clicks_a, clicks_b] =
      quantum::sample_trial(params, record.setting_a, record.setting_b, source);
  CounterRng resolve_a(seed, index, CounterRng::Purpose::ResolveA);
  CounterRng resolve_b(seed, index, CounterRng::Purpose::ResolveB);
  record.a = detector::resolve_multiclick(clicks_a, detector::MultiClickPolicy::Earliest, resolve_a);
  record.b = detector::resolve_multiclick(clicks_b, detector::MultiClickPolicy::Earliest, resolve_b);
  return record;
}

std::vector<BoundsRow> bounds_table(int n_min, int n_max) {
  if (n_min < 2 || n_max < n_min)
    throw std::invalid_argument("bounds range must satisfy 2 <= min <= max");
  std::vector<BoundsRow> rows;
  for (int n = n_min; n <= n_max; ++n)
    rows.push_back({n, analysis::chained_bounds(n), quantum::visibility_threshold(n)});
  return rows;
}

Summary summarize(std::span<const TrialRecord> records, const std::string& scenario, int chain_n,
                  std::uint64_t window_size) {
  Summary s;
  s.scenario = scenario;
  s.chain_n = chain_n;
  s.bounds = analysis::chained_bounds(chain_n);
  if (records.empty()) return s;

  const auto table = analysis::CorrelationTable::from_records(records, chain_n, chain_n);
  try {
    s.value = chain_n == 2 ? analysis::chsh(table) : analysis::chained_value(table, chain_n);
  } catch (const analysis::UndefinedCorrelation&) {
    s.value.reset();
  }
  s.series = analysis::windowed_series(records, window_size, chain_n);
  s.window_sd = analysis::window_spread(s.series);
  s.efficiency = analysis::efficiency_metrics(records);
  const double eta = std::min(s.efficiency->eta_a, s.efficiency->eta_b);
  if (chain_n == 2 && eta > 0.0) s.efficiency_bound = analysis::efficiency_adjusted_bound(eta);
  if (s.value) {
    s.violates_lhv = s.value->value > s.bounds.lhv;
    s.violates_fast_switch = s.value->value > s.bounds.franson_fast_switch;
    s.exceeds_quantum = s.value->value > s.bounds.quantum;
  }
  return s;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult result;
  if (const auto* b = std::get_if<BoundsScenario>(&config.kind)) {
    result.summary.scenario = config.name();
    result.summary.chain_n = b->n_min;
    result.summary.bounds = analysis::chained_bounds(b->n_min);
    result.summary.bounds_table = bounds_table(b->n_min, b->n_max);
    return result;
  }

  const int n_settings = config.settings_per_party();
  const unsigned workers = worker_count(config.workers, config.trials);
  result.records.resize(config.trials);
  std::vector<analysis::CorrelationTable> partial(workers,
                                                  analysis::CorrelationTable(n_settings, n_settings));

  auto work = [&](unsigned w) {
    const std::uint64_t begin = config.trials * w / workers;
    const std::uint64_t end = config.trials * (w + 1) / workers;
    for (std::uint64_t i = begin; i < end; ++i) {
      TrialRecord r = std::visit(
          overloaded{
              [&](const AttackScenario& s) { return attack_trial(s, config.seed, i, config.store_hidden); },
              [&](const HonestScenario& s) { return honest_trial(s, config.seed, i); },
              [&](const BoundsScenario&) { return TrialRecord{}; },
          },
          config.kind);
      partial[w].add(r);
      result.records[i] = std::move(r);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  analysis::CorrelationTable merged(n_settings, n_settings);
  for (const auto& t : partial) merged.merge(t);
  result.table = std::move(merged);
  result.summary = summarize(result.records, config.name(), n_settings, config.window_size);
  return result;
}

double station_click_fraction(double sigma, double beta, const CalibrationOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("calibration needs at least one trial");
  AttackScenario s;
  s.p = options.p;
  s.detector.beta = beta;
  s.detector.jitter_sigma = sigma;
  s.policy = detector::MultiClickPolicy::Discard;
  std::uint64_t clean = 0;
  for (std::uint64_t i = 0; i < options.trials; ++i) {
    const TrialRecord r = attack_trial(s, options.seed, i, false);
    clean += r.a.is_clean_click();
    clean += r.b.is_clean_click();
  }
  return static_cast<double>(clean) / (2.0 * static_cast<double>(options.trials));
}

double calibrate_sigma(double target, double beta, const CalibrationOptions& options) {
  if (!(target > 0.0 && target <= 1.0))
    throw std::invalid_argument("target click fraction must lie in (0, 1]");
  detector::BlindedDetectorParams{1.0, beta, 0.0}.validate();
  if (target == 1.0) return 0.0;

  auto f = [&](double sigma) { return station_click_fraction(sigma, beta, options); };
  if (f(options.sigma_max) > target)
    throw std::invalid_argument("target click fraction " + format_double(target) +
                                " is unreachable with sigma <= " + format_double(options.sigma_max));

  // f is nonincreasing in sigma with common random numbers.
  double lo = 0.0;
  double hi = options.sigma_max;
  double best = hi;
  double best_gap = std::abs(f(hi) - target);
  for (int iter = 0; iter < 60 && hi - lo > 1e-5; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = f(mid);
    const double gap = std::abs(value - target);
    if (gap < best_gap) {
      best = mid;
      best_gap = gap;
    }
    if (value > target) lo = mid;
    else hi = mid;
  }
  if (best_gap > options.tolerance)
    throw std::runtime_error("sigma calibration did not converge within tolerance");
  return best;
}

}  // namespace franson::harness
