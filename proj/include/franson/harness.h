#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "franson/analysis.h"
#include "franson/detector.h"
#include "franson/lhv.h"

namespace franson::harness {

struct AttackScenario {
  double p = 0.0;
  detector::BlindedDetectorParams detector{};
  detector::MultiClickPolicy policy = detector::MultiClickPolicy::Earliest;
};

struct HonestScenario {
  double visibility = 1.0;
  double eta_d = 1.0;
  /// Settings per party; 2 is the CHSH configuration.
  int chain_n = 2;
};

struct BoundsScenario {
  int n_min = 2;
  int n_max = 10;
};

using ScenarioKind = std::variant<AttackScenario, HonestScenario, BoundsScenario>;

struct ScenarioConfig {
  ScenarioKind kind = AttackScenario{};
  /// 27 one-second windows at a 5 kHz repetition rate.
  std::uint64_t trials = 135000;
  std::uint64_t window_size = 5000;
  std::uint64_t seed = 1;
  bool store_hidden = true;
  /// 0 picks the hardware concurrency.
  unsigned workers = 0;

  /// Throws std::invalid_argument before any trial runs.
  void validate() const;
  std::string name() const;
  /// Settings per party used by the scenario.
  int settings_per_party() const;
};

/// Per-trial simulation. Randomness depends only on (seed, index).
analysis::TrialRecord attack_trial(const AttackScenario& scenario, std::uint64_t seed,
                                   std::uint64_t index, bool store_hidden);
analysis::TrialRecord honest_trial(const HonestScenario& scenario, std::uint64_t seed,
                                   std::uint64_t index);

struct BoundsRow {
  int n = 0;
  analysis::ChainBounds bounds;
  double visibility_threshold = 0.0;
};

struct Summary {
  std::string scenario;
  int chain_n = 2;
  std::optional<analysis::Estimate> value;
  double window_sd = 0.0;
  std::vector<analysis::WindowPoint> series;
  std::optional<analysis::EfficiencyMetrics> efficiency;
  analysis::ChainBounds bounds{};
  /// 4/eta - 2 with the measured coincidence efficiency (CHSH only).
  std::optional<double> efficiency_bound;
  bool violates_lhv = false;
  bool violates_fast_switch = false;
  bool exceeds_quantum = false;
  std::vector<BoundsRow> bounds_table;
};

struct ScenarioResult {
  std::vector<analysis::TrialRecord> records;
  /// Order-independent merge of the per-worker tables.
  std::optional<analysis::CorrelationTable> table;
  Summary summary;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Summary statistics of an existing set of records.
Summary summarize(std::span<const analysis::TrialRecord> records, const std::string& scenario,
                  int chain_n, std::uint64_t window_size);

std::vector<BoundsRow> bounds_table(int n_min, int n_max);

struct CalibrationOptions {
  double p = 0.0;
  std::uint64_t trials = 40000;
  std::uint64_t seed = 0xC0FFEE;
  double sigma_max = 1.0;
  double tolerance = 0.002;
};

/// Mean per-station single-click fraction of the attack at a given jitter.
double station_click_fraction(double sigma, double beta, const CalibrationOptions& options = {});

/// Bisection on the jitter sigma so the mean per-station click fraction
/// meets target. Throws std::invalid_argument for unreachable targets.
double calibrate_sigma(double target_click_fraction, double beta,
                       const CalibrationOptions& options = {});

// Record files: a schema line, a header line, then one trial per line.

inline constexpr const char* kRecordSchema = "# franson-trials v1";

class RecordParseError : public std::runtime_error {
 public:
  RecordParseError(std::size_t line, std::size_t field, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t field() const { return field_; }

 private:
  std::size_t line_;
  std::size_t field_;
};

void write_records(std::ostream& out, std::span<const analysis::TrialRecord> records);
std::vector<analysis::TrialRecord> read_records(std::istream& in);

/// Writes to a temporary sibling file and renames it into place.
void write_records(const std::filesystem::path& path,
                   std::span<const analysis::TrialRecord> records);
std::vector<analysis::TrialRecord> read_records(const std::filesystem::path& path);

void write_summary(std::ostream& out, const Summary& summary);
void write_series(std::ostream& out, const std::vector<analysis::WindowPoint>& series);
void write_bounds(std::ostream& out, const std::vector<BoundsRow>& rows);

/// Atomic file write through a temporary sibling.
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace franson::harness
