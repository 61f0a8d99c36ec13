#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "franson/detector.h"
#include "franson/lhv.h"
#include "franson/types.h"

namespace franson::analysis {

/// One emission as seen by the two stations. Settings are 0-based indices
/// into the station setting lists (A_{2j+1}, B_{2k+2} in inequality labels).
struct TrialRecord {
  std::uint64_t index = 0;
  int setting_a = 0;
  int setting_b = 0;
  detector::ResolvedOutcome a;
  detector::ResolvedOutcome b;
  /// Eve's ground truth; only present on attack runs that store it.
  std::optional<lhv::HiddenVariable> hidden;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

enum class RejectReason { None, SingleSided, NoClick, SlotMismatch, DiscardedMulticlick };

std::string_view to_string(RejectReason reason);
RejectReason parse_reject_reason(std::string_view text);

struct Postselection {
  RejectReason reason = RejectReason::None;
  TimeSlot slot = TimeSlot::Early;
  int a = 0;
  int b = 0;

  bool coincident() const { return reason == RejectReason::None; }
};

/// Coincident iff both stations report a click in the same coincidence slot.
Postselection postselect(const TrialRecord& record);

class UndefinedCorrelation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct PairCounts {
  std::uint64_t pp = 0, pm = 0, mp = 0, mm = 0;
  std::uint64_t noncoincident = 0;
  std::uint64_t discarded = 0;

  std::uint64_t coincidences() const { return pp + pm + mp + mm; }
  std::uint64_t total() const { return coincidences() + noncoincident + discarded; }
  /// (pp + mm - pm - mp) / coincidences with SE sqrt((1 - E^2)/n).
  /// Throws UndefinedCorrelation with no coincidences.
  Estimate correlation() const;

  PairCounts& operator+=(const PairCounts& other);
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

class CorrelationTable {
 public:
  CorrelationTable(int alice_settings, int bob_settings);

  static CorrelationTable from_records(std::span<const TrialRecord> records, int alice_settings,
                                       int bob_settings);

  void add(const TrialRecord& record);
  void merge(const CorrelationTable& other);

  int alice_settings() const { return na_; }
  int bob_settings() const { return nb_; }
  const PairCounts& at(int a, int b) const;
  PairCounts& at(int a, int b);
  /// Correlation for a settings pair; names the pair in the error.
  Estimate correlation(int a, int b) const;

  friend bool operator==(const CorrelationTable&, const CorrelationTable&) = default;

 private:
  int na_;
  int nb_;
  std::vector<PairCounts> cells_;
};

/// Which table indices play A1, A3, B2, B4.
struct ChshOrdering {
  int a1 = 0;
  int a3 = 1;
  int b2 = 0;
  int b4 = 1;
};

/// |E(A1B2) + E(A3B2)| + |E(A3B4) - E(A1B4)|.
double chsh_value(double e12, double e32, double e34, double e14);

/// CHSH value with standard error from independent propagation of the
/// four correlation errors.
Estimate chsh(const CorrelationTable& table, const ChshOrdering& ordering = {});

/// Chained value |E(A1B2)+E(A3B2)| + |E(A3B4)+E(A5B4)| + ...
///   + |E(A_{2N-1}B_{2N}) - E(A1B_{2N})| on an N x N table.
Estimate chained_value(const CorrelationTable& table, int n);

/// Same chain evaluated on raw correlations, e[a][b].
double chained_value(const std::vector<std::vector<double>>& e);

struct ChainBounds {
  double lhv = 0.0;
  double franson_fast_switch = 0.0;
  double quantum = 0.0;
  double algebraic = 0.0;
};

ChainBounds chained_bounds(int n);

/// 4/eta - 2 for conditional correlations at coincidence efficiency eta.
double efficiency_adjusted_bound(double eta);

/// Efficiency at which the bound equals 2 sqrt 2: 2(sqrt 2 - 1).
double critical_efficiency();

struct EfficiencyMetrics {
  std::uint64_t trials = 0;
  /// Emissions where the station registered a single unambiguous click.
  double click_fraction_a = 0.0;
  double click_fraction_b = 0.0;
  /// Emissions with any resolved click (multi-clicks resolved by policy).
  double resolved_fraction_a = 0.0;
  double resolved_fraction_b = 0.0;
  double coincidence_fraction = 0.0;
  /// Coincidences over local (resolved) detections.
  double eta_a = 0.0;
  double eta_b = 0.0;
};

EfficiencyMetrics efficiency_metrics(std::span<const TrialRecord> records);

/// Keep records whose hidden r lies in [p, 1/2 - p) or [1/2 + p, 1 - p).
/// Throws std::invalid_argument if any record lacks its hidden variable.
std::vector<TrialRecord> pr_filter(std::span<const TrialRecord> records, const lhv::NoiseParam& p);

struct WindowPoint {
  std::uint64_t window = 0;
  std::optional<Estimate> value;  // empty when a correlation cell was empty
};

/// Bell value per block of window_size consecutive trial indices. The
/// trailing partial window is dropped. chain_n = 2 evaluates CHSH.
std::vector<WindowPoint> windowed_series(std::span<const TrialRecord> records,
                                         std::uint64_t window_size, int chain_n = 2);

/// Sample standard deviation of the defined window values (0 if fewer than two).
double window_spread(const std::vector<WindowPoint>& series);

}  // namespace franson::analysis
