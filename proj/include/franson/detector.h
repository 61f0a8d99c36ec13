#pragma once

#include <string_view>
#include <vector>

#include "franson/optics.h"
#include "franson/rng.h"
#include "franson/types.h"

namespace franson::detector {

/// Avalanche photodetector held in linear mode by CW blinding light.
/// Eve's pulse intensity is I = 2 * beta * threshold.
struct BlindedDetectorParams {
  double threshold = 1.0;
  double beta = 0.95;
  double jitter_sigma = 0.0;

  double pulse_intensity() const { return 2.0 * beta * threshold; }
  /// Throws std::invalid_argument when out of range.
  void validate() const;
};

struct Click {
  int slot = 0;
  Port port = Port::Plus;

  friend bool operator==(const Click&, const Click&) = default;
};

/// Clicks registered by one station's pair of detectors, ordered by slot and
/// then port (+ before -).
struct ClickRecord {
  std::vector<Click> clicks;

  bool empty() const { return clicks.empty(); }
  std::size_t size() const { return clicks.size(); }
};

/// Click at (slot, port) iff I * (1 + eps) > threshold, eps ~ N(0, sigma^2)
/// drawn independently per occupied (slot, port). With sigma = 0 no draws are
/// made and the rule is a pure threshold.
ClickRecord detect(const optics::SlotIntensities& intensities, const BlindedDetectorParams& params,
                   CounterRng& rng);

/// Keep only clicks inside [first_slot, last_slot] (the detector gate).
ClickRecord gate(const ClickRecord& record, int first_slot, int last_slot);

enum class MultiClickPolicy { Discard, Earliest, Random };

MultiClickPolicy parse_policy(std::string_view name);
std::string_view to_string(MultiClickPolicy policy);

/// A station's outcome for one emission after multi-click resolution.
struct ResolvedOutcome {
  enum class Kind { NoClick, Click, Discarded };

  Kind kind = Kind::NoClick;
  int slot = 0;
  Port port = Port::Plus;
  /// Number of clicks the station registered before resolution.
  int multiplicity = 0;

  static ResolvedOutcome no_click() { return {}; }
  static ResolvedOutcome click(int slot, Port port, int multiplicity = 1) {
    return {Kind::Click, slot, port, multiplicity};
  }
  static ResolvedOutcome discarded(int multiplicity) {
    return {Kind::Discarded, 0, Port::Plus, multiplicity};
  }

  bool is_click() const { return kind == Kind::Click; }
  /// Exactly one registered click.
  bool is_clean_click() const { return kind == Kind::Click && multiplicity == 1; }

  friend bool operator==(const ResolvedOutcome&, const ResolvedOutcome&) = default;
};

ResolvedOutcome resolve_multiclick(const ClickRecord& record, MultiClickPolicy policy,
                                   CounterRng& rng);

}  // namespace franson::detector
