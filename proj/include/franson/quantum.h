#pragma once

#include <utility>
#include <vector>

#include "franson/detector.h"
#include "franson/optics.h"
#include "franson/rng.h"

// Outcome-level model of an honest energy-time entangled source behind two
// unbalanced interferometers, plus closed-form chained-inequality predictions.
namespace franson::quantum {

/// Setting phases for an N-setting chain: A_{2i+1} = i pi/N and
/// B_{2i+2} = -(2i+1) pi/(2N). N = 2 gives the CHSH settings
/// {0, pi/2} and {-pi/4, -3pi/4}.
struct Settings {
  std::vector<optics::Phase> alice;
  std::vector<optics::Phase> bob;

  static Settings chained(int n);
  int size() const { return static_cast<int>(alice.size()); }
};

struct QuantumSourceParams {
  double visibility = 1.0;
  double eta_d = 1.0;
  Settings settings = Settings::chained(2);

  void validate() const;
};

/// One emission: independent uniform early/late slots per party; equal slots
/// give signs with P(a,b) = (1 + ab V cos(phi_A + phi_B))/4, unequal slots
/// independent uniform signs; each click then survives with probability eta_d.
std::pair<detector::ClickRecord, detector::ClickRecord> sample_trial(
    const QuantumSourceParams& params, int alice_setting, int bob_setting, CounterRng& rng);

/// 2 N V cos(pi / 2N).
double chained_prediction(int n, double visibility);

/// Visibility at which the quantum chain value meets the fast-switching
/// bound 2N - 1.
double visibility_threshold(int n);

struct CriticalVisibility {
  int n = 0;
  double visibility = 0.0;
};

/// Minimum of visibility_threshold over N in [2, max_n].
CriticalVisibility critical_visibility(int max_n = 50);

}  // namespace franson::quantum
