#pragma once

#include <array>
#include <vector>

#include "franson/optics.h"
#include "franson/rng.h"
#include "franson/types.h"

// Discretized local hidden-variable strategy for the four CHSH settings
// phi_A in {0, pi/2} and phi_B in {-pi/4, -3pi/4}. Shared randomness is an
// angle index n (Theta = n pi/4) and a real r in [0, 1); the noise parameter
// p trades the PR-box value 4 down to the classical 2 via S2 = 4 - 8p.
namespace franson::lhv {

inline constexpr int kAngles = 8;
inline constexpr int kSettings = 2;

/// Station phases of the four CHSH settings, index 0 = A1/B2, 1 = A3/B4.
optics::Phase alice_phase(int setting);
optics::Phase bob_phase(int setting);

struct HiddenVariable {
  int n = 0;
  double r = 0.0;

  void validate() const;
  friend bool operator==(const HiddenVariable&, const HiddenVariable&) = default;
};

HiddenVariable sample_hidden(CounterRng& rng);

struct NoiseParam {
  double p = 0.0;

  void validate() const;
  /// p giving the Tsirelson value 2 sqrt 2.
  static NoiseParam quantum();
};

/// The four r-bands [0,p), [p,1/2), [1/2,1/2+p), [1/2+p,1).
struct RBand {
  double lo = 0.0;
  double hi = 0.0;
  double weight() const { return hi - lo; }
  bool contains(double r) const { return r >= lo && r < hi; }
  /// Midpoint, or lo for an empty band.
  double representative() const { return lo + 0.5 * (hi - lo); }
};
std::array<RBand, 4> r_bands(const NoiseParam& p);

/// Whether Alice's slot rule is inverted for this r.
bool slot_swap_active(double r, const NoiseParam& p);

struct PlannedClick {
  TimeSlot slot = TimeSlot::Early;
  Port sign = Port::Plus;
  friend bool operator==(const PlannedClick&, const PlannedClick&) = default;
};

/// Desired click for each of a party's two settings.
struct LocalPlan {
  std::array<PlannedClick, kSettings> per_setting;

  const PlannedClick& operator[](int setting) const {
    return per_setting[static_cast<std::size_t>(setting)];
  }
  bool single_slot() const { return per_setting[0].slot == per_setting[1].slot; }
  friend bool operator==(const LocalPlan&, const LocalPlan&) = default;
};

struct SignTables {
  std::array<int, kAngles> a1{}, a3{}, b2{}, b4{};
  /// G(A1), G(A3): angle indices whose outcomes match the target correlation
  /// sign for both of Bob's settings.
  std::vector<int> g_a1, g_a3;

  int alice(int setting, int n) const;
  int bob(int setting, int n) const;
  bool in_group(int alice_setting, int n) const;
};

/// sign(cos(phi_A + n pi/4 + pi/8)) and sign(cos(phi_B - n pi/4 - pi/8)).
const SignTables& sign_tables();

/// sign(cos(phi_A + phi_B)) for a settings pair.
int target_sign(int alice_setting, int bob_setting);

LocalPlan bob_plan(const HiddenVariable& hv, const NoiseParam& p);
LocalPlan alice_plan(const HiddenVariable& hv, const NoiseParam& p);

struct ExactStats {
  /// [alice setting][bob setting]
  std::array<std::array<double, kSettings>, kSettings> correlation{};
  std::array<std::array<double, kSettings>, kSettings> correlation_early{};
  std::array<std::array<double, kSettings>, kSettings> correlation_late{};
  std::array<std::array<double, kSettings>, kSettings> coincidence_probability{};
  double local_detection_alice = 0.0;
  double local_detection_bob = 0.0;
  std::array<double, kSettings> marginal_alice{};
  std::array<double, kSettings> marginal_bob{};
  double s2 = 0.0;
};

/// Exact enumeration over the 8 angles and the weighted r-bands.
ExactStats exact_stats(const NoiseParam& p);

}  // namespace franson::lhv
