#pragma once

#include <string>
#include <vector>

#include "franson/detector.h"
#include "franson/lhv.h"
#include "franson/optics.h"

// Eve's faked-state generator: turns local plans into classical pulse trains
// whose clicks behind blinded detectors reproduce the plan.
namespace franson::faker {

/// Three equal pulses for Alice. Exactly one of the phase steps is 0 or pi
/// (a full-intensity slot) and the other is +-pi/2 (a half-intensity slot).
struct AliceTrainSpec {
  optics::Phase omega_early;
  optics::Phase omega_late;

  /// Phase applied by the hardware modulator on the two-delay arm.
  optics::Phase modulator_phase() const { return omega_early + omega_late; }
  void validate() const;
};

/// Two equal pulses for Bob. slot_offset 0 interferes in the early slot,
/// 1 in the late slot.
struct BobTrainSpec {
  optics::Phase omega;
  int slot_offset = 0;

  void validate() const;
};

/// Throws std::invalid_argument if both settings want the same slot.
AliceTrainSpec alice_spec(const lhv::LocalPlan& plan);
/// Throws std::invalid_argument if the settings want different slots.
BobTrainSpec bob_spec(const lhv::LocalPlan& plan);

optics::PulseTrain alice_train(const AliceTrainSpec& spec, double intensity);
optics::PulseTrain bob_train(const BobTrainSpec& spec, double intensity);

optics::PulseTrain plan_to_alice_train(const lhv::LocalPlan& plan, double intensity);
optics::PulseTrain plan_to_bob_train(const lhv::LocalPlan& plan, double intensity);

enum class Party { Alice, Bob };

struct RoundTripCell {
  Party party = Party::Alice;
  int n = 0;
  int band = 0;
  double r = 0.0;
  bool passed = false;
  std::string detail;
};

struct RoundTripReport {
  std::vector<RoundTripCell> cells;

  bool all_passed() const;
  std::size_t count(Party party) const;
  std::size_t passed(Party party) const;
};

/// Sends every (n, r-band) plan through optics and a noiseless detector and
/// checks that each setting yields exactly one click at the planned slot and
/// port.
RoundTripReport round_trip_verify(const lhv::NoiseParam& p,
                                  const detector::BlindedDetectorParams& params = {});

/// Joint statistics of the full physical attack chain at sigma = 0, with
/// every (n, r-band) cell weighted exactly. Fails if the detector is noisy.
lhv::ExactStats exact_attack_stats(const lhv::NoiseParam& p,
                                   const detector::BlindedDetectorParams& params = {});

}  // namespace franson::faker
