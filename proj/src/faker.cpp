#include "franson/faker.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace franson::faker {

namespace {

using optics::Phase;

// Quarter-turn grid indices (units of pi/8).
constexpr int kZero = 0;
constexpr int kQuarter = 4;
constexpr int kHalf = 8;
constexpr int kThreeQuarter = 12;

bool on_axis(const Phase& p) {
  const auto k = p.grid_index();
  return k && (*k == kZero || *k == kHalf);
}

bool on_quadrature(const Phase& p) {
  const auto k = p.grid_index();
  return k && (*k == kQuarter || *k == kThreeQuarter);
}

// Step making the interfering slot click at + for the given setting phase
// (phi + omega = 0) or at - (phi + omega = pi).
Phase step_for(const Phase& setting, Port sign) {
  return -setting + Phase::grid(sign == Port::Plus ? kZero : kHalf);
}

// Outcome of a single setting at the gated coincidence slots, noiseless.
detector::ClickRecord station_clicks(const optics::PulseTrain& train, const Phase& phi,
                                     const detector::BlindedDetectorParams& params) {
  CounterRng unused(0);
  return detector::detect(optics::propagate(train, phi), params, unused);
}

}  // namespace

void AliceTrainSpec::validate() const {
  const bool ok = (on_axis(omega_early) && on_quadrature(omega_late)) ||
                  (on_quadrature(omega_early) && on_axis(omega_late));
  if (!ok) throw std::invalid_argument("alice train needs one axis step and one quadrature step");
}

void BobTrainSpec::validate() const {
  const auto k = omega.grid_index();
  if (!k || *k % kQuarter != 0) throw std::invalid_argument("bob phase must be on the pi/2 grid");
  if (slot_offset != 0 && slot_offset != 1)
    throw std::invalid_argument("bob slot offset must be 0 or 1");
}

AliceTrainSpec alice_spec(const lhv::LocalPlan& plan) {
  if (plan.single_slot())
    throw std::invalid_argument("alice plan must place its two settings in opposite slots");
  const Phase phi0 = lhv::alice_phase(0);
  const Phase phi1 = lhv::alice_phase(1);
  AliceTrainSpec spec;
  if (plan[0].slot == TimeSlot::Early) {
    spec.omega_early = step_for(phi0, plan[0].sign);
    spec.omega_late = step_for(phi1, plan[1].sign);
  } else {
    spec.omega_early = step_for(phi1, plan[1].sign);
    spec.omega_late = step_for(phi0, plan[0].sign);
  }
  spec.validate();
  return spec;
}

BobTrainSpec bob_spec(const lhv::LocalPlan& plan) {
  if (!plan.single_slot())
    throw std::invalid_argument("bob plan must use a single slot for both settings");
  // omega for (sign B2, sign B4): (+,-) 0, (+,+) pi/2, (-,+) pi, (-,-) 3pi/2
  const bool b2 = plan[0].sign == Port::Plus;
  const bool b4 = plan[1].sign == Port::Plus;
  int k = 0;
  if (b2 && !b4) k = kZero;
  else if (b2 && b4) k = kQuarter;
  else if (!b2 && b4) k = kHalf;
  else k = kThreeQuarter;
  BobTrainSpec spec{Phase::grid(k), plan[0].slot == TimeSlot::Early ? 0 : 1};
  spec.validate();
  return spec;
}

optics::PulseTrain alice_train(const AliceTrainSpec& spec, double intensity) {
  spec.validate();
  return optics::PulseTrain::from_phase_steps(0, intensity, {spec.omega_early, spec.omega_late});
}

optics::PulseTrain bob_train(const BobTrainSpec& spec, double intensity) {
  spec.validate();
  return optics::PulseTrain::from_phase_steps(spec.slot_offset, intensity, {spec.omega});
}

optics::PulseTrain plan_to_alice_train(const lhv::LocalPlan& plan, double intensity) {
  return alice_train(alice_spec(plan), intensity);
}

optics::PulseTrain plan_to_bob_train(const lhv::LocalPlan& plan, double intensity) {
  return bob_train(bob_spec(plan), intensity);
}

bool RoundTripReport::all_passed() const {
  for (const auto& c : cells)
    if (!c.passed) return false;
  return !cells.empty();
}

std::size_t RoundTripReport::count(Party party) const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.party == party;
  return n;
}

std::size_t RoundTripReport::passed(Party party) const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.party == party && c.passed;
  return n;
}

RoundTripReport round_trip_verify(const lhv::NoiseParam& p,
                                  const detector::BlindedDetectorParams& params) {
  params.validate();
  if (params.jitter_sigma != 0.0)
    throw std::invalid_argument("round trip verification needs a noiseless detector");
  RoundTripReport report;
  const auto bands = lhv::r_bands(p);
  for (const Party party : {Party::Alice, Party::Bob}) {
    for (int n = 0; n < lhv::kAngles; ++n) {
      for (int b = 0; b < static_cast<int>(bands.size()); ++b) {
        RoundTripCell cell{party, n, b, bands[static_cast<std::size_t>(b)].representative(), true,
                           {}};
        const lhv::HiddenVariable hv{n, cell.r};
        std::ostringstream detail;
        try {
          const bool alice = party == Party::Alice;
          const lhv::LocalPlan plan = alice ? lhv::alice_plan(hv, p) : lhv::bob_plan(hv, p);
          const auto train = alice ? plan_to_alice_train(plan, params.pulse_intensity())
                                   : plan_to_bob_train(plan, params.pulse_intensity());
          for (int s = 0; s < lhv::kSettings; ++s) {
            const Phase phi = alice ? lhv::alice_phase(s) : lhv::bob_phase(s);
            const auto clicks =
                detector::gate(station_clicks(train, phi, params), kEarlySlot, kLateSlot);
            const bool ok = clicks.size() == 1 && clicks.clicks[0].slot == slot_index(plan[s].slot) &&
                            clicks.clicks[0].port == plan[s].sign;
            if (!ok) {
              cell.passed = false;
              detail << "setting " << s << ": " << clicks.size() << " click(s); ";
            }
          }
        } catch (const std::exception& e) {
          cell.passed = false;
          detail << e.what();
        }
        cell.detail = detail.str();
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

lhv::ExactStats exact_attack_stats(const lhv::NoiseParam& p,
                                   const detector::BlindedDetectorParams& params) {
  params.validate();
  if (params.jitter_sigma != 0.0)
    throw std::invalid_argument("exact attack statistics need a noiseless detector");
  using Outcome = std::optional<detector::Click>;
  auto single = [&](const optics::PulseTrain& train, const Phase& phi) -> Outcome {
    const auto clicks = detector::gate(station_clicks(train, phi, params), kEarlySlot, kLateSlot);
    if (clicks.size() != 1) return std::nullopt;
    return clicks.clicks[0];
  };

  std::array<std::array<double, lhv::kSettings>, lhv::kSettings> coinc{}, product{};
  lhv::ExactStats out;
  for (int n = 0; n < lhv::kAngles; ++n) {
    for (const auto& band : lhv::r_bands(p)) {
      const double w = band.weight() / lhv::kAngles;
      if (w == 0.0) continue;
      const lhv::HiddenVariable hv{n, band.representative()};
      const auto ta = plan_to_alice_train(lhv::alice_plan(hv, p), params.pulse_intensity());
      const auto tb = plan_to_bob_train(lhv::bob_plan(hv, p), params.pulse_intensity());
      std::array<Outcome, lhv::kSettings> oa, ob;
      for (int s = 0; s < lhv::kSettings; ++s) {
        oa[static_cast<std::size_t>(s)] = single(ta, lhv::alice_phase(s));
        ob[static_cast<std::size_t>(s)] = single(tb, lhv::bob_phase(s));
        if (oa[static_cast<std::size_t>(s)]) {
          out.local_detection_alice += w / lhv::kSettings;
          out.marginal_alice[static_cast<std::size_t>(s)] += w * sign_of(oa[static_cast<std::size_t>(s)]->port);
        }
        if (ob[static_cast<std::size_t>(s)]) {
          out.local_detection_bob += w / lhv::kSettings;
          out.marginal_bob[static_cast<std::size_t>(s)] += w * sign_of(ob[static_cast<std::size_t>(s)]->port);
        }
      }
      for (std::size_t a = 0; a < lhv::kSettings; ++a) {
        for (std::size_t b = 0; b < lhv::kSettings; ++b) {
          if (!oa[a] || !ob[b] || oa[a]->slot != ob[b]->slot) continue;
          coinc[a][b] += w;
          product[a][b] += w * sign_of(oa[a]->port) * sign_of(ob[b]->port);
        }
      }
    }
  }
  for (std::size_t a = 0; a < lhv::kSettings; ++a) {
    for (std::size_t b = 0; b < lhv::kSettings; ++b) {
      out.coincidence_probability[a][b] = coinc[a][b];
      out.correlation[a][b] = coinc[a][b] > 0.0 ? product[a][b] / coinc[a][b] : 0.0;
    }
  }
  const auto& e = out.correlation;
  out.s2 = std::abs(e[0][0] + e[1][0]) + std::abs(e[1][1] - e[0][1]);
  return out;
}

}  // namespace franson::faker
