#include "franson/detector.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace franson::detector {

void BlindedDetectorParams::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw std::invalid_argument("detector threshold must be positive");
  if (!(beta > 0.5 && beta < 1.0))
    throw std::invalid_argument("beta must lie in (1/2, 1), got " + std::to_string(beta));
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma))
    throw std::invalid_argument("jitter sigma must be finite and nonnegative");
}

ClickRecord detect(const optics::SlotIntensities& intensities, const BlindedDetectorParams& params,
                   CounterRng& rng) {
  params.validate();
  ClickRecord record;
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool noisy = params.jitter_sigma > 0.0;
  int slot = intensities.first_slot();
  for (const auto& s : intensities.slots()) {
    for (const Port port : {Port::Plus, Port::Minus}) {
      const double intensity = port == Port::Plus ? s.plus : s.minus;
      const double eps = noisy ? params.jitter_sigma * noise(rng) : 0.0;
      if (intensity * (1.0 + eps) > params.threshold) record.clicks.push_back({slot, port});
    }
    ++slot;
  }
  return record;
}

ClickRecord gate(const ClickRecord& record, int first_slot, int last_slot) {
  ClickRecord out;
  for (const auto& c : record.clicks)
    if (c.slot >= first_slot && c.slot <= last_slot) out.clicks.push_back(c);
  return out;
}

MultiClickPolicy parse_policy(std::string_view name) {
  if (name == "discard") return MultiClickPolicy::Discard;
  if (name == "earliest") return MultiClickPolicy::Earliest;
  if (name == "random") return MultiClickPolicy::Random;
  throw std::invalid_argument("unknown multi-click policy '" + std::string(name) + "'");
}

std::string_view to_string(MultiClickPolicy policy) {
  switch (policy) {
    case MultiClickPolicy::Discard: return "discard";
    case MultiClickPolicy::Earliest: return "earliest";
    case MultiClickPolicy::Random: return "random";
  }
  return "earliest";
}

ResolvedOutcome resolve_multiclick(const ClickRecord& record, MultiClickPolicy policy,
                                   CounterRng& rng) {
  const int n = static_cast<int>(record.size());
  if (n == 0) return ResolvedOutcome::no_click();
  if (n == 1) return ResolvedOutcome::click(record.clicks[0].slot, record.clicks[0].port);
  switch (policy) {
    case MultiClickPolicy::Discard:
      return ResolvedOutcome::discarded(n);
    case MultiClickPolicy::Earliest: {
      const auto it = std::min_element(
          record.clicks.begin(), record.clicks.end(), [](const Click& a, const Click& b) {
            if (a.slot != b.slot) return a.slot < b.slot;
            return a.port == Port::Plus && b.port == Port::Minus;
          });
      return ResolvedOutcome::click(it->slot, it->port, n);
    }
    case MultiClickPolicy::Random: {
      std::uniform_int_distribution<int> pick(0, n - 1);
      const auto& c = record.clicks[static_cast<std::size_t>(pick(rng))];
      return ResolvedOutcome::click(c.slot, c.port, n);
    }
  }
  return ResolvedOutcome::discarded(n);
}

}  // namespace franson::detector
