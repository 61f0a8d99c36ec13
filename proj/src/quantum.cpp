#include "franson/quantum.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace franson::quantum {

Settings Settings::chained(int n) {
  if (n < 2) throw std::invalid_argument("a chain needs at least 2 settings per party");
  Settings s;
  for (int i = 0; i < n; ++i) {
    s.alice.push_back(optics::Phase::radians(i * optics::kPi / n));
    s.bob.push_back(optics::Phase::radians(-(2 * i + 1) * optics::kPi / (2.0 * n)));
  }
  return s;
}

void QuantumSourceParams::validate() const {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("visibility must be in [0, 1]");
  if (!(eta_d >= 0.0 && eta_d <= 1.0))
    throw std::invalid_argument("detection efficiency must be in [0, 1]");
  if (settings.alice.empty() || settings.alice.size() != settings.bob.size())
    throw std::invalid_argument("settings lists must be nonempty and of equal length");
}

std::pair<detector::ClickRecord, detector::ClickRecord> sample_trial(
    const QuantumSourceParams& params, int alice_setting, int bob_setting, CounterRng& rng) {
  if (alice_setting < 0 || alice_setting >= params.settings.size() || bob_setting < 0 ||
      bob_setting >= params.settings.size())
    throw std::out_of_range("setting index out of range");

  const bool alice_early = rng.uniform() < 0.5;
  const bool bob_early = rng.uniform() < 0.5;
  const int a = rng.uniform() < 0.5 ? +1 : -1;
  int b = 0;
  if (alice_early == bob_early) {
    const double angle = params.settings.alice[static_cast<std::size_t>(alice_setting)].value() +
                         params.settings.bob[static_cast<std::size_t>(bob_setting)].value();
    const double p_same = 0.5 * (1.0 + params.visibility * std::cos(angle));
    b = rng.uniform() < p_same ? a : -a;
  } else {
    b = rng.uniform() < 0.5 ? +1 : -1;
  }
  const bool keep_a = rng.uniform() < params.eta_d;
  const bool keep_b = rng.uniform() < params.eta_d;

  detector::ClickRecord ra, rb;
  if (keep_a) ra.clicks.push_back({alice_early ? kEarlySlot : kLateSlot, port_of(a)});
  if (keep_b) rb.clicks.push_back({bob_early ? kEarlySlot : kLateSlot, port_of(b)});
  return {ra, rb};
}

double chained_prediction(int n, double visibility) {
  if (n < 2) throw std::invalid_argument("chained inequality needs N >= 2, got " + std::to_string(n));
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("visibility must be in [0, 1]");
  return 2.0 * n * visibility * std::cos(optics::kPi / (2.0 * n));
}

double visibility_threshold(int n) {
  return (2.0 * n - 1.0) / chained_prediction(n, 1.0);
}

CriticalVisibility critical_visibility(int max_n) {
  if (max_n < 2) throw std::invalid_argument("max_n must be at least 2");
  CriticalVisibility best{2, visibility_threshold(2)};
  for (int n = 3; n <= max_n; ++n) {
    const double v = visibility_threshold(n);
    if (v < best.visibility) best = {n, v};
  }
  return best;
}

}  // namespace franson::quantum
