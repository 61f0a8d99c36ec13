#include "franson/optics.h"

#include <cmath>
#include <stdexcept>

namespace franson::optics {

namespace {

double canonical(double value) {
  double r = std::fmod(value, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

int grid_mod(int index) {
  int k = index % kPhaseGridSize;
  return k < 0 ? k + kPhaseGridSize : k;
}

PortIntensity half_angle_split(double intensity, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  return {intensity * c * c, intensity * s * s};
}

}  // namespace

Phase Phase::radians(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("phase must be finite");
  Phase p;
  p.value_ = canonical(value);
  // Adopt a grid index only when the value is bit-identical to the grid point.
  const double scaled = p.value_ * 8.0 / kPi;
  const double nearest = std::round(scaled);
  const int k = grid_mod(static_cast<int>(nearest));
  if (k * kPi / 8.0 == p.value_) {
    p.grid_ = k;
  } else {
    p.grid_.reset();
  }
  return p;
}

Phase Phase::grid(int index) {
  Phase p;
  const int k = grid_mod(index);
  p.grid_ = k;
  p.value_ = k * kPi / 8.0;
  return p;
}

Amplitude Phase::phasor() const {
  if (grid_ && *grid_ % 4 == 0) {
    switch (*grid_ / 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, value_);
}

Phase Phase::operator-() const {
  if (grid_) return grid(-*grid_);
  return radians(-value_);
}

Phase operator+(const Phase& a, const Phase& b) {
  if (a.grid_ && b.grid_) return Phase::grid(*a.grid_ + *b.grid_);
  return Phase::radians(a.value_ + b.value_);
}

double PulseTrain::energy() const {
  double e = 0.0;
  for (const auto& a : amplitudes) e += std::norm(a);
  return e;
}

void PulseTrain::validate() const {
  if (amplitudes.empty()) throw std::invalid_argument("pulse train has no pulses");
  const double e = energy();
  if (!std::isfinite(e) || e <= 0.0)
    throw std::invalid_argument("pulse train energy must be finite and positive");
}

PulseTrain PulseTrain::from_phase_steps(int base_slot, double intensity,
                                        const std::vector<Phase>& steps) {
  if (!(intensity > 0.0)) throw std::invalid_argument("pulse intensity must be positive");
  PulseTrain train;
  train.base_slot = base_slot;
  const double amplitude = std::sqrt(intensity);
  Phase accumulated = Phase::grid(0);
  train.amplitudes.push_back(amplitude);
  for (const auto& step : steps) {
    accumulated = accumulated + step;
    train.amplitudes.push_back(amplitude * (-accumulated).phasor());
  }
  return train;
}

PortIntensity SlotIntensities::at(int slot) const {
  if (!contains(slot)) return {};
  return slots_[static_cast<std::size_t>(slot - first_slot_)];
}

double SlotIntensities::total() const {
  double sum = 0.0;
  for (const auto& s : slots_) sum += s.plus + s.minus;
  return sum;
}

SlotIntensities propagate(const PulseTrain& train, const Phase& phi) {
  train.validate();
  const Amplitude delay = phi.phasor();
  const auto& a = train.amplitudes;
  const std::size_t n = a.size();
  std::vector<PortIntensity> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const Amplitude current = k < n ? a[k] : Amplitude{};
    const Amplitude delayed = k > 0 ? a[k - 1] * delay : Amplitude{};
    out[k].plus = std::norm((current + delayed) * 0.5);
    out[k].minus = std::norm((current - delayed) * 0.5);
  }
  return SlotIntensities(train.base_slot, std::move(out));
}

PortIntensity two_pulse_closed_form(double intensity, const Phase& phi, const Phase& omega) {
  if (intensity < 0.0) throw std::invalid_argument("intensity must be nonnegative");
  return half_angle_split(intensity, phi.value() + omega.value());
}

ThreePulseIntensities three_pulse_closed_form(double intensity, const Phase& phi,
                                              const Phase& omega_early, const Phase& omega_late) {
  if (intensity < 0.0) throw std::invalid_argument("intensity must be nonnegative");
  return {half_angle_split(intensity, phi.value() + omega_early.value()),
          half_angle_split(intensity, phi.value() + omega_late.value())};
}

}  // namespace franson::optics
