#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace franson::optics {

using Amplitude = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Number of points on the exact phase grid (multiples of pi/8).
inline constexpr int kPhaseGridSize = 16;

/// A phase in [0, 2pi). Phases built from the pi/8 grid remember their grid
/// index, so they round-trip exactly and multiples of pi/2 give exact phasors.
class Phase {
 public:
  Phase() = default;

  static Phase radians(double value);
  /// Grid point k * pi/8; k is reduced modulo 16.
  static Phase grid(int index);

  double value() const { return value_; }
  std::optional<int> grid_index() const { return grid_; }

  /// e^{i * phase}.
  Amplitude phasor() const;

  Phase operator-() const;
  friend Phase operator+(const Phase& a, const Phase& b);
  friend Phase operator-(const Phase& a, const Phase& b) { return a + (-b); }
  friend bool operator==(const Phase& a, const Phase& b) { return a.value_ == b.value_; }

 private:
  double value_ = 0.0;
  std::optional<int> grid_ = 0;
};

/// Classical light on the discrete slot grid. Entry m sits at slot
/// base_slot + m; amplitudes are in units of sqrt(I_T).
struct PulseTrain {
  int base_slot = 0;
  std::vector<Amplitude> amplitudes;

  double energy() const;
  /// Throws std::invalid_argument unless nonempty with finite, positive energy.
  void validate() const;

  /// Equal-intensity train where pulse m carries e^{-i (omega_1 + ... + omega_m)}.
  static PulseTrain from_phase_steps(int base_slot, double intensity,
                                     const std::vector<Phase>& steps);
};

struct PortIntensity {
  double plus = 0.0;
  double minus = 0.0;
};

/// Output intensities at both ports for the contiguous slots
/// [first_slot, first_slot + size()).
class SlotIntensities {
 public:
  SlotIntensities(int first_slot, std::vector<PortIntensity> slots)
      : first_slot_(first_slot), slots_(std::move(slots)) {}

  int first_slot() const { return first_slot_; }
  int last_slot() const { return first_slot_ + static_cast<int>(slots_.size()) - 1; }
  std::size_t size() const { return slots_.size(); }
  bool contains(int slot) const { return slot >= first_slot_ && slot <= last_slot(); }

  /// Zero intensity outside the occupied range.
  PortIntensity at(int slot) const;
  const std::vector<PortIntensity>& slots() const { return slots_; }

  double total() const;

 private:
  int first_slot_;
  std::vector<PortIntensity> slots_;
};

/// Unbalanced Mach-Zehnder station with long-arm phase phi:
///   plus[k]  = (a[k] + a[k-1] e^{i phi}) / 2
///   minus[k] = (a[k] - a[k-1] e^{i phi}) / 2
/// The output occupies len(a)+1 slots starting at the train's base slot.
SlotIntensities propagate(const PulseTrain& train, const Phase& phi);

/// Middle-slot intensities for two pulses with relative phase omega:
/// (I cos^2((phi+omega)/2), I sin^2((phi+omega)/2)).
PortIntensity two_pulse_closed_form(double intensity, const Phase& phi, const Phase& omega);

struct ThreePulseIntensities {
  PortIntensity early;
  PortIntensity late;
};

/// Early/late middle-slot intensities for three pulses with phase steps
/// omega_E (first to second) and omega_L (second to third).
ThreePulseIntensities three_pulse_closed_form(double intensity, const Phase& phi,
                                              const Phase& omega_early, const Phase& omega_late);

}  // namespace franson::optics
