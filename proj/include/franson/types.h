#pragma once

#include <cstdint>
#include <string_view>

namespace franson {

/// Detector output port of an analysis station. The numeric value is the
/// outcome reported for a click at that port.
enum class Port : int { Plus = +1, Minus = -1 };

constexpr int sign_of(Port p) { return static_cast<int>(p); }
constexpr Port port_of(int sign) { return sign > 0 ? Port::Plus : Port::Minus; }
constexpr Port opposite(Port p) { return p == Port::Plus ? Port::Minus : Port::Plus; }

/// The two interfering (coincidence) timeslots behind an unbalanced
/// Mach-Zehnder station.
enum class TimeSlot { Early, Late };

constexpr TimeSlot opposite(TimeSlot s) {
  return s == TimeSlot::Early ? TimeSlot::Late : TimeSlot::Early;
}

// Absolute slot indices (units of the interferometer delay) used when a
// train starts at slot 0: slots 0 and 3 carry non-interfering light only.
inline constexpr int kEarlySlot = 1;
inline constexpr int kLateSlot = 2;

constexpr int slot_index(TimeSlot s) { return s == TimeSlot::Early ? kEarlySlot : kLateSlot; }
constexpr bool is_coincidence_slot(int slot) { return slot == kEarlySlot || slot == kLateSlot; }
constexpr TimeSlot time_slot_of(int slot) {
  return slot == kEarlySlot ? TimeSlot::Early : TimeSlot::Late;
}

constexpr std::string_view to_string(TimeSlot s) { return s == TimeSlot::Early ? "E" : "L"; }
constexpr std::string_view to_string(Port p) { return p == Port::Plus ? "+" : "-"; }

}  // namespace franson
