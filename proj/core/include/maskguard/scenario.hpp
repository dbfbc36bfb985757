#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "maskguard/network.hpp"

namespace maskguard {

struct FaultSpec {
  FaultKind kind = FaultKind::AG;
  double x = 0.5;  // fraction of the line length from terminal 1 (adjacent: from the terminal)
  double r_f = 0.001;
  double t_inception = 0.5;
  std::optional<double> t_clear;

  void validate() const;
};

struct ExternalFault {
  Terminal side = Terminal::Two;
  FaultSpec fault;
};

// Adds a shunt admittance (S, all sequences) at a terminal; negative values remove it.
struct ShuntSwitch {
  Terminal at = Terminal::Two;
  Complex admittance;

  // Three-phase capacitor bank of `mvar` at phase voltage `v_ph_kv`.
  static ShuntSwitch capacitor(Terminal at, double mvar, double v_ph_kv);
};

// Scales (and optionally rotates) one source EMF.
struct SourceStep {
  Terminal at = Terminal::Two;
  double magnitude_factor = 1.0;
  double angle_shift_rad = 0.0;
};

// Scales both EMF magnitudes by a load factor.
struct LoadScale {
  double factor = 1.0;
};

struct Event {
  double t = 0.0;
  std::variant<ShuntSwitch, SourceStep, LoadScale> action;
};

struct LineScenario {
  Network network;
  std::optional<FaultSpec> fault;
  std::optional<ExternalFault> external_fault;
  std::vector<Event> events;
  double duration_s = 1.0;
  double sample_rate_hz = 1000.0;
  double system_frequency_hz = 60.0;

  void validate() const;
  std::size_t frame_count() const;
  // Index of the first frame at or after t.
  std::size_t index_at(double t) const;
  // Samples per power cycle, rounded.
  std::size_t samples_per_cycle() const;
  // Earliest fault inception or event time, if any.
  std::optional<double> first_disturbance() const;
};

struct FrameFlags {
  bool fault_active = false;
  bool internal = false;
  bool attacked = false;

  friend bool operator==(const FrameFlags&, const FrameFlags&) = default;
};

struct MeasurementFrame {
  double t = 0.0;
  ThreePhaseSet v1, i1;
  ThreePhaseSet i2_true;
  ThreePhaseSet i2;  // as delivered to the monitored relay
  FrameFlags flags;

  friend bool operator==(const MeasurementFrame&, const MeasurementFrame&) = default;
};

using Stream = std::vector<MeasurementFrame>;

Stream generate_stream(const LineScenario& scenario);

}  // namespace maskguard
