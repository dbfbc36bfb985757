#pragma once

#include <array>

#include "maskguard/phasor.hpp"

namespace maskguard {

// Dual-slope percentage differential characteristic. Currents in kA.
struct RelaySettings {
  double i_d0 = 0.05;
  double i_b = 0.585;
  double k1 = 0.2;
  double k2 = 0.4;

  void validate() const;
};

struct PhaseVerdict {
  Phasor i_d;
  double i_r = 0.0;
  double i_op = 0.0;
  bool trip = false;
};

struct RelayVerdict {
  std::array<PhaseVerdict, 3> phase;
  bool any_trip = false;
};

Phasor differential_current(Phasor i1, Phasor i2);
double restraining_current(Phasor i1, Phasor i2);
double operating_current(double i_r, const RelaySettings& s);
RelayVerdict trip_decision(const ThreePhaseSet& i1, const ThreePhaseSet& i2,
                           const RelaySettings& s);

}  // namespace maskguard
