#include "maskguard/relay.hpp"

#include "maskguard/error.hpp"

namespace maskguard {

void RelaySettings::validate() const {
  if (!(i_d0 > 0.0)) throw InvalidConfig("relay i_d0 must be positive");
  if (!(i_b > 0.0)) throw InvalidConfig("relay i_b must be positive");
  if (!(k1 > 0.0 && k1 < k2 && k2 < 1.0)) throw InvalidConfig("relay slopes need 0 < k1 < k2 < 1");
}

Phasor differential_current(Phasor i1, Phasor i2) { return i1 + i2; }

double restraining_current(Phasor i1, Phasor i2) { return i1.magnitude() + i2.magnitude(); }

double operating_current(double i_r, const RelaySettings& s) {
  if (i_r <= s.i_b) return s.i_d0 + s.k1 * i_r;
  return s.i_d0 + s.k1 * s.i_b + s.k2 * (i_r - s.i_b);
}

RelayVerdict trip_decision(const ThreePhaseSet& i1, const ThreePhaseSet& i2,
                           const RelaySettings& s) {
  RelayVerdict v;
  for (std::size_t p = 0; p < 3; ++p) {
    auto& ph = v.phase[p];
    ph.i_d = differential_current(i1[p], i2[p]);
    ph.i_r = restraining_current(i1[p], i2[p]);
    ph.i_op = operating_current(ph.i_r, s);
    ph.trip = ph.i_d.magnitude() >= ph.i_op;
    v.any_trip = v.any_trip || ph.trip;
  }
  return v;
}

}  // namespace maskguard
