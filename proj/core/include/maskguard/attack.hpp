#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "maskguard/network.hpp"
#include "maskguard/scenario.hpp"

namespace maskguard {

struct NoAttack {};

// Delivered i2 = -i1 + c_a per phase.
struct BasicFma {
  ThreePhaseSet c_a;
};

// Forges i2 so the local voltage matches the healthy model (attacker knows x, r_f).
struct StealthyFma {
  double x = 0.5;
  double r_f = 0.0;
};

struct AttackSpec {
  std::variant<NoAttack, BasicFma, StealthyFma> mode;
  double t_start = 0.0;
};

struct CtSaturation {
  double mag_scale = 1.0;
  double angle_advance_rad = 0.0;
  double knee_ka = 1.0;

  void validate() const;
};

struct DistortionSpec {
  std::optional<double> snr_db;  // absent or +inf disables noise
  std::optional<CtSaturation> ct_saturation;
};

Stream apply_fma(Stream stream, const BasicFma& fma, double t_start);
Stream apply_stealthy_fma(Stream stream, const StealthyFma& fma, double t_start,
                          const LineModel& line);
Stream apply_attack(Stream stream, const AttackSpec& spec, const LineModel& line);

// For one phase: the i2 that makes i1*z_se + (i1+i2)*z_sh equal the faulted
// local voltage i1*2x*z_se + i_d*r_f.
Phasor stealthy_remote_current(Phasor i1, Phasor i_d, double x, double r_f,
                               const LineModel& line);
// I_d^attack / I1 for a bolted fault, i.e. (2x-1)*z_se expressed in the z_sh base.
Complex stealthy_ratio_pu(double x, const LineModel& line);

Stream add_awgn(Stream stream, double snr_db, std::uint64_t seed);
Stream apply_ct_saturation(Stream stream, const CtSaturation& params);
// CT saturation first, then noise.
Stream apply_distortion(Stream stream, const DistortionSpec& spec, std::uint64_t seed);

}  // namespace maskguard
