#include "maskguard/attack.hpp"

#include <array>
#include <cmath>
#include <random>

#include "maskguard/error.hpp"

namespace maskguard {

void CtSaturation::validate() const {
  if (!(mag_scale > 0.0 && mag_scale <= 1.0)) {
    throw InvalidAttackParams("CT saturation mag_scale must lie in (0, 1]");
  }
  if (!(angle_advance_rad >= 0.0)) throw InvalidAttackParams("CT angle advance must be >= 0");
  if (!(knee_ka >= 0.0)) throw InvalidAttackParams("CT knee must be >= 0");
}

Stream apply_fma(Stream stream, const BasicFma& fma, double t_start) {
  for (auto& fr : stream) {
    if (fr.t + 1e-12 < t_start) continue;
    fr.i2 = -fr.i1 + fma.c_a;
    fr.flags.attacked = true;
  }
  return stream;
}

Phasor stealthy_remote_current(Phasor i1, Phasor i_d, double x, double r_f,
                               const LineModel& line) {
  const Impedance zse = line.z_se.positive, zsh = line.z_sh.positive;
  const Phasor v_faulted = i1 * (2.0 * x * zse) + i_d * r_f;
  return (v_faulted - i1 * (zse + zsh)) / zsh;
}

Complex stealthy_ratio_pu(double x, const LineModel& line) {
  return (2.0 * x - 1.0) * (line.z_se.positive / line.z_sh.positive);
}

Stream apply_stealthy_fma(Stream stream, const StealthyFma& fma, double t_start,
                          const LineModel& line) {
  if (!(fma.x > 0.0 && fma.x < 1.0)) throw InvalidAttackParams("stealthy FMA x must lie in (0, 1)");
  if (!(fma.r_f >= 0.0)) throw InvalidAttackParams("stealthy FMA r_f must be >= 0");
  for (auto& fr : stream) {
    if (fr.t + 1e-12 < t_start) continue;
    for (std::size_t p = 0; p < 3; ++p) {
      const Phasor i_d = fr.i1[p] + fr.i2_true[p];
      fr.i2[p] = stealthy_remote_current(fr.i1[p], i_d, fma.x, fma.r_f, line);
    }
    fr.flags.attacked = true;
  }
  return stream;
}

Stream apply_attack(Stream stream, const AttackSpec& spec, const LineModel& line) {
  if (const auto* b = std::get_if<BasicFma>(&spec.mode)) {
    return apply_fma(std::move(stream), *b, spec.t_start);
  }
  if (const auto* s = std::get_if<StealthyFma>(&spec.mode)) {
    return apply_stealthy_fma(std::move(stream), *s, spec.t_start, line);
  }
  return stream;
}

Stream add_awgn(Stream stream, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) return stream;
  if (!std::isfinite(snr_db)) throw InvalidAttackParams("SNR must be finite or +inf");
  if (stream.empty()) return stream;

  std::size_t pre = 0;
  while (pre < stream.size() && !stream[pre].flags.fault_active) ++pre;
  if (pre == 0) pre = stream.size();

  using Member = ThreePhaseSet MeasurementFrame::*;
  constexpr std::array<Member, 3> kChannels = {&MeasurementFrame::v1, &MeasurementFrame::i1,
                                               &MeasurementFrame::i2};
  std::array<double, 9> sigma{};
  const double ratio = std::pow(10.0, snr_db / 10.0);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < 3; ++p) {
      double power = 0.0;
      for (std::size_t k = 0; k < pre; ++k) power += std::norm((stream[k].*kChannels[c])[p].complex());
      power /= static_cast<double>(pre);
      // Complex noise power split equally over the real and imaginary parts.
      sigma[c * 3 + p] = std::sqrt(power / ratio / 2.0);
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& fr : stream) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < 3; ++p) {
        const double s = sigma[c * 3 + p];
        const double re = gauss(rng) * s;
        const double im = gauss(rng) * s;
        (fr.*kChannels[c])[p] += Phasor(re, im);
      }
    }
  }
  return stream;
}

Stream apply_ct_saturation(Stream stream, const CtSaturation& params) {
  params.validate();
  const Complex k = std::polar(params.mag_scale, params.angle_advance_rad);
  for (auto& fr : stream) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (fr.i1[p].magnitude() > params.knee_ka) fr.i1[p] *= k;
    }
  }
  return stream;
}

Stream apply_distortion(Stream stream, const DistortionSpec& spec, std::uint64_t seed) {
  if (spec.ct_saturation) stream = apply_ct_saturation(std::move(stream), *spec.ct_saturation);
  if (spec.snr_db) stream = add_awgn(std::move(stream), *spec.snr_db, seed);
  return stream;
}

}  // namespace maskguard
