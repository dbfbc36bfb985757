#include "maskguard/mismatch_index.hpp"

#include <algorithm>
#include <cmath>

#include "maskguard/error.hpp"

namespace maskguard {

void MIConfig::validate() const {
  if (!(f > 0.0 && f < 1.0)) throw InvalidConfig("MI safety factor f must lie in (0, 1)");
  if (t1 < 1) throw InvalidConfig("MI t1 must be >= 1");
  if (t2 < 5 * t1) throw InvalidConfig("MI t2 must be >= 5*t1");
  if (!(i_d_n.magnitude() > 0.0)) throw InvalidConfig("MI reference |I_d^n| must be positive");
  if (!(eps_ang > 0.0) || !(eps_mag > 0.0)) throw InvalidConfig("MI guards must be positive");
}

double p_norm(const PVector& p) {
  return std::sqrt(p.delta_vm * p.delta_vm + p.delta_va * p.delta_va +
                   p.v_drop_mag * p.v_drop_mag + p.id_ratio * p.id_ratio);
}

Phasor calculated_local_voltage(Phasor i1, Phasor i2, const LineModel& line) {
  return i1 * line.z_se.positive + (i1 + i2) * line.z_sh.positive;
}

PResult compute_p(Phasor v1, Phasor i1, Phasor i2, const LineModel& line, const MIConfig& cfg,
                  PGuard& guard) {
  Complex rot(1.0, 0.0);
  if (i1.magnitude() > 0.0) rot = std::polar(1.0, -i1.angle());
  const Phasor v1m = v1 * rot, i1r = i1 * rot, i2r = i2 * rot;
  const Phasor v1c = calculated_local_voltage(i1r, i2r, line);

  PResult r;
  const double mag_m = v1m.magnitude();
  if (mag_m < cfg.eps_mag) {
    r.p.delta_vm = guard.last_delta_vm;
    r.p.delta_va = guard.last_delta_va;
    r.degenerate = true;
  } else {
    r.p.delta_vm = (v1c.magnitude() - mag_m) / mag_m;
    guard.last_delta_vm = r.p.delta_vm;
    const double ang_m = v1m.angle();
    if (std::abs(ang_m) < cfg.eps_ang) {
      r.p.delta_va = guard.last_delta_va;
      r.degenerate = true;
    } else {
      r.p.delta_va = wrap_angle(v1c.angle() - ang_m) / ang_m;
      guard.last_delta_va = r.p.delta_va;
    }
  }
  if (r.degenerate) ++guard.substitutions;
  // Physical drop across the line with both currents referenced into it.
  r.p.v_drop_mag = ((i1r - i2r) * line.z_se.positive).magnitude();
  r.p.id_ratio = (i1r + i2r).magnitude() / cfg.i_d_n.magnitude();
  return r;
}

MismatchIndex::MismatchIndex(MIConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  ring_.assign(cfg_.t2 + 1, 0.0);
}

void MismatchIndex::fill(double value) {
  std::fill(ring_.begin(), ring_.end(), value);
  head_ = 0;
}

double MismatchIndex::mean_last(std::size_t n) const {
  double sum = 0.0;
  const std::size_t cap = ring_.size();
  for (std::size_t k = 1; k <= n; ++k) sum += ring_[(head_ + cap - k) % cap];
  return sum / static_cast<double>(n);
}

MIOutput MismatchIndex::update(double norm) {
  if (count_ == 0) fill(norm);
  ring_[head_] = norm;
  head_ = (head_ + 1) % ring_.size();
  ++count_;
  last_norm_ = norm;

  MIOutput out;
  out.m = mean_last(cfg_.t1 + 1);
  const double long_mean = mean_last(cfg_.t2 + 1);
  out.l_u = (1.0 + cfg_.f) * long_mean;
  if (!o_) {
    if (count_ > cfg_.t2 + 1 && out.m >= out.l_u) {
      o_ = true;
      out.fired = true;
    } else {
      baseline_ = long_mean;
    }
  }
  out.o = o_;
  return out;
}

void MismatchIndex::reset() {
  o_ = false;
  if (count_ > 0) fill(baseline_);
}

void MismatchIndex::rebase(std::size_t window) {
  o_ = false;
  if (count_ == 0) return;
  const std::size_t n = std::clamp<std::size_t>(window, 1, std::min(count_, ring_.size()));
  fill(mean_last(n));
}

}  // namespace maskguard
