#pragma once

#include <cstddef>
#include <vector>

#include "maskguard/network.hpp"

namespace maskguard {

struct MIConfig {
  double f = 0.05;
  std::size_t t1 = 9;
  std::size_t t2 = 99;
  Phasor i_d_n{0.046, 0.0};
  double eps_ang = 1e-3;  // rad
  double eps_mag = 1e-6;  // kV

  void validate() const;
};

struct PVector {
  double delta_vm = 0.0;
  double delta_va = 0.0;
  double v_drop_mag = 0.0;  // kV
  double id_ratio = 0.0;
};

double p_norm(const PVector& p);

Phasor calculated_local_voltage(Phasor i1, Phasor i2, const LineModel& line);

// Carries the last valid angle/magnitude terms across frames for the guards.
struct PGuard {
  double last_delta_vm = 0.0;
  double last_delta_va = 0.0;
  std::size_t substitutions = 0;
};

struct PResult {
  PVector p;
  bool degenerate = false;
};

// Positive-sequence inputs; all phasors are rotated so that angle(i1) = 0.
PResult compute_p(Phasor v1, Phasor i1, Phasor i2, const LineModel& line, const MIConfig& cfg,
                  PGuard& guard);

struct MIOutput {
  double m = 0.0;
  double l_u = 0.0;
  bool o = false;
  bool fired = false;  // latch set on this sample
};

// Streaming trailing-mean detector with a latched output.
class MismatchIndex {
 public:
  explicit MismatchIndex(MIConfig cfg);

  MIOutput update(double norm);
  // Clears the latch and re-primes the buffers with the healthy baseline.
  void reset();
  // Re-primes the buffers with the mean of the last `window` norms; used once an
  // external event has settled.
  void rebase(std::size_t window = 1);

  bool latched() const { return o_; }
  std::size_t samples() const { return count_; }
  const MIConfig& config() const { return cfg_; }

 private:
  void fill(double value);
  double mean_last(std::size_t n) const;

  MIConfig cfg_;
  std::vector<double> ring_;
  std::size_t head_ = 0;  // next write position
  std::size_t count_ = 0;
  double baseline_ = 0.0;
  double last_norm_ = 0.0;
  bool o_ = false;
};

}  // namespace maskguard
