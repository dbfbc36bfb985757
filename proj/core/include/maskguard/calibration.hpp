#pragma once

#include "maskguard/network.hpp"

namespace maskguard {

// Positive-sequence steady state at both terminals, phase (line-to-neutral) values.
struct OperatingPoint {
  Phasor v1, i1, v2, i2;
};

// The reported 39-bus flows for line 11-6, with the quoted kV read as line-to-line RMS.
OperatingPoint reference_operating_point();

struct CalibrationOptions {
  Impedance z_th1{51.29, 105.48};
  Impedance z_th2{4.45, 27.73};
  double adjacent_scale = 1.0;       // adjacent-line series impedance / protected-line series
  double line_zero_series_ratio = 3.45;
  double line_zero_shunt_ratio = 1.6;
  double source_zero_ratio = 1.28;
  double length_km = 100.0;
};

// Exact fit of the T-model to an operating point: z_se = (V1-V2)/(I1-I2), z_sh = V_M/(I1+I2).
LineModel fit_line(const OperatingPoint& op, const CalibrationOptions& opts = {});

// Line fit plus source EMFs back-computed through the adjacent lines so the healthy
// solution reproduces `op`.
Network calibrate_network(const OperatingPoint& op, const CalibrationOptions& opts = {});

Network default_network();

// Healthy differential current (positive sequence) of a network.
Phasor healthy_differential(const Network& net);

}  // namespace maskguard
