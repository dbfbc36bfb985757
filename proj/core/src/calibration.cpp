#include "maskguard/calibration.hpp"

#include <cmath>

namespace maskguard {

namespace {

// Voltage behind a Thevenin impedance that yields (vt, it) at the terminal end of an
// adjacent T-line, it flowing from the source towards the terminal.
Phasor back_substitute(Phasor vt, Phasor it, const LineModel& adj, Impedance z_th) {
  const Impedance se = adj.z_se.positive, sh = adj.z_sh.positive;
  const Phasor vm = vt + it * se;
  const Phasor ir = it + vm / sh;
  const Phasor vr = vm + ir * se;
  return vr + ir * z_th;
}

}  // namespace

OperatingPoint reference_operating_point() {
  const double ll_to_ln = 1.0 / std::sqrt(3.0);
  return {Phasor::polar_deg(138.103 * ll_to_ln, -94.72), Phasor::polar_deg(0.29, -73.56),
          Phasor::polar_deg(141.963 * ll_to_ln, -100.36), Phasor::polar_deg(0.273, 97.8)};
}

LineModel fit_line(const OperatingPoint& op, const CalibrationOptions& opts) {
  const Impedance z_se = (op.v1 - op.v2) / (op.i1 - op.i2);
  const Phasor v_mid = op.v1 - op.i1 * z_se;
  const Impedance z_sh = v_mid / (op.i1 + op.i2);
  LineModel line;
  line.z_se = SequenceImpedance::symmetric(z_se, z_se * opts.line_zero_series_ratio);
  line.z_sh = SequenceImpedance::symmetric(z_sh, z_sh * opts.line_zero_shunt_ratio);
  line.length_km = opts.length_km;
  return line;
}

Network calibrate_network(const OperatingPoint& op, const CalibrationOptions& opts) {
  Network net;
  net.line = fit_line(op, opts);
  for (auto& adj : net.adjacent) {
    adj = net.line;
    for (Impedance* z : {&adj.z_se.zero, &adj.z_se.positive, &adj.z_se.negative}) {
      *z *= opts.adjacent_scale;
    }
    for (Impedance* z : {&adj.z_sh.zero, &adj.z_sh.positive, &adj.z_sh.negative}) {
      *z /= opts.adjacent_scale;
    }
    adj.length_km = net.line.length_km * opts.adjacent_scale;
  }
  const std::array<Impedance, 2> z_th = {opts.z_th1, opts.z_th2};
  const std::array<std::pair<Phasor, Phasor>, 2> terminal = {std::pair{op.v1, op.i1},
                                                             std::pair{op.v2, op.i2}};
  for (std::size_t s = 0; s < 2; ++s) {
    net.sources[s].z_th = SequenceImpedance::symmetric(z_th[s], z_th[s] * opts.source_zero_ratio);
    net.sources[s].emf =
        back_substitute(terminal[s].first, terminal[s].second, net.adjacent[s], z_th[s]);
  }
  return net;
}

Network default_network() { return calibrate_network(reference_operating_point()); }

Phasor healthy_differential(const Network& net) {
  const auto sol = solve_healthy(net);
  return to_sequence(sol.terminals.i1).positive + to_sequence(sol.terminals.i2).positive;
}

}  // namespace maskguard
