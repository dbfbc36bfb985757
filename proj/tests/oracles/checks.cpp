#include "checks.hpp"

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using namespace maskguard;

double max_abs(const ThreePhaseSet& s) {
  return std::max({s.a.magnitude(), s.b.magnitude(), s.c.magnitude()});
}

double boundary_residual(const FaultPointSolution& fp, FaultKind kind, double r_f, double v_scale) {
  const auto faulted = faulted_phases(kind);
  const double i_scale = std::max(max_abs(fp.i), 1e-12);
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (!faulted[k]) worst = std::max(worst, fp.i[k].magnitude() / i_scale);
  }
  // Voltage behind each fault resistance (the common point).
  std::vector<Complex> behind;
  Complex i_sum{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!faulted[k]) continue;
    behind.push_back(fp.v[k].complex() - r_f * fp.i[k].complex());
    i_sum += fp.i[k].complex();
  }
  const double vs = std::max(v_scale, r_f * i_scale);
  if (is_grounded(kind)) {
    for (Complex b : behind) worst = std::max(worst, std::abs(b) / vs);
  } else {
    worst = std::max(worst, std::abs(i_sum) / i_scale);
    for (Complex b : behind) worst = std::max(worst, std::abs(b - behind.front()) / vs);
  }
  return worst;
}

double kcl_residual(const Network& net, const NetworkSolution& sol, FaultLocation where) {
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    const SequenceNetwork sn = build_sequence_network(net, static_cast<Sequence>(s), where);
    Eigen::VectorXcd rhs = sn.j;
    if (sol.fault) rhs(sn.fault_node) -= sol.fault->i_seq[s].complex();
    const Eigen::VectorXcd r = sn.y * sol.node_voltages[s] - rhs;
    const Eigen::VectorXd flows = sn.y.cwiseAbs() * sol.node_voltages[s].cwiseAbs();
    worst = std::max(worst, r.cwiseAbs().maxCoeff() / std::max(flows.maxCoeff(), 1e-12));
  }
  return worst;
}

bool reference_trip(double id_mag, double ir, double id0, double ib, double k1, double k2) {
  double op;
  if (ir <= ib) {
    op = id0 + k1 * ir;
  } else {
    op = id0 + k1 * ib + k2 * (ir - ib);
  }
  return id_mag >= op;
}

}  // namespace oracle
