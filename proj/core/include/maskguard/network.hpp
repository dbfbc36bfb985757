#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maskguard/phasor.hpp"

namespace maskguard {

struct SequenceImpedance {
  Impedance zero, positive, negative;

  static SequenceImpedance symmetric(Impedance z1, Impedance z0) { return {z0, z1, z1}; }
  Impedance operator[](Sequence s) const;
  Impedance operator[](std::size_t k) const { return (*this)[static_cast<Sequence>(k)]; }
};

// T-equivalent line: z_se is ONE half of the series impedance, z_sh the midpoint shunt.
struct LineModel {
  SequenceImpedance z_se;
  SequenceImpedance z_sh;
  double length_km = 100.0;

  void validate() const;
};

struct SourceEquivalent {
  Phasor emf;  // phase-a EMF, kV (line-to-neutral)
  SequenceImpedance z_th;
};

enum class FaultKind { AG, BG, CG, AB, BC, CA, ABG, BCG, CAG, ABC, ABCG };

inline constexpr std::array<FaultKind, 11> kAllFaultKinds = {
    FaultKind::AG,  FaultKind::BG,  FaultKind::CG,  FaultKind::AB,
    FaultKind::BC,  FaultKind::CA,  FaultKind::ABG, FaultKind::BCG,
    FaultKind::CAG, FaultKind::ABC, FaultKind::ABCG};

std::string_view to_string(FaultKind kind);
// Throws UnsupportedFault for unknown names.
FaultKind parse_fault_kind(std::string_view name);
bool is_grounded(FaultKind kind);
// Phases touched by the fault, as a mask over a/b/c.
std::array<bool, 3> faulted_phases(FaultKind kind);

enum class Terminal { One = 0, Two = 1 };

struct Network {
  LineModel line;
  std::array<SourceEquivalent, 2> sources;
  // Adjacent line between source s and terminal s (same T-model).
  std::array<LineModel, 2> adjacent;
  // Extra shunt admittance (S, all sequences) at each terminal, e.g. switched capacitors.
  std::array<Complex, 2> terminal_shunt{};

  void validate() const;
};

enum class FaultSite { ProtectedLine, Adjacent1, Adjacent2 };

// x is measured from terminal 1 on the protected line, from the line terminal
// (towards the remote source) on an adjacent line.
struct FaultLocation {
  FaultSite site = FaultSite::ProtectedLine;
  double x = 0.5;
};

struct TerminalSolution {
  ThreePhaseSet v1, i1, v2, i2;  // currents referenced into the protected line
};

struct FaultPointSolution {
  ThreePhaseSet v;  // phase-to-ground voltage at the fault node
  ThreePhaseSet i;  // current leaving the network into the fault
  SequenceSet v_seq, i_seq;
};

struct NetworkSolution {
  TerminalSolution terminals;
  std::optional<FaultPointSolution> fault;
  std::array<Eigen::VectorXcd, 3> node_voltages;  // per sequence
};

namespace node {
inline constexpr int T1 = 0, M = 1, T2 = 2, R1 = 3, A1 = 4, R2 = 5, A2 = 6, F = 7;
}

struct Branch {
  int from, to;
  Impedance z;
};

// One sequence network assembled for nodal analysis.
struct SequenceNetwork {
  Eigen::MatrixXcd y;
  Eigen::VectorXcd j;  // source injections (positive sequence only)
  std::vector<Branch> branches;
  int fault_node = -1;
  int t1_branch = -1, t2_branch = -1;  // protected-line branches touching T1 / T2
};

SequenceNetwork build_sequence_network(const Network& net, Sequence seq,
                                       std::optional<FaultLocation> fault);

NetworkSolution solve_healthy(const Network& net);
NetworkSolution solve_faulted(const Network& net, FaultLocation where, FaultKind kind,
                              double r_f);

inline constexpr double kMaxConditionNumber = 1e12;

}  // namespace maskguard
