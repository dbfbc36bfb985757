#include "maskguard/network.hpp"

#include <cmath>
#include <string>

#include "maskguard/error.hpp"

namespace maskguard {

namespace {

constexpr std::array<std::string_view, 11> kKindNames = {
    "AG", "BG", "CG", "AB", "BC", "CA", "ABG", "BCG", "CAG", "ABC", "ABCG"};

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Phase that plays the role of "a" in the textbook interconnection.
std::size_t special_phase(FaultKind kind) {
  switch (kind) {
    case FaultKind::AG:
    case FaultKind::BC:
    case FaultKind::BCG:
    case FaultKind::ABC:
    case FaultKind::ABCG:
      return 0;
    case FaultKind::BG:
    case FaultKind::CA:
    case FaultKind::CAG:
      return 1;
    case FaultKind::CG:
    case FaultKind::AB:
    case FaultKind::ABG:
      return 2;
  }
  throw UnsupportedFault("unknown fault kind");
}

enum class Interconnection { SingleLineGround, LineLine, LineLineGround, ThreePhase };

Interconnection interconnection(FaultKind kind) {
  switch (kind) {
    case FaultKind::AG:
    case FaultKind::BG:
    case FaultKind::CG:
      return Interconnection::SingleLineGround;
    case FaultKind::AB:
    case FaultKind::BC:
    case FaultKind::CA:
      return Interconnection::LineLine;
    case FaultKind::ABG:
    case FaultKind::BCG:
    case FaultKind::CAG:
      return Interconnection::LineLineGround;
    case FaultKind::ABC:
    case FaultKind::ABCG:
      return Interconnection::ThreePhase;
  }
  throw UnsupportedFault("unknown fault kind");
}

struct Assembler {
  int nodes = 7;
  std::vector<Branch> branches;
  std::vector<std::pair<int, Complex>> shunts;  // admittances to ground

  // Adds a T-line between `near` and `far` with midpoint `mid`; optionally
  // splits the series path at fraction y from `near`. Returns the fault node.
  int add_line(int near, int mid, int far, Impedance z_se, Impedance z_sh,
               std::optional<double> split) {
    shunts.emplace_back(mid, 1.0 / z_sh);
    if (!split) {
      branches.push_back({near, mid, z_se});
      branches.push_back({mid, far, z_se});
      return -1;
    }
    const double y = *split;
    if (std::abs(y - 0.5) < 1e-12) {
      branches.push_back({near, mid, z_se});
      branches.push_back({mid, far, z_se});
      return mid;
    }
    const int f = nodes++;
    if (y < 0.5) {
      branches.push_back({near, f, 2.0 * y * z_se});
      branches.push_back({f, mid, (1.0 - 2.0 * y) * z_se});
      branches.push_back({mid, far, z_se});
    } else {
      branches.push_back({near, mid, z_se});
      branches.push_back({mid, f, (2.0 * y - 1.0) * z_se});
      branches.push_back({f, far, 2.0 * (1.0 - y) * z_se});
    }
    return f;
  }
};

Eigen::PartialPivLU<Eigen::MatrixXcd> factorize(const Eigen::MatrixXcd& y) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxConditionNumber)) {
    throw SingularNetwork("network admittance matrix is ill-conditioned (rcond=" +
                          std::to_string(rcond) + ")");
  }
  return lu;
}

Complex branch_current_from(const SequenceNetwork& sn, const Eigen::VectorXcd& v, int branch,
                            int from_node) {
  const Branch& b = sn.branches[static_cast<std::size_t>(branch)];
  const int other = b.from == from_node ? b.to : b.from;
  return (v(from_node) - v(other)) / b.z;
}

TerminalSolution terminal_quantities(const std::array<SequenceNetwork, 3>& nets,
                                     const std::array<Eigen::VectorXcd, 3>& v) {
  SequenceSet v1, i1, v2, i2;
  for (std::size_t s = 0; s < 3; ++s) {
    v1[s] = Phasor(v[s](node::T1));
    v2[s] = Phasor(v[s](node::T2));
    i1[s] = Phasor(branch_current_from(nets[s], v[s], nets[s].t1_branch, node::T1));
    i2[s] = Phasor(branch_current_from(nets[s], v[s], nets[s].t2_branch, node::T2));
  }
  return {from_sequence(v1), from_sequence(i1), from_sequence(v2), from_sequence(i2)};
}

}  // namespace

Impedance SequenceImpedance::operator[](Sequence s) const {
  switch (s) {
    case Sequence::Zero: return zero;
    case Sequence::Positive: return positive;
    case Sequence::Negative: return negative;
  }
  throw std::out_of_range("sequence");
}

void LineModel::validate() const {
  for (std::size_t s = 0; s < 3; ++s) {
    if (!finite(z_se[s]) || std::abs(z_se[s]) <= 0.0) {
      throw InvalidScenario("line z_se must be finite and non-zero");
    }
    if (!finite(z_sh[s]) || !(z_sh[s].imag() < 0.0)) {
      throw InvalidScenario("line z_sh must be finite and capacitive (negative imaginary part)");
    }
  }
  if (!(length_km > 0.0)) throw InvalidScenario("line length must be positive");
}

void Network::validate() const {
  line.validate();
  for (const auto& adj : adjacent) adj.validate();
  for (const auto& src : sources) {
    if (!src.emf.is_finite()) throw InvalidScenario("source EMF must be finite");
    for (std::size_t s = 0; s < 3; ++s) {
      if (!finite(src.z_th[s]) || std::abs(src.z_th[s]) <= 0.0) {
        throw InvalidScenario("source impedance must be finite and non-zero");
      }
    }
  }
  for (const auto& y : terminal_shunt) {
    if (!finite(y)) throw InvalidScenario("terminal shunt admittance must be finite");
  }
}

std::string_view to_string(FaultKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

FaultKind parse_fault_kind(std::string_view name) {
  for (std::size_t k = 0; k < kKindNames.size(); ++k) {
    if (kKindNames[k] == name) return static_cast<FaultKind>(k);
  }
  throw UnsupportedFault("unsupported fault kind '" + std::string(name) + "'");
}

bool is_grounded(FaultKind kind) {
  switch (kind) {
    case FaultKind::AB:
    case FaultKind::BC:
    case FaultKind::CA:
    case FaultKind::ABC:
      return false;
    default:
      return true;
  }
}

std::array<bool, 3> faulted_phases(FaultKind kind) {
  const std::string_view n = to_string(kind);
  return {n.find('A') != std::string_view::npos, n.find('B') != std::string_view::npos,
          n.find('C') != std::string_view::npos};
}

SequenceNetwork build_sequence_network(const Network& net, Sequence seq,
                                       std::optional<FaultLocation> fault) {
  Assembler as;
  auto split_for = [&](FaultSite site) -> std::optional<double> {
    if (fault && fault->site == site) return fault->x;
    return std::nullopt;
  };

  SequenceNetwork sn;
  const std::size_t first_protected = as.branches.size();
  int f = as.add_line(node::T1, node::M, node::T2, net.line.z_se[seq], net.line.z_sh[seq],
                      split_for(FaultSite::ProtectedLine));
  if (f >= 0) sn.fault_node = f;
  const std::size_t last_protected = as.branches.size() - 1;
  sn.t1_branch = static_cast<int>(first_protected);
  sn.t2_branch = static_cast<int>(last_protected);

  f = as.add_line(node::T1, node::A1, node::R1, net.adjacent[0].z_se[seq],
                  net.adjacent[0].z_sh[seq], split_for(FaultSite::Adjacent1));
  if (f >= 0) sn.fault_node = f;
  f = as.add_line(node::T2, node::A2, node::R2, net.adjacent[1].z_se[seq],
                  net.adjacent[1].z_sh[seq], split_for(FaultSite::Adjacent2));
  if (f >= 0) sn.fault_node = f;

  as.shunts.emplace_back(node::R1, 1.0 / net.sources[0].z_th[seq]);
  as.shunts.emplace_back(node::R2, 1.0 / net.sources[1].z_th[seq]);
  as.shunts.emplace_back(node::T1, net.terminal_shunt[0]);
  as.shunts.emplace_back(node::T2, net.terminal_shunt[1]);

  sn.y = Eigen::MatrixXcd::Zero(as.nodes, as.nodes);
  for (const Branch& b : as.branches) {
    const Complex y = 1.0 / b.z;
    sn.y(b.from, b.from) += y;
    sn.y(b.to, b.to) += y;
    sn.y(b.from, b.to) -= y;
    sn.y(b.to, b.from) -= y;
  }
  for (const auto& [n, y] : as.shunts) sn.y(n, n) += y;

  sn.j = Eigen::VectorXcd::Zero(as.nodes);
  if (seq == Sequence::Positive) {
    sn.j(node::R1) = net.sources[0].emf.complex() / net.sources[0].z_th.positive;
    sn.j(node::R2) = net.sources[1].emf.complex() / net.sources[1].z_th.positive;
  }
  sn.branches = std::move(as.branches);
  return sn;
}

NetworkSolution solve_healthy(const Network& net) {
  net.validate();
  std::array<SequenceNetwork, 3> nets;
  NetworkSolution out;
  for (std::size_t s = 0; s < 3; ++s) {
    nets[s] = build_sequence_network(net, static_cast<Sequence>(s), std::nullopt);
    out.node_voltages[s] = factorize(nets[s].y).solve(nets[s].j);
  }
  out.terminals = terminal_quantities(nets, out.node_voltages);
  return out;
}

NetworkSolution solve_faulted(const Network& net, FaultLocation where, FaultKind kind,
                              double r_f) {
  net.validate();
  if (!(where.x > 0.0 && where.x < 1.0)) {
    throw InvalidScenario("fault location must lie strictly inside the line");
  }
  if (!(r_f >= 0.0) || !std::isfinite(r_f)) {
    throw InvalidScenario("fault resistance must be finite and non-negative");
  }
  const auto inter = interconnection(kind);

  std::array<SequenceNetwork, 3> nets;
  std::array<Eigen::VectorXcd, 3> v_pre, z_col;
  std::array<Complex, 3> z_ff;
  for (std::size_t s = 0; s < 3; ++s) {
    nets[s] = build_sequence_network(net, static_cast<Sequence>(s), where);
    const auto lu = factorize(nets[s].y);
    v_pre[s] = lu.solve(nets[s].j);
    const Eigen::Index f = nets[s].fault_node;
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(nets[s].y.rows());
    e(f) = 1.0;
    z_col[s] = lu.solve(e);
    z_ff[s] = z_col[s](f);
  }
  const int f = nets[1].fault_node;

  // Relabel phases so the textbook "phase a" formulas apply.
  const std::size_t sp = special_phase(kind);
  std::array<std::size_t, 3> perm{};
  for (std::size_t k = 0; k < 3; ++k) perm[k] = (sp + k) % 3;
  const ThreePhaseSet v_phys = ThreePhaseSet::balanced(Phasor(v_pre[1](f)));
  ThreePhaseSet v_canon;
  for (std::size_t k = 0; k < 3; ++k) v_canon[k] = v_phys[perm[k]];
  const Complex vf = to_sequence(v_canon).positive.complex();

  const Complex z0 = z_ff[0] + r_f, z1 = z_ff[1] + r_f, z2 = z_ff[2] + r_f;
  SequenceSet i_canon;
  auto guard = [](Complex d) {
    if (!(std::abs(d) > 1e-300) || !finite(d)) throw SingularNetwork("degenerate fault interconnection");
    return d;
  };
  switch (inter) {
    case Interconnection::SingleLineGround: {
      const Complex i = vf / guard(z0 + z1 + z2);
      i_canon = {Phasor(i), Phasor(i), Phasor(i)};
      break;
    }
    case Interconnection::LineLine: {
      const Complex i = vf / guard(z1 + z2);
      i_canon = {Phasor(), Phasor(i), Phasor(-i)};
      break;
    }
    case Interconnection::LineLineGround: {
      const Complex par = z2 * z0 / guard(z2 + z0);
      const Complex i1 = vf / guard(z1 + par);
      i_canon = {Phasor(-i1 * z2 / (z0 + z2)), Phasor(i1), Phasor(-i1 * z0 / (z0 + z2))};
      break;
    }
    case Interconnection::ThreePhase: {
      i_canon = {Phasor(), Phasor(vf / guard(z1)), Phasor()};
      break;
    }
  }
  const ThreePhaseSet i_canon_abc = from_sequence(i_canon);
  ThreePhaseSet i_phys;
  for (std::size_t k = 0; k < 3; ++k) i_phys[perm[k]] = i_canon_abc[k];
  const SequenceSet i_seq = to_sequence(i_phys);

  NetworkSolution out;
  SequenceSet v_seq;
  for (std::size_t s = 0; s < 3; ++s) {
    out.node_voltages[s] = v_pre[s] - z_col[s] * i_seq[s].complex();
    v_seq[s] = Phasor(out.node_voltages[s](f));
  }
  out.terminals = terminal_quantities(nets, out.node_voltages);
  out.fault = FaultPointSolution{from_sequence(v_seq), i_phys, v_seq, i_seq};
  return out;
}

}  // namespace maskguard
