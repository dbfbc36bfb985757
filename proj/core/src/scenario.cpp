#include "maskguard/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "maskguard/error.hpp"

namespace maskguard {

void FaultSpec::validate() const {
  if (!(x > 0.0 && x < 1.0)) throw InvalidScenario("fault x must lie in (0, 1)");
  if (!(r_f >= 0.0) || !std::isfinite(r_f)) throw InvalidScenario("fault r_f must be >= 0");
  if (!std::isfinite(t_inception) || t_inception < 0.0) {
    throw InvalidScenario("fault inception time must be >= 0");
  }
  if (t_clear && !(*t_clear > t_inception)) {
    throw InvalidScenario("fault clearing time must follow inception");
  }
}

ShuntSwitch ShuntSwitch::capacitor(Terminal at, double mvar, double v_ph_kv) {
  return {at, Complex(0.0, mvar / (3.0 * v_ph_kv * v_ph_kv))};
}

void LineScenario::validate() const {
  network.validate();
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw InvalidScenario("duration must be positive");
  }
  if (!(system_frequency_hz > 0.0)) throw InvalidScenario("system frequency must be positive");
  if (!(sample_rate_hz >= 2.0 * system_frequency_hz)) {
    throw InvalidScenario("sample rate must be at least twice the system frequency");
  }
  if (fault && external_fault) {
    throw InvalidScenario("simultaneous internal and external faults are not supported");
  }
  if (fault) fault->validate();
  if (external_fault) external_fault->fault.validate();
  for (const auto& ev : events) {
    if (!(ev.t >= 0.0 && ev.t <= duration_s)) {
      throw InvalidScenario("event time outside the scenario duration");
    }
    if (const auto* s = std::get_if<SourceStep>(&ev.action)) {
      if (!(s->magnitude_factor >= 0.0) || !std::isfinite(s->angle_shift_rad)) {
        throw InvalidScenario("source step needs a non-negative factor");
      }
    } else if (const auto* l = std::get_if<LoadScale>(&ev.action)) {
      if (!(l->factor >= 0.0) || !std::isfinite(l->factor)) {
        throw InvalidScenario("load factor must be non-negative");
      }
    }
  }
}

std::size_t LineScenario::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

std::size_t LineScenario::index_at(double t) const {
  const double k = std::ceil(t * sample_rate_hz - 1e-9);
  return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

std::size_t LineScenario::samples_per_cycle() const {
  return static_cast<std::size_t>(std::llround(sample_rate_hz / system_frequency_hz));
}

std::optional<double> LineScenario::first_disturbance() const {
  std::optional<double> t;
  auto take = [&t](double v) { t = t ? std::min(*t, v) : v; };
  if (fault) take(fault->t_inception);
  if (external_fault) take(external_fault->fault.t_inception);
  for (const auto& ev : events) take(ev.t);
  return t;
}

namespace {

struct ActiveFault {
  FaultLocation where;
  const FaultSpec* spec;
  bool internal;
};

void apply_event(Network& net, const Event& ev) {
  std::visit(
      [&net](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ShuntSwitch>) {
          net.terminal_shunt[static_cast<std::size_t>(a.at)] += a.admittance;
        } else if constexpr (std::is_same_v<T, SourceStep>) {
          auto& emf = net.sources[static_cast<std::size_t>(a.at)].emf;
          emf = emf * std::polar(a.magnitude_factor, a.angle_shift_rad);
        } else {
          for (auto& s : net.sources) s.emf = s.emf * a.factor;
        }
      },
      ev.action);
}

}  // namespace

Stream generate_stream(const LineScenario& sc) {
  sc.validate();
  const std::size_t n = sc.frame_count();

  std::vector<std::size_t> cuts = {0, n};
  auto add_cut = [&](double t) { cuts.push_back(std::min(sc.index_at(t), n)); };
  std::optional<ActiveFault> fault;
  if (sc.fault) {
    fault = ActiveFault{{FaultSite::ProtectedLine, sc.fault->x}, &*sc.fault, true};
  } else if (sc.external_fault) {
    const auto site = sc.external_fault->side == Terminal::One ? FaultSite::Adjacent1
                                                               : FaultSite::Adjacent2;
    fault = ActiveFault{{site, sc.external_fault->fault.x}, &sc.external_fault->fault, false};
  }
  if (fault) {
    add_cut(fault->spec->t_inception);
    if (fault->spec->t_clear) add_cut(*fault->spec->t_clear);
  }
  for (const auto& ev : sc.events) add_cut(ev.t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Stream out(n);
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const std::size_t k0 = cuts[seg], k1 = cuts[seg + 1];
    if (k0 >= n) break;
    Network net = sc.network;
    for (const auto& ev : sc.events) {
      if (sc.index_at(ev.t) <= k0) apply_event(net, ev);
    }
    bool active = false;
    if (fault) {
      active = sc.index_at(fault->spec->t_inception) <= k0 &&
               (!fault->spec->t_clear || k0 < sc.index_at(*fault->spec->t_clear));
    }
    const NetworkSolution sol =
        active ? solve_faulted(net, fault->where, fault->spec->kind, fault->spec->r_f)
               : solve_healthy(net);
    const FrameFlags flags{active, active && fault->internal, false};
    for (std::size_t k = k0; k < k1; ++k) {
      auto& fr = out[k];
      fr.t = static_cast<double>(k) / sc.sample_rate_hz;
      fr.v1 = sol.terminals.v1;
      fr.i1 = sol.terminals.i1;
      fr.i2_true = sol.terminals.i2;
      fr.i2 = sol.terminals.i2;
      fr.flags = flags;
    }
  }
  return out;
}

}  // namespace maskguard
