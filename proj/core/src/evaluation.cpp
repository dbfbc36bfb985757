#include "maskguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "maskguard/error.hpp"
#include "maskguard/seeding.hpp"

namespace maskguard {

namespace {

constexpr std::array<std::string_view, 4> kDisturbanceNames = {
    "shunt_switch", "source_loss", "source_connection", "load_scale"};

std::string fmt_num(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::optional<double> draw_snr(const std::optional<std::pair<double, double>>& range,
                               std::uint64_t seed) {
  if (!range) return std::nullopt;
  std::mt19937_64 rng(splitmix64(seed));
  return std::uniform_real_distribution<double>(range->first, range->second)(rng);
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<double> standard_resistances() {
  return {0.001, 1,  2,  3,  4,  5,  6,  7,  8,   9,   10,  15,  20,  25,
          30,    35, 40, 50, 60, 70, 80, 90, 100, 150, 200, 250, 300};
}

std::vector<double> default_locations() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::string_view to_string(DisturbanceKind kind) {
  return kDisturbanceNames.at(static_cast<std::size_t>(kind));
}

DisturbanceKind parse_disturbance_kind(std::string_view name) {
  for (std::size_t k = 0; k < kDisturbanceNames.size(); ++k) {
    if (kDisturbanceNames[k] == name) return static_cast<DisturbanceKind>(k);
  }
  throw InvalidConfig("unknown disturbance kind '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  network.validate();
  if (kinds.empty() || locations.empty() || resistances.empty() || per_cell == 0 ||
      external_per_cell == 0) {
    throw InvalidConfig("sweep axes must be non-empty");
  }
  for (double x : locations) {
    if (!(x > 0.0 && x < 1.0)) throw InvalidConfig("sweep locations must lie in (0, 1)");
  }
  for (double x : external_locations) {
    if (!(x > 0.0 && x < 1.0)) throw InvalidConfig("external locations must lie in (0, 1)");
  }
  for (double r : resistances) {
    if (!(r >= 0.0)) throw InvalidConfig("sweep resistances must be >= 0");
  }
  for (double r : external_resistances) {
    if (!(r >= 0.0)) throw InvalidConfig("external resistances must be >= 0");
  }
  if (event_count > 0 && event_kinds.empty()) throw InvalidConfig("event_kinds is empty");
  if (snr_db && !(snr_db->first <= snr_db->second)) throw InvalidConfig("bad SNR range");
  if (!(t_inception > 0.0 && t_inception < duration_s)) {
    throw InvalidConfig("inception must lie inside the scenario duration");
  }
}

std::size_t SweepSpec::positive_count() const {
  return kinds.size() * locations.size() * resistances.size() * per_cell *
         (both_directions ? 2 : 1);
}

Network mirror(const Network& net) {
  Network m = net;
  std::swap(m.sources[0], m.sources[1]);
  std::swap(m.adjacent[0], m.adjacent[1]);
  std::swap(m.terminal_shunt[0], m.terminal_shunt[1]);
  return m;
}

AttackSpec healthy_masking_attack(const Network& net, double t_start) {
  const auto h = solve_healthy(net);
  AttackSpec a;
  a.mode = BasicFma{h.terminals.i1 + h.terminals.i2};
  a.t_start = t_start;
  return a;
}

ScenarioCase make_internal_fma_case(const Network& net, const FaultSpec& fault, double duration_s,
                                    std::optional<double> snr_db, std::uint64_t seed) {
  ScenarioCase c;
  c.category = "internal_fma";
  c.label = 1;
  c.scenario.network = net;
  c.scenario.fault = fault;
  c.scenario.duration_s = duration_s;
  c.attack = healthy_masking_attack(net, fault.t_inception);
  c.distortion.snr_db = snr_db;
  c.seed = seed;
  c.id = "fma_" + std::string(to_string(fault.kind)) + "_x" + fmt_num(fault.x, 2) + "_r" +
         fmt_num(fault.r_f, 3);
  return c;
}

ScenarioCase make_external_case(const Network& net, const ExternalFault& ext, double duration_s,
                                std::optional<double> snr_db, std::uint64_t seed) {
  ScenarioCase c;
  c.category = "external_fault";
  c.label = 0;
  c.scenario.network = net;
  c.scenario.external_fault = ext;
  c.scenario.duration_s = duration_s;
  c.distortion.snr_db = snr_db;
  c.seed = seed;
  c.id = "ext" + std::to_string(ext.side == Terminal::One ? 1 : 2) + "_" +
         std::string(to_string(ext.fault.kind)) + "_x" + fmt_num(ext.fault.x, 2) + "_r" +
         fmt_num(ext.fault.r_f, 3);
  return c;
}

ScenarioCase make_disturbance_case(const Network& net, DisturbanceKind kind, double t,
                                   double duration_s, std::optional<double> snr_db,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  ScenarioCase c;
  c.category = std::string(to_string(kind));
  c.label = 0;
  c.scenario.network = net;
  c.scenario.duration_s = duration_s;
  c.distortion.snr_db = snr_db;
  c.seed = seed;
  Event ev;
  ev.t = t;
  switch (kind) {
    case DisturbanceKind::ShuntSwitch: {
      const double v_ph = solve_healthy(net).terminals.v2.a.magnitude();
      const double mvar = uniform(20.0, 150.0);
      ev.action = ShuntSwitch::capacitor(Terminal::Two, mvar, v_ph);
      c.id = "shunt_" + fmt_num(mvar, 1) + "mvar";
      break;
    }
    case DisturbanceKind::SourceLoss: {
      const double k = uniform(0.90, 0.97);
      const double shift = deg_to_rad(uniform(-2.0, 0.0));
      ev.action = SourceStep{Terminal::Two, k, shift};
      c.id = "srcloss_" + fmt_num(k, 3);
      break;
    }
    case DisturbanceKind::SourceConnection: {
      const double k = uniform(1.03, 1.10);
      const double shift = deg_to_rad(uniform(0.0, 2.0));
      ev.action = SourceStep{Terminal::Two, k, shift};
      c.id = "srcconn_" + fmt_num(k, 3);
      break;
    }
    case DisturbanceKind::LoadScale: {
      const double k = uniform(0.95, 1.05);
      ev.action = LoadScale{k};
      c.id = "load_" + fmt_num(k, 3);
      break;
    }
  }
  c.scenario.events.push_back(ev);
  return c;
}

std::vector<ScenarioCase> generate_sweep(const SweepSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<ScenarioCase> out;
  std::uint64_t index = 0;
  auto next_seed = [&] { return derive_seed(seed, SeedStream::Sweep, index++); };

  const std::size_t directions = spec.both_directions ? 2 : 1;
  for (std::size_t dir = 0; dir < directions; ++dir) {
    const Network net = dir == 0 ? spec.network : mirror(spec.network);
    const std::string prefix = dir == 0 ? "" : "r2_";
    for (FaultKind kind : spec.kinds) {
      for (double x : spec.locations) {
        for (double r : spec.resistances) {
          for (std::size_t rep = 0; rep < spec.per_cell; ++rep) {
            const std::uint64_t s = next_seed();
            FaultSpec f{kind, x, r, spec.t_inception, std::nullopt};
            auto c = make_internal_fma_case(net, f, spec.duration_s, draw_snr(spec.snr_db, s), s);
            c.id = prefix + c.id + "_" + std::to_string(rep);
            out.push_back(std::move(c));
          }
        }
      }
    }

    std::vector<ExternalFault> grid;
    for (Terminal side : {Terminal::One, Terminal::Two}) {
      for (FaultKind kind : spec.external_kinds) {
        for (double y : spec.external_locations) {
          for (double r : spec.external_resistances) {
            grid.push_back({side, FaultSpec{kind, y, r, spec.t_inception, std::nullopt}});
          }
        }
      }
    }
    std::vector<std::size_t> pick(grid.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    if (spec.external_count > 0 && spec.external_count < grid.size()) {
      std::mt19937_64 rng(derive_seed(seed, SeedStream::Sweep, 0xE7E7ULL + dir));
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(spec.external_count);
      std::sort(pick.begin(), pick.end());
    }
    for (std::size_t g : pick) {
      for (std::size_t rep = 0; rep < spec.external_per_cell; ++rep) {
        const std::uint64_t s = next_seed();
        auto c = make_external_case(net, grid[g], spec.duration_s, draw_snr(spec.snr_db, s), s);
        c.id = prefix + c.id + "_" + std::to_string(rep);
        out.push_back(std::move(c));
      }
    }

    for (std::size_t e = 0; e < spec.event_count; ++e) {
      const std::uint64_t s = next_seed();
      const DisturbanceKind kind = spec.event_kinds[e % spec.event_kinds.size()];
      auto c = make_disturbance_case(net, kind, spec.t_inception, spec.duration_s,
                                     draw_snr(spec.snr_db, s), s);
      c.id = prefix + c.id + "_" + std::to_string(e);
      out.push_back(std::move(c));
    }
  }
  return out;
}

SplitResult split(const std::vector<int>& labels, double ratio_train, std::uint64_t seed) {
  if (!(ratio_train > 0.0 && ratio_train < 1.0)) throw InvalidConfig("split ratio must lie in (0, 1)");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw InsufficientData("split needs both classes");
  }
  // Largest-remainder allocation keeps the total at round(ratio * n).
  const auto total_train =
      static_cast<std::size_t>(std::llround(ratio_train * static_cast<double>(labels.size())));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double ideal = ratio_train * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    frac[c] = ideal - std::floor(ideal);
    assigned += take[c];
  }
  while (assigned < total_train) {
    const std::size_t c = frac[1] > frac[0] ? 1 : 0;
    ++take[c];
    frac[c] = -1.0;
    ++assigned;
  }
  std::mt19937_64 rng(derive_seed(seed, SeedStream::Split, 0));
  SplitResult r;
  for (std::size_t c = 0; c < 2; ++c) {
    auto idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    r.train.insert(r.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
    r.test.insert(r.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]), idx.end());
  }
  std::sort(r.train.begin(), r.train.end());
  std::sort(r.test.begin(), r.test.end());
  return r;
}

std::vector<std::size_t> draw_suite(const std::vector<ScenarioCase>& cases,
                                    const std::vector<std::size_t>& pool, std::size_t positives,
                                    std::size_t negatives, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_label;
  for (auto i : pool) by_label[cases.at(i).label == 1 ? 1 : 0].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (int label : {1, 0}) {
    auto& group = by_label[static_cast<std::size_t>(label)];
    const std::size_t want = label == 1 ? positives : negatives;
    std::shuffle(group.begin(), group.end(), rng);
    group.resize(std::min(want, group.size()));
    std::sort(group.begin(), group.end());
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

MetricReport compute_metrics(const ConfusionCounts& c) {
  MetricReport m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.fn_rate = ratio(c.fn, c.tp + c.fn);
  m.fp_rate = ratio(c.fp, c.fp + c.tn);
  return m;
}

ConfusionCounts confusion(const std::vector<BatchRow>& rows, Stage stage, double budget_s) {
  ConfusionCounts c;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const bool fired = stage == Stage::MIOnly ? r.mi_trigger : r.fma_alarm;
    const auto& lat = stage == Stage::MIOnly ? r.mi_latency_s : r.alarm_latency_s;
    if (r.label == 1) {
      const bool in_time = fired && lat && *lat >= -1e-9 && *lat <= budget_s + 1e-9;
      (in_time ? c.tp : c.fn)++;
    } else {
      (fired ? c.fp : c.tn)++;
    }
  }
  return c;
}

RocCurve roc_auc(std::vector<RocPoint> points, bool add_corners) {
  for (const auto& p : points) {
    if (!(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0)) {
      throw DegenerateCurve("ROC points must lie in the unit square");
    }
  }
  if (points.size() >= 2 &&
      std::all_of(points.begin(), points.end(), [&](const RocPoint& p) {
        return p.fpr == points[0].fpr && p.tpr == points[0].tpr;
      })) {
    throw DegenerateCurve("all ROC operating points are identical");
  }
  if (add_corners) {
    points.push_back({0.0, 0.0});
    points.push_back({1.0, 1.0});
  }
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const RocPoint& a, const RocPoint& b) {
                             return a.fpr == b.fpr && a.tpr == b.tpr;
                           }),
               points.end());
  if (points.size() < 2) throw DegenerateCurve("ROC curve needs at least two distinct points");
  RocCurve curve;
  for (std::size_t i = 1; i < points.size(); ++i) {
    curve.auc += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  curve.points = std::move(points);
  return curve;
}

std::vector<DatasetRow> build_dataset(const std::vector<ScenarioCase>& cases,
                                      const PipelineConfig& mi_only_cfg, std::size_t jobs,
                                      std::size_t fallback_offset) {
  PipelineConfig cfg = mi_only_cfg;
  cfg.model.reset();
  cfg.validate();
  const std::size_t cycle = cfg.cycle_samples();
  const std::size_t window = cfg.snapshot_frames;
  std::vector<DatasetRow> rows(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    const auto& c = cases[i];
    auto& row = rows[i];
    row.id = c.id;
    row.category = c.category;
    row.label = c.label;
    try {
      const Stream s = realize(c);
      const PipelineResult r = run_pipeline(s, cfg);
      std::size_t idx = 0;
      if (const auto* e = r.first(EventKind::MITrigger)) {
        row.triggered = true;
        idx = e->frame;
      } else {
        idx = c.scenario.index_at(c.reference_time()) + fallback_offset;
      }
      idx = std::clamp(idx, cycle + window - 1, s.size() - window);
      row.trigger_index = idx;
      const FeatureResult f = extract_features(s, idx, cycle, window);
      row.features = f.values;
      row.degenerate_entries = f.degenerate_entries;
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });
  return rows;
}

Dataset to_dataset(const std::vector<DatasetRow>& rows, const std::vector<std::size_t>& pick) {
  std::vector<std::size_t> ok;
  for (auto i : pick) {
    if (rows.at(i).error.empty()) ok.push_back(i);
  }
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t r = 0; r < ok.size(); ++r) {
    const auto& row = rows[ok[r]];
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row.features[j];
    }
    d.y.push_back(row.label);
  }
  return d;
}

}  // namespace maskguard
