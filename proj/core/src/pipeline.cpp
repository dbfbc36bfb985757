#include "maskguard/pipeline.hpp"

#include <cmath>

#include "maskguard/calibration.hpp"
#include "maskguard/error.hpp"
#include "maskguard/features.hpp"

namespace maskguard {

namespace {

constexpr std::array<std::string_view, 6> kEventNames = {
    "RelayTrip", "MITrigger", "ZCCInternal", "ZCCExternal", "FMAAlarm", "Reset"};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view to_string(EventKind kind) {
  return kEventNames.at(static_cast<std::size_t>(kind));
}

void PipelineConfig::validate() const {
  relay.validate();
  mi.validate();
  line.validate();
  if (!(zcc_threshold > 0.0 && zcc_threshold < 1.0)) {
    throw InvalidConfig("zcc_threshold must lie in (0, 1)");
  }
  if (!(system_frequency_hz > 0.0) || !(sample_rate_hz >= 2.0 * system_frequency_hz)) {
    throw InvalidConfig("sample rate must be at least twice the system frequency");
  }
  if (snapshot_frames == 0 || snapshot_frames > cycle_samples()) {
    throw InvalidConfig("snapshot_frames must lie in [1, samples per cycle]");
  }
  if (model && model->layers().front() != kFeatureCount) {
    throw InvalidConfig("model input width does not match the feature vector");
  }
}

std::size_t PipelineConfig::cycle_samples() const {
  return static_cast<std::size_t>(std::llround(sample_rate_hz / system_frequency_hz));
}

PipelineConfig make_pipeline_config(const Network& net, std::shared_ptr<const MlpModel> model) {
  PipelineConfig cfg;
  cfg.line = net.line;
  cfg.mi.i_d_n = healthy_differential(net);
  cfg.model = std::move(model);
  return cfg;
}

bool PipelineResult::has(EventKind kind) const { return first(kind) != nullptr; }

const DetectionEvent* PipelineResult::first(EventKind kind) const {
  for (const auto& e : events) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

PipelineResult run_pipeline(const Stream& stream, const PipelineConfig& cfg) {
  cfg.validate();
  const std::size_t cycle = cfg.cycle_samples();
  const std::size_t hold_off = cfg.hold_off_samples == 0 ? cycle : cfg.hold_off_samples;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  PipelineResult res;
  res.trace.reserve(stream.size());
  MismatchIndex mi(cfg.mi);
  PGuard guard;
  bool relay_tripped = false;
  bool alarmed = false;
  std::size_t rebase_at = kNone;
  const std::size_t window = cfg.snapshot_frames;
  std::size_t anchor = kNone;  // first pre-snapshot frame of the current disturbance
  std::size_t zcc_from = kNone;
  std::size_t zcc_at = kNone;
  std::size_t burst = 0;

  auto emit = [&res](const MeasurementFrame& fr, std::size_t k, EventKind kind) -> DetectionEvent& {
    res.events.push_back({fr.t, k, kind, {}, kNaN});
    return res.events.back();
  };

  for (std::size_t k = 0; k < stream.size(); ++k) {
    const MeasurementFrame& fr = stream[k];
    if (k > 0 && stream[k - 1].flags.fault_active && !fr.flags.fault_active) {
      emit(fr, k, EventKind::Reset);
      relay_tripped = false;
      alarmed = false;
      rebase_at = kNone;
      anchor = kNone;
      zcc_at = kNone;
      mi.reset();
    }
    if (relay_tripped || (alarmed && cfg.action == AlarmAction::TripDirect)) {
      res.trace.push_back({fr.t, false, kNaN, kNaN, kNaN, mi.latched()});
      continue;
    }
    const RelayVerdict verdict = trip_decision(fr.i1, fr.i2, cfg.relay);
    if (verdict.any_trip) {
      auto& ev = emit(fr, k, EventKind::RelayTrip);
      for (std::size_t p = 0; p < 3; ++p) ev.phases[p] = verdict.phase[p].trip;
      relay_tripped = true;
      zcc_at = kNone;
      res.trace.push_back({fr.t, false, kNaN, kNaN, kNaN, mi.latched()});
      continue;
    }

    const PResult pr = compute_p(to_sequence(fr.v1).positive, to_sequence(fr.i1).positive,
                                 to_sequence(fr.i2).positive, cfg.line, cfg.mi, guard);
    if (pr.degenerate) {
      ++res.degenerate_frames;
      if (++burst > cfg.degenerate_burst_limit) {
        throw DegenerateMeasurementBurst(
            "more than " + std::to_string(cfg.degenerate_burst_limit) +
            " consecutive degenerate frames ending at t=" + std::to_string(fr.t) + " s (" +
            std::to_string(guard.substitutions) + " substitutions so far)");
      }
    } else {
      burst = 0;
    }
    const double norm = p_norm(pr.p);
    const MIOutput out = mi.update(norm);
    res.trace.push_back({fr.t, true, norm, out.m, out.l_u, out.o});

    if (out.fired) {
      emit(fr, k, EventKind::MITrigger);
      if (cfg.model && k + 1 >= cycle + window) {
        // Re-triggers during one disturbance compare against the state before it.
        if (anchor == kNone) anchor = k + 1 - cycle - window;
        zcc_from = k;
        zcc_at = k + window - 1;
      }
    }
    if (k == zcc_at) {
      zcc_at = kNone;
      const FeatureResult feats = extract_features(average_snapshot(stream, anchor, window),
                                                   average_snapshot(stream, zcc_from, window));
      res.degenerate_features += feats.degenerate_entries;
      ++res.zcc_invocations;
      const Prediction pred = cfg.model->predict(feats.values);
      const bool internal = pred.probability[1] > cfg.zcc_threshold;
      emit(fr, k, internal ? EventKind::ZCCInternal : EventKind::ZCCExternal).probability =
          pred.probability[1];
      if (internal) {
        emit(fr, k, EventKind::FMAAlarm).probability = pred.probability[1];
        alarmed = true;
      } else {
        rebase_at = k + hold_off;
      }
    }
    if (k == rebase_at) {
      mi.rebase(hold_off);
      rebase_at = kNone;
    }
  }
  return res;
}

double ScenarioCase::reference_time() const {
  if (const auto t = scenario.first_disturbance()) return *t;
  return 0.0;
}

Stream realize(const ScenarioCase& c) {
  Stream s = generate_stream(c.scenario);
  s = apply_distortion(std::move(s), c.distortion, c.seed);
  return apply_attack(std::move(s), c.attack, c.scenario.network.line);
}

std::vector<BatchRow> batch_run(const std::vector<ScenarioCase>& cases, const PipelineConfig& cfg,
                                std::size_t jobs) {
  if (cases.empty()) throw InvalidConfig("batch_run needs at least one scenario");
  cfg.validate();
  std::vector<BatchRow> rows(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    const ScenarioCase& c = cases[i];
    BatchRow& row = rows[i];
    row.id = c.id;
    row.category = c.category;
    row.label = c.label;
    try {
      const Stream s = realize(c);
      const PipelineResult r = run_pipeline(s, cfg);
      const double t0 = c.reference_time();
      row.event_count = r.events.size();
      row.relay_trip = r.has(EventKind::RelayTrip);
      row.zcc_internal = r.has(EventKind::ZCCInternal);
      row.zcc_external = r.has(EventKind::ZCCExternal);
      if (const auto* e = r.first(EventKind::MITrigger)) {
        row.mi_trigger = true;
        row.mi_latency_s = e->t - t0;
      }
      if (const auto* e = r.first(EventKind::FMAAlarm)) {
        row.fma_alarm = true;
        row.alarm_latency_s = e->t - t0;
      }
      for (const auto& e : r.events) {
        if (e.kind == EventKind::ZCCInternal || e.kind == EventKind::ZCCExternal) {
          row.zcc_probability = e.probability;
          break;
        }
      }
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });
  return rows;
}

}  // namespace maskguard
