#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskguard/attack.hpp"
#include "maskguard/mismatch_index.hpp"
#include "maskguard/mlp.hpp"
#include "maskguard/relay.hpp"
#include "maskguard/scenario.hpp"

namespace maskguard {

enum class EventKind { RelayTrip, MITrigger, ZCCInternal, ZCCExternal, FMAAlarm, Reset };
std::string_view to_string(EventKind kind);

enum class AlarmAction { TripDirect, AlarmOnly };

struct DetectionEvent {
  double t = 0.0;
  std::size_t frame = 0;
  EventKind kind = EventKind::Reset;
  std::array<bool, 3> phases{};  // RelayTrip: tripped phases
  double probability = std::numeric_limits<double>::quiet_NaN();  // ZCC: P(internal)
};

struct MiTraceRow {
  double t = 0.0;
  bool active = false;  // false while the relay has tripped
  double p_norm = 0.0;
  double m = 0.0;
  double l_u = 0.0;
  bool o = false;
};

struct PipelineConfig {
  RelaySettings relay;
  MIConfig mi;
  LineModel line;
  std::shared_ptr<const MlpModel> model;  // null runs the MI stage only
  AlarmAction action = AlarmAction::TripDirect;
  double zcc_threshold = 0.5;  // P(internal) above which the ZCC confirms
  double sample_rate_hz = 1000.0;
  double system_frequency_hz = 60.0;
  std::size_t hold_off_samples = 0;  // 0 = one power cycle
  std::size_t snapshot_frames = 16;  // frames averaged into each ZCC snapshot
  std::size_t degenerate_burst_limit = 250;

  void validate() const;
  std::size_t cycle_samples() const;
};

// Relay defaults, MI reference taken from the network's healthy differential current.
PipelineConfig make_pipeline_config(const Network& net,
                                    std::shared_ptr<const MlpModel> model = nullptr);

struct PipelineResult {
  std::vector<DetectionEvent> events;
  std::vector<MiTraceRow> trace;
  std::size_t degenerate_frames = 0;
  std::size_t degenerate_features = 0;
  std::size_t zcc_invocations = 0;

  bool has(EventKind kind) const;
  const DetectionEvent* first(EventKind kind) const;
};

PipelineResult run_pipeline(const Stream& stream, const PipelineConfig& cfg);

// One fully specified evaluation scenario.
struct ScenarioCase {
  std::string id;
  std::string category;
  int label = 0;  // 1 = masked internal fault
  LineScenario scenario;
  AttackSpec attack;
  DistortionSpec distortion;
  std::uint64_t seed = 0;

  // Fault inception (or first event) time used for latency accounting.
  double reference_time() const;
};

// Scenario -> CT/noise distortion -> attack.
Stream realize(const ScenarioCase& c);

struct BatchRow {
  std::string id;
  std::string category;
  int label = 0;
  bool relay_trip = false;
  bool mi_trigger = false;
  bool zcc_internal = false;
  bool zcc_external = false;
  bool fma_alarm = false;
  std::optional<double> mi_latency_s;
  std::optional<double> alarm_latency_s;
  double zcc_probability = std::numeric_limits<double>::quiet_NaN();
  std::size_t event_count = 0;
  std::string error;
};

// Per-scenario errors are caught and reported in BatchRow::error.
std::vector<BatchRow> batch_run(const std::vector<ScenarioCase>& cases, const PipelineConfig& cfg,
                                std::size_t jobs = 1);

// Runs fn(i) for i in [0, n) on `jobs` threads; fn must only touch slot i.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn);

}  // namespace maskguard

#include "maskguard/detail/parallel.hpp"
