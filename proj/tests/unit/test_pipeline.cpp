#include <gtest/gtest.h>

#include "maskguard/calibration.hpp"
#include "maskguard/error.hpp"
#include "maskguard/evaluation.hpp"
#include "maskguard/pipeline.hpp"

using namespace maskguard;

namespace {

// Constant classifier: P(internal) fixed by the output bias.
std::shared_ptr<const MlpModel> constant_model(double p_internal) {
  auto m = std::make_shared<MlpModel>(std::vector<std::size_t>{kFeatureCount, 2}, 0.0, 1,
                                      std::array<double, 2>{1.0 - p_internal, p_internal});
  m->weights()[0].setZero();
  return m;
}

ScenarioCase fma_case(FaultKind kind, double x, double r_f, double duration = 0.6,
                      std::optional<double> t_clear = std::nullopt) {
  const Network net = default_network();
  FaultSpec f{kind, x, r_f, 0.4, t_clear};
  return make_internal_fma_case(net, f, duration, std::nullopt, 1);
}

std::vector<EventKind> kinds(const PipelineResult& r) {
  std::vector<EventKind> out;
  for (const auto& e : r.events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Pipeline, HealthyStreamHasNoEvents) {
  const Network net = default_network();
  LineScenario sc;
  sc.network = net;
  sc.duration_s = 10.0;
  const PipelineResult r = run_pipeline(generate_stream(sc), make_pipeline_config(net, constant_model(0.9)));
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.trace.size(), 10000u);
  EXPECT_EQ(r.zcc_invocations, 0u);
}

TEST(Pipeline, UnmaskedFaultTripsRelayOnly) {
  const Network net = default_network();
  ScenarioCase c = fma_case(FaultKind::AG, 0.5, 0.001);
  c.attack = {};
  const PipelineResult r = run_pipeline(realize(c), make_pipeline_config(net, constant_model(0.9)));
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events.front().kind, EventKind::RelayTrip);
  EXPECT_NEAR(r.events.front().t, 0.4, 1e-9);
  EXPECT_TRUE(r.events.front().phases[0]);
  EXPECT_FALSE(r.has(EventKind::FMAAlarm));
  EXPECT_FALSE(r.has(EventKind::MITrigger));
  for (std::size_t k = 400; k < r.trace.size(); ++k) EXPECT_FALSE(r.trace[k].active);
}

TEST(Pipeline, MaskedBoltedFaultRaisesTimelyAlarm) {
  const Network net = default_network();
  const PipelineResult r =
      run_pipeline(realize(fma_case(FaultKind::AG, 0.1, 0.001)), make_pipeline_config(net, constant_model(0.9)));
  const std::vector<EventKind> want = {EventKind::MITrigger, EventKind::ZCCInternal, EventKind::FMAAlarm};
  EXPECT_EQ(kinds(r), want);
  EXPECT_FALSE(r.has(EventKind::RelayTrip));
  const DetectionEvent* alarm = r.first(EventKind::FMAAlarm);
  ASSERT_NE(alarm, nullptr);
  EXPECT_LE(alarm->t - 0.4, 0.025 + 1e-9);
  EXPECT_NEAR(alarm->probability, 0.9, 1e-9);
  EXPECT_EQ(r.zcc_invocations, 1u);
}

TEST(Pipeline, TripDirectStopsAfterAlarmAlarmOnlyContinues) {
  const Network net = default_network();
  const Stream s = realize(fma_case(FaultKind::AG, 0.1, 0.001));
  PipelineConfig cfg = make_pipeline_config(net, constant_model(0.9));
  const PipelineResult direct = run_pipeline(s, cfg);
  EXPECT_FALSE(direct.trace.back().active);
  cfg.action = AlarmAction::AlarmOnly;
  const PipelineResult only = run_pipeline(s, cfg);
  EXPECT_TRUE(only.trace.back().active);
  EXPECT_TRUE(only.trace.back().o);
  EXPECT_EQ(only.zcc_invocations, 1u);
}

TEST(Pipeline, ExternalVerdictRearmsWithoutAlarm) {
  const Network net = default_network();
  PipelineConfig cfg = make_pipeline_config(net, constant_model(0.1));
  const PipelineResult r = run_pipeline(realize(fma_case(FaultKind::AG, 0.1, 0.001)), cfg);
  EXPECT_FALSE(r.has(EventKind::FMAAlarm));
  ASSERT_TRUE(r.has(EventKind::ZCCExternal));
  // One ZCC call per MI latch.
  std::size_t triggers = 0;
  for (const auto& e : r.events) triggers += e.kind == EventKind::MITrigger;
  EXPECT_EQ(r.zcc_invocations, triggers);
  // The latch is released one cycle after the external verdict.
  const DetectionEvent* ext = r.first(EventKind::ZCCExternal);
  const std::size_t rebase = ext->frame + cfg.cycle_samples();
  EXPECT_TRUE(r.trace[rebase - 1].o);
  EXPECT_FALSE(r.trace[rebase + 1].o);
}

TEST(Pipeline, ThresholdIsConfigurable) {
  const Network net = default_network();
  PipelineConfig cfg = make_pipeline_config(net, constant_model(0.7));
  const Stream s = realize(fma_case(FaultKind::AG, 0.1, 0.001));
  EXPECT_TRUE(run_pipeline(s, cfg).has(EventKind::FMAAlarm));
  cfg.zcc_threshold = 0.8;
  EXPECT_FALSE(run_pipeline(s, cfg).has(EventKind::FMAAlarm));
}

TEST(Pipeline, MiOnlyWithoutModel) {
  const Network net = default_network();
  const PipelineResult r = run_pipeline(realize(fma_case(FaultKind::AG, 0.1, 0.001)), make_pipeline_config(net));
  EXPECT_TRUE(r.has(EventKind::MITrigger));
  EXPECT_FALSE(r.has(EventKind::ZCCInternal));
  EXPECT_FALSE(r.has(EventKind::ZCCExternal));
  EXPECT_EQ(r.zcc_invocations, 0u);
}

TEST(Pipeline, FaultClearingEmitsReset) {
  const Network net = default_network();
  ScenarioCase c = fma_case(FaultKind::AG, 0.5, 0.001, 0.8, 0.5);
  c.attack = {};
  const PipelineResult r = run_pipeline(realize(c), make_pipeline_config(net, constant_model(0.9)));
  const std::vector<EventKind> want = {EventKind::RelayTrip, EventKind::Reset};
  EXPECT_EQ(kinds(r), want);
  EXPECT_NEAR(r.events[1].t, 0.5, 1e-9);
  EXPECT_TRUE(r.trace.back().active);
}

TEST(Pipeline, DegenerateBurstAborts) {
  const Network net = default_network();
  Stream s(400);
  for (std::size_t k = 0; k < s.size(); ++k) s[k].t = static_cast<double>(k) / 1000.0;
  PipelineConfig cfg = make_pipeline_config(net);
  EXPECT_THROW(run_pipeline(s, cfg), DegenerateMeasurementBurst);
  cfg.degenerate_burst_limit = 1000;
  EXPECT_NO_THROW(run_pipeline(s, cfg));
}

TEST(Pipeline, ConfigValidation) {
  const Network net = default_network();
  PipelineConfig cfg = make_pipeline_config(net);
  cfg.snapshot_frames = 0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.snapshot_frames = 18;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.snapshot_frames = 17;
  EXPECT_NO_THROW(cfg.validate());
  cfg.zcc_threshold = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = make_pipeline_config(net, std::make_shared<MlpModel>(std::vector<std::size_t>{5, 2}, 0.0, 1));
  EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(BatchRun, DeterministicAndIsolatesErrors) {
  const Network net = default_network();
  std::vector<ScenarioCase> cases = {fma_case(FaultKind::AG, 0.1, 0.001), fma_case(FaultKind::BC, 0.5, 10.0)};
  cases[1].distortion.snr_db = 35.0;
  cases.push_back(cases[1]);
  ScenarioCase broken = cases[0];
  broken.id = "broken";
  broken.scenario.duration_s = -1.0;
  cases.push_back(broken);
  const PipelineConfig cfg = make_pipeline_config(net, constant_model(0.9));
  const auto a = batch_run(cases, cfg, 1);
  const auto b = batch_run(cases, cfg, 3);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].fma_alarm, b[i].fma_alarm);
    EXPECT_EQ(a[i].alarm_latency_s, b[i].alarm_latency_s);
    EXPECT_EQ(a[i].event_count, b[i].event_count);
    EXPECT_EQ(a[i].error, b[i].error);
  }
  EXPECT_EQ(a[1].alarm_latency_s, a[2].alarm_latency_s);
  EXPECT_TRUE(a[0].fma_alarm);
  EXPECT_TRUE(a[0].error.empty());
  EXPECT_FALSE(a[3].error.empty());
  EXPECT_THROW(batch_run({}, cfg), InvalidConfig);
}

TEST(BatchRun, RelayTripAndAlarmAreExclusive) {
  const Network net = default_network();
  std::vector<ScenarioCase> cases;
  for (FaultKind k : {FaultKind::AG, FaultKind::BC, FaultKind::ABCG}) {
    cases.push_back(fma_case(k, 0.3, 0.001));
    ScenarioCase open = cases.back();
    open.attack = {};
    cases.push_back(open);
  }
  for (const BatchRow& r : batch_run(cases, make_pipeline_config(net, constant_model(0.9)))) {
    EXPECT_FALSE(r.relay_trip && r.fma_alarm) << r.id;
    EXPECT_TRUE(r.relay_trip || r.fma_alarm) << r.id;
  }
}
