#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maskguard/calibration.hpp"
#include "maskguard/features.hpp"
#include "maskguard/mlp.hpp"
#include "maskguard/pipeline.hpp"

namespace maskguard {

std::vector<double> standard_resistances();
std::vector<double> default_locations();

enum class DisturbanceKind { ShuntSwitch, SourceLoss, SourceConnection, LoadScale };
std::string_view to_string(DisturbanceKind kind);
DisturbanceKind parse_disturbance_kind(std::string_view name);

struct SweepSpec {
  Network network = default_network();
  std::vector<FaultKind> kinds{kAllFaultKinds.begin(), kAllFaultKinds.end()};
  std::vector<double> locations = default_locations();
  std::vector<double> resistances = standard_resistances();
  std::size_t per_cell = 1;
  bool both_directions = false;  // also evaluate from the terminal-2 relay (mirrored network)

  // Negative class: faults on the adjacent lines, drawn from this grid.
  std::vector<FaultKind> external_kinds{kAllFaultKinds.begin(), kAllFaultKinds.end()};
  std::vector<double> external_locations = default_locations();
  std::vector<double> external_resistances = standard_resistances();
  std::size_t external_count = 0;  // 0 = the full grid (both sides), else a seeded sample
  std::size_t external_per_cell = 1;
  // Negative class: switching events, split evenly over `event_kinds`.
  std::vector<DisturbanceKind> event_kinds = {DisturbanceKind::ShuntSwitch,
                                              DisturbanceKind::SourceLoss,
                                              DisturbanceKind::SourceConnection};
  std::size_t event_count = 0;

  std::optional<std::pair<double, double>> snr_db = std::pair{35.0, 50.0};  // uniform range
  double duration_s = 0.6;
  double t_inception = 0.4;

  void validate() const;
  std::size_t positive_count() const;
};

// Terminal 1 and 2 swapped; used for the terminal-2 relay view.
Network mirror(const Network& net);

// Healthy-differential BasicFMA starting at inception.
AttackSpec healthy_masking_attack(const Network& net, double t_start);

ScenarioCase make_internal_fma_case(const Network& net, const FaultSpec& fault, double duration_s,
                                    std::optional<double> snr_db, std::uint64_t seed);
ScenarioCase make_external_case(const Network& net, const ExternalFault& ext, double duration_s,
                                std::optional<double> snr_db, std::uint64_t seed);
// Random event of `kind` at time t, parameters drawn from `seed`.
ScenarioCase make_disturbance_case(const Network& net, DisturbanceKind kind, double t,
                                   double duration_s, std::optional<double> snr_db,
                                   std::uint64_t seed);

std::vector<ScenarioCase> generate_sweep(const SweepSpec& spec, std::uint64_t seed);

struct SplitResult {
  std::vector<std::size_t> train;  // train + validation
  std::vector<std::size_t> test;
};

SplitResult split(const std::vector<int>& labels, double ratio, std::uint64_t seed);

// Seeded draw of up to `positives` label-1 and `negatives` label-0 cases from `pool`;
// positives first, each group in pool order.
std::vector<std::size_t> draw_suite(const std::vector<ScenarioCase>& cases,
                                    const std::vector<std::size_t>& pool, std::size_t positives,
                                    std::size_t negatives, std::uint64_t seed);

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
};

struct MetricReport {
  std::optional<double> accuracy, precision, recall, fn_rate, fp_rate;
  std::optional<double> auc;
};

MetricReport compute_metrics(const ConfusionCounts& c);

enum class Stage { MIOnly, Full };

// TP requires detection within `budget_s` of the reference time; any detection on a
// negative counts as FP. Rows with errors are skipped.
ConfusionCounts confusion(const std::vector<BatchRow>& rows, Stage stage, double budget_s);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by (fpr, tpr), corners included
  double auc = 0.0;
};

RocCurve roc_auc(std::vector<RocPoint> points, bool add_corners = true);

// Dataset assembly: one feature row per case, taken at the MI trigger frame or,
// when the MI stays quiet, `fallback_offset` frames after the reference time.
struct DatasetRow {
  std::string id;
  std::string category;
  int label = 0;
  bool triggered = false;
  std::size_t trigger_index = 0;
  std::size_t degenerate_entries = 0;
  FeatureVector features{};
  std::string error;
};

std::vector<DatasetRow> build_dataset(const std::vector<ScenarioCase>& cases,
                                      const PipelineConfig& mi_only_cfg, std::size_t jobs,
                                      std::size_t fallback_offset = 5);
Dataset to_dataset(const std::vector<DatasetRow>& rows, const std::vector<std::size_t>& pick);

inline constexpr double kAlarmBudgetCycles = 2.0;

}  // namespace maskguard
